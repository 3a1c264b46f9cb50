"""The forge CLI: subcommands, exit codes, run reports."""

import json
import socket
from pathlib import Path

import numpy as np
import pytest

from styleforge.cli import main
from styleforge.dataset import write_manifest
from styleforge.mmd import EmbeddingSet, Modality, write_embeddings
from styleforge.promptkit.styles import Style

import table_fixtures

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = str(FIXTURES / "corpus" / "corpus.jsonl")


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Every test here must finish without opening a single socket."""

    def refuse(*args, **kwargs):
        raise AssertionError("network call attempted during an offline test")

    monkeypatch.setattr(socket.socket, "connect", refuse)


def run_pipeline(task: str, tmp_path: Path) -> Path:
    work = tmp_path / f"work-{task}"
    session = str(FIXTURES / "sessions" / f"{task}.json")
    assert main(["stylize", "--task", task, "--style", "cartoon", "--input", CORPUS,
                 "--out", str(work), "--replay", session, "--quiet"]) == 0
    assert main(["annotate", "--task", task, "--style", "cartoon", "--input", CORPUS,
                 "--stylized", str(work), "--out", str(work), "--replay", session,
                 "--quiet"]) == 0
    out = tmp_path / "dataset"
    assert main(["assemble", "--task", task, "--style", "cartoon", "--input", CORPUS,
                 "--work", str(work), "--out", str(out)]) == 0
    return out


class TestPipelineCommands:
    def test_full_replay_pipeline_offline(self, tmp_path, capsys):
        out = run_pipeline("cap", tmp_path)
        assert (out / "cap" / "manifest.json").is_file()
        assert main(["validate", str(out / "cap")]) == 0

    def test_run_report_written(self, tmp_path):
        work = tmp_path / "w"
        session = str(FIXTURES / "sessions" / "vqa.json")
        main(["stylize", "--task", "vqa", "--style", "cartoon", "--input", CORPUS,
              "--out", str(work), "--replay", session, "--quiet"])
        report = json.loads((work / "run.json").read_text())
        assert report["command"] == "stylize"
        assert report["counts"]["emitted"] == 3
        assert report["config"]["patience"] == 10
        assert "api_key" not in report["config"]

    def test_patience_flag_overrides_config(self, tmp_path):
        work = tmp_path / "w"
        session = str(FIXTURES / "sessions" / "cap.json")
        # patience 3 stops cap03 after three failures instead of ten
        assert main(["stylize", "--task", "cap", "--style", "cartoon", "--input",
                     CORPUS, "--out", str(work), "--replay", session, "--quiet",
                     "--patience", "3"]) == 0
        omitted = [json.loads(line) for line in
                   (work / "omitted.jsonl").read_text().splitlines()]
        cap03 = next(r for r in omitted if r["id"] == "cap03")
        assert cap03["attempts"] == 3


class TestStatsCommand:
    def test_published_caption_totals(self, tmp_path, capsys):
        root = tmp_path / "capdata"
        write_manifest(table_fixtures.caption_manifest(), root)
        assert main(["stats", "--data", str(root)]) == 0
        text = capsys.readouterr().out
        real_total = next(line for line in text.splitlines()
                          if line.startswith("real") and "Total" in line)
        assert "3850" in real_total

    def test_json_format(self, tmp_path, capsys):
        root = tmp_path / "capdata"
        write_manifest(table_fixtures.caption_manifest(), root)
        assert main(["stats", "--data", str(root), "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        real_train = next(e for e in doc["entries"]
                          if e["style"] == "real" and e["split"] == "train")
        assert real_train == {"style": "real", "split": "train", "images": 2695,
                              "units": 13475, "labels": {}}


class TestMmdCommand:
    def make_vldg_dirs(self, tmp_path):
        rng = np.random.default_rng(0)
        vdir = tmp_path / "visual"
        ldir = tmp_path / "linguistic"
        for k, style in enumerate(Style):
            for modality, directory, dim in ((Modality.VISUAL, vdir, 6),
                                             (Modality.LINGUISTIC, ldir, 4)):
                vectors = rng.normal(loc=k, size=(10, dim))
                emb = EmbeddingSet(domain=style, modality=modality, vectors=vectors,
                                   ids=tuple(f"{style.slug}{i}" for i in range(10)))
                write_embeddings(emb, directory / f"{style.slug}_{modality.value}.vldg")
        return vdir, ldir

    def test_gap_matrix_json(self, tmp_path, capsys):
        vdir, ldir = self.make_vldg_dirs(tmp_path)
        out = tmp_path / "gaps.json"
        assert main(["mmd", "--visual", str(vdir), "--linguistic", str(ldir),
                     "--kernel", "rbf", "--estimator", "biased",
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert len(doc["visual"]) == len(doc["linguistic"]) == 6
        assert doc["visual_avg"] == pytest.approx(
            sum(doc["visual"].values()) / 6)
        table = capsys.readouterr().out
        assert "average" in table

    def test_linear_unbiased_also_runs(self, tmp_path):
        vdir, ldir = self.make_vldg_dirs(tmp_path)
        assert main(["mmd", "--visual", str(vdir), "--linguistic", str(ldir),
                     "--kernel", "linear", "--estimator", "unbiased"]) == 0

    def test_checked_in_vldg_fixtures(self, tmp_path):
        """No feature extractor needed: the shipped synthetic embedding
        files drive the whole gap-matrix surface."""
        out = tmp_path / "gaps.json"
        assert main(["mmd", "--visual", str(FIXTURES / "vldg" / "visual"),
                     "--linguistic", str(FIXTURES / "vldg" / "linguistic"),
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert set(doc["domains"]) == {"real", "cartoon", "pencil", "oil"}
        # domains were synthesized at increasing offsets, so gaps are real
        assert doc["visual_avg"] > 0 and doc["linguistic_avg"] > 0


class TestExitCodes:
    def test_validate_clean_source_manifest(self):
        assert main(["validate", CORPUS]) == 0

    def test_missing_input_is_io_or_validation_error(self, tmp_path):
        rc = main(["stylize", "--task", "cap", "--input", str(tmp_path / "nope.jsonl"),
                   "--out", str(tmp_path / "w"), "--quiet"])
        assert rc in (3, 5)

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "forge.yaml"
        cfg.write_text("definitely_not_a_key: 1\n")
        rc = main(["stylize", "--task", "cap", "--input", CORPUS,
                   "--out", str(tmp_path / "w"), "--config", str(cfg), "--quiet"])
        assert rc == 2

    def test_validation_failure_exit_code(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "x", "task": "cap", "split": "train", '
                       '"image": "missing.png", "captions": ["a"]}\n')
        assert main(["validate", str(bad)]) == 5

    def test_replay_miss_is_provider_error(self, tmp_path):
        empty = tmp_path / "empty.json"
        empty.write_text("{}")
        rc = main(["stylize", "--task", "cap", "--style", "cartoon", "--input",
                   CORPUS, "--out", str(tmp_path / "w"), "--replay", str(empty),
                   "--quiet"])
        assert rc == 4
