"""Image and text encoders with deterministic batch inference.

Visual features come from a torchvision ResNet with the classifier
dropped: the global average pool of the final feature map. Linguistic
features come from a BERT encoder, read out at the CLS token (or as a
masked mean). ``weights="pretrained"`` pulls published checkpoints (needs
network access on first use); ``weights="random"`` builds the same
architecture with a seeded random initialization, which keeps the full
pipeline runnable offline and is sufficient for format and plumbing
checks. Everything runs in eval mode under ``no_grad``, so repeated runs
over the same inputs agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision import models, transforms

VISUAL_DEFAULT = "resnet50"
LINGUISTIC_DEFAULT = "bert-base-uncased"

_RESNETS = {
    "resnet18": models.resnet18,
    "resnet34": models.resnet34,
    "resnet50": models.resnet50,
    "resnet101": models.resnet101,
}


@dataclass
class ExtractorConfig:
    modality: str  # "visual" | "linguistic"
    model_name: str = ""
    pooling: str = ""  # visual: "gap"; linguistic: "cls" | "mean"
    batch_size: int = 8
    device: str = "cpu"
    weights: str = "pretrained"  # "pretrained" | "random"
    seed: int = 0
    vocab_file: str | None = None  # offline tokenizer vocab for random weights
    max_text_tokens: int = 64

    def __post_init__(self):
        if self.modality not in ("visual", "linguistic"):
            raise ValueError(f"unknown modality {self.modality!r}")
        if not self.model_name:
            self.model_name = (VISUAL_DEFAULT if self.modality == "visual"
                               else LINGUISTIC_DEFAULT)
        if not self.pooling:
            self.pooling = "gap" if self.modality == "visual" else "cls"
        if self.modality == "visual" and self.pooling != "gap":
            raise ValueError("visual pooling supports only 'gap'")
        if self.modality == "linguistic" and self.pooling not in ("cls", "mean"):
            raise ValueError("linguistic pooling must be 'cls' or 'mean'")
        if self.weights not in ("pretrained", "random"):
            raise ValueError("weights must be 'pretrained' or 'random'")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class VisualEncoder:
    def __init__(self, cfg: ExtractorConfig):
        if cfg.model_name not in _RESNETS:
            raise ValueError(f"unknown visual encoder {cfg.model_name!r}; "
                             f"choose from {sorted(_RESNETS)}")
        torch.manual_seed(cfg.seed)
        builder = _RESNETS[cfg.model_name]
        model = builder(weights="DEFAULT" if cfg.weights == "pretrained" else None)
        self.dim = model.fc.in_features
        # everything up to (and including) the global average pool
        self.backbone = torch.nn.Sequential(*list(model.children())[:-1])
        self.backbone.eval().to(cfg.device)
        self.device = cfg.device
        self.batch_size = cfg.batch_size
        self.transform = transforms.Compose([
            transforms.Resize(256),
            transforms.CenterCrop(224),
            transforms.ToTensor(),
            transforms.Normalize(mean=[0.485, 0.456, 0.406],
                                 std=[0.229, 0.224, 0.225]),
        ])

    def encode_paths(self, paths: list[Path]) -> np.ndarray:
        rows = []
        with torch.no_grad():
            for start in range(0, len(paths), self.batch_size):
                batch_paths = paths[start:start + self.batch_size]
                tensors = []
                for path in batch_paths:
                    with Image.open(path) as im:
                        tensors.append(self.transform(im.convert("RGB")))
                batch = torch.stack(tensors).to(self.device)
                feats = self.backbone(batch).flatten(1)
                rows.append(feats.cpu().numpy())
        return np.concatenate(rows, axis=0) if rows else np.zeros((0, self.dim),
                                                                  dtype=np.float32)


def _offline_bert_tokenizer(vocab_path: Path):
    from transformers import BertTokenizer

    tokens = [line for line in vocab_path.read_text(encoding="utf-8").splitlines()
              if line]
    mapping = {token: index for index, token in enumerate(tokens)}
    try:
        return BertTokenizer(vocab=mapping)
    except TypeError:
        # older transformers take the vocab as a file path
        return BertTokenizer(vocab_file=str(vocab_path))


def default_vocab_path() -> Path:
    return Path(str(resources.files("vldg_extractor") / "data" / "basic_vocab.txt"))


class LinguisticEncoder:
    def __init__(self, cfg: ExtractorConfig):
        from transformers import AutoModel, AutoTokenizer, BertConfig, BertModel

        if cfg.weights == "pretrained":
            self.tokenizer = AutoTokenizer.from_pretrained(cfg.model_name)
            self.model = AutoModel.from_pretrained(cfg.model_name)
        else:
            vocab_path = Path(cfg.vocab_file) if cfg.vocab_file else default_vocab_path()
            self.tokenizer = _offline_bert_tokenizer(vocab_path)
            torch.manual_seed(cfg.seed)
            self.model = BertModel(BertConfig(vocab_size=self.tokenizer.vocab_size))
        self.model.eval().to(cfg.device)
        self.dim = self.model.config.hidden_size
        self.device = cfg.device
        self.batch_size = cfg.batch_size
        self.pooling = cfg.pooling
        self.max_tokens = cfg.max_text_tokens

    def encode_texts(self, texts: list[str]) -> np.ndarray:
        rows = []
        with torch.no_grad():
            for start in range(0, len(texts), self.batch_size):
                batch = texts[start:start + self.batch_size]
                enc = self.tokenizer(batch, padding=True, truncation=True,
                                     max_length=self.max_tokens, return_tensors="pt")
                enc = {k: v.to(self.device) for k, v in enc.items()}
                hidden = self.model(**enc).last_hidden_state
                if self.pooling == "cls":
                    feats = hidden[:, 0]
                else:
                    mask = enc["attention_mask"].unsqueeze(-1).to(hidden.dtype)
                    feats = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1)
                rows.append(feats.cpu().numpy())
        return np.concatenate(rows, axis=0) if rows else np.zeros((0, self.dim),
                                                                  dtype=np.float32)
