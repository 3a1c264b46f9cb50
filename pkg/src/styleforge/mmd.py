"""Maximum mean discrepancy between per-domain embedding sets.

Quantifies how far apart two style domains sit in a feature space: one
MMD per domain pair, per modality (visual features from an image
encoder, linguistic features from a text encoder; extraction is a
separate tool writing the VLDG file format below). The biased estimator
is the default; kernels are linear or RBF with a median-heuristic
bandwidth. Squared-MMD values land in a gap matrix whose lower triangle
holds the visual gaps and upper triangle the linguistic gaps, with one
average per modality.

VLDG embedding file layout (little-endian):

    magic   4 bytes  b"VLDG"
    version u16      currently 1
    count   u32      number of rows
    dim     u32      vector dimensionality
    payload count*dim float32, row-major
    trailer UTF-8 JSON: {"ids": [...], "domain": "...", "modality": "..."}
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .promptkit.styles import Style

VLDG_MAGIC = b"VLDG"
VLDG_VERSION = 1
_HEADER = struct.Struct("<4sHII")


class Modality(Enum):
    VISUAL = "visual"
    LINGUISTIC = "linguistic"


class Estimator(Enum):
    BIASED = "biased"
    UNBIASED = "unbiased"


@dataclass(frozen=True)
class EmbeddingSet:
    domain: Style
    modality: Modality
    vectors: np.ndarray  # (n, d) float64
    ids: tuple[str, ...]

    def __post_init__(self):
        v = self.vectors
        if v.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got shape {v.shape}")
        if len(self.ids) != v.shape[0]:
            raise ValueError(f"{len(self.ids)} ids for {v.shape[0]} rows")
        if not np.all(np.isfinite(v)):
            raise ValueError("vectors contain non-finite entries")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class KernelSpec:
    """``linear`` or ``rbf``; an RBF bandwidth of None means the median
    heuristic on the pooled sample. k(x, y) = exp(-||x-y||^2 / (2 h^2))."""

    kind: str = "rbf"
    bandwidth: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.bandwidth is not None and self.bandwidth <= 0:
            raise ValueError("explicit bandwidth must be positive")


def median_heuristic(points: np.ndarray, *, max_points: int = 1000, seed: int = 0) -> float:
    """Median pairwise Euclidean distance of a pooled sample.

    Large samples are capped by a seeded subsample so the cost stays
    quadratic in at most ``max_points``. All-identical points leave the
    bandwidth undefined and raise.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("median heuristic needs at least two points")
    if pts.shape[0] > max_points:
        rng = np.random.default_rng(seed)
        idx = rng.choice(pts.shape[0], size=max_points, replace=False)
        pts = pts[np.sort(idx)]
    sq = _sq_dists(pts, pts)
    iu = np.triu_indices(pts.shape[0], k=1)
    dists = np.sqrt(np.maximum(sq[iu], 0.0))
    bandwidth = float(np.median(dists))
    if bandwidth <= 0.0:
        raise ValueError("median pairwise distance is zero (points effectively identical)")
    return bandwidth


def _sq_dists(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xx = np.sum(x * x, axis=1)[:, None]
    yy = np.sum(y * y, axis=1)[None, :]
    return np.maximum(xx + yy - 2.0 * (x @ y.T), 0.0)


def _gram(x: np.ndarray, y: np.ndarray, kernel: KernelSpec, bandwidth: float | None) -> np.ndarray:
    if kernel.kind == "linear":
        return x @ y.T
    assert bandwidth is not None and bandwidth > 0
    return np.exp(-_sq_dists(x, y) / (2.0 * bandwidth * bandwidth))


def _resolve_bandwidth(x: np.ndarray, y: np.ndarray, kernel: KernelSpec) -> float | None:
    if kernel.kind != "rbf":
        return None
    if kernel.bandwidth is not None:
        return kernel.bandwidth
    return median_heuristic(np.vstack([x, y]))


def mmd_squared(
    x_set: EmbeddingSet | np.ndarray,
    y_set: EmbeddingSet | np.ndarray,
    kernel: KernelSpec = KernelSpec(),
    estimator: Estimator = Estimator.BIASED,
) -> float:
    """Squared MMD between two samples.

    Biased: mean(Kxx) + mean(Kyy) - 2 mean(Kxy). Unbiased: within-set
    means exclude the diagonal, so each sample needs at least two rows.
    """
    x = np.asarray(x_set.vectors if isinstance(x_set, EmbeddingSet) else x_set,
                   dtype=np.float64)
    y = np.asarray(y_set.vectors if isinstance(y_set, EmbeddingSet) else y_set,
                   dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("samples must be 2-D arrays")
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    n, m = x.shape[0], y.shape[0]
    if n < 1 or m < 1:
        raise ValueError("empty sample")
    if estimator is Estimator.UNBIASED and (n < 2 or m < 2):
        raise ValueError("unbiased estimator needs at least two rows per sample")

    # canonical operand order makes the float summation order, and hence
    # the result, exactly symmetric in the two samples
    if (y.shape[0], y.tobytes()) < (x.shape[0], x.tobytes()):
        x, y = y, x
        n, m = m, n

    bandwidth = _resolve_bandwidth(x, y, kernel)
    kxx = _gram(x, x, kernel, bandwidth)
    kyy = _gram(y, y, kernel, bandwidth)
    kxy = _gram(x, y, kernel, bandwidth)

    if estimator is Estimator.BIASED:
        within_x = float(np.sum(kxx)) / (n * n)
        within_y = float(np.sum(kyy)) / (m * m)
    else:
        within_x = float(np.sum(kxx) - np.trace(kxx)) / (n * (n - 1))
        within_y = float(np.sum(kyy) - np.trace(kyy)) / (m * (m - 1))
    cross = float(np.sum(kxy)) / (n * m)
    return within_x + within_y - 2.0 * cross


_DOMAIN_ORDER = (Style.REAL_PHOTO, Style.CARTOON_DRAWING,
                 Style.PENCIL_DRAWING, Style.OIL_PAINTING)


@dataclass
class GapMatrix:
    """Pairwise squared-MMD gaps: visual in the lower triangle,
    linguistic in the upper, one average per modality."""

    domains: tuple[Style, ...]
    visual: dict      # (row_slug, col_slug) -> float, row index > col index
    linguistic: dict  # (row_slug, col_slug) -> float, row index < col index

    @property
    def visual_avg(self) -> float:
        return sum(self.visual.values()) / len(self.visual)

    @property
    def linguistic_avg(self) -> float:
        return sum(self.linguistic.values()) / len(self.linguistic)

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "domains": [d.slug for d in self.domains],
            "visual": {f"{a}/{b}": v for (a, b), v in sorted(self.visual.items())},
            "linguistic": {f"{a}/{b}": v for (a, b), v in sorted(self.linguistic.items())},
            "visual_avg": self.visual_avg,
            "linguistic_avg": self.linguistic_avg,
        }

    def render_text(self) -> str:
        slugs = [d.slug for d in self.domains]
        width = max(len(s) for s in slugs) + 2
        head = " " * width + "".join(f"{s:>{width}}" for s in slugs) + f"{'average':>{width}}"
        lines = [head]
        for i, row in enumerate(slugs):
            cells = []
            for j, col in enumerate(slugs):
                if i == j:
                    cells.append(f"{'-':>{width}}")
                elif i > j:
                    cells.append(f"{self.visual[(row, col)]:>{width}.4f}")
                else:
                    cells.append(f"{self.linguistic[(row, col)]:>{width}.4f}")
            tail = ""
            if i == len(slugs) - 2:
                tail = f"{self.linguistic_avg:>{width}.4f}"
            elif i == len(slugs) - 1:
                tail = f"{self.visual_avg:>{width}.4f}"
            lines.append(f"{row:>{width}}" + "".join(cells) + tail)
        return "\n".join(lines) + "\n"


def gap_matrix(
    visual_sets: dict[Style, EmbeddingSet],
    linguistic_sets: dict[Style, EmbeddingSet],
    kernel: KernelSpec = KernelSpec(),
    estimator: Estimator = Estimator.BIASED,
) -> GapMatrix:
    """Fill both triangles of the gap matrix from per-domain embedding sets."""
    for domain in _DOMAIN_ORDER:
        if domain not in visual_sets:
            raise ValueError(f"missing visual embeddings for domain {domain.slug}")
        if domain not in linguistic_sets:
            raise ValueError(f"missing linguistic embeddings for domain {domain.slug}")
    visual: dict = {}
    linguistic: dict = {}
    for i, row in enumerate(_DOMAIN_ORDER):
        for j, col in enumerate(_DOMAIN_ORDER):
            if i > j:
                visual[(row.slug, col.slug)] = mmd_squared(
                    visual_sets[row], visual_sets[col], kernel, estimator)
            elif i < j:
                linguistic[(row.slug, col.slug)] = mmd_squared(
                    linguistic_sets[row], linguistic_sets[col], kernel, estimator)
    return GapMatrix(domains=_DOMAIN_ORDER, visual=visual, linguistic=linguistic)


# --- VLDG file IO ----------------------------------------------------------

def write_embeddings(emb: EmbeddingSet, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    vectors = np.ascontiguousarray(emb.vectors, dtype=np.float32)
    n, d = vectors.shape
    trailer = json.dumps(
        {"ids": list(emb.ids), "domain": emb.domain.slug, "modality": emb.modality.value},
        ensure_ascii=False, sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(VLDG_MAGIC, VLDG_VERSION, n, d))
        fh.write(vectors.tobytes(order="C"))
        fh.write(trailer)


def read_embeddings(path: str | Path) -> EmbeddingSet:
    """Lossless load of a VLDG file; row order is preserved."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise SchemaError(f"{path}: truncated VLDG header")
    magic, version, count, dim = _HEADER.unpack_from(blob)
    if magic != VLDG_MAGIC:
        raise SchemaError(f"{path}: bad magic {magic!r}, expected {VLDG_MAGIC!r}")
    if version != VLDG_VERSION:
        raise SchemaError(f"{path}: unsupported VLDG version {version}")
    payload_len = count * dim * 4
    end = _HEADER.size + payload_len
    if len(blob) < end:
        raise SchemaError(f"{path}: truncated payload "
                          f"(expected {payload_len} bytes, file has {len(blob) - _HEADER.size})")
    vectors = np.frombuffer(blob[_HEADER.size:end], dtype="<f4").reshape(count, dim)
    try:
        trailer = json.loads(blob[end:].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: bad trailer JSON: {exc}") from None
    if not np.all(np.isfinite(vectors)):
        raise SchemaError(f"{path}: payload contains non-finite values")
    ids = tuple(trailer.get("ids", ()))
    if len(ids) != count:
        raise SchemaError(f"{path}: {len(ids)} ids for {count} rows")
    return EmbeddingSet(
        domain=Style.from_slug(trailer["domain"]),
        modality=Modality(trailer["modality"]),
        vectors=vectors.astype(np.float64),
        ids=ids,
    )
