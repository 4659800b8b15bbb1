"""Similarity between a real and a synthetic dataset.

Both datasets are brought to a common length and unit peak amplitude, a PCA
basis is fit on the real data, both are projected onto it, and the KL
divergence between per-component histograms is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, DatasetError, InvalidParameterError, UndefinedSimilarityError

KL_EPS = 1e-10
# Mean KL reported for the proposed generators on PLAID (high rate) and
# UK-DALE house 1 (low rate); reference context only.
REFERENCE_MEAN_KL = {"hf": 0.69, "lf": 0.59}


@dataclass(frozen=True)
class PcaModel:
    mean_vector: np.ndarray
    component_matrix: np.ndarray
    explained_variance_ratios: np.ndarray

    @property
    def n_components(self) -> int:
        return self.component_matrix.shape[0]

    @property
    def dimension(self) -> int:
        return self.mean_vector.size


@dataclass(frozen=True)
class ValidationReport:
    kl_per_component: tuple[float, ...]
    mean_kl: float
    explained_variance: tuple[float, ...]
    bins: int
    n_components: int
    length: int = 0
    n_real: int = 0
    n_synth: int = 0
    reference: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "n_components": self.n_components,
            "bins": self.bins,
            "length": self.length,
            "n_real": self.n_real,
            "n_synth": self.n_synth,
            "kl_per_component": list(self.kl_per_component),
            "mean_kl": self.mean_kl,
            "explained_variance": list(self.explained_variance),
            "reference_mean_kl": dict(self.reference),
        }

    def table(self) -> str:
        """Table-style text: one column per principal component plus the mean."""
        head = "".join(f"{'PC' + str(i + 1):>9}" for i in range(self.n_components)) + f"{'mean':>9}"
        kl = "".join(f"{v:9.4f}" for v in self.kl_per_component) + f"{self.mean_kl:9.4f}"
        ev = "".join(f"{v:9.4f}" for v in self.explained_variance)
        return f"{'':12}{head}\n{'D_KL':12}{kl}\n{'expl. var':12}{ev}\n"


def _as_matrix(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.matrix()
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise DatasetError("expected a 2-D (signatures x samples) array")
    return x


def standardize_lengths(ds: Dataset, L: int) -> Dataset:
    """Right-pad with zeros or crop every signature to exactly ``L`` samples."""
    if L < 1:
        raise InvalidParameterError(f"target length must be >= 1, got {L}")
    if len(ds) == 0:
        raise DatasetError("cannot standardize an empty dataset")
    rows = []
    for s in ds:
        x = s.samples[:L]
        if x.size < L:
            x = np.concatenate([x, np.zeros(L - x.size)])
        rows.append(x)
    return ds.replace_samples(rows)


def normalize_amplitude(ds: Dataset) -> Dataset:
    """Scale each signature to unit max-absolute value; all-zero rows stay zero."""
    rows = []
    for s in ds:
        peak = np.max(np.abs(s.samples))
        rows.append(s.samples / peak if peak > 0 else s.samples)
    return ds.replace_samples(rows)


def pca_fit(data, k: int) -> PcaModel:
    """Top-``k`` principal directions of the mean-centred sample matrix.

    Each component's sign is fixed so that its largest-magnitude entry is
    positive; ties go to the first such entry.
    """
    x = _as_matrix(data)
    n_obs, dim = x.shape
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    if dim < k or n_obs < k + 1:
        raise DatasetError(f"need length >= {k} and at least {k + 1} signatures, got {dim} and {n_obs}")
    mean = x.mean(axis=0)
    _, s, vt = np.linalg.svd(x - mean, full_matrices=False)
    var = s**2
    total = var.sum()
    ratios = var[:k] / total if total > 0 else np.zeros(k)
    comps = vt[:k].copy()
    idx = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(k), idx])
    signs[signs == 0] = 1.0
    comps *= signs[:, None]
    return PcaModel(mean, comps, ratios)


def pca_project(model: PcaModel, data) -> np.ndarray:
    x = _as_matrix(data)
    if x.shape[1] != model.dimension:
        raise DatasetError(f"signature length {x.shape[1]} does not match model dimension {model.dimension}")
    return (x - model.mean_vector) @ model.component_matrix.T


def pca_reconstruct(model: PcaModel, scores) -> np.ndarray:
    return np.asarray(scores) @ model.component_matrix + model.mean_vector


def kl_divergence(p, q, eps: float = KL_EPS) -> float:
    """``sum P log(P/Q)`` over bins for probability-mass vectors.

    ``Q`` is smoothed (``Q + eps``, renormalized) only when it has an empty bin
    where ``P`` has mass; terms with ``P == 0`` contribute nothing.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    support = p > 0
    if np.any(q[support] == 0):
        q = (q + eps) / (q + eps).sum()
    return math.fsum((p[support] * np.log(p[support] / q[support])).tolist())


def kl_per_component(real_proj, synth_proj, bins: int = 100, eps: float = KL_EPS) -> list[float]:
    """Histogram KL(real || synth) per column, on shared equal-width bins."""
    real_proj = np.asarray(real_proj, dtype=np.float64)
    synth_proj = np.asarray(synth_proj, dtype=np.float64)
    if real_proj.ndim == 1:
        real_proj, synth_proj = real_proj[:, None], synth_proj[:, None]
    if real_proj.shape[0] == 0 or synth_proj.shape[0] == 0:
        raise DatasetError("projections must be nonempty")
    if real_proj.shape[1] != synth_proj.shape[1]:
        raise DatasetError("projections have different numbers of components")
    if bins < 2:
        raise InvalidParameterError(f"bins must be >= 2, got {bins}")
    out = []
    for j in range(real_proj.shape[1]):
        a, b = real_proj[:, j], synth_proj[:, j]
        lo = min(a.min(), b.min())
        hi = max(a.max(), b.max())
        if lo == hi:
            out.append(0.0)
            continue
        edges = np.linspace(lo, hi, bins + 1)
        hp, _ = np.histogram(a, bins=edges)
        hq, _ = np.histogram(b, bins=edges)
        out.append(kl_divergence(hp / hp.sum(), hq / hq.sum(), eps))
    return out


def common_length(real: Dataset, length: int | None = None) -> int:
    if length is not None:
        return int(length)
    if len(real) == 0:
        raise DatasetError("real dataset is empty")
    return int(real.lengths().max())


def prepare(ds: Dataset, L: int, normalize: bool = True) -> Dataset:
    ds = standardize_lengths(ds, L)
    return normalize_amplitude(ds) if normalize else ds


def validate(real: Dataset, synth: Dataset, k: int = 6, bins: int = 100,
             length: int | None = None, normalize: bool = True, kind: str | None = None) -> ValidationReport:
    """Compare ``synth`` against ``real`` through PCA-projected histograms.

    ``length`` defaults to the longest real signature. PCA is fit on the real
    data only, so both datasets are projected onto the same basis.
    """
    L = common_length(real, length)
    r = prepare(real, L, normalize)
    s = prepare(synth, L, normalize)
    model = pca_fit(r, k)
    kl = kl_per_component(pca_project(model, r), pca_project(model, s), bins)
    ref = {kind: REFERENCE_MEAN_KL[kind]} if kind in REFERENCE_MEAN_KL else {}
    return ValidationReport(
        kl_per_component=tuple(kl),
        mean_kl=math.fsum(kl) / len(kl),
        explained_variance=tuple(float(v) for v in model.explained_variance_ratios),
        bins=bins,
        n_components=k,
        length=L,
        n_real=len(real),
        n_synth=len(synth),
        reference=ref,
    )


def projection_table(real: Dataset, synth: Dataset, k: int = 2, length: int | None = None,
                     normalize: bool = True) -> list[tuple]:
    """Rows ``(source, appliance_id, signature_id, pc1, ..., pck)`` for scatter plots."""
    L = common_length(real, length)
    r = prepare(real, L, normalize)
    s = prepare(synth, L, normalize)
    model = pca_fit(r, k)
    rows = []
    for name, ds in (("real", r), ("synth", s)):
        for sig, z in zip(ds, pca_project(model, ds)):
            rows.append((name, sig.appliance_id, sig.signature_id, *z.tolist()))
    return rows


def cosine_similarity(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DatasetError(f"length mismatch: {x.shape} vs {y.shape}")
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise UndefinedSimilarityError("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(x, y) / (nx * ny), -1.0, 1.0))


def _unit_rows(ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    x = ds.matrix()
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise UndefinedSimilarityError("dataset contains an all-zero signature")
    return x / norms[:, None], np.array([s.appliance_id for s in ds])


def similarity_matrix(synth: Dataset, real: Dataset) -> np.ndarray:
    """Appliance-level similarity, shape ``(synthetic appliances, real appliances)``.

    Entry ``(a, b)`` averages, over the signatures of synthetic appliance
    ``a``, the best cosine similarity against any signature of real appliance
    ``b``.
    """
    xs, ids_s = _unit_rows(synth)
    xr, ids_r = _unit_rows(real)
    if xs.shape[1] != xr.shape[1]:
        raise DatasetError(f"length mismatch: synthetic {xs.shape[1]} vs real {xr.shape[1]}")
    cos = np.clip(xs @ xr.T, -1.0, 1.0)
    real_apps = real.appliance_ids
    synth_apps = synth.appliance_ids
    out = np.empty((len(synth_apps), len(real_apps)))
    for bi, b in enumerate(real_apps):
        best = cos[:, ids_r == b].max(axis=1)
        for ai, a in enumerate(synth_apps):
            out[ai, bi] = math.fsum(best[ids_s == a].tolist()) / np.count_nonzero(ids_s == a)
    return out


def match_appliances(synth: Dataset, real: Dataset) -> list[tuple[int, int, float]]:
    """For each synthetic appliance, the most similar real appliance.

    Returns ``(synthetic_id, real_id, similarity)``; ties go to the lowest real
    id.
    """
    sim = similarity_matrix(synth, real)
    real_apps = real.appliance_ids
    out = []
    for ai, a in enumerate(synth.appliance_ids):
        bi = int(np.argmax(sim[ai]))
        out.append((a, real_apps[bi], float(sim[ai, bi])))
    return out
