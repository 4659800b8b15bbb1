"""Domain types, RNG stream derivation and the dataset model.

Every random quantity in the package is drawn from a stream obtained through
:func:`derive_stream`. Streams are keyed by ``(master_seed, domain, appliance,
signature)`` so a signature's samples never depend on the order in which
signatures are produced.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

RngStream = np.random.Generator

# Stream domains; part of the seed derivation, so changing them changes output.
SIGNATURE_DOMAIN = 0
CENTROID_DOMAIN = 1


class SignatureError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(SignatureError, ValueError):
    pass


class DegenerateSpectrumError(SignatureError, ValueError):
    pass


class DatasetError(SignatureError, ValueError):
    """Invalid, inconsistent or mismatched dataset input."""


class ParseError(DatasetError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UndefinedSimilarityError(SignatureError, ValueError):
    pass


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise InvalidParameterError(message)


def _is_01(v: Any) -> bool:
    return v in (0, 1) and not isinstance(v, float)


@dataclass(frozen=True)
class HfCentroid:
    """Identity of a virtual appliance in the high-rate parameter space.

    ``re0``/``im0`` locate the appliance in the complex plane, ``mu``/``sigma``
    shape the log-normal harmonic envelope, ``m``/``d`` select parity dropout,
    ``rho`` drives the AR(1) spectrum drift, ``a`` is the mean amplitude and
    ``A_peak``/``tau`` describe the start-up transient (``tau`` in 1/sample).
    """

    n: int
    re0: float
    im0: float
    mu: float
    sigma: float
    m: int
    d: int
    rho: float
    a: float
    A_peak: float
    tau: float

    def __post_init__(self):
        _require(isinstance(self.n, (int, np.integer)) and self.n >= 1, f"n must be an integer >= 1, got {self.n!r}")
        _require(self.sigma > 0, f"sigma must be > 0, got {self.sigma}")
        _require(abs(self.rho) < 1, f"|rho| must be < 1, got {self.rho}")
        _require(self.a > 0, f"a must be > 0, got {self.a}")
        _require(self.A_peak >= 1, f"A_peak must be >= 1, got {self.A_peak}")
        _require(self.tau >= 0, f"tau must be >= 0, got {self.tau}")
        _require(_is_01(self.m), f"m must be 0 or 1, got {self.m!r}")
        _require(_is_01(self.d), f"d must be 0 or 1, got {self.d!r}")
        for f in fields(self):
            v = getattr(self, f.name)
            _require(math.isfinite(v), f"{f.name} must be finite, got {v}")

    def to_dict(self) -> dict:
        return _plain(asdict(self))


@dataclass(frozen=True)
class LfCentroid:
    """Identity of a virtual appliance in the low-rate (RMS) parameter space.

    Durations ``dt`` (primitive cycle) and ``dd`` (delay between cycles) are in
    seconds; ``basis_mask`` is ``(use_p2, use_p3)`` and is fixed per appliance.
    """

    a: float
    A_peak: float
    tau: float
    q0: float
    q1: float
    q2: float
    q3: float
    alpha: float
    beta: float
    dt: float
    dd: float
    n: int
    sigma_n: float
    basis_mask: tuple[bool, bool] = (True, False)

    def __post_init__(self):
        object.__setattr__(self, "basis_mask", tuple(bool(b) for b in self.basis_mask))
        _require(len(self.basis_mask) == 2, "basis_mask must hold two flags (p2, p3)")
        for name in ("a", "A_peak", "tau", "q0", "q1", "q2", "q3", "alpha", "beta", "dt", "dd", "sigma_n"):
            v = getattr(self, name)
            _require(math.isfinite(v) and v >= 0, f"{name} must be finite and >= 0, got {v}")
        _require(isinstance(self.n, (int, np.integer)) and self.n >= 1, f"n must be an integer >= 1, got {self.n!r}")
        _require(self.dt > 0, f"dt must be > 0, got {self.dt}")
        if self.basis_mask[1]:
            _require(self.q1 > 0, "q1 must be > 0 when p3 is enabled")

    def to_dict(self) -> dict:
        d = _plain(asdict(self))
        d["basis_mask"] = list(self.basis_mask)
        return d


@dataclass(frozen=True)
class GenConfig:
    """Generation settings shared by both generators.

    ``samples_per_cycle``, ``cycles_per_signature``, ``mains_hz`` and
    ``correlated_amplitude`` apply to the high-rate generator; ``sample_rate_lf``
    and ``p_b`` to the low-rate one.
    """

    master_seed: int = 0
    var_d: float = 0.1
    samples_per_cycle: int = 500
    cycles_per_signature: int = 10
    sample_rate_lf: float = 1.0
    p_b: float = 0.5
    signatures_per_appliance: int = 10
    mains_hz: float = 60.0
    correlated_amplitude: bool = False

    def __post_init__(self):
        _require(0 <= int(self.master_seed) < 2**64, "master_seed must fit in 64 unsigned bits")
        _require(self.var_d >= 0, f"var_d must be >= 0, got {self.var_d}")
        _require(self.samples_per_cycle >= 4, f"samples_per_cycle must be >= 4, got {self.samples_per_cycle}")
        _require(self.cycles_per_signature >= 1, f"cycles_per_signature must be >= 1, got {self.cycles_per_signature}")
        _require(self.sample_rate_lf > 0, f"sample_rate_lf must be > 0, got {self.sample_rate_lf}")
        _require(0 <= self.p_b <= 1, f"p_b must lie in [0, 1], got {self.p_b}")
        _require(self.signatures_per_appliance >= 1, "signatures_per_appliance must be >= 1")
        _require(self.mains_hz > 0, f"mains_hz must be > 0, got {self.mains_hz}")

    @property
    def sample_rate_hf(self) -> float:
        return self.samples_per_cycle * self.mains_hz

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GenConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True)
class Signature:
    appliance_id: int
    signature_id: int
    samples: np.ndarray
    rate_hz: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64).ravel()
        if s.size == 0:
            raise DatasetError("signature samples must be nonempty")
        if not np.all(np.isfinite(s)):
            raise DatasetError(f"signature ({self.appliance_id}, {self.signature_id}) has non-finite samples")
        if not self.rate_hz > 0:
            raise DatasetError(f"rate_hz must be > 0, got {self.rate_hz}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.size

    def with_samples(self, samples) -> "Signature":
        return Signature(self.appliance_id, self.signature_id, samples, self.rate_hz)


@dataclass(frozen=True)
class Dataset:
    """Ordered signatures plus generation provenance.

    ``manifest`` is either a mapping (seed, config, centroids) or the string
    ``"external"`` for ingested measurements.
    """

    signatures: tuple[Signature, ...]
    manifest: Any = "external"

    def __post_init__(self):
        sigs = tuple(self.signatures)
        object.__setattr__(self, "signatures", sigs)
        keys = [(s.appliance_id, s.signature_id) for s in sigs]
        if len(set(keys)) != len(keys):
            dup = next(k for k in keys if keys.count(k) > 1)
            raise DatasetError(f"duplicate (appliance_id, signature_id) pair {dup}")
        ids = {s.appliance_id for s in sigs}
        if ids and ids != set(range(len(ids))):
            raise DatasetError(f"appliance ids must form a contiguous 0-based range, got {sorted(ids)}")

    def __len__(self) -> int:
        return len(self.signatures)

    def __iter__(self):
        return iter(self.signatures)

    @property
    def appliance_ids(self) -> list[int]:
        return sorted({s.appliance_id for s in self.signatures})

    def lengths(self) -> np.ndarray:
        return np.array([len(s) for s in self.signatures], dtype=np.int64)

    def matrix(self) -> np.ndarray:
        """Stack samples into ``(signatures, length)``; lengths must agree."""
        lengths = set(self.lengths().tolist())
        if len(lengths) > 1:
            raise DatasetError(f"signatures have differing lengths {sorted(lengths)}; standardize first")
        if not self.signatures:
            raise DatasetError("dataset is empty")
        return np.vstack([s.samples for s in self.signatures])

    def replace_samples(self, rows: Iterable) -> "Dataset":
        return Dataset(tuple(s.with_samples(r) for s, r in zip(self.signatures, rows)), self.manifest)


def derive_stream(master_seed: int, appliance_idx: int, signature_idx: int = 0,
                  domain: int = SIGNATURE_DOMAIN) -> RngStream:
    """Return the deterministic random stream for one generation task.

    Keys are hashed by :class:`numpy.random.SeedSequence` and feed a Philox
    counter-based generator, so distinct keys give independent streams.
    """
    if appliance_idx < 0 or signature_idx < 0:
        raise InvalidParameterError("stream indices must be >= 0")
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(domain), int(appliance_idx), int(signature_idx)))
    return np.random.Generator(np.random.Philox(ss))


def sample_folded_normal(stream: RngStream, mean: float, var: float, size=None):
    """Draw ``|x|`` with ``x ~ N(mean, var)``."""
    if var < 0:
        raise InvalidParameterError(f"variance must be >= 0, got {var}")
    x = np.abs(stream.normal(mean, math.sqrt(var), size))
    return float(x) if size is None else x


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def check_ranges(ranges: Mapping[str, Sequence[float]]) -> None:
    for name, bounds in ranges.items():
        lo, hi = bounds
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise InvalidParameterError(f"invalid range for {name}: [{lo}, {hi}]")
