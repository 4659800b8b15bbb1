"""Low-sampling-rate (RMS) signature synthesis.

A signature is ``n`` primitive cycles separated by zero-consumption gaps. Each
cycle is the pointwise product of up to five basis functions:

* ``p1`` constant amplitude
* ``p2`` exponential start-up overshoot ``1 + A exp(-tau t)``
* ``p3`` one plus the impulse response of ``q0 / (q1 s^2 + q2 s + q3)``
* ``p4`` multiplicative Gaussian noise around 1
* ``p5`` Beta-distributed modulation

Time inside a cycle is measured in seconds, ``t = k / f_s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import (
    CENTROID_DOMAIN,
    GenConfig,
    InvalidParameterError,
    LfCentroid,
    RngStream,
    Signature,
    check_ranges,
    derive_stream,
    sample_folded_normal,
)

DEFAULT_LF_RANGES: dict[str, tuple[float, float]] = {
    "a": (50.0, 2000.0),
    "A_peak": (0.0, 1.5),
    "tau": (0.02, 0.5),
    "q0": (0.0, 2.0),
    "q1": (0.5, 2.0),
    "q2": (0.2, 3.0),
    "q3": (0.5, 3.0),
    "alpha": (1.0, 5.0),
    "beta": (1.0, 5.0),
    "dt": (20.0, 120.0),
    "dd": (5.0, 60.0),
    "sigma_n": (0.0, 0.05),
}
DEFAULT_LF_LAMBDA = 3.0
DEFAULT_P2_PROB = 0.8
DEFAULT_P3_PROB = 0.3

_LF_UNIFORM_FIELDS = ("a", "A_peak", "tau", "q0", "q1", "q2", "q3", "alpha", "beta", "dt", "dd", "sigma_n")
# Per-cycle parameters resampled around the centroid, in draw order.
_CYCLE_FIELDS = ("a", "A_peak", "tau", "q0", "q1", "q2", "q3", "alpha", "beta", "sigma_n", "dt")


@dataclass(frozen=True)
class PrimitiveCycleParams:
    a: float
    A_peak: float
    tau: float
    q0: float
    q1: float
    q2: float
    q3: float
    alpha: float
    beta: float
    sigma_n: float
    dt_samples: int
    use_p2: bool = True
    use_p3: bool = False
    use_p5: bool = False
    rate_hz: float = 1.0

    def __post_init__(self):
        if self.dt_samples < 1:
            raise InvalidParameterError(f"dt_samples must be >= 1, got {self.dt_samples}")
        for name in ("a", "A_peak", "tau", "q0", "q1", "q2", "q3", "alpha", "beta", "sigma_n"):
            if not getattr(self, name) >= 0:
                raise InvalidParameterError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.use_p3 and not self.q1 > 0:
            raise InvalidParameterError("q1 must be > 0 when p3 is enabled")
        if self.use_p5 and not (self.alpha > 0 and self.beta > 0):
            raise InvalidParameterError("alpha and beta must be > 0 when p5 is enabled")
        if not self.rate_hz > 0:
            raise InvalidParameterError(f"rate_hz must be > 0, got {self.rate_hz}")


@dataclass(frozen=True)
class LfSignaturePlan:
    cycles: tuple[PrimitiveCycleParams, ...]
    gaps: tuple[int, ...]
    rate_hz: float = 1.0

    def __post_init__(self):
        if len(self.gaps) != len(self.cycles) - 1:
            raise InvalidParameterError(f"expected {len(self.cycles) - 1} gaps, got {len(self.gaps)}")
        if any(g < 0 for g in self.gaps):
            raise InvalidParameterError("gaps must be >= 0")

    @property
    def length(self) -> int:
        return sum(c.dt_samples for c in self.cycles) + sum(self.gaps)


def eval_p2(A_peak: float, tau: float, t) -> np.ndarray:
    if tau < 0:
        raise InvalidParameterError(f"tau must be >= 0, got {tau}")
    return 1.0 + A_peak * np.exp(-tau * np.asarray(t, dtype=np.float64))


def impulse_response(q0: float, q1: float, q2: float, q3: float, t) -> np.ndarray:
    """Inverse Laplace transform of ``q0 / (q1 s^2 + q2 s + q3)``.

    Closed form from the roots of the denominator. The overdamped and
    underdamped branches are written with ``expm1``/``sin(w t)/w`` so they stay
    accurate as the roots merge into the critically damped case.
    """
    if not q1 != 0:
        raise InvalidParameterError("q1 must be nonzero")
    t = np.asarray(t, dtype=np.float64)
    disc = q2 * q2 - 4.0 * q1 * q3
    k = q0 / q1
    if disc > 0:
        sq = math.sqrt(disc)
        # s1 - s2 = sq/q1; pick the numerically safe root pair
        s2 = (-q2 - math.copysign(sq, q2)) / (2.0 * q1) if q2 != 0 else -sq / (2.0 * q1)
        s1 = q3 / (q1 * s2) if s2 != 0 else (-q2 + sq) / (2.0 * q1)
        lo, hi = min(s1, s2), max(s1, s2)
        return -k * np.exp(hi * t) * np.expm1((lo - hi) * t) / (hi - lo)
    sigma = -q2 / (2.0 * q1)
    if disc < 0:
        omega = math.sqrt(-disc) / (2.0 * abs(q1))
        return k * np.exp(sigma * t) * np.sin(omega * t) / omega
    return k * t * np.exp(sigma * t)


def eval_p3(q0: float, q1: float, q2: float, q3: float, t) -> np.ndarray:
    if not q1 > 0:
        raise InvalidParameterError(f"q1 must be > 0, got {q1}")
    return 1.0 + impulse_response(q0, q1, q2, q3, t)


def synth_primitive_cycle(p: PrimitiveCycleParams, stream: RngStream) -> np.ndarray:
    """Pointwise product of the enabled basis functions over one cycle.

    ``p1`` and ``p4`` are always on. The ``p3`` factor is floored at zero since
    an RMS envelope cannot go negative; ``p4`` and ``p5`` are drawn i.i.d. per
    sample, ``p4`` first.
    """
    t = np.arange(p.dt_samples, dtype=np.float64) / p.rate_hz
    w = np.full(p.dt_samples, float(p.a))
    if p.use_p2:
        w *= eval_p2(p.A_peak, p.tau, t)
    if p.use_p3:
        w *= np.maximum(eval_p3(p.q0, p.q1, p.q2, p.q3, t), 0.0)
    w *= stream.normal(1.0, p.sigma_n, p.dt_samples)
    if p.use_p5:
        w *= stream.beta(p.alpha, p.beta, p.dt_samples)
    return w


def _to_samples(seconds: float, rate_hz: float, minimum: int) -> int:
    # round half up
    return max(minimum, int(math.floor(seconds * rate_hz + 0.5)))


def plan_lf_signature(c: LfCentroid, cfg: GenConfig, stream: RngStream) -> LfSignaturePlan:
    """Sample per-cycle parameters around the centroid.

    The number of cycles is fixed to ``c.n``. ``p5`` is switched off with
    probability ``cfg.p_b`` and always on cycles louder than the signature's
    mean cycle amplitude.
    """
    fs = cfg.sample_rate_lf
    draws = []
    for _ in range(c.n):
        draws.append({name: sample_folded_normal(stream, getattr(c, name), cfg.var_d) for name in _CYCLE_FIELDS})
    gaps = tuple(_to_samples(sample_folded_normal(stream, c.dd, cfg.var_d), fs, 0) for _ in range(c.n - 1))
    keep_p5 = stream.random(c.n) >= cfg.p_b
    mean_a = math.fsum(d["a"] for d in draws) / c.n

    use_p2, use_p3 = c.basis_mask
    cycles = []
    for d, keep in zip(draws, keep_p5):
        dt = _to_samples(d.pop("dt"), fs, 1)
        cycles.append(PrimitiveCycleParams(
            **d, dt_samples=dt, use_p2=use_p2, use_p3=use_p3,
            use_p5=bool(keep) and not d["a"] > mean_a, rate_hz=fs,
        ))
    return LfSignaturePlan(tuple(cycles), gaps, fs)


def assemble_signature(plan: LfSignaturePlan, stream: RngStream,
                       appliance_id: int = 0, signature_id: int = 0) -> Signature:
    parts = []
    for i, cyc in enumerate(plan.cycles):
        parts.append(synth_primitive_cycle(cyc, stream))
        if i < len(plan.gaps):
            parts.append(np.zeros(plan.gaps[i]))
    return Signature(appliance_id, signature_id, np.concatenate(parts), plan.rate_hz)


def synth_lf_signature(c: LfCentroid, cfg: GenConfig, stream: RngStream,
                       appliance_id: int = 0, signature_id: int = 0) -> Signature:
    plan = plan_lf_signature(c, cfg, stream)
    return assemble_signature(plan, stream, appliance_id, signature_id)


def sample_lf_centroids(K: int, ranges: Mapping[str, Sequence[float]] | None = None,
                        lambda_n: float = DEFAULT_LF_LAMBDA, stream: RngStream | None = None,
                        p2_prob: float = DEFAULT_P2_PROB, p3_prob: float = DEFAULT_P3_PROB) -> list[LfCentroid]:
    rng = {**DEFAULT_LF_RANGES, **(ranges or {})}
    check_ranges(rng)
    if not lambda_n > 0:
        raise InvalidParameterError(f"Poisson mean must be > 0, got {lambda_n}")
    if not (0 <= p2_prob <= 1 and 0 <= p3_prob <= 1):
        raise InvalidParameterError("basis probabilities must lie in [0, 1]")
    if K < 0:
        raise InvalidParameterError(f"K must be >= 0, got {K}")
    if stream is None:
        stream = derive_stream(0, 0, 0, domain=CENTROID_DOMAIN)
    out = []
    for _ in range(K):
        coords = {name: float(stream.uniform(*rng[name])) for name in _LF_UNIFORM_FIELDS}
        n = max(1, int(stream.poisson(lambda_n)))
        mask = (bool(stream.random() < p2_prob), bool(stream.random() < p3_prob))
        out.append(LfCentroid(n=n, basis_mask=mask, **coords))
    return out
