"""High-sampling-rate (waveform) signature synthesis.

Each cycle's spectrum is a set of complex harmonics scattered around the
appliance centroid, shaped by a log-normal envelope, restricted to the lower
half-plane and optionally stripped of one harmonic parity. The radius and angle
of the scatter drift from cycle to cycle as AR(1) processes. Cycles are
synthesized with a real inverse FFT, concatenated, and multiplied by an
exponential start-up transient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import (
    CENTROID_DOMAIN,
    DegenerateSpectrumError,
    GenConfig,
    HfCentroid,
    InvalidParameterError,
    RngStream,
    Signature,
    check_ranges,
    derive_stream,
    sample_folded_normal,
)

TWO_PI = 2.0 * math.pi

DEFAULT_HF_RANGES: dict[str, tuple[float, float]] = {
    "re0": (-1.0, 1.0),
    "im0": (-1.0, 1.0),
    "mu": (0.1, 1.5),
    "sigma": (0.3, 1.5),
    "rho": (0.0, 0.9),
    "a": (0.5, 2.0),
    "A_peak": (1.0, 3.0),
    "tau": (1e-4, 2e-3),
}
DEFAULT_HF_LAMBDA = 20.0

# Fixed draw order for centroid sampling.
_HF_UNIFORM_FIELDS = ("re0", "im0", "mu", "sigma", "rho", "a", "A_peak", "tau")


@dataclass(frozen=True)
class SpectrumFrame:
    """One cycle's one-sided spectrum; ``z[0]`` is DC, ``z[i]`` harmonic ``i``."""

    z: np.ndarray

    @property
    def n(self) -> int:
        return self.z.size - 1


@dataclass(frozen=True)
class ArState:
    r: np.ndarray
    phi: np.ndarray
    a_t: float | None = None


def ar1_step(prev, rho: float, eps, wrap_2pi: bool = False):
    """Folded AR(1) update ``|rho*prev + eps|``, optionally reduced mod 2*pi.

    Works elementwise on arrays. ``eps`` is supplied by the caller.
    """
    out = np.abs(rho * np.asarray(prev, dtype=np.float64) + eps)
    if wrap_2pi:
        out = np.mod(out, TWO_PI)
        # mod can round up to exactly 2*pi for tiny negative remainders
        out = np.where(out >= TWO_PI, 0.0, out)
    return float(out) if out.ndim == 0 else out


def lognormal_envelope(n: int, mu: float, sigma: float) -> np.ndarray:
    i = np.arange(1, n + 1, dtype=np.float64)
    return np.exp(-((np.log(i) - mu) ** 2) / (2.0 * sigma**2)) / (i * sigma * math.sqrt(TWO_PI))


def dropped_harmonics(n: int, m: int, d: int) -> np.ndarray:
    """Boolean mask over harmonics ``1..n`` that parity dropout zeroes.

    Harmonic ``i > 1`` is dropped when ``d == 1`` and ``(i + m)`` is even, so
    ``m = 0`` removes even orders and ``m = 1`` removes odd orders above the
    fundamental.
    """
    i = np.arange(1, n + 1)
    return (d == 1) & (i > 1) & ((i + m) % 2 == 0)


def _frames(c: HfCentroid, r: np.ndarray, phi: np.ndarray) -> np.ndarray:
    # r, phi: (..., n) -> z: (..., n + 1)
    re = c.re0 + r * np.cos(phi)
    im = -np.abs(c.im0 + r * np.sin(phi))
    h = (re + 1j * im) * lognormal_envelope(c.n, c.mu, c.sigma)
    h[..., dropped_harmonics(c.n, c.m, c.d)] = 0.0
    z = np.zeros(h.shape[:-1] + (c.n + 1,), dtype=np.complex128)
    z[..., 1:] = h
    return z


def build_spectrum_frame(c: HfCentroid, state: ArState) -> SpectrumFrame:
    r = np.asarray(state.r, dtype=np.float64)
    phi = np.asarray(state.phi, dtype=np.float64)
    if r.shape != (c.n,) or phi.shape != (c.n,):
        raise InvalidParameterError(f"state vectors must have length n={c.n}, got {r.shape} and {phi.shape}")
    return SpectrumFrame(_frames(c, r, phi))


def _synth_cycles(z: np.ndarray, amplitudes, N: int) -> np.ndarray:
    n = z.shape[-1] - 1
    if N < 2 * n:
        raise InvalidParameterError(f"samples per cycle N={N} must be >= 2*n={2 * n}")
    if np.any(np.asarray(amplitudes) <= 0):
        raise InvalidParameterError("cycle amplitude must be > 0")
    spec = np.zeros(z.shape[:-1] + (N // 2 + 1,), dtype=np.complex128)
    spec[..., : n + 1] = z
    # irfft expands the one-sided spectrum Hermitian-symmetrically
    x = np.fft.irfft(spec, n=N, axis=-1)
    peak = np.max(np.abs(x), axis=-1, keepdims=True)
    if np.any(peak == 0):
        raise DegenerateSpectrumError("spectrum frame has no nonzero harmonic")
    return np.expand_dims(np.asarray(amplitudes, dtype=np.float64), -1) * x / peak


def synth_cycle(frame: SpectrumFrame, amplitude: float, N: int) -> np.ndarray:
    """Real single-cycle waveform with peak absolute value ``amplitude``."""
    z = np.asarray(frame.z, dtype=np.complex128)
    if not np.any(z):
        raise DegenerateSpectrumError("spectrum frame has no nonzero harmonic")
    return _synth_cycles(z, float(amplitude), int(N))


def transient_multiplier(length: int, A_peak: float, tau: float) -> np.ndarray:
    t = np.arange(length, dtype=np.float64)
    return 1.0 + (A_peak - 1.0) * np.exp(-tau * t)


def apply_transient(w, A_peak: float, tau: float) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    return w * transient_multiplier(w.size, A_peak, tau)


def hf_cycles(c: HfCentroid, cfg: GenConfig, stream: RngStream):
    """Per-cycle waveforms before concatenation and transient.

    Returns ``(cycles, amplitudes, frames)`` with shapes ``(p, N)``, ``(p,)``
    and ``(p, n + 1)``.
    """
    p, N, n = cfg.cycles_per_signature, cfg.samples_per_cycle, c.n
    sd = math.sqrt(cfg.var_d)
    # Draw order is part of the determinism contract: r noise, phi noise, amplitude.
    eps_r = stream.normal(0.0, sd, (p + 1, n))
    eps_phi = stream.normal(0.0, sd, (p + 1, n))
    if cfg.correlated_amplitude:
        eps_a = stream.normal(0.0, sd, p)
        amplitudes = np.empty(p)
        a_t = c.a
        for t in range(p):
            # AR(1) on the deviation from the centroid amplitude, folded
            a_t = abs(c.a + c.rho * (a_t - c.a) + eps_a[t])
            amplitudes[t] = a_t
    else:
        amplitudes = np.full(p, sample_folded_normal(stream, c.a, cfg.var_d))

    r = np.empty((p, n))
    phi = np.empty((p, n))
    r_prev = np.abs(eps_r[0])
    phi_prev = np.mod(np.abs(eps_phi[0]), TWO_PI)
    for t in range(p):
        r_prev = ar1_step(r_prev, c.rho, eps_r[t + 1])
        phi_prev = ar1_step(phi_prev, c.rho, eps_phi[t + 1], wrap_2pi=True)
        r[t], phi[t] = r_prev, phi_prev

    frames = _frames(c, r, phi)
    return _synth_cycles(frames, amplitudes, N), amplitudes, frames


def synth_hf_signature(c: HfCentroid, cfg: GenConfig, stream: RngStream,
                       appliance_id: int = 0, signature_id: int = 0) -> Signature:
    cycles, _, _ = hf_cycles(c, cfg, stream)
    w = apply_transient(cycles.ravel(), c.A_peak, c.tau)
    return Signature(appliance_id, signature_id, w, cfg.sample_rate_hf)


def sample_hf_centroids(K: int, ranges: Mapping[str, Sequence[float]] | None = None,
                        lam: float = DEFAULT_HF_LAMBDA, stream: RngStream | None = None) -> list[HfCentroid]:
    """Draw ``K`` centroids: uniform coordinates, Poisson harmonic count.

    Missing entries in ``ranges`` fall back to :data:`DEFAULT_HF_RANGES`.
    ``n`` is clamped to at least 1; ``m`` and ``d`` are fair coin flips.
    """
    rng = {**DEFAULT_HF_RANGES, **(ranges or {})}
    check_ranges(rng)
    if not lam > 0:
        raise InvalidParameterError(f"Poisson mean must be > 0, got {lam}")
    if K < 0:
        raise InvalidParameterError(f"K must be >= 0, got {K}")
    if stream is None:
        stream = derive_stream(0, 0, 0, domain=CENTROID_DOMAIN)
    out = []
    for _ in range(K):
        coords = {name: float(stream.uniform(*rng[name])) for name in _HF_UNIFORM_FIELDS}
        n = max(1, int(stream.poisson(lam)))
        m, d = (int(v) for v in stream.integers(0, 2, size=2))
        out.append(HfCentroid(n=n, m=m, d=d, **coords))
    return out
