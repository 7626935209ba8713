"""Closed-form ring-down response of an underdamped second-order resonator.

A resonator released at t = 0 from a sustained oscillation maximum V0
(for instance by opening the loop of an oscillator built around it)
rings down as

    V(t) = V0 exp(-a t) [cos(wd t) + sin(wd t) / sqrt(4 Q^2 - 1)]

with decay rate a = w0 / (2 Q), damped angular frequency
wd = w0 sqrt(1 - 1/(4 Q^2)) and w0 = 2 pi f0.  The derivative of V is
proportional to -sin(wd t), so the successive maxima sit exactly at
integer multiples of the pseudo-period T = 2 pi / wd and decay
geometrically.  Everything downstream (pseudo-period counting, the
behavioral circuit model, waveform ingestion) is checked against the
closed forms in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ResonatorParams",
    "DerivedDynamics",
    "Waveform",
    "derive_dynamics",
    "eval_response",
    "peak_time",
    "peak_value",
    "synth_waveform",
]


@dataclass(frozen=True)
class ResonatorParams:
    """Device under test: resonant frequency f0 [Hz], quality factor q,
    initial peak amplitude v0 [V].

    Only the underdamped regime q > 0.5 is supported; at or below it the
    response has no pseudo-period and the square roots above turn
    imaginary.
    """

    f0: float
    q: float
    v0: float = 1.0

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError(f"f0 must be > 0 Hz (got {self.f0})")
        if not self.v0 > 0:
            raise ValueError(f"v0 must be > 0 V (got {self.v0})")
        if not self.q > 0.5:
            raise ValueError(
                f"q must be > 0.5 (underdamped regime), got {self.q}"
            )


@dataclass(frozen=True)
class DerivedDynamics:
    """Decay rate alpha [rad/s], damped angular frequency omega_d [rad/s]
    and pseudo-period T = 2 pi / omega_d [s] of a ring-down."""

    alpha: float
    omega_d: float
    pseudo_period: float


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled voltage trace."""

    sample_rate: float
    samples: np.ndarray
    start_time: float = 0.0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be > 0 (got {self.sample_rate})")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        object.__setattr__(self, "samples", samples)

    def times(self) -> np.ndarray:
        """Sample instants in seconds."""
        return self.start_time + np.arange(self.samples.size) / self.sample_rate

    def __len__(self) -> int:
        return self.samples.size


def derive_dynamics(params: ResonatorParams) -> DerivedDynamics:
    """Decay rate, damped frequency and pseudo-period of the ring-down.

    alpha = w0 / (2 q),  omega_d = w0 sqrt(1 - 1/(4 q^2)),
    pseudo_period = 2 pi / omega_d, with w0 = 2 pi f0.
    """
    w0 = 2.0 * math.pi * params.f0
    alpha = w0 / (2.0 * params.q)
    omega_d = w0 * math.sqrt(1.0 - 1.0 / (4.0 * params.q * params.q))
    return DerivedDynamics(
        alpha=alpha, omega_d=omega_d, pseudo_period=2.0 * math.pi / omega_d
    )


def eval_response(params: ResonatorParams, t):
    """Ring-down voltage at time(s) t >= 0 seconds.

    Accepts a scalar or an array of times; returns the matching shape.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0 (response starts at the release instant)")
    dyn = derive_dynamics(params)
    c = 1.0 / math.sqrt(4.0 * params.q * params.q - 1.0)
    v = (
        params.v0
        * np.exp(-dyn.alpha * t)
        * (np.cos(dyn.omega_d * t) + c * np.sin(dyn.omega_d * t))
    )
    return float(v) if v.ndim == 0 else v


def peak_time(params: ResonatorParams, m) -> float:
    """Time of the m-th maximum (m = 0, 1, 2, ...), which is exactly
    m pseudo-periods after release.

    dV/dt vanishes where sin(omega_d t) = 0 because the decay term and
    the quadrature term cancel at t = 0 and the condition is periodic;
    the maxima are the even half-period grid points.
    """
    m = _check_peak_index(m)
    dyn = derive_dynamics(params)
    out = m * dyn.pseudo_period
    return float(out) if np.ndim(out) == 0 else out


def peak_value(params: ResonatorParams, m) -> float:
    """Amplitude of the m-th maximum: v0 exp(-alpha m T)."""
    m = _check_peak_index(m)
    dyn = derive_dynamics(params)
    out = params.v0 * np.exp(-dyn.alpha * (m * dyn.pseudo_period))
    return float(out) if np.ndim(out) == 0 else out


def _check_peak_index(m):
    arr = np.asarray(m)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"peak index m must be an integer (got {m!r})")
    if np.any(arr < 0):
        raise ValueError(f"peak index m must be >= 0 (got {m!r})")
    return arr


# A synthesized trace must resolve individual cycles well enough that
# discrete peak extraction stays an order of magnitude below the smallest
# modeled circuit non-ideality.
MIN_SAMPLES_PER_PERIOD = 20


def synth_waveform(
    params: ResonatorParams,
    sample_rate: float,
    duration: float,
    noise_rms: float = 0.0,
    seed: int = 0,
) -> Waveform:
    """Sample the ring-down at `sample_rate` for `duration` seconds.

    Optionally adds white Gaussian noise of the given RMS, seeded so two
    calls with equal arguments produce bit-identical traces.  Rejects
    sample rates below 20 samples per resonant period.
    """
    if sample_rate < MIN_SAMPLES_PER_PERIOD * params.f0:
        raise ValueError(
            f"sample_rate {sample_rate} Hz undersamples f0={params.f0} Hz; "
            f"need >= {MIN_SAMPLES_PER_PERIOD} samples per period"
        )
    if not duration > 0:
        raise ValueError(f"duration must be > 0 s (got {duration})")
    if noise_rms < 0:
        raise ValueError(f"noise_rms must be >= 0 V (got {noise_rms})")
    n = int(round(duration * sample_rate))
    if n < 2:
        raise ValueError("duration too short: fewer than 2 samples requested")
    t = np.arange(n) / sample_rate
    v = eval_response(params, t)
    if noise_rms > 0:
        rng = np.random.default_rng(seed)
        v = v + rng.normal(0.0, noise_rms, n)
    return Waveform(sample_rate=sample_rate, samples=v)
