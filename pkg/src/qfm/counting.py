"""Idealized pseudo-period-counting quality-factor measurement.

The measurement counts the number n of pseudo-periods the ring-down
envelope needs to fall from its initial value V0 to the fixed fraction
V0 / k.  Because consecutive maxima decay by the constant factor
exp(-pi / (Q sqrt(1 - 1/(4 Q^2)))), the count recovers Q in closed form:

    Q = (1/2) sqrt(1 + 4 pi^2 n^2 / ln(k)^2)

The threshold generally falls between two maxima, so n carries an
inherent quantization of one count.  Both ways of resolving it are
provided: FIRST_AT_OR_BELOW counts through the terminating
pseudo-period, LAST_ABOVE stops one earlier.  A peak exactly equal to
the threshold counts as "at or below", which keeps the two conventions
exactly one count apart everywhere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .resonator import ResonatorParams, derive_dynamics, peak_value
from .tables import SweepTable

__all__ = [
    "Convention",
    "MeasurementConfig",
    "MeasurementResult",
    "q_from_count",
    "q_from_count_shortcut",
    "count_pseudo_periods",
    "theoretical_error",
    "theoretical_error_sweep",
]


class Convention(enum.Enum):
    """How the reported n relates to the first maximum at or below V0/k."""

    FIRST_AT_OR_BELOW = "first_at_or_below"
    LAST_ABOVE = "last_above"


@dataclass(frozen=True)
class MeasurementConfig:
    """Division factor k (> 1), counting convention, and whether the
    count is converted with the exact closed form or the 2n shortcut."""

    k: float
    convention: Convention = Convention.LAST_ABOVE
    shortcut: bool = False

    def __post_init__(self):
        if not self.k > 1.0:
            raise ValueError(
                f"k must be > 1 (got {self.k}); ln k would be <= 0"
            )


@dataclass(frozen=True)
class MeasurementResult:
    """Outcome of one counting measurement.

    relative_error is populated only when the true Q is known (synthetic
    runs); t_measure is n pseudo-periods when the pseudo-period is known.
    """

    n: int
    q_measured: float
    t_measure: Optional[float] = None
    relative_error: Optional[float] = None
    threshold_used: Optional[float] = None


def q_from_count(n, k: float):
    """Quality factor recovered from a count of n pseudo-periods down to
    the V0/k threshold: (1/2) sqrt(1 + 4 pi^2 n^2 / ln(k)^2).

    Accepts a scalar count or an integer array.
    """
    n = np.asarray(n)
    if not np.issubdtype(n.dtype, np.integer):
        raise ValueError(f"n must be an integer count (got {n.dtype})")
    if np.any(n < 1):
        raise ValueError("n must be >= 1: with no elapsed pseudo-period the measurement is undefined")
    if not k > 1.0:
        raise ValueError(f"k must be > 1 (got {k})")
    lnk = math.log(k)
    q = 0.5 * np.sqrt(1.0 + 4.0 * math.pi**2 * n.astype(float) ** 2 / lnk**2)
    return float(q) if q.ndim == 0 else q


def q_from_count_shortcut(n):
    """Count-to-Q conversion by doubling, exact for k = 4.81 where
    ln k matches pi/2 to four digits; returns 2 n."""
    n = np.asarray(n)
    if not np.issubdtype(n.dtype, np.integer):
        raise ValueError(f"n must be an integer count (got {n.dtype})")
    if np.any(n < 1):
        raise ValueError("n must be >= 1")
    out = 2.0 * n.astype(float)
    return float(out) if out.ndim == 0 else out


def _first_peak_at_or_below(params: ResonatorParams, threshold: float) -> int:
    """Smallest m >= 1 with peak_value(params, m) <= threshold.

    Jump-starts from the closed-form crossing index, then settles the
    exact count with the same peak_value comparisons a brute-force scan
    would use, so ties resolve identically.
    """
    dyn = derive_dynamics(params)
    decrement = dyn.alpha * dyn.pseudo_period
    if threshold >= params.v0:
        return 1
    est = math.log(params.v0 / threshold) / decrement
    m = max(1, int(math.floor(est)) - 2)
    while peak_value(params, m) > threshold:
        m += 1
    return m


def count_pseudo_periods(params: ResonatorParams, config: MeasurementConfig) -> int:
    """Number of pseudo-periods for the peak envelope to fall from v0 to
    v0/k, resolved per the configured convention.

    The count depends only on q and k; it always exists because the
    maxima decay to zero.
    """
    m_star = _first_peak_at_or_below(params, params.v0 / config.k)
    if config.convention is Convention.FIRST_AT_OR_BELOW:
        return m_star
    return m_star - 1


def theoretical_error(q_true: float, config: MeasurementConfig) -> float:
    """Signed relative error of the ideal counting measurement at q_true.

    Quantization of the count is the only error source on this path.
    """
    params = ResonatorParams(f0=1.0, q=q_true, v0=1.0)
    n = count_pseudo_periods(params, config)
    if n < 1:
        raise ValueError(
            f"measurement degenerate at q={q_true}, k={config.k}: "
            "the first maximum is already at or below the threshold"
        )
    return (q_from_count(n, config.k) - q_true) / q_true


def theoretical_error_sweep(k_values, q_range, convention: Convention = Convention.LAST_ABOVE) -> SweepTable:
    """Quantization-error table over a Q range for each division factor.

    q_range is (min, max, step), endpoints inclusive.  Rows are scan
    ordered: outer loop k, inner loop q_true.
    """
    k_values = list(k_values)
    if not k_values:
        raise ValueError("k_values must be non-empty")
    qs = _expand_range(q_range)
    table = SweepTable(columns=("k", "q_true", "n", "q_measured", "rel_error"))
    for k in k_values:
        config = MeasurementConfig(k=k, convention=convention)
        for q_true in qs:
            params = ResonatorParams(f0=1.0, q=q_true, v0=1.0)
            n = count_pseudo_periods(params, config)
            if n < 1:
                table.append(k, q_true, None, None, None)
                continue
            qm = q_from_count(n, k)
            table.append(k, q_true, n, qm, (qm - q_true) / q_true)
    return table


def _expand_range(q_range) -> np.ndarray:
    lo, hi, step = q_range
    if not (lo > 0.5 and hi >= lo and step > 0):
        raise ValueError(
            f"invalid range {q_range!r}: need 0.5 < min <= max and step > 0"
        )
    return np.arange(lo, hi + step / 2.0, step)
