"""Parameter sweeps and statistical studies of the measurement error.

Three views of the error budget:

* ``worst_case_sweep``  aligned-sign corners of the divider/comparator
  errors over a (k, Q) grid, optionally an exhaustive corner search over
  every error source's sign;
* ``frequency_sweep``   time-domain runs across resonant frequencies,
  exposing the leakage-dominated low end, the offset-dominated middle
  and the peak-detector failure at the high end;
* ``monte_carlo``       independent uniform draws of each error source
  through the closed-form model.

``optimal_k`` picks the division factor minimizing the worst-case error
over a Q range; larger k suppresses count quantization while making the
fixed comparator offset loom larger against the lower threshold, so an
interior optimum exists once offsets are nonzero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .circuit import (
    CircuitNonIdealities,
    SignAlignment,
    SimulationError,
    _diode_ramp,
    _predict_values,
    _tracking_gain,
    simulate_measurement,
)
from .counting import Convention, MeasurementConfig
from .resonator import ResonatorParams
from .tables import SweepTable

__all__ = [
    "worst_case_sweep",
    "optimal_k",
    "frequency_sweep",
    "monte_carlo",
    "MonteCarloSummary",
]

_ALIGNED_CORNERS = ((1.0, 1.0, 1.0, 1.0, 1.0), (-1.0, -1.0, 1.0, 1.0, 1.0))


def _corner_signs(exhaustive: bool):
    """Sign tuples (divider, comparator, opamp, leak, diode) to evaluate.

    The aligned pair flips only the threshold-side sources, matching the
    worst-case alignment convention; the exhaustive search covers every
    corner of the five-dimensional sign box and is the envelope that
    provably dominates independent draws.
    """
    if exhaustive:
        return tuple(itertools.product((-1.0, 1.0), repeat=5))
    return _ALIGNED_CORNERS


def _vector_errors(qs, k, f0, v0, convention, signed, ni):
    """Closed-form (n, q_measured, rel_error, valid) over an array of true
    Q values, mirroring the scalar predicted path arithmetic exactly.

    ``signed`` is the tuple of signed error values
    (divider, comparator, opamp, leak, diode).
    """
    divider, comparator, opamp, leak, diode = signed
    qs = np.asarray(qs, dtype=float)
    w0 = 2.0 * math.pi * f0
    alpha = w0 / (2.0 * qs)
    omega_d = w0 * np.sqrt(1.0 - 1.0 / (4.0 * qs * qs))
    T = 2.0 * math.pi / omega_d
    g = _tracking_gain(f0, ni.detector_bandwidth)
    drop = diode * _diode_ramp(f0, ni.f_fail) + leak * T

    v0_captured = np.maximum(0.0, v0 * g - drop + opamp)
    valid = v0_captured > 0
    thr = v0_captured / (k * (1.0 + divider)) + comparator
    rhs = thr + drop - opamp
    valid &= (thr >= 0) & (rhs > 0)

    decrement = alpha * T
    safe_rhs = np.where(valid & (rhs > 0), rhs, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        est = np.where(
            g * v0 > safe_rhs, np.log(g * v0 / safe_rhs) / decrement, 0.0
        )
    m = np.maximum(1, np.ceil(est).astype(np.int64))

    def captured(mm):
        return np.maximum(0.0, v0 * np.exp(-alpha * (mm * T)) * g - drop + opamp)

    # settle the estimate with the same comparisons a scalar scan makes
    for _ in range(4):
        step_down = valid & (m > 1) & (captured(m - 1) <= thr)
        m = np.where(step_down, m - 1, m)
    for _ in range(4):
        step_up = valid & (captured(m) > thr)
        m = np.where(step_up, m + 1, m)
    settled = ~valid | ((captured(m) <= thr) & ((m == 1) | (captured(m - 1) > thr)))
    if not np.all(settled):
        raise RuntimeError("crossing-index estimate failed to settle; widen the fix passes")

    n = m if convention is Convention.FIRST_AT_OR_BELOW else m - 1
    valid &= n >= 1
    n_safe = np.maximum(n, 1)
    lnk = math.log(k)
    qm = 0.5 * np.sqrt(1.0 + 4.0 * math.pi**2 * n_safe.astype(float) ** 2 / lnk**2)
    err = (qm - qs) / qs
    return n, qm, err, valid


def _signed_values(ni: CircuitNonIdealities, signs):
    mags = (
        ni.divider_error,
        ni.comparator_offset,
        ni.opamp_offset,
        ni.leak_droop,
        ni.diode_residual,
    )
    return tuple(s * m for s, m in zip(signs, mags))


def worst_case_sweep(
    k_values,
    q_range,
    ni: CircuitNonIdealities,
    f0: float,
    v0: float = 1.0,
    convention: Convention = Convention.LAST_ABOVE,
    exhaustive: bool = False,
) -> SweepTable:
    """Corner-wise worst measurement error over a (k, Q) grid.

    Each cell evaluates the closed-form measurement at the aligned sign
    corners (all corners of the sign box with ``exhaustive=True``) and
    reports the corner with the largest absolute error, signed.  Cells
    where every corner fails to complete are recorded with NA markers.
    """
    k_values = list(k_values)
    if not k_values:
        raise ValueError("k_values must be non-empty")
    qs = _expand(q_range)
    corners = _corner_signs(exhaustive)
    table = SweepTable(columns=("k", "q_true", "n", "q_measured", "rel_error"))
    for k in k_values:
        best_err = np.full(qs.shape, np.nan)
        best_n = np.zeros(qs.shape, dtype=np.int64)
        best_qm = np.full(qs.shape, np.nan)
        for signs in corners:
            n, qm, err, valid = _vector_errors(
                qs, k, f0, v0, convention, _signed_values(ni, signs), ni
            )
            take = valid & (np.isnan(best_err) | (np.abs(err) > np.abs(best_err)))
            best_err = np.where(take, err, best_err)
            best_n = np.where(take, n, best_n)
            best_qm = np.where(take, qm, best_qm)
        for i, q_true in enumerate(qs):
            if np.isnan(best_err[i]):
                table.append(k, q_true, None, None, None)
            else:
                table.append(k, q_true, int(best_n[i]), best_qm[i], best_err[i])
    return table


def optimal_k(
    q_range,
    ni: CircuitNonIdealities,
    k_grid,
    f0: float,
    v0: float = 1.0,
    convention: Convention = Convention.LAST_ABOVE,
) -> float:
    """Grid k minimizing the largest worst-case |error| over the Q range.

    Ties break toward smaller k, which also means a shorter measurement.
    The Q sampling step must resolve the count-quantization ripple
    (period roughly pi/ln k in Q) or the sampled maxima misrank nearby k.
    """
    k_grid = [float(k) for k in k_grid]
    if not k_grid:
        raise ValueError("k_grid must be non-empty")
    qs = _expand(q_range)
    best_k = None
    best_metric = math.inf
    for k in sorted(k_grid):
        metric = 0.0
        for signs in _ALIGNED_CORNERS:
            n, qm, err, valid = _vector_errors(
                qs, k, f0, v0, convention, _signed_values(ni, signs), ni
            )
            if not np.all(valid):
                metric = math.inf
                break
            metric = max(metric, float(np.max(np.abs(err))))
        if metric < best_metric:
            best_metric = metric
            best_k = k
    if best_k is None or not math.isfinite(best_metric):
        raise SimulationError(
            "no k on the grid completes the measurement over the requested Q range"
        )
    return best_k


def frequency_sweep(
    q_true: float,
    k: float,
    f0_values,
    ni: CircuitNonIdealities,
    v0: float = 1.0,
    convention: Convention = Convention.LAST_ABOVE,
    samples_per_period: int = 40,
    seed: int = 0,
) -> SweepTable:
    """Signed measurement error versus resonant frequency, one
    time-domain run per point with the configured sign alignment.

    Points where the run cannot complete are recorded with NA markers.
    """
    f0_values = [float(f) for f in f0_values]
    if not f0_values:
        raise ValueError("f0_values must be non-empty")
    if any(f <= 0 for f in f0_values):
        raise ValueError("f0 values must be positive")
    if any(b <= a for a, b in zip(f0_values, f0_values[1:])):
        raise ValueError("f0 values must be strictly ascending")
    if ni.worst_case_sign is SignAlignment.INDEPENDENT:
        raise ValueError("frequency_sweep wants aligned worst-case signs (PLUS or MINUS)")
    config = MeasurementConfig(k=k, convention=convention)
    table = SweepTable(columns=("f0", "n", "q_measured", "rel_error"))
    for f0 in f0_values:
        params = ResonatorParams(f0=f0, q=q_true, v0=v0)
        try:
            result, _ = simulate_measurement(
                params, config, ni, samples_per_period=samples_per_period, seed=seed
            )
        except SimulationError:
            table.append(f0, None, None, None)
            continue
        table.append(f0, result.n, result.q_measured, result.relative_error)
    return table


@dataclass(frozen=True)
class MonteCarloSummary:
    trials: int
    failures: int
    mean_error: float
    std_error: float
    min_error: float
    max_error: float
    hist_counts: tuple
    hist_edges: tuple


def monte_carlo(
    params: ResonatorParams,
    config: MeasurementConfig,
    ni_distributions: CircuitNonIdealities,
    trials: int,
    seed: int = 0,
    distribution: str = "uniform",
) -> MonteCarloSummary:
    """Closed-form measurement error under independent random draws of
    every error source.

    Each magnitude in ``ni_distributions`` is the half-width of a uniform
    distribution centered on zero (tolerances are bounds, not variances);
    with ``distribution="gaussian"`` it is the standard deviation instead,
    in which case draws can leave the corner envelope.  Bandwidth and
    failure knee stay fixed.  Trials whose measurement cannot complete
    are counted as failures and excluded from the statistics.
    Deterministic for a given seed.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1 (got {trials})")
    if distribution not in ("uniform", "gaussian"):
        raise ValueError(f"distribution must be 'uniform' or 'gaussian', got {distribution!r}")
    rng = np.random.default_rng(seed)
    mags = np.array(
        [
            ni_distributions.divider_error,
            ni_distributions.comparator_offset,
            ni_distributions.opamp_offset,
            ni_distributions.leak_droop,
            ni_distributions.diode_residual,
        ]
    )
    if distribution == "uniform":
        draws = rng.uniform(-1.0, 1.0, size=(trials, 5)) * mags
    else:
        draws = rng.standard_normal(size=(trials, 5)) * mags
    errors = []
    failures = 0
    for row in draws:
        try:
            result, _ = _predict_values(
                params,
                config,
                divider=row[0],
                comparator=row[1],
                opamp=row[2],
                leak=row[3],
                diode=row[4],
                detector_bandwidth=ni_distributions.detector_bandwidth,
                f_fail=ni_distributions.f_fail,
            )
        except SimulationError:
            failures += 1
            continue
        errors.append(result.relative_error)
    if not errors:
        raise SimulationError("every trial failed to complete a measurement")
    errors = np.array(errors)
    counts, edges = np.histogram(errors, bins=20)
    return MonteCarloSummary(
        trials=trials,
        failures=failures,
        mean_error=float(np.mean(errors)),
        std_error=float(np.std(errors)),
        min_error=float(np.min(errors)),
        max_error=float(np.max(errors)),
        hist_counts=tuple(int(c) for c in counts),
        hist_edges=tuple(float(e) for e in edges),
    )


def _expand(q_range) -> np.ndarray:
    lo, hi, step = q_range
    if not (lo > 0.5 and hi >= lo and step > 0):
        raise ValueError(
            f"invalid range {q_range!r}: need 0.5 < min <= max and step > 0"
        )
    return np.arange(lo, hi + step / 2.0, step)
