"""Behavioral model of the analog counting architecture.

The modeled signal chain: a comparator squares up the decaying input to
recover a clock (so the block needs no prior knowledge of the resonant
frequency), a diode peak detector holds each cycle's maximum and is
reset by that clock, a divider derives the stop threshold V0/k from the
first captured maximum, and a counter runs while the held maxima stay
above the threshold.

Non-idealities are injected at the points where the real circuit is
imperfect:

* ``comparator_offset``   threshold-comparator input offset [V]
* ``divider_error``       fractional error on the division factor k
* ``opamp_offset``        lumped peak-detector / divider-driver offset [V],
                          added to every captured value including V0
* ``leak_droop``          droop rate of the held peak [V/s], applied over
                          each hold interval
* ``diode_residual``      uncancelled diode threshold [V]; the cancellation
                          works up to ``f_fail`` and degrades linearly to
                          the full residual one octave above it
* ``detector_bandwidth``  first-order tracking roll-off of the detector
* ``noise_rms``           additive white noise on the input trace [V]

All magnitudes are stored unsigned; ``worst_case_sign`` selects whether
the threshold-side errors (divider and comparator) enter with +1, -1, or
independently drawn signs.  Two evaluation paths are provided and are
required to agree to within one count: ``simulate_measurement`` runs the
fixed-step time-domain loop, ``predicted_measurement`` evaluates the
same model in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .counting import (
    Convention,
    MeasurementConfig,
    MeasurementResult,
    q_from_count,
    q_from_count_shortcut,
)
from .resonator import (
    ResonatorParams,
    derive_dynamics,
    peak_value,
    synth_waveform,
)
from .tables import format_number

__all__ = [
    "SignAlignment",
    "CircuitNonIdealities",
    "SimTrace",
    "TraceRow",
    "SimulationError",
    "capture_model",
    "effective_threshold",
    "simulate_measurement",
    "predicted_measurement",
    "pessimistic_nonidealities",
]


class SimulationError(RuntimeError):
    """A measurement run cannot complete (threshold unreachable, signal
    lost in the noise floor, or no decay observed)."""


class SignAlignment(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class CircuitNonIdealities:
    """Error-source magnitudes for the behavioral model.

    Defaults describe an ideal circuit.  See
    :func:`pessimistic_nonidealities` for the calibrated worst-case set.
    """

    comparator_offset: float = 0.0
    divider_error: float = 0.0
    opamp_offset: float = 0.0
    leak_droop: float = 0.0
    diode_residual: float = 0.0
    f_fail: float = 1e6
    detector_bandwidth: float = math.inf
    noise_rms: float = 0.0
    worst_case_sign: SignAlignment = SignAlignment.PLUS

    def __post_init__(self):
        for name in (
            "comparator_offset",
            "opamp_offset",
            "leak_droop",
            "diode_residual",
            "noise_rms",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} is a magnitude and must be >= 0")
        if not 0 <= self.divider_error < 1:
            raise ValueError(
                f"divider_error must be in [0, 1) (got {self.divider_error})"
            )
        if not self.detector_bandwidth > 0:
            raise ValueError("detector_bandwidth must be > 0 Hz")
        if not self.f_fail > 0:
            raise ValueError("f_fail must be > 0 Hz")


def pessimistic_nonidealities(
    sign: SignAlignment = SignAlignment.PLUS,
) -> CircuitNonIdealities:
    """Calibrated pessimistic error budget.

    1 % divider error and 10 mV comparator offset (conservative against
    what integrated dividers and trimmed comparators achieve), a held-peak
    droop of 10 V/s placing the leakage-dominated regime below a few kHz,
    a 1 MHz detector bandwidth, and 100 mV of uncancelled diode threshold
    appearing above the 1 MHz cancellation limit.
    """
    return CircuitNonIdealities(
        comparator_offset=10e-3,
        divider_error=0.01,
        leak_droop=10.0,
        diode_residual=0.1,
        f_fail=1e6,
        detector_bandwidth=1e6,
        worst_case_sign=sign,
    )


@dataclass(frozen=True)
class TraceRow:
    cycle: int
    peak_time: float
    true_peak: float
    captured_peak: float
    threshold: float
    count_enable: bool


@dataclass
class SimTrace:
    """Per-cycle observability record of a simulated measurement."""

    rows: list
    captured_v0: float
    threshold: float

    CSV_COLUMNS = ("cycle", "peak_time", "true_peak", "captured_peak", "threshold", "count_enable")

    def to_csv_string(self) -> str:
        lines = [",".join(self.CSV_COLUMNS)]
        for r in self.rows:
            lines.append(
                ",".join(
                    format_number(v)
                    for v in (
                        r.cycle,
                        r.peak_time,
                        r.true_peak,
                        r.captured_peak,
                        r.threshold,
                        r.count_enable,
                    )
                )
            )
        return "\n".join(lines) + "\n"

    def to_csv(self, dest) -> None:
        text = self.to_csv_string()
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            Path(dest).write_text(text, encoding="utf-8", newline="\n")


def _tracking_gain(f0: float, bandwidth: float) -> float:
    return 1.0 / math.sqrt(1.0 + (f0 / bandwidth) ** 2)


def _diode_ramp(f0: float, f_fail: float) -> float:
    """Fraction of the diode residual left uncancelled at f0: zero up to
    the cancellation limit, rising linearly to 1 an octave above it."""
    return min(1.0, max(0.0, f0 / f_fail - 1.0))


def capture_model(
    true_peak: float,
    f0: float,
    ni: CircuitNonIdealities,
    hold_interval: float,
) -> float:
    """Peak-detector output for a cycle maximum of ``true_peak`` volts.

    The detector tracks with a first-order magnitude roll-off, loses the
    uncancelled diode residual above its cancellation limit, droops at
    the leak rate over the hold interval and carries the static opamp
    offset.  The output is floored at 0 V.
    """
    if true_peak < 0:
        raise ValueError(f"true_peak must be >= 0 V (got {true_peak})")
    if f0 <= 0:
        raise ValueError(f"f0 must be > 0 Hz (got {f0})")
    if hold_interval < 0:
        raise ValueError(f"hold_interval must be >= 0 s (got {hold_interval})")
    drop = ni.diode_residual * _diode_ramp(f0, ni.f_fail) + ni.leak_droop * hold_interval
    return max(
        0.0,
        true_peak * _tracking_gain(f0, ni.detector_bandwidth) - drop + ni.opamp_offset,
    )


def _signed_threshold(v0_captured, k, divider, comparator):
    return v0_captured / (k * (1.0 + divider)) + comparator


def effective_threshold(
    v0_captured: float,
    k: float,
    ni: CircuitNonIdealities,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Stop threshold the comparator actually applies.

    The divider error and comparator offset enter with the sign selected
    by ``ni.worst_case_sign``; INDEPENDENT draws the two signs separately
    from ``rng``.
    """
    if not v0_captured > 0:
        raise ValueError(
            f"v0_captured must be > 0 V (got {v0_captured}); "
            "the divider has no reference to scale"
        )
    if not k > 1.0:
        raise ValueError(f"k must be > 1 (got {k})")
    s_div, s_cmp = _resolve_signs(ni, rng)
    return _signed_threshold(
        v0_captured, k, s_div * ni.divider_error, s_cmp * ni.comparator_offset
    )


def _resolve_signs(ni: CircuitNonIdealities, rng=None):
    if ni.worst_case_sign is SignAlignment.PLUS:
        return 1.0, 1.0
    if ni.worst_case_sign is SignAlignment.MINUS:
        return -1.0, -1.0
    if rng is None:
        raise ValueError("INDEPENDENT sign alignment needs a random generator")
    signs = rng.integers(0, 2, size=2) * 2 - 1
    return float(signs[0]), float(signs[1])


# ---------------------------------------------------------------------------
# closed-form path


def _predict_values(
    params: ResonatorParams,
    config: MeasurementConfig,
    divider: float,
    comparator: float,
    opamp: float,
    leak: float,
    diode: float,
    detector_bandwidth: float,
    f_fail: float,
):
    """Closed-form measurement with every error source given as a signed
    value.  Returns (MeasurementResult, first crossing index m*)."""
    dyn = derive_dynamics(params)
    hold = dyn.pseudo_period
    g = _tracking_gain(params.f0, detector_bandwidth)
    drop = diode * _diode_ramp(params.f0, f_fail) + leak * hold

    def captured(m: int) -> float:
        return max(0.0, peak_value(params, m) * g - drop + opamp)

    if 1.0 + divider <= 0:
        raise SimulationError(
            f"divider error {divider:+.3g} wipes out the division ratio entirely"
        )
    v0_captured = max(0.0, params.v0 * g - drop + opamp)
    if v0_captured <= 0:
        raise SimulationError(
            "captured initial amplitude is zero: the peak detector loses the "
            f"signal entirely at f0={params.f0} Hz with this error budget"
        )
    thr = _signed_threshold(v0_captured, config.k, divider, comparator)
    if thr < 0:
        raise SimulationError(
            f"effective threshold {thr:.4g} V is negative; held maxima can "
            "never fall below it and the counter would run forever"
        )
    rhs = thr + drop - opamp
    if rhs <= 0:
        raise SimulationError(
            "held maxima settle above the stop threshold (offset exceeds the "
            "divider output); the counter would run forever"
        )
    decrement = dyn.alpha * dyn.pseudo_period
    if g * params.v0 > rhs:
        est = math.log(g * params.v0 / rhs) / decrement
        m = max(1, int(math.floor(est)) - 2)
    else:
        m = 1
    while captured(m) > thr:
        m += 1
    m_star = m

    n = m_star if config.convention is Convention.FIRST_AT_OR_BELOW else m_star - 1
    if n < 1:
        raise SimulationError(
            "threshold crossed within the first pseudo-period; no decay "
            "was observed and the count is undefined"
        )
    q = q_from_count_shortcut(n) if config.shortcut else q_from_count(n, config.k)
    result = MeasurementResult(
        n=n,
        q_measured=q,
        t_measure=n * dyn.pseudo_period,
        relative_error=(q - params.q) / params.q,
        threshold_used=thr,
    )
    return result, m_star


def _predict_aligned(params, config, ni, s_div, s_cmp):
    return _predict_values(
        params,
        config,
        divider=s_div * ni.divider_error,
        comparator=s_cmp * ni.comparator_offset,
        opamp=ni.opamp_offset,
        leak=ni.leak_droop,
        diode=ni.diode_residual,
        detector_bandwidth=ni.detector_bandwidth,
        f_fail=ni.f_fail,
    )


def predicted_measurement(
    params: ResonatorParams,
    config: MeasurementConfig,
    ni: CircuitNonIdealities,
) -> MeasurementResult:
    """Closed-form counterpart of :func:`simulate_measurement`: captured
    maxima and threshold from the capture model, crossing index by
    analytic scan, no time-domain loop.

    Requires a fixed sign alignment (PLUS or MINUS).
    """
    if ni.worst_case_sign is SignAlignment.INDEPENDENT:
        raise ValueError(
            "predicted_measurement needs fixed error signs; "
            "use PLUS or MINUS, or run simulate_measurement with a seed"
        )
    s_div, s_cmp = _resolve_signs(ni)
    result, _ = _predict_aligned(params, config, ni, s_div, s_cmp)
    return result


# ---------------------------------------------------------------------------
# time-domain path


def _rising_edges(v: np.ndarray, hysteresis: float) -> np.ndarray:
    """Clock-comparator rising edges: sample indices where the input
    leaves the +/-hysteresis dead band upward after having been below it.
    """
    h = hysteresis
    state = np.where(v > h, 1, np.where(v < -h, -1, 0))
    if state[0] == 0:
        state[0] = 1 if v[0] > 0 else -1
    idx = np.where(state != 0, np.arange(v.size), 0)
    np.maximum.accumulate(idx, out=idx)
    held = state[idx]
    return np.nonzero((held[1:] == 1) & (held[:-1] == -1))[0] + 1


def simulate_measurement(
    params: ResonatorParams,
    config: MeasurementConfig,
    ni: CircuitNonIdealities,
    samples_per_period: int = 50,
    seed: int = 0,
):
    """Fixed-step run of the counting architecture over a synthesized
    ring-down.  Returns (MeasurementResult, SimTrace).

    The clock is recovered from signed zero crossings of the input, each
    clock cycle's sample maximum goes through the capture model and the
    detector is then reset, cycle 0's captured value defines V0, and the
    counter runs while captured maxima exceed the effective threshold.
    Deterministic for a given seed (which drives the input noise and, for
    INDEPENDENT alignment, the error signs).
    """
    if samples_per_period < 20:
        raise ValueError(
            f"samples_per_period must be >= 20 (got {samples_per_period})"
        )
    dyn = derive_dynamics(params)
    rng = np.random.default_rng(seed)
    s_div, s_cmp = _resolve_signs(ni, rng)
    noise_seed = int(rng.integers(0, 2**63 - 1))

    # Closed-form crossing index sizes the sample buffer; the pathological
    # never-stops configurations surface here as SimulationError.
    _, m_star = _predict_aligned(params, config, ni, s_div, s_cmp)
    budget_cycles = m_star + 8

    sample_rate = samples_per_period * params.f0
    wave = synth_waveform(
        params,
        sample_rate,
        (budget_cycles + 2) * dyn.pseudo_period,
        noise_rms=ni.noise_rms,
        seed=noise_seed,
    )
    v = wave.samples

    edges = _rising_edges(v, 4.0 * ni.noise_rms)
    bounds = np.concatenate(([0], edges))

    rows = []
    captured_v0 = None
    thr = None
    counted = 0
    stopped = False
    for j in range(bounds.size - 1):
        a, b = int(bounds[j]), int(bounds[j + 1])
        seg = v[a:b]
        i_rel = int(np.argmax(seg))
        true_pk = float(seg[i_rel])
        hold = (b - a) / sample_rate
        captured = capture_model(max(true_pk, 0.0), params.f0, ni, hold)
        t_pk = (a + i_rel) / sample_rate
        if j == 0:
            captured_v0 = captured
            if captured_v0 <= 0:
                raise SimulationError(
                    "captured initial amplitude is zero; no threshold can be formed"
                )
            thr = _signed_threshold(
                captured_v0,
                config.k,
                s_div * ni.divider_error,
                s_cmp * ni.comparator_offset,
            )
            rows.append(TraceRow(0, t_pk, true_pk, captured, thr, captured > thr))
            continue
        enable = captured > thr
        rows.append(TraceRow(j, t_pk, true_pk, captured, thr, enable))
        if not enable:
            stopped = True
            break
        counted += 1
    if not stopped:
        raise SimulationError(
            "signal decayed to the end of the simulation budget without the "
            "stop logic completing; the threshold is unreachable or buried "
            "in the noise floor"
        )

    n = counted + 1 if config.convention is Convention.FIRST_AT_OR_BELOW else counted
    if n < 1:
        raise SimulationError(
            "threshold crossed within the first pseudo-period; no decay was counted"
        )
    q = q_from_count_shortcut(n) if config.shortcut else q_from_count(n, config.k)
    result = MeasurementResult(
        n=n,
        q_measured=q,
        t_measure=n * dyn.pseudo_period,
        relative_error=(q - params.q) / params.q,
        threshold_used=thr,
    )
    return result, SimTrace(rows=rows, captured_v0=captured_v0, threshold=thr)
