"""Closed-form ring-down response and its peak sequence.

Evaluates the damped step response of an underdamped resonator, shows
that the maxima sit on an exact geometric envelope at pseudo-period
spacing, and writes a sampled trace to out/ringdown.csv.

Run: python3 demos/01_ringdown_basics.py
"""

import math
from pathlib import Path

from qfm import (
    ResonatorParams,
    derive_dynamics,
    eval_response,
    peak_time,
    peak_value,
    synth_waveform,
    waveform_to_csv,
)

OUT = Path(__file__).parent / "out"

F0 = 50e3   # Hz
Q = 300.0
V0 = 1.0    # V


def main():
    OUT.mkdir(exist_ok=True)
    params = ResonatorParams(f0=F0, q=Q, v0=V0)
    dyn = derive_dynamics(params)

    print(f"device: f0 = {F0/1e3:.0f} kHz, Q = {Q:.0f}, V0 = {V0:.1f} V")
    print(f"decay rate alpha      = {dyn.alpha:.4f} rad/s")
    print(f"damped frequency      = {dyn.omega_d/(2*math.pi):.4f} Hz")
    print(f"pseudo-period T       = {dyn.pseudo_period*1e6:.6f} us "
          f"(resonant period {1e6/F0:.6f} us)")

    ratio = peak_value(params, 1) / peak_value(params, 0)
    print(f"\nconsecutive peak ratio = {ratio:.6f} "
          f"(= exp(-pi / (Q sqrt(1 - 1/(4Q^2)))))")

    print("\nfirst maxima (closed form vs direct evaluation):")
    print(f"{'m':>4} {'t_m [us]':>12} {'peak [V]':>10} {'V(t_m) [V]':>11}")
    for m in (0, 1, 2, 10, 100, 171):
        t_m = peak_time(params, m)
        print(f"{m:>4} {t_m*1e6:>12.4f} {peak_value(params, m):>10.6f} "
              f"{eval_response(params, t_m):>11.6f}")

    wave = synth_waveform(params, sample_rate=5e6, duration=5e-3)
    path = OUT / "ringdown.csv"
    waveform_to_csv(wave, path)
    print(f"\nwrote {len(wave)} samples to {path}")


if __name__ == "__main__":
    main()
