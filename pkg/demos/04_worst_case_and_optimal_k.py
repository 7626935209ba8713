"""Worst-case error envelope, the optimal division factor, and Monte Carlo.

Sweeps the aligned-sign error corners over (k, Q), shows why an interior
k minimizes the worst case once offsets are in play, and compares the
corner envelope against independent uniform draws.  Renders the envelope
to out/worst_case.svg.

Run: python3 demos/04_worst_case_and_optimal_k.py
"""

from pathlib import Path

import numpy as np

from qfm import (
    CircuitNonIdealities,
    MeasurementConfig,
    ResonatorParams,
    monte_carlo,
    optimal_k,
    worst_case_sweep,
    write_svg,
)

OUT = Path(__file__).parent / "out"

# pessimistic threshold-side budget: 1% divider error, 10 mV offset
BUDGET = CircuitNonIdealities(comparator_offset=10e-3, divider_error=0.01)
F0 = 50e3


def main():
    OUT.mkdir(exist_ok=True)

    table = worst_case_sweep([2.0, 4.0, 6.0, 8.0, 16.0], (100.0, 1000.0, 1.0),
                             BUDGET, f0=F0)
    table.to_csv(OUT / "worst_case.csv")
    write_svg(table, OUT / "worst_case.svg", x="q_true", series="k",
              title="worst-case error, 1% divider + 10 mV offset")
    print(f"wrote {len(table)} rows to {OUT/'worst_case.csv'} and worst_case.svg")

    print("\nmax worst-case |error| over Q in [100, 1000]:")
    err = table.column("rel_error")
    ks = table.column("k")
    for k in (2.0, 4.0, 6.0, 8.0, 16.0):
        print(f"  k = {k:>4}: {100*np.max(np.abs(err[ks == k])):6.3f} %")

    k_star = optimal_k((100.0, 1000.0, 0.05), BUDGET,
                       np.arange(2.0, 20.01, 0.25), f0=F0)
    print(f"\noptimal k on a 0.25 grid over [2, 20]: k* = {k_star}")
    k_ideal = optimal_k((100.0, 1000.0, 0.05), CircuitNonIdealities(),
                        np.arange(2.0, 20.01, 0.25), f0=F0)
    print(f"with a perfect circuit the same search keeps growing k: k* = {k_ideal}")

    print("\nMonte Carlo, 10000 draws uniform within the budget (Q = 300, k = 6):")
    summary = monte_carlo(ResonatorParams(F0, 300.0, 1.0), MeasurementConfig(6.0),
                          BUDGET, trials=10_000, seed=1)
    print(f"  mean {100*summary.mean_error:+.3f} %   std {100*summary.std_error:.3f} %")
    print(f"  range [{100*summary.min_error:+.3f}, {100*summary.max_error:+.3f}] %")
    corner = worst_case_sweep([6.0], (300.0, 300.0, 1.0), BUDGET, f0=F0,
                              exhaustive=True)
    print(f"  exhaustive corner envelope at Q=300: "
          f"{100*abs(corner.rows[0][4]):.3f} % (contains every draw)")


if __name__ == "__main__":
    main()
