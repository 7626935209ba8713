"""The pseudo-period counting measurement and its quantization ripple.

Counts how many pseudo-periods the envelope needs to fall from V0 to
V0/k, recovers Q from the count, and sweeps the true Q to expose the
sawtooth quantization error for several division factors.  Renders the
sweep to out/quantization_ripple.svg.

Run: python3 demos/02_counting_measurement.py
"""

from pathlib import Path

from qfm import (
    Convention,
    MeasurementConfig,
    ResonatorParams,
    count_pseudo_periods,
    q_from_count,
    q_from_count_shortcut,
    theoretical_error,
    theoretical_error_sweep,
    write_svg,
)

OUT = Path(__file__).parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    params = ResonatorParams(f0=50e3, q=300.0, v0=1.0)

    print("stop conventions at Q = 300, k = 6:")
    for conv in Convention:
        config = MeasurementConfig(6.0, conv)
        n = count_pseudo_periods(params, config)
        err = theoretical_error(300.0, config)
        print(f"  {conv.value:<18} n = {n:>3}  Q = {q_from_count(n, 6.0):8.4f}  "
              f"error = {100*err:+.4f} %")

    print("\nhardware-free conversion at k = 4.81 (ln k is pi/2 to 4 digits):")
    for n in (25, 150, 1000):
        exact = q_from_count(n, 4.81)
        short = q_from_count_shortcut(n)
        print(f"  n = {n:>4}: exact {exact:9.3f}   2n = {short:6.0f}   "
              f"diff {100*abs(short-exact)/exact:.4f} %")

    table = theoretical_error_sweep([2.0, 4.0, 6.0, 8.0, 16.0], (10.0, 1000.0, 1.0))
    csv_path = OUT / "quantization_ripple.csv"
    svg_path = OUT / "quantization_ripple.svg"
    table.to_csv(csv_path)
    write_svg(table, svg_path, x="q_true", series="k",
              title="count quantization error vs true Q")
    print(f"\nwrote {len(table)} sweep rows to {csv_path}")
    print(f"rendered {svg_path}")

    # the ripple shrinks as 1/(Q ln k): larger k or higher Q help
    for k in (2.0, 16.0):
        sub = [abs(r[4]) for r in table.rows if r[0] == k and 450 <= r[1] <= 550]
        print(f"  max |error| near Q=500 at k={k:>4}: {100*max(sub):.3f} %")


if __name__ == "__main__":
    main()
