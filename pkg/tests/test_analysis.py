"""Sweeps and statistics: corner envelopes, the interior optimum of the
division factor, frequency regimes, and Monte Carlo containment."""

import numpy as np
import pytest

from qfm import (
    CircuitNonIdealities,
    Convention,
    MeasurementConfig,
    ResonatorParams,
    SignAlignment,
    monte_carlo,
    optimal_k,
    pessimistic_nonidealities,
    predicted_measurement,
    theoretical_error_sweep,
    worst_case_sweep,
    frequency_sweep,
)

LAST = Convention.LAST_ABOVE
IDEAL = CircuitNonIdealities()
PAIR = CircuitNonIdealities(comparator_offset=10e-3, divider_error=0.01)
F0 = 50e3


def cell_errors(table, k):
    err = table.column("rel_error")
    ks = table.column("k")
    return err[ks == k]


class TestWorstCaseSweep:
    def test_zero_magnitudes_reduce_to_theoretical(self):
        span = (100.0, 140.0, 0.5)
        wc = worst_case_sweep([4.0, 6.0], span, IDEAL, f0=F0)
        th = theoretical_error_sweep([4.0, 6.0], span)
        assert wc.columns == th.columns
        assert len(wc) == len(th)
        for a, b in zip(wc.rows, th.rows):
            assert a[0] == b[0] and a[1] == b[1] and a[2] == b[2]
            assert a[4] == pytest.approx(b[4], rel=1e-12)

    def test_matches_scalar_predicted_per_corner(self):
        table = worst_case_sweep([6.0], (290.0, 310.0, 2.5), PAIR, f0=F0)
        for k, q_true, n, qm, err in table.rows:
            corner_errs = {}
            for sign in (SignAlignment.PLUS, SignAlignment.MINUS):
                ni = CircuitNonIdealities(
                    comparator_offset=10e-3, divider_error=0.01, worst_case_sign=sign
                )
                r = predicted_measurement(
                    ResonatorParams(F0, q_true, 1.0), MeasurementConfig(k, LAST), ni
                )
                corner_errs[sign] = r
            worst = max(corner_errs.values(), key=lambda r: abs(r.relative_error))
            assert n == worst.n
            assert err == pytest.approx(worst.relative_error, rel=1e-12)

    def test_interior_k_beats_extremes_over_range(self):
        # over Q in [100, 1000] the k=6 worst case undercuts both a small
        # k (quantization-dominated at low Q) and a large k (offset
        # against a low threshold)
        span = (100.0, 1000.0, 0.5)
        worst = {
            k: np.nanmax(np.abs(cell_errors(worst_case_sweep([k], span, PAIR, f0=F0), k)))
            for k in (2.0, 6.0, 20.0)
        }
        assert worst[6.0] < worst[2.0]
        assert worst[6.0] < worst[20.0]

    def test_worst_case_dominates_ideal_pointwise(self):
        span = (100.0, 400.0, 1.0)
        wc = worst_case_sweep([4.0, 6.0, 8.0], span, PAIR, f0=F0)
        th = theoretical_error_sweep([4.0, 6.0, 8.0], span)
        assert np.all(
            np.abs(wc.column("rel_error")) >= np.abs(th.column("rel_error")) - 1e-15
        )

    def test_exhaustive_envelope_contains_aligned(self):
        span = (200.0, 400.0, 5.0)
        aligned = worst_case_sweep([6.0], span, PAIR, f0=F0)
        full = worst_case_sweep([6.0], span, PAIR, f0=F0, exhaustive=True)
        assert np.all(
            np.abs(full.column("rel_error")) >= np.abs(aligned.column("rel_error")) - 1e-15
        )

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            worst_case_sweep([], (100.0, 200.0, 1.0), PAIR, f0=F0)

    def test_failed_cells_marked_not_nan(self):
        # an opamp offset that holds every captured maximum above any
        # reachable threshold fails both corners; rows survive as markers
        ni = CircuitNonIdealities(opamp_offset=0.5)
        table = worst_case_sweep([6.0], (100.0, 102.0, 1.0), ni, f0=F0)
        assert len(table) == 3
        assert all(r[2] is None for r in table.rows)
        assert "NA,NA,NA" in table.to_csv_string()
        assert "nan" not in table.to_csv_string()


class TestOptimalK:
    def test_paper_magnitudes_interior_optimum(self):
        k_grid = np.arange(2.0, 20.01, 0.25)
        k_star = optimal_k((100.0, 1000.0, 0.05), PAIR, k_grid, f0=F0)
        assert 4.0 <= k_star <= 8.0

    def test_zero_magnitudes_pick_grid_max(self):
        k_grid = np.arange(2.0, 20.01, 0.25)
        k_star = optimal_k((100.0, 1000.0, 0.05), IDEAL, k_grid, f0=F0)
        assert k_star == 20.0

    def test_stable_under_grid_refinement(self):
        k_grid = np.arange(2.0, 20.01, 0.25)
        coarse = optimal_k((100.0, 1000.0, 0.05), PAIR, k_grid, f0=F0)
        fine = optimal_k((100.0, 1000.0, 0.025), PAIR, k_grid, f0=F0)
        assert coarse == fine

    def test_single_element_grid(self):
        assert optimal_k((100.0, 200.0, 1.0), PAIR, [5.5], f0=F0) == 5.5

    def test_rejects_empty_grid(self):
        with pytest.raises(ValueError):
            optimal_k((100.0, 200.0, 1.0), PAIR, [], f0=F0)


class TestFrequencySweep:
    def test_regime_ordering_with_calibrated_budget(self):
        ni = pessimistic_nonidealities()
        table = frequency_sweep(
            300.0, 6.0, [1e3, 1e4, 5e5, 2e6], ni, samples_per_period=40
        )
        err = np.abs(table.column("rel_error"))
        assert err[0] > err[1]  # leakage regime at the low end
        assert err[3] > err[2]  # detector failure at the high end

    def test_zero_nonidealities_flat(self):
        table = frequency_sweep(
            300.0, 6.0, [100.0, 1e3, 5e4, 1e6, 4e6], IDEAL, samples_per_period=40
        )
        n = table.column("n")
        assert np.all(n == n[0])

    def test_failed_points_get_na_rows(self):
        # past the detector's reach the run cannot complete; the row stays
        ni = CircuitNonIdealities(
            diode_residual=1.2, f_fail=1e5, detector_bandwidth=1e6
        )
        table = frequency_sweep(300.0, 6.0, [5e4, 4e6], ni, samples_per_period=40)
        assert len(table) == 2
        assert table.rows[0][1] is not None
        assert table.rows[1][1] is None
        text = table.to_csv_string()
        assert "NA,NA,NA" in text

    def test_rejects_bad_axis_and_signs(self):
        with pytest.raises(ValueError):
            frequency_sweep(300.0, 6.0, [], IDEAL)
        with pytest.raises(ValueError):
            frequency_sweep(300.0, 6.0, [2e3, 1e3], IDEAL)
        with pytest.raises(ValueError):
            frequency_sweep(300.0, 6.0, [1e3, -2e3], IDEAL)
        ni = CircuitNonIdealities(worst_case_sign=SignAlignment.INDEPENDENT)
        with pytest.raises(ValueError):
            frequency_sweep(300.0, 6.0, [1e3, 2e3], ni)


class TestMonteCarlo:
    PARAMS = ResonatorParams(F0, 300.0, 1.0)
    CONFIG = MeasurementConfig(6.0, LAST)

    def test_zero_width_distributions(self):
        summary = monte_carlo(self.PARAMS, self.CONFIG, IDEAL, trials=50, seed=1)
        deterministic = predicted_measurement(self.PARAMS, self.CONFIG, IDEAL)
        assert summary.std_error == 0.0
        assert summary.mean_error == pytest.approx(deterministic.relative_error, rel=1e-12)
        assert summary.failures == 0

    def test_determinism(self):
        a = monte_carlo(self.PARAMS, self.CONFIG, PAIR, trials=500, seed=21)
        b = monte_carlo(self.PARAMS, self.CONFIG, PAIR, trials=500, seed=21)
        assert a == b
        c = monte_carlo(self.PARAMS, self.CONFIG, PAIR, trials=500, seed=22)
        assert a != c

    def test_exhaustive_corner_envelope_contains_samples(self):
        # every signed error source is monotone in the stop count, so the
        # full corner search bounds any draw inside the box
        summary = monte_carlo(self.PARAMS, self.CONFIG, PAIR, trials=10_000, seed=3)
        envelope = worst_case_sweep(
            [6.0], (300.0, 300.0, 1.0), PAIR, f0=F0, exhaustive=True
        )
        bound = abs(envelope.rows[0][4])
        assert max(abs(summary.min_error), abs(summary.max_error)) <= bound + 1e-15

    def test_histogram_well_formed(self):
        s = monte_carlo(self.PARAMS, self.CONFIG, PAIR, trials=1000, seed=5)
        assert len(s.hist_counts) == 20
        assert len(s.hist_edges) == 21
        assert sum(s.hist_counts) == 1000 - s.failures

    def test_gaussian_option(self):
        g = monte_carlo(
            self.PARAMS, self.CONFIG, PAIR, trials=4000, seed=9, distribution="gaussian"
        )
        u = monte_carlo(self.PARAMS, self.CONFIG, PAIR, trials=4000, seed=9)
        # magnitudes are sigmas under gaussian draws, so tails reach past
        # the uniform bounds
        assert g.min_error < u.min_error
        assert g != u
        with pytest.raises(ValueError):
            monte_carlo(self.PARAMS, self.CONFIG, PAIR, 10, 0, distribution="cauchy")

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            monte_carlo(self.PARAMS, self.CONFIG, PAIR, trials=0, seed=0)
