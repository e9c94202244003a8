"""
Spectral observables: order parameter, thresholds, EP fits, trajectories,
bandwidth criterion and localization metrics.
"""

import math

import numpy as np
import pytest

from models.experiment import ModelParameters
from models.results import LocalizationRecord
from services.spectral_analytics import (
    bandwidth_criterion,
    classify_spectrum,
    complex_count,
    critical_parameter,
    default_eps_im,
    detect_eps,
    envelope_exponent,
    envelope_ranks,
    fit_square_root,
    mean_positions,
    rank_matched_deviation,
    scale_free_fits,
    scale_invariance,
    spectrum_along,
    sweep_records,
    threshold_lambda_c,
    trajectory,
)
from services.sweep_runner import run_points
from utils.errors import BracketError


class TestOrderParameter:

    def test_classify(self):
        counts = classify_spectrum([1.0, 1.0 + 1.0j, 1.0 - 1.0j, 2.0], eps_im=1e-8)
        assert counts == {"n_com": 2, "p_com": 0.5, "max_abs_im": 1.0}

    def test_empty_spectrum(self):
        assert classify_spectrum([], eps_im=1e-8)["p_com"] == 0.0

    def test_threshold_must_be_positive(self):
        with pytest.raises(ValueError):
            classify_spectrum([1.0], eps_im=0.0)

    def test_default_threshold_scales_with_radius(self):
        assert default_eps_im(np.array([0.1, -0.2])) == pytest.approx(1e-8)
        assert default_eps_im(np.array([3.0, -1.0 + 4.0j])) == pytest.approx(math.sqrt(17.0) * 1e-8)

    def test_sweep_is_sorted_and_broken_past_two(self, minimal, minimal_params):
        records = sweep_records(minimal, minimal_params(1.0, 2), "lam", [2.5, 0.5, 1.5])
        assert [r.parameter for r in records] == [0.5, 1.5, 2.5]
        assert [r.n_com for r in records] == [0, 0, 2]
        assert records[-1].p_com == 1.0

    def test_pbc_sweep_stays_real(self, minimal, minimal_params):
        records = sweep_records(minimal, minimal_params(1.0, 16, eta=1.0), "lam", np.linspace(0.1, 3.0, 6))
        assert all(record.n_com == 0 for record in records)

    def test_sweep_over_boundary_knob(self, minimal, minimal_params):
        records = sweep_records(minimal, minimal_params(1.0, 8), "eta", [0.0, 1.0])
        assert [r.parameter for r in records] == [0.0, 1.0]


class TestThreshold:

    def test_two_site_threshold_is_two(self, minimal, minimal_params):
        threshold = threshold_lambda_c(minimal, minimal_params(1.0, 2), (1.0, 3.0))
        assert abs(threshold - 2.0) < 1e-4

    def test_bracket_without_transition(self, minimal, minimal_params):
        with pytest.raises(BracketError):
            threshold_lambda_c(minimal, minimal_params(1.0, 2), (0.5, 1.5))

    def test_reversed_bracket(self, minimal, minimal_params):
        with pytest.raises(BracketError):
            threshold_lambda_c(minimal, minimal_params(1.0, 2), (3.0, 1.0))

    def test_threshold_is_first_onset_of_the_grid(self, minimal, minimal_params):
        params = minimal_params(1.0, 8)
        grid = np.linspace(1.0, 3.0, 41)
        records = sweep_records(minimal, params, "lam", grid)
        first = next(i for i, record in enumerate(records) if record.n_com > 0)
        threshold = threshold_lambda_c(minimal, params, (1.0, 3.0), scan_points=41)
        assert grid[first - 1] <= threshold <= grid[first]

    def test_threshold_ignores_later_recombination(self, minimal, minimal_params):
        params = minimal_params(1.0, 8)
        records = sweep_records(minimal, params, "lam", np.linspace(1.0, 3.0, 41))
        first_broken = next(record.parameter for record in records if record.n_com > 0)
        for high in (2.2, 2.6, 3.0):
            if high >= first_broken:
                assert threshold_lambda_c(minimal, params, (1.0, high)) <= first_broken

    def test_complex_count(self, minimal, minimal_params):
        assert complex_count(minimal, minimal_params(2.5, 2)) == 2
        assert complex_count(minimal, minimal_params(1.0, 2)) == 0


class TestExceptionalPoints:

    def test_fit_square_root_on_exact_branch(self):
        points = [(1.0 + d, 3.0 * math.sqrt(d)) for d in np.linspace(0.01, 0.1, 10)]
        exponent, prefactor, misfit = fit_square_root(points, 1.0)
        assert exponent == pytest.approx(0.5)
        assert prefactor == pytest.approx(3.0)
        assert misfit < 1e-12

    def test_two_site_ep(self, minimal, minimal_params):
        params = minimal_params(1.0, 2)
        values = 1.505 + 0.01 * np.arange(101)
        records = sweep_records(minimal, params, "lam", values)

        eps = detect_eps(records, spectrum_along(minimal, params, "lam"))
        assert len(eps) == 1
        ep = eps[0]
        assert ep.fit_ok
        assert abs(ep.lambda_ep - 2.0) < 1e-4
        assert ep.pair == (0, 1)
        assert abs(ep.fit_exponent - 0.5) < 0.02
        assert ep.fit_residual < 0.05

    def test_unbroken_sweep_has_no_eps(self, minimal, minimal_params):
        records = sweep_records(minimal, minimal_params(1.0, 12, eta=1.0), "lam", np.linspace(0.0, 1.0, 11))
        assert detect_eps(records) == []

    def test_every_onset_is_reported_from_the_first(self, minimal, minimal_params):
        params = minimal_params(1.0, 12)
        grid = np.linspace(1.3, 2.5, 61)
        records = sweep_records(minimal, params, "lam", grid)
        onsets = [i for i in range(1, len(records)) if records[i].n_com > records[i - 1].n_com]

        eps = detect_eps(records, spectrum_along(minimal, params, "lam"))
        assert len(eps) == len(onsets)
        assert grid[onsets[0] - 1] <= eps[0].lambda_ep <= grid[onsets[0]]
        for ep in eps:
            assert ep.fit_ok or ep.note

    def test_unfittable_onset_is_kept(self, minimal, minimal_params):
        records = sweep_records(minimal, minimal_params(1.0, 2), "lam", np.linspace(1.5, 2.05, 12))
        eps = detect_eps(records)
        assert len(eps) == 1
        assert not eps[0].fit_ok
        assert math.isnan(eps[0].fit_exponent)
        assert eps[0].note


class TestTrajectory:

    def test_two_site_pair_leaves_circle_past_collision(self, minimal, minimal_params):
        values = 0.05 + 0.1 * np.arange(25)
        points = trajectory(minimal, minimal_params(1.0, 2), values)
        assert len(points) == 25
        for point in points:
            assert abs(point.product_modulus - 1.0) < 1e-8
            if point.parameter < 2.0:
                assert abs(abs(point.xi1) - 1.0) < 1e-8
            else:
                assert abs(abs(point.xi1) - 1.0) > 1e-3

    def test_pair_stays_partnered_through_a_cascade(self, minimal, minimal_params):
        params = minimal_params(1.0, 6)
        values = np.linspace(0.0, 3.0, 61)
        points = trajectory(minimal, params, values)
        onset = threshold_lambda_c(minimal, params, (0.5, 3.0))
        for point in points:
            assert abs(point.product_modulus - 1.0) <= 1e-8
            if abs(abs(point.xi1) - 1.0) > 1e-3:
                assert point.parameter >= onset - 1e-3
        assert any(abs(abs(point.xi1) - 1.0) > 1e-3 for point in points)

    def test_explicit_pair(self, minimal, minimal_params):
        points = trajectory(minimal, minimal_params(1.0, 4), [0.2, 0.4], pair=(0, 3))
        assert [p.parameter for p in points] == [0.2, 0.4]

    def test_empty_grid(self, minimal, minimal_params):
        with pytest.raises(ValueError):
            trajectory(minimal, minimal_params(1.0, 2), [])


class TestBandwidthCriterion:

    def test_minimal_critical_lambda(self, minimal, minimal_params):
        critical = critical_parameter(minimal, minimal_params(1.0, 20), (0.5, 3.0))
        assert critical == pytest.approx(np.pi / 2.0, rel=1e-8)

    def test_minimal_report(self, minimal, minimal_params):
        report = bandwidth_criterion(minimal, minimal_params(1.0, 20))
        assert report.bandwidths == pytest.approx([4.0])
        assert report.criterion == "band"
        assert not report.predicted_critical

    def test_type1_critical_hopping(self, type1):
        critical = critical_parameter(type1, type1.resolve(ModelParameters()), (1.0, 5.0))
        assert critical == pytest.approx(math.sqrt(np.pi ** 2 - 1.0), rel=1e-8)

    def test_type2_total_width(self, type2):
        report = bandwidth_criterion(type2, type2.resolve(ModelParameters(t1=0.0, t2=0.5)))
        assert report.criterion == "total"
        assert report.total_bandwidth == pytest.approx(4.0)
        assert report.relevant_width == report.total_bandwidth

    def test_no_crossing(self, minimal, minimal_params):
        with pytest.raises(BracketError):
            critical_parameter(minimal, minimal_params(1.0, 20), (0.1, 1.0))


class TestLocalization:

    def test_mean_positions(self):
        sites = 5
        vectors = np.zeros((sites, 2), dtype=complex)
        vectors[0, 0] = 1.0
        vectors[:, 1] = 1.0 / math.sqrt(sites)
        record = mean_positions(vectors, sites, quasienergies=np.array([0.3j, -0.1j]))
        np.testing.assert_allclose(record.mean_positions, [3.0, 1.0])
        np.testing.assert_allclose(record.quasienergies.imag, [-0.1, 0.3])

    def test_rows_must_match_lattice(self):
        with pytest.raises(ValueError):
            mean_positions(np.eye(4), sites=3)

    def test_envelope_exponent(self):
        sites, alpha = 200, 5.0
        amplitudes = np.exp(alpha * np.arange(1, sites + 1) / sites)
        assert envelope_exponent(amplitudes) == pytest.approx(alpha, rel=1e-8)

    def test_envelope_ranks(self):
        assert envelope_ranks(10, 3) == [5, 7, 9]
        assert envelope_ranks(10, 0) == []

    def test_off_centre_and_rank_matching(self):
        small = LocalizationRecord(sites=10, band_dim=1, quasienergies=np.zeros(2), mean_positions=np.array([5.0, 8.0]))
        large = LocalizationRecord(sites=20, band_dim=1, quasienergies=np.zeros(2), mean_positions=np.array([10.0, 16.0]))
        assert scale_invariance({10: small, 20: large}) == {10: 0.5, 20: 0.5}
        assert rank_matched_deviation(small, large) == pytest.approx(0.0)

    def test_scale_free_fit(self, minimal, minimal_params):
        fit = scale_free_fits(minimal, minimal_params(3.0, 20), [40, 20], envelope_states=2)
        assert fit.sizes == [20, 40]
        assert fit.lam == pytest.approx(3.0)
        assert -1.6 < fit.slope < -0.4
        assert fit.envelopes[40].shape == (2, 40)
        assert fit.localization[20].alphas.shape == (20,)

    def test_scale_free_needs_two_sizes(self, minimal, minimal_params):
        with pytest.raises(ValueError):
            scale_free_fits(minimal, minimal_params(3.0, 20), [20])


def _square(value):
    return value * value


class TestSweepRunner:

    def test_in_process_order(self):
        assert run_points(_square, [3, 1, 2]) == [9, 1, 4]

    def test_pool_matches_in_process(self):
        assert run_points(_square, [3, 1, 2, 5], workers=2) == [9, 1, 4, 25]

    def test_sort_key(self):
        assert run_points(_square, [3, 1, 2], sort_key=lambda r: r) == [1, 4, 9]

    def test_workers_must_be_positive(self):
        with pytest.raises(ValueError):
            run_points(_square, [1], workers=0)
