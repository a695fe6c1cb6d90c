"""Validity metrics on synthetic fields plus the radial benchmark sweep."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontlab.errors import ProjectionAmbiguous
from frontlab.grids import Coefficients, GridSpec
from frontlab.interface import PolylineInterface, extract_front
from frontlab.kinetics import KineticsParams
from frontlab.metrics import (
    REPORT_COLUMNS,
    ErrorReport,
    SweepResult,
    _fit_rate,
    convergence_sweep,
    fit_sandwich,
    generation_window,
    graph_over_gamma,
    profile_error_ii,
    profile_error_iii,
    sandwich_check,
)
from frontlab.solver import Field
from frontlab.wave import AnsatzProfile, solve_standing_wave

# sweep benchmark kinetics: the mirror pair scaled by 4, which leaves the
# equilibria, separatrix, and interface law alone but doubles the tail
# decay rate so eps=0.1 sits in the same error regime as eps=0.025
P_BENCH = KineticsParams(D1=1.0, D2=1.0, R1=4.0, R2=4.0, a1=4.0, b1=8.0, a2=8.0, b2=4.0)


@pytest.fixture(scope="module")
def wave_sym(p_sym, h_sym):
    return solve_standing_wave(p_sym, h=h_sym)


def _ansatz_field(wave, eps, R, time=0.0, r_max=1.0):
    """Radial field that is exactly the ansatz centered at radius R."""
    grid = GridSpec.radial(r_max, eps / 8.0, dim=2)
    c = Coefficients.homogeneous(grid, 1.0, 1.0)
    ansatz = AnsatzProfile(wave=wave, K_of_x=c.K_at)
    r = grid.nodes()
    u, v = ansatz((r - R) / eps, r)
    f = Field(grid=grid, u=np.asarray(u, dtype=float), v=np.asarray(v, dtype=float),
              time=time, epsilon=eps)
    return f, ansatz


def _circle(radius, n=256, center=(0.0, 0.0)):
    t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return PolylineInterface(
        np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])
    )


def _report(eps, **overrides):
    base = dict(
        epsilon=eps, t0=0.01, T=0.04,
        E_ii_u=0.1, E_ii_v=0.1, E_iii_u=0.1, E_iii_v=0.1,
        d_H_max=0.01, eta_sup=0.01, grad_eta_sup=0.0, theta_sup=0.5,
        A1_fit=1.0, A2_fit=0.1, A3_fit=0.1,
    )
    base.update(overrides)
    return ErrorReport(**base)


class TestGenerationWindow:
    def test_acceptance_scale_clamps_to_half_horizon(self):
        # 10 * 0.01 * |ln 0.1| = 0.23 exceeds T = 0.04 entirely
        t0, T = generation_window(0.1, 0.04)
        assert t0 == pytest.approx(0.02)
        assert T == 0.04

    def test_small_epsilon_uses_the_rule(self):
        t0, T = generation_window(0.01, 1.0)
        assert t0 == pytest.approx(10.0 * 1e-4 * abs(np.log(0.01)), rel=1e-12)
        assert T == 1.0

    def test_mu_scales_the_rule(self):
        t0_1, _ = generation_window(0.01, 1.0, mu=1.0)
        t0_2, _ = generation_window(0.01, 1.0, mu=2.0)
        assert t0_2 == pytest.approx(2.0 * t0_1, rel=1e-12)

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 1.5])
    def test_epsilon_outside_unit_interval_rejected(self, eps):
        with pytest.raises(ValueError):
            generation_window(eps, 0.04)

    def test_nonpositive_horizon_rejected(self):
        with pytest.raises(ValueError):
            generation_window(0.1, 0.0)


class TestReportTypes:
    def test_row_matches_column_order(self):
        r = _report(0.1)
        row = r.row()
        assert len(row) == len(REPORT_COLUMNS)
        assert row[REPORT_COLUMNS.index("eps")] == 0.1
        assert row[REPORT_COLUMNS.index("theta_sup")] == 0.5
        assert row[REPORT_COLUMNS.index("A3_fit")] == 0.1

    def test_negative_and_nonfinite_fields_rejected(self):
        with pytest.raises(ValueError):
            _report(0.1, E_ii_u=-1e-3)
        with pytest.raises(ValueError):
            _report(0.1, d_H_max=float("nan"))

    def test_sweep_result_requires_decreasing_epsilon(self):
        with pytest.raises(ValueError):
            SweepResult(reports=(_report(0.05), _report(0.1)), rates={})
        SweepResult(reports=(_report(0.1), _report(0.05)), rates={})


class TestProfileErrors:
    def test_exact_ansatz_field_has_vanishing_error(self, wave_sym, h_sym):
        f, ansatz = _ansatz_field(wave_sym, 0.05, 0.35)
        front = extract_front(f, h_sym)
        err_u, err_v = profile_error_ii([f], [front], ansatz)
        assert err_u < 1e-6
        assert err_v < 1e-6

    def test_error_centers_on_the_extracted_front(self, wave_sym, h_sym):
        # the field's own front is what the error is measured against, so
        # displacing the whole layer must not register
        f, ansatz = _ansatz_field(wave_sym, 0.05, 0.35 + 2.5 * 0.05)
        front = extract_front(f, h_sym)
        err_u, err_v = profile_error_ii([f], [front], ansatz)
        assert err_u < 1e-6
        assert err_v < 1e-6

    def test_mismatched_lengths_rejected(self, wave_sym, h_sym):
        f, ansatz = _ansatz_field(wave_sym, 0.05, 0.35)
        with pytest.raises(ValueError):
            profile_error_ii([f], [], ansatz)
        with pytest.raises(ValueError):
            profile_error_iii([f], [], [0.35], ansatz)

    def test_matching_limit_gives_zero_shift(self, wave_sym, h_sym):
        f, ansatz = _ansatz_field(wave_sym, 0.05, 0.35)
        front = extract_front(f, h_sym)
        err_u, err_v, theta = profile_error_iii([f], [front], [0.35], ansatz)
        assert theta < 1e-6
        assert err_u < 1e-6
        assert err_v < 1e-6

    def test_displaced_front_reports_its_shift(self, wave_sym, h_sym):
        # front at R + delta, limit at R: theta = -d_eps/eps on the limit
        # circle is +delta/eps, and the shifted ansatz re-centers exactly
        eps, R, delta = 0.05, 0.35, 0.04
        f, ansatz = _ansatz_field(wave_sym, eps, R + delta)
        front = extract_front(f, h_sym)
        err_u, err_v, theta = profile_error_iii([f], [front], [R], ansatz)
        assert theta == pytest.approx(delta / eps, rel=1e-5)
        assert err_u < 1e-6
        assert err_v < 1e-6


class TestGraphOverGamma:
    def test_scalar_radius_gap(self):
        eta, grad = graph_over_gamma(np.array([0.45]), 0.25)
        assert eta == pytest.approx(0.2, abs=1e-15)
        assert grad == 0.0

    def test_scalar_takes_nearest_crossing(self):
        eta, _ = graph_over_gamma(np.array([0.3, 0.6]), 0.25)
        assert eta == pytest.approx(0.05, abs=1e-15)

    def test_concentric_circles_offset(self):
        eta, grad = graph_over_gamma(_circle(0.45), _circle(0.3))
        assert eta == pytest.approx(0.15, abs=1e-4)
        assert grad < 1e-3

    def test_identical_curves(self):
        eta, grad = graph_over_gamma(_circle(0.3), _circle(0.3))
        assert eta < 1e-10
        assert grad < 1e-8

    def test_translated_circle_modulates_eta(self):
        delta = 0.05
        eta, grad = graph_over_gamma(_circle(0.3, center=(delta, 0.0)), _circle(0.3))
        assert eta == pytest.approx(delta, rel=0.03)
        assert grad > 1e-4

    def test_band_too_narrow_is_ambiguous(self):
        with pytest.raises(ProjectionAmbiguous):
            graph_over_gamma(_circle(0.45), _circle(0.3), band=0.05)

    def test_scalar_limit_needs_scalar_or_polyline_pairing(self):
        with pytest.raises(ValueError):
            graph_over_gamma(np.array([0.45]), _circle(0.3))


class TestSandwich:
    def test_exact_field_fits_any_band(self, wave_sym):
        f, ansatz = _ansatz_field(wave_sym, 0.05, 0.35)
        assert sandwich_check([f], [0.35], ansatz, 0.5, 0.1, 0.1) == 0
        # equality at the band edge counts as inside
        assert sandwich_check([f], [0.35], ansatz, 0.0, 0.0, 0.0) == 0

    def test_depressed_field_violates_zero_band(self, wave_sym):
        f, ansatz = _ansatz_field(wave_sym, 0.05, 0.35)
        g = Field(grid=f.grid, u=f.u - 0.05, v=f.v, time=0.0, epsilon=f.epsilon)
        assert sandwich_check([g], [0.35], ansatz, 0.0, 0.0, 0.0) > 0

    def test_negative_constants_rejected(self, wave_sym):
        f, ansatz = _ansatz_field(wave_sym, 0.05, 0.35)
        with pytest.raises(ValueError):
            sandwich_check([f], [0.35], ansatz, -0.1, 0.0, 0.0)

    def test_fit_floors_at_the_grid_quantum(self, wave_sym):
        # an exact ansatz field needs no band at all; the fit must report
        # its resolution, not zero (the refinement step is 0.0125 when
        # the coarse minimum sits at the origin)
        f, ansatz = _ansatz_field(wave_sym, 0.05, 0.35)
        A1, A2, A3 = fit_sandwich([f], [0.35], ansatz)
        assert A1 == pytest.approx(0.0125, rel=1e-9)
        assert A2 == pytest.approx(0.0125, rel=1e-9)
        assert A3 == pytest.approx(0.0125, rel=1e-9)

    def test_fitted_band_closes_a_perturbed_field(self, wave_sym):
        f, ansatz = _ansatz_field(wave_sym, 0.05, 0.35)
        g = Field(grid=f.grid, u=np.clip(f.u - 0.02, 0.0, None), v=f.v,
                  time=0.0, epsilon=f.epsilon)
        A1, A2, A3 = fit_sandwich([g], [0.35], ansatz)
        assert sandwich_check([g], [0.35], ansatz, A1, A2, A3) == 0


class TestRateFit:
    @settings(max_examples=50, deadline=None)
    @given(
        q=st.floats(min_value=-3.0, max_value=3.0),
        C=st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_recovers_exact_power_laws(self, q, C):
        eps = np.array([0.1, 0.05, 0.025])
        fit = _fit_rate(eps, C * eps**q)
        assert fit is not None
        assert fit[0] == pytest.approx(q, abs=1e-9)
        assert fit[1] == pytest.approx(C, rel=1e-9)

    def test_needs_two_positive_values(self):
        eps = np.array([0.1, 0.05])
        assert _fit_rate(eps, np.array([0.0, 0.0])) is None
        assert _fit_rate(eps, np.array([1.0, 0.0])) is None


@pytest.fixture(scope="module")
def bench_sweep():
    return convergence_sweep(P_BENCH, [0.1, 0.05, 0.025])


class TestBenchmarkSweep:
    """Frozen measurements of the displaced radial benchmark.

    The values pin the exact configuration the acceptance criteria run
    on: well-prepared data displaced 0.8 eps outside a radius-0.5 circle,
    k = h = 1, T = 0.04, dx = eps/8.
    """

    def test_profile_errors_frozen(self, bench_sweep):
        got_u = [r.E_ii_u for r in bench_sweep.reports]
        got_v = [r.E_ii_v for r in bench_sweep.reports]
        assert got_u == pytest.approx([7.342364e-03, 1.848691e-03, 3.793034e-04], rel=1e-4)
        assert got_v == pytest.approx([5.256947e-03, 1.473955e-03, 2.977929e-04], rel=1e-4)

    def test_hausdorff_frozen(self, bench_sweep):
        got = [r.d_H_max for r in bench_sweep.reports]
        assert got == pytest.approx([9.282835e-02, 4.735167e-02, 2.400952e-02], rel=1e-4)

    def test_normalized_distance_levels_at_the_offset(self, bench_sweep):
        ratios = [r.d_H_max / r.epsilon for r in bench_sweep.reports]
        assert max(ratios) / min(ratios) < 1.1
        assert all(0.9 < x < 1.0 for x in ratios)

    def test_hausdorff_rate_near_one(self, bench_sweep):
        assert bench_sweep.rates["dH_max"]["q"] == pytest.approx(0.975479, rel=1e-3)

    def test_profile_rate_near_two(self, bench_sweep):
        assert bench_sweep.rates["E_ii_u"]["q"] == pytest.approx(2.137410, rel=1e-3)

    def test_band_constants_stable(self, bench_sweep):
        assert [r.A1_fit for r in bench_sweep.reports] == pytest.approx([0.95, 0.95, 0.975], rel=1e-9)
        for r in bench_sweep.reports:
            assert r.A2_fit == pytest.approx(0.025, rel=1e-9)
            assert r.A3_fit == pytest.approx(0.025, rel=1e-9)
            assert r.violations == 0

    def test_radial_identities(self, bench_sweep):
        # concentric circles make the graph offset, the Hausdorff
        # distance, and eps * theta the same number, and the shifted
        # limit ansatz coincides with the front-centered one
        for r in bench_sweep.reports:
            assert r.eta_sup == pytest.approx(r.d_H_max, rel=1e-12)
            assert r.theta_sup == pytest.approx(r.d_H_max / r.epsilon, rel=1e-12)
            assert r.grad_eta_sup == 0.0
            assert r.E_iii_u == pytest.approx(r.E_ii_u, rel=1e-6)
            assert r.E_iii_v == pytest.approx(r.E_ii_v, rel=1e-6)

    def test_window_clamped_everywhere(self, bench_sweep):
        for r in bench_sweep.reports:
            assert r.t0 == pytest.approx(0.02)
            assert r.T == 0.04

    def test_worker_count_does_not_change_results(self, bench_sweep):
        threaded = convergence_sweep(P_BENCH, [0.1, 0.05, 0.025], workers=2)
        for a, b in zip(bench_sweep.reports, threaded.reports):
            assert a.row() == b.row()
            assert a.violations == b.violations

    def test_centered_data_superconverges(self, bench_sweep):
        # offset 0 removes the O(eps) displacement; what is left is the
        # eps^2 scale, well below the displaced run at the same epsilon
        centered = convergence_sweep(P_BENCH, [0.1], data_offset_eps=0.0)
        assert centered.reports[0].d_H_max < 0.2 * bench_sweep.reports[0].d_H_max

    def test_epsilon_list_must_strictly_decrease(self):
        with pytest.raises(ValueError):
            convergence_sweep(P_BENCH, [0.1, 0.1])

    def test_single_epsilon_has_no_rates(self):
        res = convergence_sweep(P_BENCH, [0.1])
        assert res.rates == {}
        assert len(res.reports) == 1

    def test_coefficient_callables_come_in_pairs(self):
        with pytest.raises(ValueError):
            convergence_sweep(P_BENCH, [0.1], k_fn=lambda x, y=None: 1.0)
