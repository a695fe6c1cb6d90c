"""Reaction-diffusion marching: stability, conservation, comparison."""

import numpy as np
import pytest

from frontlab.errors import FrontTooClose, StabilityViolation
from frontlab.grids import Coefficients, FrontSpec, GridSpec
from frontlab.solver import (
    Field,
    SolverConfig,
    _jacobian_box_norm,
    build_initial_data,
    front_margin,
    simulate,
    stability_dt,
    step,
)
from frontlab.wave import solve_standing_wave


@pytest.fixture(scope="module")
def wave_sym(p_sym):
    return solve_standing_wave(p_sym, L=60.0, n=4096)


@pytest.fixture()
def line_setup(p_sym, wave_sym):
    eps = 0.05
    g = GridSpec.line(-1.0, 1.0, eps / 8)
    c = Coefficients.homogeneous(g, 1.0, 1.0)
    f = build_initial_data("well_prepared", g, FrontSpec(kind="point", x0=0.0), c, wave_sym, eps)
    return g, c, f, eps


class TestStableStep:
    def test_satisfies_both_stated_bounds(self, p_sym):
        for eps in (0.1, 0.025):
            g = GridSpec.radial(0.8, eps / 8)
            c = Coefficients.homogeneous(g, 1.0, 1.0)
            dt = stability_dt(g, c, p_sym, eps)
            lam = _jacobian_box_norm(p_sym)
            assert dt <= 0.2 * eps**2 / lam + 1e-18
            assert dt <= g.dx**2 / (2.0 * 1 * 1.0 * 1.0) + 1e-18

    def test_monotone_update_headroom(self, p_sym):
        # combined explicit row sum must stay below 1/dt or ordering breaks
        eps = 0.05
        g = GridSpec.line(-1.0, 1.0, eps / 8)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        dt = stability_dt(g, c, p_sym, eps)
        row = 2.0 * 1.0 / g.dx**2 + _jacobian_box_norm(p_sym) / eps**2
        assert dt * row <= 0.9 + 1e-12

    def test_shrinks_with_eps_and_dx(self, p_sym):
        g1 = GridSpec.line(0.0, 1.0, 0.0125)
        g2 = GridSpec.line(0.0, 1.0, 0.00625)
        c1 = Coefficients.homogeneous(g1, 1.0, 1.0)
        c2 = Coefficients.homogeneous(g2, 1.0, 1.0)
        assert stability_dt(g2, c2, p_sym, 0.1) < stability_dt(g1, c1, p_sym, 0.1)
        assert stability_dt(g1, c1, p_sym, 0.05) < stability_dt(g1, c1, p_sym, 0.1)


class TestConservation:
    def test_equilibrium_is_exactly_preserved(self, p_sym):
        g = GridSpec.line(-1.0, 1.0, 0.02)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        u0 = np.full(g.nx, p_sym.u_plus)
        v0 = np.zeros(g.nx)
        f = Field(grid=g, u=u0.copy(), v=v0.copy(), time=0.0, epsilon=0.1)
        out = simulate(f, c, p_sym, SolverConfig(t_end=0.01))[-1]
        assert np.array_equal(out.u, u0)
        assert np.array_equal(out.v, v0)

    @pytest.mark.parametrize("geometry", ["line", "radial", "rect2d"])
    def test_diffusion_conserves_mass(self, p_sym, geometry):
        # reaction suppressed by a huge eps: h/eps^2 ~ 1e-18 is below roundoff
        if geometry == "line":
            g = GridSpec.line(0.0, 1.0, 0.01)
            k_fn = lambda x: 1.0 + 0.5 * np.sin(3.0 * np.asarray(x, dtype=float))
            h_fn = lambda x: np.ones_like(np.asarray(x, dtype=float))
            u0 = 0.5 + 0.3 * np.sin(2.0 * np.pi * g.nodes())
            v0 = 0.4 + 0.2 * np.cos(np.pi * g.nodes())
        elif geometry == "radial":
            g = GridSpec.radial(1.0, 0.01, dim=2)
            k_fn = lambda r: 1.0 + 0.2 * np.asarray(r, dtype=float)
            h_fn = lambda r: np.ones_like(np.asarray(r, dtype=float))
            u0 = 0.5 + 0.3 * np.cos(np.pi * g.nodes())
            v0 = 0.4 + 0.1 * g.nodes()
        else:
            g = GridSpec.rect2d(0.0, 1.0, 0.0, 1.0, 0.05)
            k_fn = lambda x, y: 1.0 + 0.3 * np.sin(2.0 * np.asarray(x, dtype=float)) * np.cos(np.asarray(y, dtype=float))
            h_fn = lambda x, y: np.ones_like(np.asarray(x, dtype=float))
            X, Y = g.nodes()
            u0 = 0.5 + 0.3 * np.sin(np.pi * X) * np.sin(np.pi * Y)
            v0 = 0.4 + 0.2 * np.cos(np.pi * X)
        c = Coefficients.from_callables(g, k_fn, h_fn)
        f = Field(grid=g, u=u0.copy(), v=v0.copy(), time=0.0, epsilon=1e9)
        vol = g.volumes()
        m0 = float((vol * u0).sum())
        cfg = SolverConfig(t_end=0.01)
        out = simulate(f, c, p_sym, cfg)[-1]
        n_steps = round(0.01 / stability_dt(g, c, p_sym, 1e9))
        drift = abs(float((vol * out.u).sum()) - m0)
        assert drift <= 1e-12 * max(1, n_steps)

    def test_imex_conserves_mass(self, p_sym):
        g = GridSpec.line(0.0, 1.0, 0.01)
        c = Coefficients.from_callables(
            g, lambda x: 1.0 + 0.5 * np.sin(3.0 * np.asarray(x, dtype=float)), lambda x: np.ones_like(np.asarray(x, dtype=float))
        )
        u0 = 0.5 + 0.3 * np.sin(2.0 * np.pi * g.nodes())
        f = Field(grid=g, u=u0.copy(), v=np.full(g.nx, 0.4), time=0.0, epsilon=1e9)
        m0 = float((g.volumes() * u0).sum())
        out = simulate(f, c, p_sym, SolverConfig(t_end=0.01, scheme="imex", dt=1e-4))[-1]
        assert abs(float((g.volumes() * out.u).sum()) - m0) <= 1e-12


class TestStationarity:
    def test_wave_frame_profile_is_discrete_equilibrium(self, p_sym, wave_sym):
        g = GridSpec.line(-60.0, 60.0, wave_sym.dz)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        u0 = wave_sym.phi_at(g.nodes())
        v0 = wave_sym.psi_at(g.nodes())
        f = Field(grid=g, u=u0.copy(), v=v0.copy(), time=0.0, epsilon=1.0)
        out = simulate(f, c, p_sym, SolverConfig(t_end=10.0))[-1]
        drift = max(np.abs(out.u - u0).max(), np.abs(out.v - v0).max())
        assert drift < 1e-6

    def test_scaled_frame_drift_small_over_layer_time(self, p_sym, line_setup):
        g, c, f, eps = line_setup
        u0 = f.u.copy()
        out = simulate(f, c, p_sym, SolverConfig(t_end=10.0 * eps**2))[-1]
        assert np.abs(out.u - u0).max() < 1e-4


class TestComparison:
    def test_nested_fronts_stay_ordered(self, p_sym, wave_sym):
        eps = 0.05
        g = GridSpec.line(-1.0, 1.0, eps / 8)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        fa = build_initial_data("well_prepared", g, FrontSpec(kind="point", x0=-0.2), c, wave_sym, eps)
        fb = build_initial_data("well_prepared", g, FrontSpec(kind="point", x0=0.2), c, wave_sym, eps)
        assert np.all(fa.u <= fb.u) and np.all(fa.v >= fb.v)
        cfg = SolverConfig(t_end=0.01)
        oa = simulate(fa, c, p_sym, cfg)[-1]
        ob = simulate(fb, c, p_sym, cfg)[-1]
        assert np.max(oa.u - ob.u) <= 1e-12
        assert np.max(ob.v - oa.v) <= 1e-12

    def test_positivity(self, p_sym, wave_sym):
        eps = 0.05
        g = GridSpec.line(-1.0, 1.0, eps / 8)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        f = build_initial_data("stepped", g, FrontSpec(kind="point", x0=0.0), c, wave_sym, eps)
        out = simulate(f, c, p_sym, SolverConfig(t_end=0.004))[-1]
        assert out.u.min() >= 0.0 and out.v.min() >= 0.0


class TestAccuracy:
    def test_richardson_first_order_in_dt(self, p_sym, wave_sym):
        eps = 0.05
        g = GridSpec.line(-1.0, 1.0, eps / 8)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        base = stability_dt(g, c, p_sym, eps)
        f0 = build_initial_data("stepped", g, FrontSpec(kind="point", x0=0.0), c, wave_sym, eps)
        sols = {}
        for fac in (1, 2, 4):
            f = Field(grid=g, u=f0.u.copy(), v=f0.v.copy(), time=0.0, epsilon=eps)
            sols[fac] = simulate(f, c, p_sym, SolverConfig(t_end=0.004, dt=base / fac))[-1]
        e1 = np.abs(sols[1].u - sols[4].u).max()
        e2 = np.abs(sols[2].u - sols[4].u).max()
        # first order: errors ~ C dt, so (dt - dt/4)/(dt/2 - dt/4) -> 3
        assert 2.5 < e1 / e2 < 3.5

    def test_imex_matches_explicit(self, p_sym, wave_sym):
        eps = 0.05
        g = GridSpec.line(-1.0, 1.0, eps / 8)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        base = stability_dt(g, c, p_sym, eps)
        f0 = build_initial_data("stepped", g, FrontSpec(kind="point", x0=0.0), c, wave_sym, eps)
        fe = Field(grid=g, u=f0.u.copy(), v=f0.v.copy(), time=0.0, epsilon=eps)
        fi = Field(grid=g, u=f0.u.copy(), v=f0.v.copy(), time=0.0, epsilon=eps)
        oe = simulate(fe, c, p_sym, SolverConfig(t_end=0.004, scheme="explicit"))[-1]
        oi = simulate(fi, c, p_sym, SolverConfig(t_end=0.004, scheme="imex", dt=base))[-1]
        assert np.abs(oe.u - oi.u).max() < 5e-3

    def test_d4_symmetry_preserved_on_square(self, p_sym, wave_sym):
        g = GridSpec.rect2d(-0.8, 0.8, -0.8, 0.8, 0.02)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        f = build_initial_data(
            "well_prepared", g, FrontSpec(kind="circle", center=(0.0, 0.0), radius=0.35), c, wave_sym, 0.1
        )
        out = simulate(f, c, p_sym, SolverConfig(t_end=0.005))[-1]
        asym = max(
            np.abs(out.u - out.u.T).max(),
            np.abs(out.u - out.u[::-1, :]).max(),
            np.abs(out.u - out.u[:, ::-1]).max(),
        )
        assert asym < 1e-13


class TestGuards:
    def test_oversized_dt_trips_box_check(self, p_sym, line_setup):
        g, c, f, eps = line_setup
        base = stability_dt(g, c, p_sym, eps)
        with pytest.raises(StabilityViolation, match="invariant box"):
            simulate(f, c, p_sym, SolverConfig(t_end=0.004, dt=200.0 * base))

    def test_probe_validation(self, p_sym, line_setup):
        g, c, f, eps = line_setup
        with pytest.raises(ValueError):
            simulate(f, c, p_sym, SolverConfig(t_end=0.01), probes=[0.02])
        with pytest.raises(ValueError):
            simulate(f, c, p_sym, SolverConfig(t_end=0.01), probes=[0.006, 0.002])

    def test_zero_horizon_returns_initial_state(self, p_sym, line_setup):
        g, c, f, eps = line_setup
        out = simulate(f, c, p_sym, SolverConfig(t_end=0.0))[-1]
        assert np.array_equal(out.u, f.u) and out.time == 0.0

    def test_probes_report_requested_times(self, p_sym, line_setup):
        g, c, f, eps = line_setup
        outs = simulate(f, c, p_sym, SolverConfig(t_end=0.004), probes=[0.001, 0.002, 0.004])
        assert len(outs) == 3
        times = [o.time for o in outs]
        assert times == sorted(times)
        assert abs(times[-1] - 0.004) < 1e-12
        for t_req, o in zip([0.001, 0.002, 0.004], outs):
            assert abs(o.time - t_req) < stability_dt(g, c, p_sym, 0.05)

    def test_single_step_helper(self, p_sym, line_setup):
        g, c, f, eps = line_setup
        out = step(f, c, p_sym, SolverConfig(t_end=1.0, dt=1e-6))
        assert out.time == pytest.approx(1e-6)
        assert not np.array_equal(out.u, f.u) or np.abs(out.u - f.u).max() == 0.0


class TestInitialData:
    def test_front_too_close(self, p_sym, wave_sym):
        g = GridSpec.line(-1.0, 1.0, 0.0125)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        with pytest.raises(FrontTooClose):
            build_initial_data("well_prepared", g, FrontSpec(kind="point", x0=0.9), c, wave_sym, 0.1)

    def test_well_prepared_saturates_far_inside(self, p_sym, wave_sym, h_sym):
        # profile tails decay like exp(-|z|), so 0.85/eps = 17 widths out
        eps = 0.05
        g = GridSpec.line(-1.0, 1.0, eps / 8)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        f = build_initial_data("well_prepared", g, FrontSpec(kind="point", x0=0.0), c, wave_sym, eps)
        left = g.nodes() < -0.85
        right = g.nodes() > 0.85
        assert np.abs(f.u[left] - p_sym.u_plus).max() < 1e-6
        assert np.abs(f.v[left]).max() < 1e-6
        assert np.abs(f.u[right]).max() < 1e-6
        assert np.abs(f.v[right] - p_sym.v_minus).max() < 1e-6

    def test_front_sits_on_classifier_zero(self, p_sym, wave_sym, h_sym):
        from frontlab.interface import extract_front

        eps = 0.05
        g = GridSpec.line(-1.0, 1.0, eps / 8)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        for kind in ("well_prepared", "stepped"):
            f = build_initial_data(kind, g, FrontSpec(kind="point", x0=0.0), c, wave_sym, eps)
            crossings = extract_front(f, h_sym)
            assert len(crossings) == 1
            assert abs(crossings[0]) < g.dx

    def test_stepped_margin_bound(self, p_sym, wave_sym, h_sym):
        eps = 0.05
        g = GridSpec.line(-1.0, 1.0, eps / 8)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        spec = FrontSpec(kind="point", x0=0.0)
        f = build_initial_data("stepped", g, spec, c, wave_sym, eps, step_width=0.1)
        d0 = spec.signed_distance(g)
        # sample within half a step width: the tanh ramp is steepest there
        a0 = front_margin(f, d0, h_sym, cap=0.05)
        jump = np.hypot(p_sym.u_plus, p_sym.v_minus)
        assert a0 >= 0.5 * jump / 0.1

    def test_well_prepared_margin_positive(self, p_sym, wave_sym, h_sym):
        eps = 0.05
        g = GridSpec.line(-1.0, 1.0, eps / 8)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        spec = FrontSpec(kind="point", x0=0.0)
        f = build_initial_data("well_prepared", g, spec, c, wave_sym, eps)
        d0 = spec.signed_distance(g)
        assert front_margin(f, d0, h_sym, cap=4.0 * eps) > 1.0

    def test_unknown_kind_rejected(self, p_sym, wave_sym):
        g = GridSpec.line(-1.0, 1.0, 0.0125)
        c = Coefficients.homogeneous(g, 1.0, 1.0)
        with pytest.raises(ValueError):
            build_initial_data("ramped", g, FrontSpec(kind="point", x0=0.0), c, wave_sym, 0.1)
