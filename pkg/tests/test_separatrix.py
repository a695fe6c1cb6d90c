"""Stable-manifold tracing, the sign classifier H, and distances to S."""

import warnings

import numpy as np
import pytest

from frontlab import (
    Basin,
    ExtrapolationWarning,
    HFunction,
    SeparatrixCurve,
    classify_basins,
    compute_separatrix,
    dist_to_separatrix,
    h_value,
)


class TestCurve:
    def test_symmetric_curve_is_diagonal(self, sep_sym, h_sym):
        u = np.linspace(0.05, 0.95, 50)
        zeta = h_sym._graph_value(u)
        assert np.max(np.abs(zeta - u)) < 1e-6

    def test_passes_through_saddle(self, sep_sym, sep_asym):
        for c in (sep_sym, sep_asym):
            h = HFunction(c)
            assert abs(h_value(h, c.saddle)) < 1e-8

    def test_monotone_both_coordinates(self, sep_sym, sep_asym):
        for c in (sep_sym, sep_asym):
            assert np.all(np.diff(c.u) > 0)
            assert np.all(np.diff(c.zeta) > 0)

    def test_approaches_origin(self, sep_sym, sep_asym):
        for c in (sep_sym, sep_asym):
            assert c.u[0] == 0.0 and c.zeta[0] == 0.0

    def test_rejects_non_monotone_samples(self, p_sym):
        bad = np.array([[0.0, 0.0], [0.2, 0.3], [0.15, 0.4], [0.5, 0.6]])
        with pytest.raises(ValueError, match="increasing"):
            SeparatrixCurve(samples=bad, orientation="v_of_u", saddle=p_sym.equilibria().saddle)

    def test_span_must_bracket_saddle(self, p_sym):
        with pytest.raises(ValueError, match="bracket"):
            compute_separatrix(p_sym, span=(0.5, 1.0))

    def test_interpolation_derivative_positive(self, h_sym, h_asym):
        for h in (h_sym, h_asym):
            xs = h._interp.x
            mid = 0.5 * (xs[:-1] + xs[1:])
            der = h._interp.derivative()(mid)
            assert np.all(der > 0)


class TestH:
    def test_zero_at_saddle(self, h_sym):
        assert h_value(h_sym, (1 / 3, 1 / 3)) == pytest.approx(0.0, abs=1e-12)

    def test_sign_at_stable_nodes(self, h_sym, p_sym):
        # frozen from the diagonal geometry: H(1,0) = -zeta(1) = -1, H(0,1) = 1
        assert h_value(h_sym, (1.0, 0.0)) == pytest.approx(-1.0, abs=1e-6)
        assert h_value(h_sym, (0.0, 1.0)) == pytest.approx(1.0, abs=1e-12)

    def test_extrapolation_warns(self, h_sym):
        big = 10.0 * h_sym.curve.u[-1]
        with pytest.warns(ExtrapolationWarning):
            val = h_value(h_sym, (big, 0.0))
        assert val < 0.0

    def test_no_warning_inside_span(self, h_sym):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            h_value(h_sym, (0.5, 0.4))

    def test_agrees_with_flow_on_grid(self, p_sym, sep_sym, h_sym):
        # offsets keep probes off the diagonal so no probe sits exactly on S
        uu = np.linspace(0.013, 1.19, 50)
        vv = np.linspace(0.017, 1.23, 50)
        U, V = np.meshgrid(uu, vv)
        pts = np.column_stack([U.ravel(), V.ravel()])
        basins = classify_basins(p_sym, pts, separatrix_samples=sep_sym.samples)
        hs = h_sym.values(pts[:, 0], pts[:, 1])
        band = 2.0 * 1e-7
        for (hv, b) in zip(hs, basins):
            if abs(hv) <= band:
                continue
            want = Basin.DELTA1 if hv < 0 else Basin.DELTA2
            assert b is want

    def test_asymmetric_signs_at_probes(self, p_asym, h_asym, rng):
        pts = rng.uniform(0.02, 1.1, size=(20, 2))
        basins = classify_basins(p_asym, pts)
        for (u, v), b in zip(pts, basins):
            hv = h_value(h_asym, (u, v))
            if abs(hv) < 1e-4 or b is Basin.UNDECIDED:
                continue
            assert (hv < 0) == (b is Basin.DELTA1)


class TestDistance:
    def test_zero_on_curve(self, sep_sym, h_sym):
        for i in (1, len(sep_sym.samples) // 2, len(sep_sym.samples) - 1):
            pt = sep_sym.samples[i]
            assert dist_to_separatrix(h_sym, pt) == 0.0

    def test_diagonal_distance(self, h_sym):
        assert dist_to_separatrix(h_sym, (0.4, 0.2)) == pytest.approx(
            0.2 / np.sqrt(2.0), rel=1e-12
        )

    def test_node_distance(self, h_sym):
        assert dist_to_separatrix(h_sym, (1.0, 0.0)) == pytest.approx(
            1.0 / np.sqrt(2.0), rel=1e-12
        )
