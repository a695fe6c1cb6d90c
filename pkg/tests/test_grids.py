"""Grids, coefficient fields, and initial front descriptions."""

import numpy as np
import pytest

from frontlab.errors import ResolutionWarning
from frontlab.grids import Coefficients, FrontSpec, GridSpec


class TestGridSpec:
    def test_line_nodes(self):
        g = GridSpec.line(-1.0, 1.0, 0.05)
        x = g.nodes()
        assert g.nx == 41
        assert x[0] == -1.0 and x[-1] == 1.0
        assert np.allclose(np.diff(x), g.dx, rtol=0, atol=1e-15)

    def test_radial_starts_at_origin(self):
        g = GridSpec.radial(1.0, 0.1, dim=2)
        assert g.nodes()[0] == 0.0
        assert g.geometry == "radial"

    def test_rect2d_shape(self):
        g = GridSpec.rect2d(-0.8, 0.8, -0.4, 0.4, 0.1)
        X, Y = g.nodes()
        assert X.shape == g.shape == (17, 9)
        # meshgrid must be ij-indexed so field[i, j] sits at (x[i], y[j])
        assert X[3, 0] == X[3, 8]
        assert Y[0, 3] == Y[16, 3]

    def test_line_volumes_sum_to_extent(self):
        g = GridSpec.line(-1.0, 1.0, 0.05)
        vol = g.volumes()
        assert abs(vol.sum() - 2.0) < 1e-14
        assert abs(vol[0] - 0.025) < 1e-15 and abs(vol[1] - 0.05) < 1e-15

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_radial_volumes_sum(self, dim):
        # shells integrate r^(N-1) dr exactly, so the total is r_max^N / N
        g = GridSpec.radial(0.8, 0.01, dim=dim)
        assert abs(g.volumes().sum() - 0.8**dim / dim) < 1e-14

    def test_resolution_warning(self):
        g = GridSpec.line(0.0, 1.0, 0.01)
        with pytest.warns(ResolutionWarning):
            g.check_resolution(0.05)

    def test_resolution_fine_enough_is_silent(self):
        import warnings

        g = GridSpec.line(0.0, 1.0, 0.005)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            g.check_resolution(0.05)

    def test_rejects_bad_extent(self):
        with pytest.raises(ValueError):
            GridSpec.line(1.0, -1.0, 0.05)
        with pytest.raises(ValueError):
            GridSpec.radial(-1.0, 0.05)


class TestCoefficients:
    def test_homogeneous_scalars(self):
        g = GridSpec.line(0.0, 1.0, 0.1)
        c = Coefficients.homogeneous(g, 4.0, 1.0)
        kh, hh = c.homogeneous_values
        assert kh == 4.0 and hh == 1.0
        assert np.all(c.K == 0.5)

    def test_heterogeneous_not_homogeneous(self):
        g = GridSpec.line(0.0, 1.0, 0.1)
        c = Coefficients.from_callables(
            g, lambda x: 1.0 + 0.5 * np.sin(3.0 * np.asarray(x, dtype=float)), lambda x: np.ones_like(np.asarray(x, dtype=float))
        )
        assert c.homogeneous_values is None

    def test_from_callables_samples_nodes(self):
        g = GridSpec.line(0.0, 1.0, 0.25)
        c = Coefficients.from_callables(
            g, lambda x: 1.0 + np.asarray(x, dtype=float), lambda x: np.full_like(np.asarray(x, dtype=float), 2.0)
        )
        assert np.array_equal(c.k, 1.0 + g.nodes())
        assert np.array_equal(c.K, np.sqrt(2.0 / (1.0 + g.nodes())))

    def test_k_at_prefers_callable(self):
        g = GridSpec.line(0.0, 1.0, 0.25)
        c = Coefficients.from_callables(g, lambda x: 1.0 + np.asarray(x, dtype=float), lambda x: np.ones_like(np.asarray(x, dtype=float)))
        assert abs(float(c.k_at(0.37)) - 1.37) < 1e-15

    def test_rejects_nonpositive(self):
        g = GridSpec.line(0.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            Coefficients.homogeneous(g, 0.0, 1.0)
        with pytest.raises(ValueError):
            Coefficients.homogeneous(g, 1.0, -2.0)


class TestFrontSpec:
    def test_point_on_line(self):
        g = GridSpec.line(-1.0, 1.0, 0.05)
        d = FrontSpec(kind="point", x0=0.3).signed_distance(g)
        assert np.allclose(d, g.nodes() - 0.3, rtol=0, atol=1e-15)

    def test_circle_on_rect2d(self):
        g = GridSpec.rect2d(-0.8, 0.8, -0.8, 0.8, 0.1)
        d = FrontSpec(kind="circle", center=(0.0, 0.0), radius=0.35).signed_distance(g)
        X, Y = g.nodes()
        assert np.allclose(d, np.hypot(X, Y) - 0.35, rtol=0, atol=1e-15)

    def test_circle_on_radial(self):
        g = GridSpec.radial(0.8, 0.05)
        d = FrontSpec(kind="circle", center=(0.0, 0.0), radius=0.35).signed_distance(g)
        assert np.allclose(d, g.nodes() - 0.35, rtol=0, atol=1e-15)

    def test_boundary_clearance(self):
        g = GridSpec.line(-1.0, 1.0, 0.05)
        assert abs(FrontSpec(kind="point", x0=0.3).boundary_clearance(g) - 0.7) < 1e-15
        g2 = GridSpec.rect2d(-0.8, 0.8, -0.8, 0.8, 0.1)
        cl = FrontSpec(kind="circle", center=(0.0, 0.0), radius=0.35).boundary_clearance(g2)
        assert abs(cl - 0.45) < 1e-15
