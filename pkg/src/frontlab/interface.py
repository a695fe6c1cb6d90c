"""Interface evolution and front geometry.

The limit interface moves with normal velocity

    V = -(N-1) k kappa - dn(k) - (2 k (C+1) / K) dn(K)

with dn the outward normal derivative.  Two backends cover the tested
geometries: an exact radial ODE for circles and spheres, and a
parametric polyline evolver for planar curves.  The rest of the module
measures fronts: extraction from fields as the zero set of the basin
classifier, signed distances, and Hausdorff distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InterfaceExtinction, NoFront, SelfIntersection
from .grids import Coefficients, GridSpec
from .kinetics import _dist_to_polyline_batch
from .separatrix import HFunction
from .solver import Field

__all__ = [
    "DrivingConstant",
    "PolylineInterface",
    "RadialInterface",
    "SignedDistanceField",
    "evolve_polyline",
    "evolve_radial",
    "extract_front",
    "hausdorff_distance",
    "signed_distance",
]


@dataclass(frozen=True)
class DrivingConstant:
    """Scalar C of the coefficient-gradient forcing term, config-supplied."""

    C: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.C):
            raise ValueError("driving constant must be finite")


@dataclass(frozen=True)
class RadialInterface:
    """Radius history of a circular/spherical front around a fixed center."""

    times: np.ndarray
    radii: np.ndarray
    center: tuple[float, float] = (0.0, 0.0)
    n_dim: int = 2

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        r = np.asarray(self.radii, dtype=float)
        if t.shape != r.shape or t.ndim != 1 or len(t) < 1:
            raise ValueError("times and radii must be matching 1D arrays")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if np.any(r <= 0.0):
            raise ValueError("radius history must stay positive")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "radii", r)

    def radius_at(self, t: float) -> float:
        if t < self.times[0] - 1e-12 or t > self.times[-1] + 1e-12:
            raise ValueError(f"t={t} outside computed window [{self.times[0]}, {self.times[-1]}]")
        return float(np.interp(t, self.times, self.radii))


@dataclass(frozen=True)
class PolylineInterface:
    """Closed planar curve, vertices ordered counterclockwise.

    The closing edge from the last vertex back to the first is implied.
    Counterclockwise order makes the right-of-travel direction the
    outward normal, matching the negative-inside distance convention.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 8:
            raise ValueError(f"need at least 8 planar vertices, got shape {v.shape}")
        if self.signed_area_of(v) < 0.0:
            v = v[::-1].copy()
        object.__setattr__(self, "vertices", v)

    @staticmethod
    def signed_area_of(v: np.ndarray) -> float:
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def signed_area(self) -> float:
        return self.signed_area_of(self.vertices)

    @property
    def perimeter(self) -> float:
        d = np.diff(np.vstack([self.vertices, self.vertices[:1]]), axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    def closed_segments(self) -> np.ndarray:
        """(M, 2, 2) array of segments including the closing edge."""
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        return np.stack([v, nxt], axis=1)

    def is_simple(self) -> bool:
        return not _has_self_intersection(self.vertices)


@dataclass(frozen=True)
class SignedDistanceField:
    """Grid-sampled distance to a front, negative inside."""

    grid: GridSpec
    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.shape != self.grid.shape:
            raise ValueError("distance sample shape does not match the grid")
        object.__setattr__(self, "d", d)


def _derivative(fn, x, h=1e-6):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def _radial_rhs(r, c: Coefficients, C: float, n_dim: int):
    k = float(c.k_at(r))
    dk = float(_derivative(c.k_at, r))
    K = float(c.K_at(r))
    dK = float(_derivative(c.K_at, r))
    return -(n_dim - 1) * k / r - dk - (2.0 * k * (C + 1.0) / K) * dK


def evolve_radial(
    R0: float,
    c: Coefficients,
    C: DrivingConstant | float,
    n_dim: int = 2,
    t_end: float = 0.1,
    dt: float = 1e-4,
) -> RadialInterface:
    """Integrate the radial form of the interface law with classical RK4.

    For a circle the curvature is 1/R and the outward normal is +r, so
    the law closes as an ODE for the radius.  Raises InterfaceExtinction
    (carrying the partial history) if the radius hits zero before t_end.
    """
    if R0 <= 0.0 or dt <= 0.0 or t_end < 0.0:
        raise ValueError("need R0 > 0, dt > 0, t_end >= 0")
    Cval = C.C if isinstance(C, DrivingConstant) else float(C)
    n_steps = max(1, int(np.ceil(t_end / dt - 1e-12))) if t_end > 0.0 else 0
    if n_steps:
        dt = t_end / n_steps
    times = [0.0]
    radii = [float(R0)]
    r = float(R0)

    def rhs(radius):
        return _radial_rhs(radius, c, Cval, n_dim)

    for s in range(n_steps):
        speed = abs(rhs(r))
        if r <= 2.0 * dt * speed:
            raise InterfaceExtinction(
                f"radius {r:.4g} at t={s * dt:.4g} is within one step of collapse",
                partial=list(zip(times, radii)),
            )
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * dt * k1)
        k3 = rhs(r + 0.5 * dt * k2)
        k4 = rhs(r + dt * k3)
        r = r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(r) or r <= 0.0:
            raise InterfaceExtinction(
                f"radius collapsed at t={(s + 1) * dt:.4g}", partial=list(zip(times, radii))
            )
        times.append((s + 1) * dt)
        radii.append(r)
    return RadialInterface(times=np.array(times), radii=np.array(radii), n_dim=n_dim)


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segments_cross(a0, a1, b0, b1):
    """Vectorized proper-intersection test between segment batches."""
    d1 = _cross2(a1 - a0, b0 - a0)
    d2 = _cross2(a1 - a0, b1 - a0)
    d3 = _cross2(b1 - b0, a0 - b0)
    d4 = _cross2(b1 - b0, a1 - b0)
    return (d1 * d2 < 0.0) & (d3 * d4 < 0.0)


def _has_self_intersection(v: np.ndarray) -> bool:
    m = len(v)
    segs0 = v
    segs1 = np.roll(v, -1, axis=0)
    i, j = np.triu_indices(m, k=2)
    # the closing segment (index m-1) is adjacent to segment 0
    keep = ~((i == 0) & (j == m - 1))
    i, j = i[keep], j[keep]
    hits = _segments_cross(segs0[i], segs1[i], segs0[j], segs1[j])
    return bool(np.any(hits))


def _resample_closed(v: np.ndarray, n: int) -> np.ndarray:
    """Uniform-arclength resampling through a periodic cubic spline.

    Linear resampling pulls a circle inward by the chord sagitta each
    pass; the periodic spline keeps that bias at fourth order.
    """
    closed = np.vstack([v, v[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    sx = CubicSpline(s, closed[:, 0], bc_type="periodic")
    sy = CubicSpline(s, closed[:, 1], bc_type="periodic")
    s_new = np.linspace(0.0, total, n, endpoint=False)
    return np.column_stack([sx(s_new), sy(s_new)])


def evolve_polyline(
    g0: PolylineInterface,
    c: Coefficients,
    C: DrivingConstant | float,
    t_end: float,
    dt: float = 5e-5,
    check_every: int = 10,
) -> PolylineInterface:
    """March a closed curve by the normal-velocity law.

    Curvature at a vertex comes from the circumcircle of it and its two
    neighbors (exact on circles); vertices advance along the outward
    normal and are re-equidistributed along arclength every step.
    Raises SelfIntersection when the curve stops being simple.
    """
    if len(g0.vertices) < 64:
        raise ValueError("need at least 64 vertices to resolve curvature")
    Cval = C.C if isinstance(C, DrivingConstant) else float(C)
    v = g0.vertices.copy()
    n_steps = max(0, int(np.ceil(t_end / dt - 1e-12)))
    if n_steps:
        dt = t_end / n_steps
    for s in range(n_steps):
        prev_pts = np.roll(v, 1, axis=0)
        next_pts = np.roll(v, -1, axis=0)
        e1 = v - prev_pts
        e2 = next_pts - v
        chord = next_pts - prev_pts
        a = np.hypot(e1[:, 0], e1[:, 1])
        b = np.hypot(e2[:, 0], e2[:, 1])
        cc = np.hypot(chord[:, 0], chord[:, 1])
        cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        kappa = 2.0 * cross / (a * b * cc)
        tangent = chord / cc[:, None]
        normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])

        x, y = v[:, 0], v[:, 1]
        k_here = np.asarray(c.k_at(x, y), dtype=float)
        K_here = np.asarray(c.K_at(x, y), dtype=float)
        h_step = 1e-6
        dk_dn = (
            np.asarray(c.k_at(x + h_step * normal[:, 0], y + h_step * normal[:, 1]), dtype=float)
            - np.asarray(c.k_at(x - h_step * normal[:, 0], y - h_step * normal[:, 1]), dtype=float)
        ) / (2.0 * h_step)
        dK_dn = (
            np.asarray(c.K_at(x + h_step * normal[:, 0], y + h_step * normal[:, 1]), dtype=float)
            - np.asarray(c.K_at(x - h_step * normal[:, 0], y - h_step * normal[:, 1]), dtype=float)
        ) / (2.0 * h_step)
        speed = -k_here * kappa - dk_dn - (2.0 * k_here * (Cval + 1.0) / K_here) * dK_dn
        v = v + dt * speed[:, None] * normal
        v = _resample_closed(v, len(v))
        if (s + 1) % check_every == 0 or s + 1 == n_steps:
            if _has_self_intersection(v):
                raise SelfIntersection(f"curve lost simplicity at t={(s + 1) * dt:.4g}")
    return PolylineInterface(vertices=v)


def _crossings_1d(x: np.ndarray, hz: np.ndarray) -> np.ndarray:
    sign = np.sign(hz)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0.0)[0]
    crossings = x[idx] - hz[idx] * (x[idx + 1] - x[idx]) / (hz[idx + 1] - hz[idx])
    exact = np.nonzero(hz == 0.0)[0]
    if len(exact):
        crossings = np.sort(np.concatenate([crossings, x[exact]]))
    return crossings


def extract_front(f: Field, h: HFunction):
    """Zero set of the basin classifier over the field.

    Returns crossing positions (1D array) for line and radial grids and
    a PolylineInterface for rect2d.  Raises NoFront when the classifier
    never changes sign.
    """
    hz = np.asarray(h.values(f.u, f.v), dtype=float)
    if f.grid.geometry in ("line", "radial"):
        crossings = _crossings_1d(f.grid.nodes(), hz)
        if len(crossings) == 0:
            raise NoFront("classifier has constant sign on the grid")
        return crossings
    loops = _marching_squares(f.grid, hz)
    if not loops:
        raise NoFront("classifier has constant sign on the grid")
    best = max(loops, key=len)
    return PolylineInterface(vertices=best)


def _marching_squares(grid: GridSpec, hz: np.ndarray) -> list[np.ndarray]:
    """Link classifier zero crossings into closed loops, cell by cell."""
    X, Y = grid.nodes()
    x = X[:, 0]
    y = Y[0, :]
    inside = hz < 0.0
    nx, ny = hz.shape

    def interp_point(xa, ya, ha, xb, yb, hb):
        t = ha / (ha - hb)
        return (xa + t * (xb - xa), ya + t * (yb - ya))

    # edge keys: ("h", i, j) spans (i,j)-(i+1,j); ("v", i, j) spans (i,j)-(i,j+1)
    points: dict[tuple, tuple] = {}
    links: dict[tuple, list] = {}
    sx = inside[:-1, :] != inside[1:, :]
    sy = inside[:, :-1] != inside[:, 1:]
    cells = np.argwhere(sx[:, :-1] | sx[:, 1:] | sy[:-1, :] | sy[1:, :])
    for i, j in cells:
        crossed = []
        if sx[i, j]:
            crossed.append(("h", i, j))
        if sx[i, j + 1]:
            crossed.append(("h", i, j + 1))
        if sy[i, j]:
            crossed.append(("v", i, j))
        if sy[i + 1, j]:
            crossed.append(("v", i + 1, j))
        if not crossed:
            continue
        for key in crossed:
            if key not in points:
                kind, a, b = key
                if kind == "h":
                    points[key] = interp_point(x[a], y[b], hz[a, b], x[a + 1], y[b], hz[a + 1, b])
                else:
                    points[key] = interp_point(x[a], y[b], hz[a, b], x[a], y[b + 1], hz[a, b + 1])
        if len(crossed) == 2:
            pairs = [(crossed[0], crossed[1])]
        elif len(crossed) == 4:
            # saddle cell: center sign picks which corners stay joined
            center_inside = (hz[i, j] + hz[i + 1, j] + hz[i, j + 1] + hz[i + 1, j + 1]) < 0.0
            corner_ll = inside[i, j]
            if center_inside == corner_ll:
                pairs = [(("h", i, j), ("v", i, j)), (("h", i, j + 1), ("v", i + 1, j))]
            else:
                pairs = [(("h", i, j), ("v", i + 1, j)), (("h", i, j + 1), ("v", i, j))]
        else:
            continue
        for a_key, b_key in pairs:
            links.setdefault(a_key, []).append(b_key)
            links.setdefault(b_key, []).append(a_key)

    loops = []
    visited = set()
    for start in links:
        if start in visited or len(links[start]) != 2:
            continue
        loop = [start]
        visited.add(start)
        prev, cur = None, start
        closed = False
        while True:
            nbrs = [k for k in links[cur] if k != prev]
            if not nbrs:
                break
            nxt = nbrs[0]
            if nxt == start:
                closed = True
                break
            if nxt in visited:
                break
            loop.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt
        if closed and len(loop) >= 8:
            loops.append(np.array([points[k] for k in loop]))
    return loops


def _point_segment_distance_chunked(pts: np.ndarray, segments_curve: np.ndarray, chunk=4096):
    out = np.empty(len(pts))
    for lo in range(0, len(pts), chunk):
        out[lo : lo + chunk] = _dist_to_polyline_batch(pts[lo : lo + chunk], segments_curve)
    return out


def _inside_mask(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd crossing-number test, vectorized over query points."""
    x, y = pts[:, 0], pts[:, 1]
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    inside = np.zeros(len(pts), dtype=bool)
    for k in range(len(poly)):
        straddles = (y0[k] <= y[:]) != (y1[k] <= y[:])
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = x0[k] + (y - y0[k]) * (x1[k] - x0[k]) / (y1[k] - y0[k])
        inside ^= straddles & (x < xi)
    return inside


def signed_distance(g, grid: GridSpec) -> SignedDistanceField:
    """Distance field to a front, negative inside.

    For polylines the magnitude is the exact point-segment minimum and
    the sign comes from an even-odd crossing test.  For 1D crossing sets
    the sign starts negative left of the first crossing and alternates.
    """
    if isinstance(g, PolylineInterface):
        if grid.geometry != "rect2d":
            raise ValueError("polyline fronts need a rect2d grid")
        X, Y = grid.nodes()
        pts = np.column_stack([X.ravel(), Y.ravel()])
        # closed polyline: distance must include the closing edge
        poly_closed = np.vstack([g.vertices, g.vertices[:1]])
        dist = _point_segment_distance_chunked(pts, poly_closed)
        sign = np.where(_inside_mask(pts, g.vertices), -1.0, 1.0)
        return SignedDistanceField(grid=grid, d=(sign * dist).reshape(grid.shape))
    crossings = np.atleast_1d(np.asarray(g, dtype=float))
    if len(crossings) == 0:
        raise ValueError("empty crossing set")
    if grid.geometry == "rect2d":
        raise ValueError("crossing-set fronts need a line or radial grid")
    xs = grid.nodes()
    dist = np.min(np.abs(xs[:, None] - crossings[None, :]), axis=1)
    parity = np.searchsorted(np.sort(crossings), xs, side="right") % 2
    sign = np.where(parity == 0, -1.0, 1.0)
    return SignedDistanceField(grid=grid, d=sign * dist)


def _as_sample_points(g, refine: int):
    if isinstance(g, PolylineInterface):
        closed = np.vstack([g.vertices, g.vertices[:1]])
        if refine > 1:
            t = np.linspace(0.0, 1.0, refine, endpoint=False)
            a = closed[:-1]
            b = closed[1:]
            pts = (a[:, None, :] * (1.0 - t)[None, :, None] + b[:, None, :] * t[None, :, None])
            return pts.reshape(-1, 2), closed
        return g.vertices, closed
    arr = np.atleast_1d(np.asarray(g, dtype=float))
    return arr, arr


def hausdorff_distance(g1, g2, refine: int = 4) -> float:
    """Symmetric Hausdorff distance between two fronts.

    Polyline-polyline distances are vertex-to-segment both ways, with
    each segment subdivided so the sup is resolved between vertices;
    crossing sets compare as finite point sets.
    """
    p1, c1 = _as_sample_points(g1, refine)
    p2, c2 = _as_sample_points(g2, refine)
    poly1 = isinstance(g1, PolylineInterface)
    poly2 = isinstance(g2, PolylineInterface)
    if poly1 != poly2:
        raise ValueError("cannot compare a polyline with a 1D crossing set")
    if not poly1:
        d12 = np.abs(p1[:, None] - p2[None, :]).min(axis=1).max()
        d21 = np.abs(p2[:, None] - p1[None, :]).min(axis=1).max()
        return float(max(d12, d21))
    d12 = _point_segment_distance_chunked(p1, c2).max()
    d21 = _point_segment_distance_chunked(p2, c1).max()
    return float(max(d12, d21))
