"""Stable manifold of the saddle and the basin classifier built on it.

The saddle's stable manifold S separates the basins of the two stable
nodes.  Along S the second coordinate is a strictly increasing function
zeta of the first, with zeta(u*) = v* and zeta(u) -> 0 as u -> 0.  The
classifier

    H(u, v) = v - zeta(u)        (graph over u)
    H(u, v) = zeta_inv(v) - u    (graph over v, near-vertical manifolds)

is negative exactly on the basin of p_plus and positive on the basin of
p_minus.  The curve is traced by integrating the time-reversed kinetics
flow from a small offset along the stable eigenvector: reversal makes S
attracting, so the seeding error contracts along the trace.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ExtrapolationWarning, FlowSingular
from .kinetics import KineticsParams, PhasePoint, jacobian, reaction_terms

__all__ = [
    "HFunction",
    "SeparatrixCurve",
    "compute_separatrix",
    "dist_to_separatrix",
    "h_value",
]


@dataclass(frozen=True)
class SeparatrixCurve:
    """Monotone sampled graph of the stable manifold.

    samples[:, 0] holds u strictly increasing, samples[:, 1] the curve
    value zeta(u), also strictly increasing.  orientation records which
    classifier form applies: "v_of_u" for H = v - zeta(u), "u_of_v" for
    H = zeta_inv(v) - u.
    """

    samples: np.ndarray
    orientation: str
    saddle: PhasePoint

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != 2 or s.shape[0] < 4:
            raise ValueError(f"samples must be (m>=4, 2), got shape {s.shape}")
        if self.orientation not in ("v_of_u", "u_of_v"):
            raise ValueError(f"unknown orientation {self.orientation!r}")
        if np.any(np.diff(s[:, 0]) <= 0.0) or np.any(np.diff(s[:, 1]) <= 0.0):
            raise ValueError("separatrix samples must be strictly increasing in both coordinates")
        object.__setattr__(self, "samples", s)

    @property
    def u(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def zeta(self) -> np.ndarray:
        return self.samples[:, 1]


@dataclass(frozen=True)
class HFunction:
    """Sign classifier for the two basins, interpolating the curve.

    Interpolation is monotone piecewise-cubic through the samples, so
    the classifier inherits strict monotonicity between nodes.  Outside
    the sampled span the boundary segment is extended linearly and an
    ExtrapolationWarning is issued.
    """

    curve: SeparatrixCurve
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)
    _slopes: tuple[float, float] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.curve.orientation == "v_of_u":
            x, y = self.curve.u, self.curve.zeta
        else:
            x, y = self.curve.zeta, self.curve.u
        interp = PchipInterpolator(x, y, extrapolate=False)
        der = interp.derivative()
        object.__setattr__(self, "_interp", interp)
        object.__setattr__(self, "_slopes", (float(der(x[0])), float(der(x[-1]))))

    def _graph_value(self, x):
        """Interpolated curve value with linear extension outside the span."""
        xs = self._interp.x
        lo, hi = xs[0], xs[-1]
        x = np.asarray(x, dtype=float)
        below = x < lo
        above = x > hi
        if np.any(below) or np.any(above):
            warnings.warn(
                "classifier evaluated outside the sampled separatrix span; "
                "using the linear extension of the boundary segment",
                ExtrapolationWarning,
                stacklevel=3,
            )
        out = self._interp(np.clip(x, lo, hi))
        ys = self.curve.zeta if self.curve.orientation == "v_of_u" else self.curve.u
        out = np.where(below, ys[0] + self._slopes[0] * (x - lo), out)
        out = np.where(above, ys[-1] + self._slopes[1] * (x - hi), out)
        return out

    def values(self, u, v):
        """Vectorized H over matching arrays of u and v."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.curve.orientation == "v_of_u":
            return v - self._graph_value(u)
        return self._graph_value(v) - u


def h_value(h: HFunction, s) -> float:
    """H at one phase point; negative on the p_plus basin, positive on p_minus."""
    if isinstance(s, PhasePoint):
        u, v = s.u, s.v
    else:
        u, v = s
    return float(h.values(u, v))


def dist_to_separatrix(h: HFunction, s) -> float:
    """Euclidean distance from a point to the sampled curve polyline."""
    if isinstance(s, PhasePoint):
        pt = np.array([[s.u, s.v]])
    else:
        pt = np.atleast_2d(np.asarray(s, dtype=float))
    from .kinetics import _dist_to_polyline_batch

    d = _dist_to_polyline_batch(pt, h.curve.samples)
    return float(d[0]) if d.size == 1 else d


def _reversed_rhs(p: KineticsParams, u, v):
    f, g = reaction_terms(p, (u, v))
    return -f, -g


def _rk4_reversed(p, u, v, h):
    f1, g1 = _reversed_rhs(p, u, v)
    f2, g2 = _reversed_rhs(p, u + 0.5 * h * f1, v + 0.5 * h * g1)
    f3, g3 = _reversed_rhs(p, u + 0.5 * h * f2, v + 0.5 * h * g2)
    f4, g4 = _reversed_rhs(p, u + h * f3, v + h * g3)
    return (
        u + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4),
        v + (h / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4),
    )


def _trace_branch(p, start, tol, u_cap, v_cap, u_floor, max_points=200_000):
    """Trace one branch of the reversed flow with step-halving control.

    Accepts a step when the two-half-steps state differs from the single
    full step by at most tol, bounding the chord-to-curve deviation; the
    accepted state is the more accurate two-half-steps one.
    """
    u, v = start
    pts = [(u, v)]
    h = 1e-3
    h_max = 1.0
    while len(pts) < max_points:
        u1, v1 = _rk4_reversed(p, u, v, h)
        uh, vh = _rk4_reversed(p, u, v, 0.5 * h)
        u2, v2 = _rk4_reversed(p, uh, vh, 0.5 * h)
        err = np.hypot(u1 - u2, v1 - v2)
        if err > tol and h > 1e-12:
            h *= 0.5
            continue
        u, v = u2, v2
        pts.append((u, v))
        if err < tol / 32.0 and h < h_max:
            h *= 2.0
        # branch termination: left the tracing window or reached the origin
        if u > u_cap or v > v_cap or (u < u_floor and v < u_floor):
            break
        if u < 0.0 or v < 0.0:
            break
    return np.array(pts)


def compute_separatrix(
    p: KineticsParams,
    span: tuple[float, float] | None = None,
    tol: float = 1e-7,
) -> SeparatrixCurve:
    """Trace the stable manifold of the saddle as a monotone graph.

    Parameters
    ----------
    p : KineticsParams
    span : (u_lo, u_hi) with u_lo < u* < u_hi, or None for a default
        covering [0, 1.5 * max(u_plus, u*)].  The trace is clipped to the
        span where it extends past it.
    tol : local chord-to-curve deviation bound for the adaptive trace.

    Returns
    -------
    SeparatrixCurve through the saddle, strictly increasing in both
    coordinates, approaching the origin along the lower branch.

    Raises
    ------
    FlowSingular if the traced manifold is not a graph over u away from
    roundoff, which signals the near-vertical orientation should apply.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    eq = p.equilibria()
    u_star, v_star = eq.saddle.u, eq.saddle.v
    if span is None:
        span = (0.0, 1.5 * max(p.u_plus, u_star))
    u_lo, u_hi = float(span[0]), float(span[1])
    if not (u_lo < u_star < u_hi):
        raise ValueError(f"span {span} must bracket the saddle u*={u_star:.6g}")

    jac = jacobian(p, eq.saddle)
    lams, vecs = np.linalg.eig(jac)
    lams = lams.real
    if lams.min() >= 0.0 or lams.max() <= 0.0:
        raise FlowSingular("saddle eigenvalues do not have opposite signs")
    e_s = vecs[:, int(np.argmin(lams))].real
    e_s /= np.hypot(*e_s)
    if e_s[0] < 0.0:
        e_s = -e_s  # positive u-component fixes the branch labeling

    offset = 1e-6
    scale = max(u_star, v_star, 1.0)
    v_cap = 8.0 * max(p.v_minus, v_star, 1.0)
    u_floor = 1e-9 * scale
    upper = _trace_branch(
        p, (u_star + offset * e_s[0], v_star + offset * e_s[1]),
        tol, u_cap=u_hi * 1.05 + 0.1, v_cap=v_cap, u_floor=u_floor,
    )
    lower = _trace_branch(
        p, (u_star - offset * e_s[0], v_star - offset * e_s[1]),
        tol, u_cap=u_hi * 1.05 + 0.1, v_cap=v_cap, u_floor=u_floor,
    )

    pts = np.vstack([lower[::-1], [[u_star, v_star]], upper])
    # the lower branch runs down toward the origin; close the graph there
    if pts[0, 0] < 1e-6 * scale and pts[0, 1] < 1e-6 * scale:
        pts = np.vstack([[[0.0, 0.0]], pts[pts[:, 0] > 0.0]])

    du = np.diff(pts[:, 0])
    if np.any(du < -1e-9 * scale):
        raise FlowSingular(
            "traced manifold folds in u; only the graph-over-v orientation applies"
        )
    # drop roundoff-level duplicates so both coordinates strictly increase
    keep = np.ones(len(pts), dtype=bool)
    last_u, last_v = pts[0]
    for i in range(1, len(pts)):
        if pts[i, 0] <= last_u or pts[i, 1] <= last_v:
            keep[i] = False
        else:
            last_u, last_v = pts[i]
    pts = pts[keep]

    # clip to the requested span, keeping one sample at each cut edge
    inside = (pts[:, 0] >= u_lo) & (pts[:, 0] <= u_hi)
    first = max(0, int(np.argmax(inside)) - 1)
    last = len(pts) - max(0, int(np.argmax(inside[::-1])) - 1)
    pts = pts[first:last]

    u_extent = pts[-1, 0] - pts[0, 0]
    v_extent = pts[-1, 1] - pts[0, 1]
    orientation = "v_of_u" if u_extent >= v_extent else "u_of_v"
    return SeparatrixCurve(samples=pts, orientation=orientation, saddle=eq.saddle)
