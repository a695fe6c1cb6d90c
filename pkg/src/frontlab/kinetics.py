"""Bistable Lotka-Volterra competition kinetics.

The reaction pair

    f(u, v) = (R1 - a1*u - b1*v) * u
    g(u, v) = (R2 - a2*u - b2*v) * v

is bistable when a1/a2 < R1/R2 < b1/b2.  Under that condition the phase
plane carries four equilibria: the stable boundary nodes
p_plus = (R1/a1, 0) and p_minus = (0, R2/b2), the unstable origin, and a
saddle strictly inside the open positive quadrant.  This module owns the
parameter set, the equilibria, Jacobians, a fixed-step RK4 phase flow,
and the basin classifier that serves as ground truth for the separatrix
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import StepSizeRejected

__all__ = [
    "Basin",
    "EquilibriumSet",
    "KineticsParams",
    "PhasePoint",
    "classify_basin",
    "classify_basins",
    "jacobian",
    "ode_flow",
    "reaction_terms",
]

# Components of a trajectory may dip this far below zero before the step
# size is rejected; anything smaller is treated as roundoff.
NEGATIVITY_FLOOR = -1e-12


class Basin(Enum):
    """Where a phase point ends up under the kinetics ODE."""

    DELTA1 = "delta1"  # basin of p_plus
    DELTA2 = "delta2"  # basin of p_minus
    SEPARATRIX = "separatrix"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class PhasePoint:
    """A point (u, v) in the closed positive quadrant."""

    u: float
    v: float

    def __post_init__(self):
        for name, val in (("u", self.u), ("v", self.v)):
            if not math.isfinite(val):
                raise ValueError(f"PhasePoint.{name} must be finite, got {val!r}")
            if val < NEGATIVITY_FLOOR:
                raise ValueError(f"PhasePoint.{name} must be >= 0, got {val!r}")
        # snap roundoff-negative values to the boundary
        object.__setattr__(self, "u", max(self.u, 0.0))
        object.__setattr__(self, "v", max(self.v, 0.0))

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=float)


@dataclass(frozen=True)
class KineticsParams:
    """Constants of the competition system plus derived equilibria.

    All eight constants must be strictly positive and satisfy the
    bistability condition a1/a2 < R1/R2 < b1/b2; the constructor rejects
    anything else.
    """

    D1: float
    D2: float
    R1: float
    R2: float
    a1: float
    b1: float
    a2: float
    b2: float

    def __post_init__(self):
        for name in ("D1", "D2", "R1", "R2", "a1", "b1", "a2", "b2"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0.0):
                raise ValueError(f"KineticsParams.{name} must be a positive real, got {val!r}")
        lo = self.a1 / self.a2
        mid = self.R1 / self.R2
        hi = self.b1 / self.b2
        if not (lo < mid < hi):
            raise ValueError(
                "bistability requires a1/a2 < R1/R2 < b1/b2, "
                f"got {lo:.6g} < {mid:.6g} < {hi:.6g}"
            )

    @property
    def u_plus(self) -> float:
        """u-value of the stable node on the u-axis."""
        return self.R1 / self.a1

    @property
    def v_minus(self) -> float:
        """v-value of the stable node on the v-axis."""
        return self.R2 / self.b2

    @property
    def saddle_uv(self) -> tuple[float, float]:
        """Closed-form saddle coordinates from the nullcline intersection."""
        den = self.a1 * self.b2 - self.a2 * self.b1
        u_star = (self.b2 * self.R1 - self.b1 * self.R2) / den
        v_star = (self.a1 * self.R2 - self.a2 * self.R1) / den
        return u_star, v_star

    def equilibria(self) -> "EquilibriumSet":
        u_star, v_star = self.saddle_uv
        return EquilibriumSet(
            p_plus=PhasePoint(self.u_plus, 0.0),
            p_minus=PhasePoint(0.0, self.v_minus),
            saddle=PhasePoint(u_star, v_star),
            origin=PhasePoint(0.0, 0.0),
        )

    def is_symmetric(self) -> bool:
        """Parameters invariant under exchanging the two species."""
        return (
            self.D1 == self.D2
            and self.R1 == self.R2
            and self.a1 == self.b2
            and self.b1 == self.a2
        )


@dataclass(frozen=True)
class EquilibriumSet:
    """The four rest points of the kinetics ODE."""

    p_plus: PhasePoint
    p_minus: PhasePoint
    saddle: PhasePoint
    origin: PhasePoint


def _as_uv(s):
    if isinstance(s, PhasePoint):
        return s.u, s.v
    u, v = s
    return u, v


def reaction_terms(p: KineticsParams, s):
    """Evaluate (f, g) at a phase point, or componentwise on arrays.

    Parameters
    ----------
    p : KineticsParams
    s : PhasePoint or pair of floats/arrays

    Returns
    -------
    (f, g) with the same shape as the inputs.
    """
    u, v = _as_uv(s)
    f = (p.R1 - p.a1 * u - p.b1 * v) * u
    g = (p.R2 - p.a2 * u - p.b2 * v) * v
    return f, g


def jacobian(p: KineticsParams, s) -> np.ndarray:
    """Exact Jacobian of (f, g) at a phase point as a 2x2 array."""
    u, v = _as_uv(s)
    return np.array(
        [
            [p.R1 - 2.0 * p.a1 * u - p.b1 * v, -p.b1 * u],
            [-p.a2 * v, p.R2 - p.a2 * u - 2.0 * p.b2 * v],
        ]
    )


def _rk4_step(p: KineticsParams, u, v, dt):
    f1, g1 = reaction_terms(p, (u, v))
    f2, g2 = reaction_terms(p, (u + 0.5 * dt * f1, v + 0.5 * dt * g1))
    f3, g3 = reaction_terms(p, (u + 0.5 * dt * f2, v + 0.5 * dt * g2))
    f4, g4 = reaction_terms(p, (u + dt * f3, v + dt * g3))
    un = u + (dt / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
    vn = v + (dt / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4)
    return un, vn


def ode_flow(p: KineticsParams, s0, t_end: float, dt: float) -> PhasePoint:
    """Integrate the kinetics ODE with classical RK4 at fixed step dt.

    The positive quadrant is forward-invariant for the exact flow; the
    integration is clip-free and raises StepSizeRejected if a component
    falls below the roundoff floor, which signals dt is too large.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if t_end < 0.0:
        raise ValueError(f"t_end must be nonnegative, got {t_end!r}")
    u, v = _as_uv(s0)
    u, v = float(u), float(v)
    n_full, rem = divmod(t_end, dt)
    steps = [dt] * int(n_full)
    if rem > 1e-15 * max(t_end, 1.0):
        steps.append(rem)
    for h in steps:
        u, v = _rk4_step(p, u, v, h)
        if u < NEGATIVITY_FLOOR or v < NEGATIVITY_FLOOR:
            raise StepSizeRejected(
                f"state ({u:.3e}, {v:.3e}) left the positive quadrant; reduce dt={dt:g}"
            )
    return PhasePoint(u, v)


def _dist_to_polyline_batch(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each row of pts (m, 2) to a polyline (k, 2)."""
    a = poly[:-1]
    seg = poly[1:] - a
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    seg_len2 = np.where(seg_len2 > 0.0, seg_len2, 1.0)
    diff = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("mkj,kj->mk", diff, seg) / seg_len2, 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * seg[None, :, :]
    d2 = np.sum((pts[:, None, :] - closest) ** 2, axis=2)
    return np.sqrt(d2.min(axis=1))


def classify_basins(
    p: KineticsParams,
    points: np.ndarray,
    *,
    horizon: float = 200.0,
    dt: float = 1e-3,
    attractor_tol: float = 1e-6,
    manifold_tol: float = 1e-4,
    separatrix_samples: np.ndarray | None = None,
) -> list[Basin]:
    """Classify many phase points at once by integrating the flow.

    A point is Delta1/Delta2 once it comes within attractor_tol of the
    corresponding stable node.  Points that stagnate at the saddle, or
    that end the horizon within manifold_tol of the sampled separatrix
    polyline when one is supplied, are classified SEPARATRIX.  The exact
    origin is UNDECIDED by convention (unstable node, basin-ambiguous),
    as is anything else that never approaches an attractor.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float)).copy()
    if pts.shape[1] != 2:
        raise ValueError(f"points must have shape (m, 2), got {pts.shape}")
    eq = p.equilibria()
    p_plus = eq.p_plus.as_array()
    p_minus = eq.p_minus.as_array()
    saddle = eq.saddle.as_array()

    m = pts.shape[0]
    result = np.full(m, -1, dtype=int)  # -1 active, 0 D1, 1 D2, 2 S, 3 undecided
    at_origin = (pts[:, 0] == 0.0) & (pts[:, 1] == 0.0)
    result[at_origin] = 3
    near_saddle = np.hypot(pts[:, 0] - saddle[0], pts[:, 1] - saddle[1]) <= attractor_tol
    result[near_saddle & (result == -1)] = 2

    active = result == -1
    u = pts[active, 0].copy()
    v = pts[active, 1].copy()
    idx = np.nonzero(active)[0]

    n_steps = int(round(horizon / dt))
    check_every = max(1, int(round(1.0 / dt)))  # test convergence once per time unit
    for k in range(n_steps):
        if idx.size == 0:
            break
        u, v = _rk4_step(p, u, v, dt)
        if np.min(u, initial=0.0) < NEGATIVITY_FLOOR or np.min(v, initial=0.0) < NEGATIVITY_FLOOR:
            raise StepSizeRejected(f"basin classification left the quadrant at dt={dt:g}")
        if (k + 1) % check_every == 0:
            d1 = np.hypot(u - p_plus[0], v - p_plus[1]) <= attractor_tol
            d2 = np.hypot(u - p_minus[0], v - p_minus[1]) <= attractor_tol
            done = d1 | d2
            if np.any(done):
                result[idx[d1]] = 0
                result[idx[d2]] = 1
                keep = ~done
                u, v, idx = u[keep], v[keep], idx[keep]

    if idx.size:
        # horizon exhausted: attractors once more, then saddle/manifold
        d1 = np.hypot(u - p_plus[0], v - p_plus[1]) <= attractor_tol
        d2 = np.hypot(u - p_minus[0], v - p_minus[1]) <= attractor_tol
        result[idx[d1]] = 0
        result[idx[d2]] = 1
        rest = ~(d1 | d2)
        if np.any(rest):
            end_pts = np.column_stack([u[rest], v[rest]])
            if separatrix_samples is not None:
                on_s = _dist_to_polyline_batch(
                    end_pts, np.asarray(separatrix_samples, dtype=float)
                ) <= manifold_tol
            else:
                on_s = (
                    np.hypot(end_pts[:, 0] - saddle[0], end_pts[:, 1] - saddle[1])
                    <= manifold_tol
                )
            sub = idx[rest]
            result[sub[on_s]] = 2
            result[sub[~on_s]] = 3

    lut = [Basin.DELTA1, Basin.DELTA2, Basin.SEPARATRIX, Basin.UNDECIDED]
    return [lut[r] for r in result]


def classify_basin(
    p: KineticsParams,
    s0,
    *,
    horizon: float = 200.0,
    dt: float = 1e-3,
    attractor_tol: float = 1e-6,
    manifold_tol: float = 1e-4,
    separatrix_samples: np.ndarray | None = None,
) -> Basin:
    """Classify a single phase point; see classify_basins."""
    u, v = _as_uv(s0)
    return classify_basins(
        p,
        np.array([[u, v]]),
        horizon=horizon,
        dt=dt,
        attractor_tol=attractor_tol,
        manifold_tol=manifold_tol,
        separatrix_samples=separatrix_samples,
    )[0]
