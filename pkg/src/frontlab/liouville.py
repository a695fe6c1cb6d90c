"""Dynamical shadows of the Liouville and comparison structure.

Long 1D runs in the stretched frame (epsilon = 1, unit coefficients).
Data pinched between two translates of the standing wave relax to a
single translate, located by a sup-norm fit; nested solutions keep the
competitive order u1 >= u2, v1 <= v2 under the monotone explicit step.
Both statements live on the whole line; the domain is truncated with
Dirichlet limit states at the ends, where the tails are exponentially
flat.
"""

from dataclasses import dataclass

import numpy as np

from .errors import FitOutOfBracket
from .grids import Coefficients, GridSpec
from .kinetics import KineticsParams, jacobian
from .separatrix import HFunction, compute_separatrix
from .solver import (
    Field,
    _advance,
    _ImexDiffusion,
    _jacobian_box_norm,
    _Stencil,
    stability_dt,
)
from .wave import WaveProfile, estimate_wave_speed, solve_standing_wave

__all__ = [
    "SandwichSeed",
    "TranslateFit",
    "comparison_test",
    "cooperation_transform_check",
    "envelope_seed",
    "liouville_convergence_test",
    "random_blend_seed",
    "seed_initial_data",
]


@dataclass(frozen=True)
class SandwichSeed:
    """Initial data pinched between wave translates at shifts a <= b.

    blend maps node positions to a pair of weights in [0, 1]; weight 0
    picks the translate at a, weight 1 the one at b, componentwise.  Any
    such blend keeps u between the translates' u values and v between
    their (oppositely ordered) v values, so the sandwich hypothesis
    holds at t = 0 by construction.  a == b degenerates to an exact
    translate.
    """

    a: float
    b: float
    blend: object  # callable x -> (lam_u, lam_v)

    def __post_init__(self):
        if not self.a <= self.b:
            raise ValueError("need a <= b")


@dataclass(frozen=True)
class TranslateFit:
    """Best translate shift and the sup distance to it."""

    theta: float
    residual: float


def envelope_seed(a: float, b: float, which: str = "min") -> SandwichSeed:
    """Componentwise min or max of the two translate pairs.

    phi falls and psi rises, so the min envelope takes u from the shift
    at a and v from the shift at b; the max envelope swaps them.  Both
    are genuinely mixed states, not translates.
    """
    if which not in ("min", "max"):
        raise ValueError(f"unknown envelope {which!r}")
    lu, lv = (0.0, 1.0) if which == "min" else (1.0, 0.0)

    def blend(x):
        shape = np.shape(x)
        return np.full(shape, lu), np.full(shape, lv)

    return SandwichSeed(a=a, b=b, blend=blend)


def random_blend_seed(a: float, b: float, rng: np.random.Generator) -> SandwichSeed:
    """Smooth random weights in (0, 1) from a few sinusoidal modes."""
    amp_u = rng.normal(0.0, 1.0, size=3)
    amp_v = rng.normal(0.0, 1.0, size=3)
    freq = rng.uniform(0.1, 0.6, size=3)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(2, 3))

    def blend(x):
        x = np.asarray(x, dtype=float)
        su = sum(A * np.sin(w * x + ph) for A, w, ph in zip(amp_u, freq, phase[0]))
        sv = sum(A * np.sin(w * x + ph) for A, w, ph in zip(amp_v, freq, phase[1]))
        return 0.5 * (1.0 + np.tanh(su)), 0.5 * (1.0 + np.tanh(sv))

    return SandwichSeed(a=a, b=b, blend=blend)


def seed_initial_data(seed: SandwichSeed, wave: WaveProfile, grid: GridSpec,
                      epsilon: float = 1.0) -> Field:
    """Blend the two translates on a line grid per the seed's weights."""
    if grid.geometry != "line":
        raise ValueError("sandwich seeds live on line grids")
    x = grid.nodes()
    lam_u, lam_v = seed.blend(x)
    lam_u = np.asarray(lam_u, dtype=float)
    lam_v = np.asarray(lam_v, dtype=float)
    for lam in (lam_u, lam_v):
        if lam.min() < 0.0 or lam.max() > 1.0:
            raise ValueError("blend weights must lie in [0, 1]")
    u = (1.0 - lam_u) * wave.phi_at(x - seed.a) + lam_u * wave.phi_at(x - seed.b)
    v = (1.0 - lam_v) * wave.psi_at(x - seed.a) + lam_v * wave.psi_at(x - seed.b)
    return Field(grid=grid, u=u, v=v, time=0.0, epsilon=epsilon)


def _order_violation(u1, v1, u2, v2) -> float:
    """Worst breach of u1 >= u2, v1 <= v2 (0 when the order holds)."""
    return max(0.0, float((u2 - u1).max()), float((v1 - v2).max()))


def comparison_test(p: KineticsParams, data1: Field, data2: Field, t_end: float) -> float:
    """Worst competitive-order violation along a lockstep explicit run.

    data1 starts above in u and below in v; both fields march with the
    same monotone step and the violation is scanned at every step, the
    initial instant included, so unordered input is reported rather
    than rejected.
    """
    if data1.grid != data2.grid:
        raise ValueError("comparison needs both fields on one grid")
    if data1.epsilon != data2.epsilon:
        raise ValueError("comparison needs a shared epsilon")
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    grid = data1.grid
    c = Coefficients.homogeneous(grid, 1.0, 1.0)
    eps = data1.epsilon
    bound = stability_dt(grid, c, p, eps)
    n_steps = int(np.ceil(t_end / bound))
    dt = t_end / n_steps
    stencil = _Stencil(grid, c, "arithmetic")
    u1, v1 = data1.u.copy(), data1.v.copy()
    u2, v2 = data2.u.copy(), data2.v.copy()
    worst = _order_violation(u1, v1, u2, v2)
    for _ in range(n_steps):
        u1, v1 = _advance(u1, v1, grid, c, p, eps, dt, 1, stencil, None)
        u2, v2 = _advance(u2, v2, grid, c, p, eps, dt, 1, stencil, None)
        worst = max(worst, _order_violation(u1, v1, u2, v2))
    return worst


def _wave_width(wave: WaveProfile) -> float:
    """10-90% transition width, worst of the two species."""
    z = wave.z
    lo_u = np.interp(0.1 * wave.params.u_plus, wave.phi[::-1], z[::-1])
    hi_u = np.interp(0.9 * wave.params.u_plus, wave.phi[::-1], z[::-1])
    lo_v = np.interp(0.1 * wave.params.v_minus, wave.psi, z)
    hi_v = np.interp(0.9 * wave.params.v_minus, wave.psi, z)
    return max(float(lo_u - hi_u), float(hi_v - lo_v))


def _golden_min(fn, lo: float, hi: float, tol: float):
    """Golden-section minimum of a unimodal scalar function."""
    invphi = 0.5 * (np.sqrt(5.0) - 1.0)
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = fn(x2)
    xm = 0.5 * (lo + hi)
    return xm, fn(xm)


def liouville_convergence_test(
    p: KineticsParams,
    seed: SandwichSeed,
    horizon: float = 20.0,
    *,
    length: float = 60.0,
    dx: float = 0.1,
    n_probes: int = 10,
    h: HFunction | None = None,
    wave: WaveProfile | None = None,
    wave_speed: float | None = None,
    speed_tol: float = 1e-3,
    theta_tol: float = 1e-6,
    scheme: str = "explicit",
) -> list[tuple[float, TranslateFit]]:
    """March sandwiched data and fit the nearest wave translate per probe.

    Returns (time, TranslateFit) pairs from t = 0 to the horizon.  The
    shift is found by golden-section search over [a - 1, b + 1]; a
    minimum pressed against that window raises FitOutOfBracket.  The
    forward half of eternality is what a numerical run can see, so
    relaxation toward a translate is the observable; no rate is claimed.
    Pass wave and wave_speed to amortize the solve across many seeds.
    The imex scheme steps at the reaction bound alone, which pays off
    when a fine grid would throttle the explicit march; both schemes
    share the spatial operator and hence the same steady states.
    """
    if scheme not in ("explicit", "imex"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if h is None:
        h = HFunction(curve=compute_separatrix(p))
    if wave is None:
        wave = solve_standing_wave(p, h=h)
    if wave_speed is None:
        wave_speed = estimate_wave_speed(p, h=h, profile=wave)
    if abs(wave_speed) > speed_tol:
        raise ValueError(
            f"front speed {wave_speed:.3g} exceeds {speed_tol:g}; "
            "the translate fit needs a standing wave"
        )
    need = 8.0 * (seed.b - seed.a) + 4.0 * _wave_width(wave)
    if length < need:
        raise ValueError(
            f"domain length {length:g} is below the sandwich requirement {need:.3g}"
        )
    grid = GridSpec.line(-0.5 * length, 0.5 * length, dx)
    c = Coefficients.homogeneous(grid, 1.0, 1.0)
    f0 = seed_initial_data(seed, wave, grid)
    u, v = f0.u.copy(), f0.v.copy()
    pp = wave.params

    def pin_ends(u, v):
        # Dirichlet limit states; overwriting after a step is the same
        # scheme as freezing the end nodes
        u[0], v[0] = pp.u_plus, 0.0
        u[-1], v[-1] = 0.0, pp.v_minus

    x = grid.nodes()
    lo, hi = seed.a - 1.0, seed.b + 1.0

    def fit(u, v) -> TranslateFit:
        def resid(theta):
            du = np.abs(u - wave.phi_at(x - theta)).max()
            dv = np.abs(v - wave.psi_at(x - theta)).max()
            return max(float(du), float(dv))

        theta, r = _golden_min(resid, lo, hi, theta_tol)
        if theta - lo < 5.0 * theta_tol or hi - theta < 5.0 * theta_tol:
            raise FitOutOfBracket(
                f"translate fit hit the window edge at theta = {theta:.6g}"
            )
        return TranslateFit(theta=theta, residual=r)

    if scheme == "explicit":
        bound = stability_dt(grid, c, p, 1.0)
    else:
        bound = 0.2 / (float(c.h.max()) * _jacobian_box_norm(p))
    probe_dt = horizon / n_probes
    steps_per = int(np.ceil(probe_dt / bound))
    dt = probe_dt / steps_per
    stencil = _Stencil(grid, c, "arithmetic")
    imex = _ImexDiffusion(stencil, grid, dt) if scheme == "imex" else None
    pin_ends(u, v)
    series = [(0.0, fit(u, v))]
    for k in range(1, n_probes + 1):
        for _ in range(steps_per):
            u, v = _advance(u, v, grid, c, p, 1.0, dt, 1, stencil, imex)
            pin_ends(u, v)
        series.append((k * probe_dt, fit(u, v)))
    return series


def cooperation_transform_check(p: KineticsParams, jac=None, n: int = 33) -> bool:
    """Sampled off-diagonal sign check for the (u, -v) change of variables.

    The flipped system is cooperative when -f_v and -g_u are nonnegative
    on the state box; both are affine with zeros only on the axes, so an
    interior sample grid decides the sign.  jac overrides the kinetics
    Jacobian, for wiring checks against deliberately broken entries.
    """
    if jac is None:
        def jac(u, v):
            return jacobian(p, (u, v))

    us = np.linspace(0.0, p.u_plus, n + 2)[1:-1]
    vs = np.linspace(0.0, p.v_minus, n + 2)[1:-1]
    U, V = np.meshgrid(us, vs, indexing="ij")
    J = np.asarray(jac(U, V))
    f_v = J[0, 1]
    g_u = J[1, 0]
    return bool(np.all(-f_v >= 0.0) and np.all(-g_u >= 0.0))
