"""Finite-volume time stepping of the layered competition system.

The evolved equations are the unscaled form

    u_t = D1 div(k grad u) + (h/eps^2) f(u, v)
    v_t = D2 div(k grad v) + (h/eps^2) g(u, v)

on line, radial, and rectangular grids with zero-flux boundaries.  The
vertex-centered scheme conserves mass exactly and, under the stability
step bound, preserves the competitive order between solutions, which is
what the comparison tests lean on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrontTooClose, StabilityViolation
from .grids import Coefficients, FrontSpec, GridSpec
from .kinetics import KineticsParams, reaction_terms
from .separatrix import HFunction
from .wave import WaveProfile

__all__ = [
    "Field",
    "SolverConfig",
    "build_initial_data",
    "front_margin",
    "simulate",
    "stability_dt",
    "step",
]

BOX_MARGIN = 1e-6  # relative headroom of the invariant box
BOX_SLACK = 1e-9  # absolute excursion treated as instability


@dataclass(frozen=True)
class Field:
    """Grid-sampled species pair at one time."""

    grid: GridSpec
    u: np.ndarray
    v: np.ndarray
    time: float
    epsilon: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.shape != self.grid.shape or v.shape != self.grid.shape:
            raise ValueError(f"field shape {u.shape} does not match grid {self.grid.shape}")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping parameters; dt=None takes the stability bound."""

    t_end: float
    dt: float | None = None
    scheme: str = "explicit"
    face_mean: str = "arithmetic"

    def __post_init__(self):
        if self.t_end < 0.0:
            raise ValueError("t_end must be nonnegative")
        if self.scheme not in ("explicit", "imex"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.face_mean not in ("arithmetic", "harmonic"):
            raise ValueError(f"unknown face mean {self.face_mean!r}")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("dt must be positive")


def _jacobian_box_norm(p: KineticsParams) -> float:
    """Max row-sum norm of the kinetics Jacobian over the invariant box.

    All four entries are affine in (u, v), so the maximum sits at a corner.
    """
    U = p.u_plus * (1.0 + BOX_MARGIN)
    V = p.v_minus * (1.0 + BOX_MARGIN)
    worst = 0.0
    for u in (0.0, U):
        for v in (0.0, V):
            row1 = abs(p.R1 - 2.0 * p.a1 * u - p.b1 * v) + abs(p.b1 * u)
            row2 = abs(p.a2 * v) + abs(p.R2 - p.a2 * u - 2.0 * p.b2 * v)
            worst = max(worst, row1, row2)
    return worst


def stability_dt(grid: GridSpec, c: Coefficients, p: KineticsParams, epsilon: float) -> float:
    """Largest step honoring the diffusion CFL and reaction contraction.

    Returns min(0.2 eps^2/(h_max Lam), 0.9/(A + h_max Lam/eps^2)) with
    A the worst diffusion row sum; the 0.9 headroom keeps the combined
    explicit update monotone when both constraints are near-active.
    """
    d_max = max(p.D1, p.D2)
    k_max = float(c.k.max())
    h_max = float(c.h.max())
    lam = _jacobian_box_norm(p)
    if grid.geometry == "line":
        n_dim = 1
    elif grid.geometry == "radial":
        n_dim = grid.radial_dim
    else:
        n_dim = 2
    diffusion_rowsum = 2.0 * n_dim * d_max * k_max / grid.dx**2
    if grid.geometry == "rect2d" and grid.dy != grid.dx:
        diffusion_rowsum = 2.0 * d_max * k_max * (1.0 / grid.dx**2 + 1.0 / grid.dy**2)
    reaction_rate = h_max * lam / epsilon**2
    return min(0.2 / reaction_rate, 0.9 / (diffusion_rowsum + reaction_rate))


def _face_k(k: np.ndarray, axis: int, mean: str) -> np.ndarray:
    left = k[:-1] if axis == 0 else k[:, :-1]
    right = k[1:] if axis == 0 else k[:, 1:]
    if mean == "harmonic":
        return 2.0 * left * right / (left + right)
    return 0.5 * (left + right)


class _Stencil:
    """Precomputed divergence-form operator div(k grad .) for one grid."""

    def __init__(self, grid: GridSpec, c: Coefficients, face_mean: str):
        self.grid = grid
        dx = grid.dx
        if grid.geometry in ("line", "radial"):
            kf = _face_k(c.k, 0, face_mean)
            if grid.geometry == "radial":
                r = grid.nodes()
                area = (0.5 * (r[:-1] + r[1:])) ** (grid.radial_dim - 1)
            else:
                area = np.ones(grid.nx - 1)
            self.w_face = kf * area / dx
            self.inv_vol = 1.0 / grid.volumes()
        else:
            self.kfx = _face_k(c.k, 0, face_mean) / dx
            self.kfy = _face_k(c.k, 1, face_mean) / grid.dy
            self.half_x = np.full(grid.nx, dx)
            self.half_x[0] = self.half_x[-1] = dx / 2.0
            self.half_y = np.full(grid.ny, grid.dy)
            self.half_y[0] = self.half_y[-1] = grid.dy / 2.0

    def apply(self, w: np.ndarray) -> np.ndarray:
        g = self.grid
        out = np.empty_like(w)
        if g.geometry in ("line", "radial"):
            flux = self.w_face * np.diff(w)
            out[1:-1] = flux[1:] - flux[:-1]
            out[0] = flux[0]
            out[-1] = -flux[-1]
            out *= self.inv_vol
            return out
        fx = self.kfx * np.diff(w, axis=0)
        fy = self.kfy * np.diff(w, axis=1)
        out[1:-1, :] = fx[1:, :] - fx[:-1, :]
        out[0, :] = fx[0, :]
        out[-1, :] = -fx[-1, :]
        out /= self.half_x[:, None]
        oy = np.empty_like(w)
        oy[:, 1:-1] = fy[:, 1:] - fy[:, :-1]
        oy[:, 0] = fy[:, 0]
        oy[:, -1] = -fy[:, -1]
        oy /= self.half_y[None, :]
        out += oy
        return out


def _check_box(u, v, p):
    u_hi = p.u_plus * (1.0 + BOX_MARGIN) + BOX_SLACK
    v_hi = p.v_minus * (1.0 + BOX_MARGIN) + BOX_SLACK
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise StabilityViolation("state became non-finite")
    if u.min() < -BOX_SLACK or v.min() < -BOX_SLACK or u.max() > u_hi or v.max() > v_hi:
        raise StabilityViolation(
            f"state left the invariant box: u in [{u.min():.3e}, {u.max():.3e}], "
            f"v in [{v.min():.3e}, {v.max():.3e}]"
        )


class _ImexDiffusion:
    """Backward-Euler diffusion solves, factored once per (dt, species)."""

    def __init__(self, stencil: _Stencil, grid: GridSpec, dt: float):
        import scipy.sparse as sp
        import scipy.sparse.linalg as spla

        n = int(np.prod(grid.shape))
        rows, cols, vals = [], [], []

        def add(i, j, val):
            rows.append(i)
            cols.append(j)
            vals.append(val)

        if grid.geometry in ("line", "radial"):
            w = stencil.w_face
            iv = stencil.inv_vol
            for i in range(grid.nx):
                if i > 0:
                    add(i, i - 1, w[i - 1] * iv[i])
                    add(i, i, -w[i - 1] * iv[i])
                if i < grid.nx - 1:
                    add(i, i + 1, w[i] * iv[i])
                    add(i, i, -w[i] * iv[i])
        else:
            nx, ny = grid.shape

            def idx(i, j):
                return i * ny + j

            for i in range(nx):
                for j in range(ny):
                    me = idx(i, j)
                    if i > 0:
                        c = stencil.kfx[i - 1, j] / stencil.half_x[i]
                        add(me, idx(i - 1, j), c)
                        add(me, me, -c)
                    if i < nx - 1:
                        c = stencil.kfx[i, j] / stencil.half_x[i]
                        add(me, idx(i + 1, j), c)
                        add(me, me, -c)
                    if j > 0:
                        c = stencil.kfy[i, j - 1] / stencil.half_y[j]
                        add(me, idx(i, j - 1), c)
                        add(me, me, -c)
                    if j < ny - 1:
                        c = stencil.kfy[i, j] / stencil.half_y[j]
                        add(me, idx(i, j + 1), c)
                        add(me, me, -c)
        lap = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
        eye = sp.identity(n, format="csc")
        self.solvers = {}
        self._sp = sp
        self._spla = spla
        self._lap = lap
        self._eye = eye
        self._dt = dt
        self._shape = grid.shape

    def solve(self, rhs: np.ndarray, diffusivity: float) -> np.ndarray:
        key = diffusivity
        if key not in self.solvers:
            mat = self._eye - self._dt * diffusivity * self._lap
            self.solvers[key] = self._spla.splu(mat.tocsc())
        return self.solvers[key].solve(rhs.ravel()).reshape(self._shape)


def step(f: Field, c: Coefficients, p: KineticsParams, cfg: SolverConfig) -> Field:
    """Advance one time step; convenience wrapper over the simulate core."""
    dt = cfg.dt if cfg.dt is not None else stability_dt(f.grid, c, p, f.epsilon)
    stencil = _Stencil(f.grid, c, cfg.face_mean)
    u = f.u.copy()
    v = f.v.copy()
    imex = _ImexDiffusion(stencil, f.grid, dt) if cfg.scheme == "imex" else None
    u, v = _advance(u, v, f.grid, c, p, f.epsilon, dt, 1, stencil, imex)
    _check_box(u, v, p)
    return Field(grid=f.grid, u=u, v=v, time=f.time + dt, epsilon=f.epsilon)


def _advance(u, v, grid, c, p, epsilon, dt, n_steps, stencil, imex, check_every=64):
    """In-place march of n_steps; box checked on a cadence, not per step."""
    scale = c.h / epsilon**2
    for s in range(n_steps):
        f, g = reaction_terms(p, (u, v))
        if imex is None:
            u += dt * (p.D1 * stencil.apply(u) + scale * f)
            v += dt * (p.D2 * stencil.apply(v) + scale * g)
        else:
            u = imex.solve(u + dt * scale * f, p.D1)
            v = imex.solve(v + dt * scale * g, p.D2)
        if (s + 1) % check_every == 0:
            _check_box(u, v, p)
    return u, v


def simulate(
    f0: Field,
    c: Coefficients,
    p: KineticsParams,
    cfg: SolverConfig,
    probes: list[float] | None = None,
) -> list[Field]:
    """March to t_end, returning snapshots at the probe times.

    Probe times must be increasing within [0, t_end]; each snapshot is
    taken at the nearest step.  With no probes, returns the final state
    only.  t_end = 0 returns the initial field unchanged.
    """
    if probes is None:
        probes = [cfg.t_end]
    probes = list(probes)
    if any(t1 >= t2 for t1, t2 in zip(probes, probes[1:])):
        raise ValueError("probe times must be strictly increasing")
    if probes and (probes[0] < 0.0 or probes[-1] > cfg.t_end + 1e-12):
        raise ValueError("probe times must lie in [0, t_end]")
    if cfg.t_end == 0.0:
        return [f0 for _ in probes] or [f0]

    dt = cfg.dt if cfg.dt is not None else stability_dt(f0.grid, c, p, f0.epsilon)
    n_steps = max(1, int(np.ceil(cfg.t_end / dt - 1e-12)))
    dt = cfg.t_end / n_steps
    probe_steps = [min(n_steps, int(round(t / dt))) for t in probes]

    stencil = _Stencil(f0.grid, c, cfg.face_mean)
    imex = _ImexDiffusion(stencil, f0.grid, dt) if cfg.scheme == "imex" else None
    u = f0.u.copy()
    v = f0.v.copy()
    out = []
    pos = 0
    done = 0
    for target in sorted(set(probe_steps)):
        if target == 0:
            pass
        else:
            u, v = _advance(u, v, f0.grid, c, p, f0.epsilon, dt, target - done, stencil, imex)
            done = target
        _check_box(u, v, p)
        while pos < len(probe_steps) and probe_steps[pos] == target:
            out.append(
                Field(grid=f0.grid, u=u.copy(), v=v.copy(), time=f0.time + done * dt, epsilon=f0.epsilon)
            )
            pos += 1
    return out


def build_initial_data(
    kind: str,
    grid: GridSpec,
    gamma0: FrontSpec,
    c: Coefficients,
    wave: WaveProfile | None,
    epsilon: float,
    step_width: float = 0.1,
    step_width_v: float | None = None,
) -> Field:
    """Initial fields around a prescribed front.

    "well_prepared" composes the wave with the stretched signed distance
    K(x) d0(x)/eps, so the layer already has its limit shape.  "stepped"
    lays a smoothed jump of the given width between the two stable states
    to exercise layer generation; giving v its own step width breaks the
    u/v mirror symmetry, which is the generic case for layer generation.
    The front must keep 4 eps of clearance from the boundary.
    """
    if kind not in ("well_prepared", "stepped"):
        raise ValueError(f"unknown initial data kind {kind!r}")
    clearance = gamma0.boundary_clearance(grid)
    if clearance < 4.0 * epsilon:
        raise FrontTooClose(
            f"front clearance {clearance:.4g} is below 4*eps = {4.0 * epsilon:.4g}"
        )
    d0 = gamma0.signed_distance(grid)
    p = None
    if kind == "well_prepared":
        if wave is None:
            raise ValueError("well-prepared data needs a wave profile")
        arg = c.K * d0 / epsilon
        u = np.asarray(wave.phi_at(arg), dtype=float)
        v = np.asarray(wave.psi_at(arg), dtype=float)
        p = wave.params
    else:
        if wave is None:
            raise ValueError("stepped data needs the wave's parameters for the limit states")
        p = wave.params
        s = 0.5 * (1.0 + np.tanh(6.0 * d0 / step_width))
        sv = s
        if step_width_v is not None and step_width_v != step_width:
            sv = 0.5 * (1.0 + np.tanh(6.0 * d0 / step_width_v))
        u = p.u_plus * (1.0 - s)
        v = p.v_minus * sv
    return Field(grid=grid, u=u, v=v, time=0.0, epsilon=epsilon)


def front_margin(
    f: Field,
    d0: np.ndarray,
    h: HFunction,
    cap: float,
) -> float:
    """Worst ratio dist(state, separatrix) / |d0| near the front.

    Measures the layer-steepness constant over nodes with 0 < |d0| <= cap;
    positive values certify the initial data rises away from the critical
    set at a linear rate in the distance to the front.
    """
    from .kinetics import _dist_to_polyline_batch

    d0 = np.asarray(d0, dtype=float).ravel()
    mask = (np.abs(d0) > 0.0) & (np.abs(d0) <= cap)
    if not np.any(mask):
        raise ValueError("no nodes inside the margin cap")
    pts = np.column_stack([f.u.ravel()[mask], f.v.ravel()[mask]])
    dist = _dist_to_polyline_batch(pts, h.curve.samples)
    return float(np.min(dist / np.abs(d0[mask])))
