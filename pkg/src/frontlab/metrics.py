"""Validity metrics: profile errors, front distances, sandwich bands.

Everything here measures how far a finite-epsilon run sits from its
sharp-interface description: sup-norm errors against the stretched
standing-wave ansatz, Hausdorff distance between the extracted front
and the limit interface, the graph offset eta, the normal shift theta,
and fitted sandwich constants.  A sweep driver repeats the radial
benchmark over an epsilon list and fits convergence rates.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ProjectionAmbiguous
from .grids import Coefficients, FrontSpec, GridSpec
from .interface import (
    DrivingConstant,
    PolylineInterface,
    _inside_mask,
    _point_segment_distance_chunked,
    evolve_radial,
    extract_front,
    hausdorff_distance,
    signed_distance,
)
from .kinetics import KineticsParams
from .separatrix import HFunction, compute_separatrix
from .solver import Field, SolverConfig, build_initial_data, simulate
from .wave import AnsatzProfile, balanced_wave_profile

__all__ = [
    "ErrorReport",
    "SweepResult",
    "convergence_sweep",
    "fit_sandwich",
    "generation_window",
    "graph_over_gamma",
    "profile_error_ii",
    "profile_error_iii",
    "sandwich_check",
    "sweep_rates",
]

REPORT_COLUMNS = (
    "eps",
    "t0",
    "T",
    "E_ii_u",
    "E_ii_v",
    "E_iii_u",
    "E_iii_v",
    "dH_max",
    "eta_sup",
    "theta_sup",
    "A1_fit",
    "A2_fit",
    "A3_fit",
)


@dataclass(frozen=True)
class ErrorReport:
    """All validity measurements for one epsilon."""

    epsilon: float
    t0: float
    T: float
    E_ii_u: float
    E_ii_v: float
    E_iii_u: float
    E_iii_v: float
    d_H_max: float
    eta_sup: float
    grad_eta_sup: float
    theta_sup: float
    A1_fit: float
    A2_fit: float
    A3_fit: float
    violations: int = 0
    resolved: bool = True

    def __post_init__(self):
        for name in (
            "epsilon",
            "t0",
            "T",
            "E_ii_u",
            "E_ii_v",
            "E_iii_u",
            "E_iii_v",
            "d_H_max",
            "eta_sup",
            "grad_eta_sup",
            "theta_sup",
            "A1_fit",
            "A2_fit",
            "A3_fit",
        ):
            val = getattr(self, name)
            if not np.isfinite(val) or val < 0.0:
                raise ValueError(f"report field {name} must be finite and nonnegative, got {val}")

    def row(self) -> tuple:
        return (
            self.epsilon,
            self.t0,
            self.T,
            self.E_ii_u,
            self.E_ii_v,
            self.E_iii_u,
            self.E_iii_v,
            self.d_H_max,
            self.eta_sup,
            self.theta_sup,
            self.A1_fit,
            self.A2_fit,
            self.A3_fit,
        )


@dataclass(frozen=True)
class SweepResult:
    """Reports over a decreasing epsilon grid plus fitted rates."""

    reports: tuple
    rates: dict
    excluded: tuple = ()

    def __post_init__(self):
        eps = [r.epsilon for r in self.reports]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("reports must come in strictly decreasing epsilon order")


def generation_window(epsilon: float, T: float, c_gen: float = 10.0, mu: float = 1.0):
    """Measurement window [t0, T] with t0 = mu*c_gen*eps^2|log eps|.

    The rule can exceed T at desk-scale epsilon, which would empty the
    window; t0 is clamped to T/2 so a window always exists for
    well-prepared data (the layer is formed at t=0 by construction).
    """
    if epsilon <= 0.0 or epsilon >= 1.0:
        raise ValueError("epsilon must lie in (0, 1) for the |log eps| rule")
    if T <= 0.0:
        raise ValueError("need T > 0")
    t0 = mu * c_gen * epsilon**2 * abs(np.log(epsilon))
    return min(t0, 0.5 * T), T


def _front_distance_field(front, grid: GridSpec) -> np.ndarray:
    if isinstance(front, PolylineInterface):
        return signed_distance(front, grid).d
    return signed_distance(np.asarray(front, dtype=float), grid).d


def profile_error_ii(snapshots, fronts, ansatz: AnsatzProfile):
    """Sup-norm distance to the ansatz centered on the extracted front.

    fronts[i] is the extracted front of snapshots[i] (crossing array or
    polyline); the error at a node is |u - U0(d_eps/eps, x)| with d_eps
    the signed distance to that front.
    """
    if len(snapshots) != len(fronts) or not snapshots:
        raise ValueError("need one front per snapshot")
    err_u = 0.0
    err_v = 0.0
    for f, front in zip(snapshots, fronts):
        d = _front_distance_field(front, f.grid)
        uh, vh = _ansatz_on_grid(ansatz, f.grid, d / f.epsilon)
        err_u = max(err_u, float(np.abs(f.u - uh).max()))
        err_v = max(err_v, float(np.abs(f.v - vh).max()))
    return err_u, err_v


def _ansatz_on_grid(ansatz: AnsatzProfile, grid: GridSpec, zeta: np.ndarray):
    if grid.geometry == "rect2d":
        X, Y = grid.nodes()
        return ansatz(zeta, X, Y)
    return ansatz(zeta, grid.nodes())


def _theta_on_limit(front_eps, gamma_limit, epsilon: float, grid: GridSpec):
    """theta(p) = -d_eps(p)/eps sampled on the limit interface."""
    if isinstance(gamma_limit, PolylineInterface):
        if not isinstance(front_eps, PolylineInterface):
            raise ValueError("polyline limit interface needs a polyline front")
        p = gamma_limit.vertices
        closed = np.vstack([front_eps.vertices, front_eps.vertices[:1]])
        dist = _point_segment_distance_chunked(p, closed)
        sign = np.where(_inside_mask(p, front_eps.vertices), -1.0, 1.0)
        return -(sign * dist) / epsilon
    R = float(gamma_limit)
    crossings = np.atleast_1d(np.asarray(front_eps, dtype=float))
    # point on the limit circle against concentric extracted radii
    nearest = crossings[np.argmin(np.abs(R - crossings))]
    return np.array([-(R - nearest) / epsilon])


def profile_error_iii(snapshots, fronts, gamma_limit, ansatz: AnsatzProfile):
    """Shifted sup-errors of the limit-interface description.

    gamma_limit[i] is the limit front at snapshot i (radius or
    polyline).  The ansatz argument at x is (d(x) - eps*theta(p(x)))/eps
    with d the distance to the limit interface, p(x) its nearest point,
    and theta = -d_eps/eps sampled on the limit interface.
    """
    if not (len(snapshots) == len(fronts) == len(gamma_limit)):
        raise ValueError("need matching snapshots, fronts, and limit interfaces")
    err_u = 0.0
    err_v = 0.0
    theta_sup = 0.0
    for f, front, glim in zip(snapshots, fronts, gamma_limit):
        theta = _theta_on_limit(front, glim, f.epsilon, f.grid)
        theta_sup = max(theta_sup, float(np.abs(theta).max()))
        d_lim = _limit_distance_field(glim, f.grid)
        if isinstance(glim, PolylineInterface):
            idx = _nearest_vertex_index(f.grid, glim.vertices)
            shift = theta[idx]
        else:
            shift = theta[0]
        zeta = (d_lim - f.epsilon * shift) / f.epsilon
        uh, vh = _ansatz_on_grid(ansatz, f.grid, zeta)
        err_u = max(err_u, float(np.abs(f.u - uh).max()))
        err_v = max(err_v, float(np.abs(f.v - vh).max()))
    return err_u, err_v, theta_sup


def _limit_distance_field(glim, grid: GridSpec) -> np.ndarray:
    if isinstance(glim, PolylineInterface):
        return signed_distance(glim, grid).d
    if grid.geometry == "rect2d":
        raise ValueError("scalar limit radius needs a line or radial grid")
    return grid.nodes() - float(glim)


def _nearest_vertex_index(grid: GridSpec, vertices: np.ndarray) -> np.ndarray:
    X, Y = grid.nodes()
    pts = np.column_stack([X.ravel(), Y.ravel()])
    out = np.empty(len(pts), dtype=int)
    for lo in range(0, len(pts), 4096):
        chunk = pts[lo : lo + 4096]
        d2 = ((chunk[:, None, :] - vertices[None, :, :]) ** 2).sum(axis=2)
        out[lo : lo + 4096] = np.argmin(d2, axis=1)
    return out.reshape(grid.shape)


def graph_over_gamma(gamma_eps, gamma_limit, band: float | None = None):
    """Graph offset of the extracted front over the limit interface.

    Returns (eta_sup, grad_eta_sup).  For scalar radii the offset is the
    radius gap and the tangential gradient vanishes by symmetry.  For
    polylines each limit vertex shoots its outward normal ray and eta is
    the signed ray parameter at the unique crossing of the front within
    the search band; two crossings raise ProjectionAmbiguous.
    """
    if not isinstance(gamma_limit, PolylineInterface):
        eta = float(np.min(np.abs(np.atleast_1d(gamma_eps) - float(gamma_limit))))
        return eta, 0.0
    if not isinstance(gamma_eps, PolylineInterface):
        raise ValueError("polyline limit interface needs a polyline front")
    v = gamma_limit.vertices
    nxt = np.roll(v, -1, axis=0)
    prv = np.roll(v, 1, axis=0)
    chord = nxt - prv
    tlen = np.hypot(chord[:, 0], chord[:, 1])
    normal = np.column_stack([chord[:, 1], -chord[:, 0]]) / tlen[:, None]
    if band is None:
        band = 0.25 * gamma_limit.perimeter
    a = gamma_eps.vertices
    b = np.roll(a, -1, axis=0)
    eta = np.empty(len(v))
    for i, (p, n) in enumerate(zip(v, normal)):
        # solve p + s n = a + t (b - a) for each front segment
        e = b - a
        denom = e[:, 0] * n[1] - e[:, 1] * n[0]
        ok = np.abs(denom) > 1e-14
        ap = p - a
        t = np.where(ok, (ap[:, 0] * n[1] - ap[:, 1] * n[0]) / np.where(ok, denom, 1.0), np.inf)
        s = np.where(ok, (ap[:, 0] * e[:, 1] - ap[:, 1] * e[:, 0]) / np.where(ok, denom, 1.0), np.inf)
        hits = s[(t >= 0.0) & (t < 1.0) & np.isfinite(s) & (np.abs(s) <= band)]
        if len(hits) == 0:
            raise ProjectionAmbiguous(f"normal ray at vertex {i} misses the front within band {band:.3g}")
        if len(hits) > 1 and np.ptp(hits) > 1e-10:
            raise ProjectionAmbiguous(f"normal ray at vertex {i} meets the front {len(hits)} times")
        eta[i] = hits[0]
    ds = np.hypot(*(nxt - v).T)
    grad = np.abs(np.roll(eta, -1) - eta) / ds
    return float(np.abs(eta).max()), float(grad.max())


def sandwich_check(snapshots, gamma_limit, ansatz: AnsatzProfile, A1: float, A2: float, A3: float) -> int:
    """Count nodes/times outside the shifted super/subsolution bands.

    u must lie between U0((d + eps A1)/eps) - eps A2 and
    U0((d - eps A1)/eps) + eps A2; v mirrors with A3 (its profile rises
    where u falls, so the same shifts bound it from the other side).
    """
    if min(A1, A2, A3) < 0.0:
        raise ValueError("band constants must be nonnegative")
    total = 0
    for f, glim in zip(snapshots, gamma_limit):
        d = _limit_distance_field(glim, f.grid)
        eps = f.epsilon
        lo_u, hi_v = _ansatz_on_grid(ansatz, f.grid, (d + eps * A1) / eps)
        hi_u, lo_v = _ansatz_on_grid(ansatz, f.grid, (d - eps * A1) / eps)
        bad = (f.u < lo_u - eps * A2) | (f.u > hi_u + eps * A2)
        bad |= (f.v < lo_v - eps * A3) | (f.v > hi_v + eps * A3)
        total += int(np.count_nonzero(bad))
    return total


def _band_depths(snapshots, gamma_limit, ansatz, A1: float):
    """Smallest (A2, A3) closing the bands at this A1."""
    need2 = 0.0
    need3 = 0.0
    for f, glim in zip(snapshots, gamma_limit):
        d = _limit_distance_field(glim, f.grid)
        eps = f.epsilon
        lo_u, hi_v = _ansatz_on_grid(ansatz, f.grid, (d + eps * A1) / eps)
        hi_u, lo_v = _ansatz_on_grid(ansatz, f.grid, (d - eps * A1) / eps)
        need2 = max(need2, float((lo_u - f.u).max()) / eps, float((f.u - hi_u).max()) / eps)
        need3 = max(need3, float((lo_v - f.v).max()) / eps, float((f.v - hi_v).max()) / eps)
    return max(0.0, need2), max(0.0, need3)


def fit_sandwich(snapshots, gamma_limit, ansatz: AnsatzProfile):
    """Smallest band constants with zero violations.

    A2_min and A3_min fall as A1 grows, so "smallest" is scalarized as
    minimizing A1 + A2 + A3 over an A1 grid with one local refinement;
    deterministic and stable across runs.  Reported constants are floored
    at the refinement grid step: the fit cannot resolve anything smaller
    than its own quantum, so a floored value reads "at most this", and
    ratio comparisons across a sweep stay meaningful when a slack is
    effectively zero.
    """

    def cost(A1):
        a2, a3 = _band_depths(snapshots, gamma_limit, ansatz, A1)
        return A1 + a2 + a3, a2, a3

    coarse = np.linspace(0.0, 4.0, 17)
    vals = [cost(a) for a in coarse]
    i = int(np.argmin([v[0] for v in vals]))
    lo = coarse[max(0, i - 1)]
    hi = coarse[min(len(coarse) - 1, i + 1)]
    fine = np.linspace(lo, hi, 21)
    vals = [cost(a) for a in fine]
    j = int(np.argmin([v[0] for v in vals]))
    quantum = float(fine[1] - fine[0])
    A1 = max(float(fine[j]), quantum)
    _, A2, A3 = vals[j]
    return A1, max(A2, quantum), max(A3, quantum)


def sweep_rates(reports) -> dict:
    """Power-law fits q, C for the headline error columns of a sweep."""
    rates = {}
    if len(reports) >= 2:
        ev = np.array([r.epsilon for r in reports])
        for name, key in (
            ("dH_max", "d_H_max"),
            ("E_ii_u", "E_ii_u"),
            ("E_ii_v", "E_ii_v"),
            ("eta_sup", "eta_sup"),
        ):
            fit = _fit_rate(ev, np.array([getattr(r, key) for r in reports]))
            if fit is not None:
                rates[name] = {"q": fit[0], "C": fit[1]}
    return rates


def _fit_rate(eps: np.ndarray, y: np.ndarray):
    """Least-squares fit y = C * eps^q in log-log coordinates."""
    mask = y > 0.0
    if mask.sum() < 2:
        return None
    le = np.log(eps[mask])
    ly = np.log(y[mask])
    q, lc = np.polyfit(le, ly, 1)
    return float(q), float(np.exp(lc))


def _radial_pipeline(
    p: KineticsParams,
    epsilon: float,
    wave,
    hfun: HFunction,
    R0: float,
    T: float,
    r_max: float,
    n_dim: int,
    c_gen: float,
    mu: float,
    n_probes: int,
    C,
    k_fn,
    h_fn,
    data_kind: str,
    step_width: float,
    step_width_v: float | None,
    data_offset_eps: float,
) -> ErrorReport:
    grid = GridSpec.radial(r_max, epsilon / 8.0, dim=n_dim)
    if k_fn is None:
        c = Coefficients.homogeneous(grid, 1.0, 1.0)
    else:
        c = Coefficients.from_callables(grid, k_fn, h_fn)
    t0, t_end = generation_window(epsilon, T, c_gen, mu)
    probes = list(np.linspace(t0, t_end, n_probes))
    f0 = build_initial_data(
        data_kind,
        grid,
        FrontSpec(
            kind="circle",
            center=(0.0, 0.0),
            radius=R0 + data_offset_eps * epsilon,
        ),
        c,
        wave,
        epsilon,
        step_width=step_width,
        step_width_v=step_width_v,
    )
    snapshots = simulate(f0, c, p, SolverConfig(t_end=t_end), probes=probes)
    limit = evolve_radial(R0, c, C, n_dim=n_dim, t_end=t_end, dt=min(1e-4, t_end / 50.0))
    fronts = [extract_front(f, hfun) for f in snapshots]
    radii_lim = [limit.radius_at(f.time) for f in snapshots]

    ansatz = AnsatzProfile(wave=wave, K_of_x=c.K_at)
    E_ii_u, E_ii_v = profile_error_ii(snapshots, fronts, ansatz)
    E_iii_u, E_iii_v, theta_sup = profile_error_iii(snapshots, fronts, radii_lim, ansatz)
    dH = max(hausdorff_distance(fr, np.array([R])) for fr, R in zip(fronts, radii_lim))
    eta_sup = max(graph_over_gamma(fr, R)[0] for fr, R in zip(fronts, radii_lim))
    grad_eta = 0.0
    A1, A2, A3 = fit_sandwich(snapshots, radii_lim, ansatz)
    violations = sandwich_check(snapshots, radii_lim, ansatz, A1, A2, A3)
    return ErrorReport(
        epsilon=epsilon,
        t0=t0,
        T=t_end,
        E_ii_u=E_ii_u,
        E_ii_v=E_ii_v,
        E_iii_u=E_iii_u,
        E_iii_v=E_iii_v,
        d_H_max=dH,
        eta_sup=eta_sup,
        grad_eta_sup=grad_eta,
        theta_sup=theta_sup,
        A1_fit=A1,
        A2_fit=A2,
        A3_fit=A3,
        violations=violations,
        resolved=True,
    )


def convergence_sweep(
    p: KineticsParams,
    eps_list,
    *,
    R0: float = 0.5,
    T: float = 0.04,
    r_max: float = 1.0,
    n_dim: int = 2,
    c_gen: float = 10.0,
    mu: float = 1.0,
    n_probes: int = 9,
    C=DrivingConstant(0.0),
    k_fn=None,
    h_fn=None,
    data_kind: str = "well_prepared",
    step_width: float = 0.1,
    step_width_v: float | None = None,
    data_offset_eps: float = 0.8,
    workers: int = 1,
) -> SweepResult:
    """Radial benchmark over a decreasing epsilon list, with rate fits.

    By default the initial layer is centered a distance data_offset_eps
    times eps outside the limit interface.  The interface estimates are
    stability statements: data within O(eps) of the front stays within
    O(eps), uniformly down the sweep.  The offset puts each run squarely
    in that regime, so d_H/eps and the fitted band constants level off
    at the offset scale instead of decaying.  Exactly centered data
    (offset 0) is degenerate: every O(eps) front effect cancels and the
    measured distances collapse like eps^2, which says nothing about the
    O(eps) bounds.  Stepped data with eps-independent widths is worse
    than either: the generated front lands about sqrt(eps * width) from
    the crossing set, a sub-linear displacement that drifts through the
    normalized metrics.

    Per-epsilon pipelines are independent (optionally threaded); the
    reports always merge in epsilon order so the result is deterministic
    regardless of worker count.  Rate fits use every run here because
    the pipeline fixes dx = eps/8; a hypothetical coarser run would be
    excluded and listed in `excluded`.
    """
    eps_arr = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_arr, eps_arr[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if (k_fn is None) != (h_fn is None):
        raise ValueError("give both coefficient callables or neither")
    hfun = HFunction(curve=compute_separatrix(p))
    wave = balanced_wave_profile(p, L=60.0, n=4096, h=hfun)

    def run(eps):
        return _radial_pipeline(
            p, eps, wave, hfun, R0, T, r_max, n_dim, c_gen, mu, n_probes, C, k_fn, h_fn,
            data_kind, step_width, step_width_v, data_offset_eps,
        )

    if workers > 1 and len(eps_arr) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, eps_arr))
    else:
        reports = [run(e) for e in eps_arr]

    return SweepResult(reports=tuple(reports), rates=sweep_rates(reports), excluded=())
