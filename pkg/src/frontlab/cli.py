"""Batch front-end: parse a config, run pipelines, emit files deterministically.

Every run writes a manifest echoing the resolved configuration, then the
command's own CSV/JSON artifacts.  Numbers are printed with 17
significant digits so outputs round-trip and identical runs are
byte-identical; worker counts only parallelize independent units and
never reorder output.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 partial
failure in a multi-run command.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config
from .errors import ConfigError
from .grids import Coefficients, FrontSpec, GridSpec
from .interface import DrivingConstant, PolylineInterface, evolve_polyline, evolve_radial
from .kinetics import KineticsParams
from .liouville import comparison_test, liouville_convergence_test, random_blend_seed
from .metrics import REPORT_COLUMNS, convergence_sweep, sweep_rates
from .separatrix import HFunction, compute_separatrix
from .solver import SolverConfig, build_initial_data, simulate
from .wave import estimate_wave_speed, solve_standing_wave

__all__ = ["main"]

_NUMERICAL_ERRORS = (RuntimeError, ValueError, ArithmeticError)


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(v) if not isinstance(v, str) else v for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_manifest(out: Path, command: str, cfg: ExperimentConfig, seed: int) -> None:
    _write_json(out / "manifest.json", {
        "command": command,
        "seed": seed,
        "config": cfg.sections,
    })


def _wave_and_h(cfg: ExperimentConfig):
    p = cfg.require_kinetics()
    block = cfg.block("wave")
    h = HFunction(curve=compute_separatrix(p))
    wave = solve_standing_wave(p, L=block["L"], n=block["n"], h=h)
    return p, h, wave


def _coefficients(cfg: ExperimentConfig, grid) -> Coefficients:
    return Coefficients.from_callables(grid, cfg.k_expr, cfg.h_expr)


def _snapshot_rows(f):
    if f.grid.geometry == "rect2d":
        X, Y = f.grid.nodes()
        cols = np.column_stack([X.ravel(), Y.ravel(), f.u.ravel(), f.v.ravel()])
        return "x,y,u,v", cols
    x = f.grid.nodes()
    return "x,u,v", np.column_stack([x, f.u, f.v])


def _snapshot_sidecar(f, p: KineticsParams) -> dict:
    g = f.grid
    grid_info = {"geometry": g.geometry, "x_min": g.x_min, "x_max": g.x_max, "dx": g.dx}
    if g.geometry == "rect2d":
        grid_info.update(y_min=g.y_min, y_max=g.y_max, dy=g.dy)
    if g.geometry == "radial":
        grid_info["radial_dim"] = g.radial_dim
    return {
        "epsilon": f.epsilon,
        "t": f.time,
        "grid": grid_info,
        "params": {k: getattr(p, k) for k in ("D1", "D2", "R1", "R2", "a1", "b1", "a2", "b2")},
    }


def cmd_wave(cfg: ExperimentConfig, out: Path, workers: int, seed: int) -> int:
    p, h, wave = _wave_and_h(cfg)
    speed = estimate_wave_speed(p, h=h, profile=wave)
    _write_csv(out / "wave.csv", "z,phi,psi", zip(wave.z, wave.phi, wave.psi))
    _write_json(out / "speed.json", {
        "speed": speed,
        "L": cfg.block("wave")["L"],
        "n": cfg.block("wave")["n"],
    })
    return 0


def cmd_separatrix(cfg: ExperimentConfig, out: Path, workers: int, seed: int) -> int:
    p = cfg.require_kinetics()
    curve = compute_separatrix(p)
    _write_csv(out / "separatrix.csv", "u,zeta", zip(curve.u, curve.zeta))
    return 0


def cmd_simulate(cfg: ExperimentConfig, out: Path, workers: int, seed: int) -> int:
    p, h, wave = _wave_and_h(cfg)
    grid = cfg.require_grid()
    c = _coefficients(cfg, grid)
    solver = cfg.block("solver")
    eps = solver["epsilon"]
    f0 = build_initial_data(
        solver["data_kind"], grid, cfg.gamma0, c, wave, eps,
        step_width=solver["step_width"],
    )
    run_cfg = SolverConfig(
        t_end=solver["t_end"],
        dt=solver["dt"] if solver["dt"] > 0.0 else None,
        scheme=solver["scheme"],
    )
    final = simulate(f0, c, p, run_cfg)[-1]
    for tag, f in (("000", f0), ("001", final)):
        header, rows = _snapshot_rows(f)
        _write_csv(out / f"snap_{tag}.csv", header, rows)
        _write_json(out / f"snap_{tag}.json", _snapshot_sidecar(f, p))
    return 0


def cmd_interface(cfg: ExperimentConfig, out: Path, workers: int, seed: int) -> int:
    grid = cfg.require_grid()
    c = _coefficients(cfg, grid)
    block = cfg.block("interface")
    C = DrivingConstant(block.get("C", 0.0))
    if grid.geometry == "radial":
        hist = evolve_radial(
            cfg.gamma0.radius, c, C, n_dim=grid.radial_dim,
            t_end=block["t_end"], dt=block["dt"],
        )
        _write_csv(out / "interface.csv", "t,R", zip(hist.times, hist.radii))
        return 0
    if grid.geometry == "rect2d":
        n_vert = block["vertices"]
        th = np.linspace(0.0, 2.0 * np.pi, n_vert, endpoint=False)
        cx, cy = cfg.gamma0.center
        g = PolylineInterface(np.column_stack([
            cx + cfg.gamma0.radius * np.cos(th),
            cy + cfg.gamma0.radius * np.sin(th),
        ]))
        n_probes = block["n_probes"]
        chunk = block["t_end"] / n_probes
        rows = []

        def emit(t, poly):
            for i, (x, y) in enumerate(poly.vertices):
                rows.append((t, str(i), x, y))

        emit(0.0, g)
        for k in range(1, n_probes + 1):
            g = evolve_polyline(g, c, C, t_end=chunk, dt=block["dt"])
            emit(k * chunk, g)
        _write_csv(out / "interface.csv", "t,vertex_index,x,y", rows)
        return 0
    raise ConfigError("interface flow needs a radial or rect2d grid")


def cmd_converge(cfg: ExperimentConfig, out: Path, workers: int, seed: int) -> int:
    p = cfg.require_kinetics()
    m = cfg.block("metrics")
    iface = cfg.block("interface")
    heterogeneous = bool(cfg.k_expr.variables) or bool(cfg.h_expr.variables)
    kwargs = dict(
        R0=iface["gamma0_radius"],
        T=cfg.block("solver")["t_end"],
        c_gen=m["c_gen"],
        mu=m["mu"],
        n_probes=m["n_probes"],
        C=DrivingConstant(iface.get("C", 0.0)),
        k_fn=cfg.k_expr if heterogeneous else None,
        h_fn=cfg.h_expr if heterogeneous else None,
        data_kind=m["data_kind"],
        step_width=m["step_width"],
        data_offset_eps=m["data_offset_eps"],
    )
    if cfg.grid is not None and cfg.grid.geometry == "radial":
        kwargs["r_max"] = cfg.grid.x_max
        kwargs["n_dim"] = cfg.grid.radial_dim
    eps_list = [float(e) for e in m["eps_list"]]

    def write_result(reports, rates, failures) -> None:
        _write_csv(out / "report.csv", ",".join(REPORT_COLUMNS),
                   (r.row() for r in reports))
        summary = {"rates": rates}
        if failures:
            summary["failures"] = failures
        _write_json(out / "rates.json", summary)

    try:
        res = convergence_sweep(p, eps_list, workers=workers, **kwargs)
        write_result(res.reports, res.rates, {})
        return 0
    except _NUMERICAL_ERRORS as first_error:
        if len(eps_list) == 1:
            raise
        # isolate the failing epsilon(s); survivors still make a report
        reports, failures = [], {}
        for e in eps_list:
            try:
                reports.extend(convergence_sweep(p, [e], workers=1, **kwargs).reports)
            except _NUMERICAL_ERRORS as err:
                failures[_fmt(e)] = f"{type(err).__name__}: {err}"
        if not reports:
            raise first_error
        write_result(reports, sweep_rates(reports), failures)
        return 4


def cmd_liouville(cfg: ExperimentConfig, out: Path, workers: int, seed: int) -> int:
    p = cfg.require_kinetics()
    block = cfg.block("liouville")
    a, b = block["a"], block["b"]
    n_seeds, n_pairs = block["n_seeds"], block["n_pairs"]
    summary = {"seeds": [], "pairs": [], "seed_failures": {}, "pair_failures": {}}
    if n_seeds == 0 and n_pairs == 0:
        _write_json(out / "summary.json", summary)
        return 0
    _, h, wave = _wave_and_h(cfg)
    wave_speed = estimate_wave_speed(p, h=h, profile=wave)

    def run_seed(i: int):
        rng = np.random.default_rng([seed, i])
        series = liouville_convergence_test(
            p, random_blend_seed(a, b, rng), block["horizon"],
            length=block["length"], dx=block["dx"], n_probes=block["n_probes"],
            h=h, wave=wave, wave_speed=wave_speed,
        )
        return [(t, f.theta, f.residual) for t, f in series]

    def run_pair(j: int):
        rng = np.random.default_rng([seed, 1_000_000 + j])
        grid_len = 0.5 * block["length"]
        grid = GridSpec.line(-0.5 * grid_len, 0.5 * grid_len, block["dx"])
        c = Coefficients.homogeneous(grid, 1.0, 1.0)
        span = 0.25 * grid_len
        lo, hi = np.sort(rng.uniform(-span, span, size=2))
        if hi - lo < 0.1:
            hi = lo + 0.1
        d1 = build_initial_data("well_prepared", grid, FrontSpec(kind="point", x0=hi), c, wave, 1.0)
        d2 = build_initial_data("well_prepared", grid, FrontSpec(kind="point", x0=lo), c, wave, 1.0)
        return comparison_test(p, d1, d2, block["t_pair"])

    def collect(n, fn, ok, failed):
        if n == 0:
            return {}
        results = {}
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futs = {i: pool.submit(fn, i) for i in range(n)}
            for i, fut in futs.items():
                try:
                    results[i] = fut.result()
                except _NUMERICAL_ERRORS as err:
                    failed[str(i)] = f"{type(err).__name__}: {err}"
        else:
            for i in range(n):
                try:
                    results[i] = fn(i)
                except _NUMERICAL_ERRORS as err:
                    failed[str(i)] = f"{type(err).__name__}: {err}"
        for i in sorted(results):
            ok(i, results[i])
        return results

    def ok_seed(i, series):
        _write_csv(out / f"seed_{i:03d}.csv", "t,theta,residual", series)
        t, theta, residual = series[-1]
        summary["seeds"].append({"index": i, "theta": theta, "residual": residual})

    def ok_pair(j, viol):
        summary["pairs"].append({"index": j, "violation": viol})

    seed_results = collect(n_seeds, run_seed, ok_seed, summary["seed_failures"])
    pair_results = collect(n_pairs, run_pair, ok_pair, summary["pair_failures"])

    if summary["pairs"]:
        summary["violation_max"] = max(x["violation"] for x in summary["pairs"])
    if summary["seeds"]:
        summary["final_residual_max"] = max(x["residual"] for x in summary["seeds"])
    _write_json(out / "summary.json", summary)

    failed = len(summary["seed_failures"]) + len(summary["pair_failures"])
    if failed == 0:
        return 0
    if not seed_results and not pair_results:
        return 3
    return 4


_COMMANDS = {
    "wave": cmd_wave,
    "separatrix": cmd_separatrix,
    "simulate": cmd_simulate,
    "interface": cmd_interface,
    "converge": cmd_converge,
    "liouville": cmd_liouville,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frontlab",
        description="Competition-diffusion front laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cp = sub.add_parser(name)
        cp.add_argument("--config", required=True, help="experiment TOML file")
        cp.add_argument("--out", required=True, help="output directory")
        cp.add_argument("--workers", type=int, default=1)
        cp.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    seed = cfg.seed if args.seed is None else args.seed
    if seed < 0:
        print("error: --seed must be nonnegative", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        _write_manifest(out, args.command, cfg, seed)
        return _COMMANDS[args.command](cfg, out, args.workers, seed)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
