"""Experiment configuration: TOML sections, typed keys, cross-checks.

The file format is flat key-value under named sections so configs diff
cleanly.  Loading fills defaults, rejects unknown keys, and runs the
cross-validation that must fail before any numerics start: bistability
of the kinetics, the initial front sitting inside the domain, the grid
resolving the smallest epsilon, and a supplied driving constant whenever
the coefficients vary in space.
"""

import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .exprs import CoefficientExpr, parse_expr
from .grids import FrontSpec, GridSpec
from .kinetics import KineticsParams

__all__ = ["ExperimentConfig", "load_config"]

# section -> key -> (type, default); None default means required-if-used
_SCHEMA = {
    "kinetics": {k: (float, None) for k in ("D1", "D2", "R1", "R2", "a1", "b1", "a2", "b2")},
    "grid": {
        "geometry": (str, None),
        "extent": (list, None),
        "dx": (float, None),
        "radial_dim": (int, 2),
    },
    "coeff": {
        "k_expr": (str, "1"),
        "h_expr": (str, "1"),
    },
    "solver": {
        "dt": (float, 0.0),  # 0 means take the stability bound
        "scheme": (str, "explicit"),
        "t_end": (float, 0.04),
        "epsilon": (float, 0.1),
        "data_kind": (str, "well_prepared"),
        "step_width": (float, 0.1),
    },
    "interface": {
        "C": (float, None),
        "gamma0_kind": (str, "circle"),
        "gamma0_x0": (float, 0.0),
        "gamma0_center": (list, [0.0, 0.0]),
        "gamma0_radius": (float, 0.5),
        "t_end": (float, 0.04),
        "dt": (float, 1e-4),
        "vertices": (int, 256),
        "n_probes": (int, 8),
    },
    "metrics": {
        "eps_list": (list, [0.1, 0.05, 0.025]),
        "mu": (float, 1.0),
        "c_gen": (float, 10.0),
        "n_probes": (int, 9),
        "data_kind": (str, "well_prepared"),
        "step_width": (float, 0.1),
        "data_offset_eps": (float, 0.8),
    },
    "liouville": {
        "a": (float, -2.0),
        "b": (float, 2.0),
        "n_seeds": (int, 50),
        "horizon": (float, 20.0),
        "length": (float, 60.0),
        "dx": (float, 0.1),
        "n_probes": (int, 10),
        "n_pairs": (int, 50),
        "t_pair": (float, 1.0),
    },
    "wave": {
        "L": (float, 60.0),
        "n": (int, 4096),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment description.

    kinetics is None when the file has no kinetics section; commands
    that need one say so.  The raw resolved sections are kept for the
    manifest echo.
    """

    kinetics: KineticsParams | None
    k_expr: CoefficientExpr
    h_expr: CoefficientExpr
    grid: GridSpec | None
    gamma0: FrontSpec
    sections: dict = field(repr=False)
    seed: int = 0

    def block(self, name: str) -> dict:
        return self.sections[name]

    def require_kinetics(self) -> KineticsParams:
        if self.kinetics is None:
            raise ConfigError("this command needs a [kinetics] section")
        return self.kinetics

    def require_grid(self) -> GridSpec:
        if self.grid is None:
            raise ConfigError("this command needs a [grid] section")
        return self.grid


def _coerce(section: str, key: str, want, value):
    if want is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
        return float(value)
    if want is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
        return int(value)
    if want is str:
        if not isinstance(value, str):
            raise ConfigError(f"{section}.{key} must be a string, got {value!r}")
        return value
    if want is list:
        if not isinstance(value, list):
            raise ConfigError(f"{section}.{key} must be an array, got {value!r}")
        return list(value)
    raise AssertionError(f"unhandled schema type {want}")


def _resolve_sections(raw: dict) -> tuple[dict, int]:
    known = set(_SCHEMA)
    seed = 0
    for key in raw:
        if key == "seed":
            seed = _coerce("top level", "seed", int, raw[key])
            if seed < 0:
                raise ConfigError("seed must be nonnegative")
            continue
        if key not in known:
            raise ConfigError(f"unknown section [{key}]")
        if not isinstance(raw[key], dict):
            raise ConfigError(f"[{key}] must be a section, not a value")
    sections = {}
    for name, keys in _SCHEMA.items():
        given = raw.get(name, {})
        for key in given:
            if key not in keys:
                raise ConfigError(f"unknown key {name}.{key}")
        block = {}
        for key, (want, default) in keys.items():
            if key in given:
                block[key] = _coerce(name, key, want, given[key])
            elif default is not None:
                block[key] = list(default) if isinstance(default, list) else default
        sections[name] = block
    return sections, seed


def _build_kinetics(sections: dict) -> KineticsParams | None:
    block = sections["kinetics"]
    if not block:
        return None
    missing = [k for k in _SCHEMA["kinetics"] if k not in block]
    if missing:
        raise ConfigError(f"kinetics section is missing {', '.join(missing)}")
    try:
        return KineticsParams(**block)
    except ValueError as e:
        raise ConfigError(f"kinetics rejected: {e}") from None


def _build_grid(sections: dict) -> GridSpec | None:
    block = sections["grid"]
    if "geometry" not in block:
        return None
    for key in ("extent", "dx"):
        if key not in block:
            raise ConfigError(f"grid section needs {key}")
    geom = block["geometry"]
    extent = [float(v) for v in block["extent"]]
    dx = block["dx"]
    if dx <= 0.0:
        raise ConfigError("grid.dx must be positive")
    try:
        if geom == "line":
            if len(extent) != 2:
                raise ConfigError("line extent is [x_min, x_max]")
            return GridSpec.line(extent[0], extent[1], dx)
        if geom == "radial":
            if len(extent) != 1:
                raise ConfigError("radial extent is [r_max]")
            return GridSpec.radial(extent[0], dx, dim=block["radial_dim"])
        if geom == "rect2d":
            if len(extent) != 4:
                raise ConfigError("rect2d extent is [x_min, x_max, y_min, y_max]")
            return GridSpec.rect2d(extent[0], extent[1], extent[2], extent[3], dx)
        raise ConfigError(f"unknown grid.geometry {geom!r}")
    except ValueError as e:
        raise ConfigError(f"grid rejected: {e}") from None


def _build_gamma0(sections: dict) -> FrontSpec:
    block = sections["interface"]
    kind = block["gamma0_kind"]
    try:
        if kind == "point":
            return FrontSpec(kind="point", x0=block["gamma0_x0"])
        if kind == "circle":
            center = [float(v) for v in block["gamma0_center"]]
            if len(center) != 2:
                raise ConfigError("interface.gamma0_center is [x, y]")
            return FrontSpec(kind="circle", center=(center[0], center[1]),
                             radius=block["gamma0_radius"])
        raise ConfigError(f"unknown interface.gamma0_kind {kind!r}")
    except ValueError as e:
        raise ConfigError(f"initial front rejected: {e}") from None


def _parse_coeffs(sections: dict) -> tuple[CoefficientExpr, CoefficientExpr]:
    block = sections["coeff"]
    return parse_expr(block["k_expr"]), parse_expr(block["h_expr"])


def _cross_validate(cfg: ExperimentConfig) -> None:
    sections = cfg.sections
    solver = sections["solver"]
    metrics = sections["metrics"]
    eps_values = [solver["epsilon"]] + [float(e) for e in metrics["eps_list"]]
    for e in eps_values:
        if not (0.0 < e < 1.0):
            raise ConfigError(f"epsilon values must lie in (0, 1), got {e}")
    eps_list = [float(e) for e in metrics["eps_list"]]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("metrics.eps_list must be strictly decreasing")
    if solver["scheme"] not in ("explicit", "imex"):
        raise ConfigError(f"unknown solver.scheme {solver['scheme']!r}")
    if solver["data_kind"] not in ("well_prepared", "stepped"):
        raise ConfigError(f"unknown solver.data_kind {solver['data_kind']!r}")

    heterogeneous = bool(cfg.k_expr.variables) or bool(cfg.h_expr.variables)
    if heterogeneous and "C" not in sections["interface"]:
        raise ConfigError(
            "coefficients vary in space but interface.C is missing; the "
            "driving constant of the forcing term is accepted as an input "
            "and never derived, so heterogeneous runs must supply it"
        )

    if cfg.grid is not None:
        # the layer needs a handful of cells; eps/4 is the loosest
        # spacing that keeps the profile metrics meaningful.  Sweep runs
        # build their own grids at dx = eps/8, so the configured grid
        # only ever hosts solver.epsilon.
        eps_run = solver["epsilon"]
        if cfg.grid.dx > eps_run / 4.0 + 1e-12:
            raise ConfigError(
                f"grid.dx = {cfg.grid.dx:g} cannot resolve epsilon = {eps_run:g}; "
                "need dx <= eps/4"
            )
        g = cfg.gamma0
        if cfg.grid.geometry == "line":
            if not (cfg.grid.x_min < g.x0 < cfg.grid.x_max):
                raise ConfigError("initial front sits outside the line domain")
        elif cfg.grid.geometry == "radial":
            if g.kind != "circle":
                raise ConfigError("radial grids take a circle initial front")
            if not (0.0 < g.radius < cfg.grid.x_max):
                raise ConfigError("initial front sits outside the radial domain")
        else:
            if g.kind != "circle":
                raise ConfigError("rect2d grids take a circle initial front")
            cx, cy = g.center
            if not (
                cfg.grid.x_min < cx - g.radius and cx + g.radius < cfg.grid.x_max
                and cfg.grid.y_min < cy - g.radius and cy + g.radius < cfg.grid.y_max
            ):
                raise ConfigError("initial front sits outside the rect2d domain")

    liou = sections["liouville"]
    if liou["a"] > liou["b"]:
        raise ConfigError("liouville.a must not exceed liouville.b")
    for key in ("n_seeds", "n_pairs"):
        if liou[key] < 0:
            raise ConfigError(f"liouville.{key} must be nonnegative")


def load_config(path) -> ExperimentConfig:
    """Read and validate one experiment file; ConfigError on any defect."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config syntax: {e}") from None
    sections, seed = _resolve_sections(raw)
    k_expr, h_expr = _parse_coeffs(sections)
    cfg = ExperimentConfig(
        kinetics=_build_kinetics(sections),
        k_expr=k_expr,
        h_expr=h_expr,
        grid=_build_grid(sections),
        gamma0=_build_gamma0(sections),
        sections=sections,
        seed=seed,
    )
    _cross_validate(cfg)
    return cfg
