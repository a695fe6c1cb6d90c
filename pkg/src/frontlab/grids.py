"""Grids, coefficient fields, and initial-front descriptions.

Three geometries share one vertex-centered finite-volume layout: nodes
on a uniform lattice including the boundary, with half cells at the
ends.  The radial geometry carries the ambient dimension N so a single
1D array of node values stands in for a rotationally symmetric field
on a disk (N=2) or ball (N=3).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ResolutionWarning

__all__ = ["Coefficients", "FrontSpec", "GridSpec"]


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over a line segment, radial segment, or rectangle."""

    geometry: str  # "line" | "radial" | "rect2d"
    x_min: float
    x_max: float
    nx: int
    y_min: float = 0.0
    y_max: float = 0.0
    ny: int = 0
    radial_dim: int = 2

    def __post_init__(self):
        if self.geometry not in ("line", "radial", "rect2d"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if not (self.x_max > self.x_min) or self.nx < 4:
            raise ValueError("need x_max > x_min and nx >= 4")
        if self.geometry == "radial":
            if self.x_min != 0.0:
                raise ValueError("radial grids start at r = 0")
            if self.radial_dim not in (1, 2, 3):
                raise ValueError("radial_dim must be 1, 2, or 3")
        if self.geometry == "rect2d" and (not (self.y_max > self.y_min) or self.ny < 4):
            raise ValueError("rect2d needs y extents and ny >= 4")

    @classmethod
    def line(cls, x_min: float, x_max: float, dx: float) -> "GridSpec":
        nx = int(round((x_max - x_min) / dx)) + 1
        return cls("line", float(x_min), float(x_max), nx)

    @classmethod
    def radial(cls, r_max: float, dx: float, dim: int = 2) -> "GridSpec":
        nx = int(round(r_max / dx)) + 1
        return cls("radial", 0.0, float(r_max), nx, radial_dim=dim)

    @classmethod
    def rect2d(cls, x_min, x_max, y_min, y_max, dx, dy=None) -> "GridSpec":
        dy = dx if dy is None else dy
        nx = int(round((x_max - x_min) / dx)) + 1
        ny = int(round((y_max - y_min) / dy)) + 1
        return cls("rect2d", float(x_min), float(x_max), nx, float(y_min), float(y_max), ny)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dy(self) -> float:
        if self.geometry != "rect2d":
            raise ValueError("dy only defined for rect2d")
        return (self.y_max - self.y_min) / (self.ny - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nx, self.ny) if self.geometry == "rect2d" else (self.nx,)

    def nodes(self):
        """Node coordinates: x array, or (X, Y) meshgrid arrays for rect2d."""
        x = np.linspace(self.x_min, self.x_max, self.nx)
        if self.geometry != "rect2d":
            return x
        y = np.linspace(self.y_min, self.y_max, self.ny)
        return np.meshgrid(x, y, indexing="ij")

    def volumes(self) -> np.ndarray:
        """Finite-volume cell sizes per node, half cells at boundaries.

        Radial cells are shells (r_out^N - r_in^N)/N, which makes the
        boundary closure at r=0 the standard 2N(u1-u0)/dr^2 stencil and
        keeps discrete mass conservation exact.
        """
        dx = self.dx
        if self.geometry == "line":
            vol = np.full(self.nx, dx)
            vol[0] = vol[-1] = dx / 2.0
            return vol
        if self.geometry == "radial":
            n_dim = self.radial_dim
            r = np.linspace(0.0, self.x_max, self.nx)
            faces_out = np.minimum(r + dx / 2.0, self.x_max)
            faces_in = np.maximum(r - dx / 2.0, 0.0)
            return (faces_out**n_dim - faces_in**n_dim) / n_dim
        vol_x = np.full(self.nx, dx)
        vol_x[0] = vol_x[-1] = dx / 2.0
        vol_y = np.full(self.ny, self.dy)
        vol_y[0] = vol_y[-1] = self.dy / 2.0
        return np.outer(vol_x, vol_y)

    def check_resolution(self, epsilon: float) -> None:
        """Warn when the lattice cannot resolve an O(epsilon) layer."""
        worst = self.dx if self.geometry != "rect2d" else max(self.dx, self.dy)
        if worst > epsilon / 8.0 + 1e-15:
            warnings.warn(
                f"dx={worst:.4g} exceeds epsilon/8={epsilon / 8.0:.4g}; "
                "layer under-resolved, results excluded from rate fits",
                ResolutionWarning,
                stacklevel=2,
            )


def _sample(fn, grid: GridSpec) -> np.ndarray:
    if grid.geometry == "rect2d":
        X, Y = grid.nodes()
        out = np.asarray(fn(X, Y), dtype=float)
        return np.broadcast_to(out, X.shape).astype(float) if out.shape != X.shape else out
    x = grid.nodes()
    out = np.asarray(fn(x), dtype=float)
    return np.broadcast_to(out, x.shape).astype(float) if out.shape != x.shape else out


@dataclass(frozen=True)
class Coefficients:
    """Diffusion modulation k and reaction intensity h sampled on a grid.

    K = sqrt(h/k) is the derived layer-scaling field.  The original
    callables are kept for off-grid queries by the interface evolvers.
    """

    grid: GridSpec
    k: np.ndarray
    h: np.ndarray
    k_fn: object = None
    h_fn: object = None

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if k.shape != self.grid.shape or h.shape != self.grid.shape:
            raise ValueError(f"coefficient shape mismatch: {k.shape} vs grid {self.grid.shape}")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(h))):
            raise ValueError("coefficients must be finite")
        if k.min() <= 0.0 or h.min() <= 0.0:
            raise ValueError("k and h must be strictly positive")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "h", h)

    @property
    def K(self) -> np.ndarray:
        return np.sqrt(self.h / self.k)

    @property
    def homogeneous_values(self):
        """(k, h) as scalars when both fields are constant, else None."""
        if np.ptp(self.k) == 0.0 and np.ptp(self.h) == 0.0:
            return float(self.k.flat[0]), float(self.h.flat[0])
        return None

    @classmethod
    def from_callables(cls, grid: GridSpec, k_fn, h_fn) -> "Coefficients":
        return cls(grid=grid, k=_sample(k_fn, grid), h=_sample(h_fn, grid), k_fn=k_fn, h_fn=h_fn)

    @classmethod
    def homogeneous(cls, grid: GridSpec, k: float = 1.0, h: float = 1.0) -> "Coefficients":
        return cls(
            grid=grid,
            k=np.full(grid.shape, float(k)),
            h=np.full(grid.shape, float(h)),
            k_fn=lambda *a: float(k),
            h_fn=lambda *a: float(h),
        )

    def K_at(self, x, y=None):
        """K off-grid via the stored callables; falls back to nearest node."""
        if self.k_fn is not None and self.h_fn is not None:
            args = (x,) if y is None else (x, y)
            return np.sqrt(np.asarray(self.h_fn(*args), dtype=float) / np.asarray(self.k_fn(*args), dtype=float))
        return self._nearest(self.K, x, y)

    def k_at(self, x, y=None):
        if self.k_fn is not None:
            args = (x,) if y is None else (x, y)
            return np.asarray(self.k_fn(*args), dtype=float)
        return self._nearest(self.k, x, y)

    def _nearest(self, arr, x, y):
        g = self.grid
        i = np.clip(np.rint((np.asarray(x) - g.x_min) / g.dx).astype(int), 0, g.nx - 1)
        if g.geometry != "rect2d":
            return arr[i]
        j = np.clip(np.rint((np.asarray(y) - g.y_min) / g.dy).astype(int), 0, g.ny - 1)
        return arr[i, j]


@dataclass(frozen=True)
class FrontSpec:
    """Analytic initial front: a point on a line or a circle in the plane.

    Inside (where the field sits near the u-dominant state) is the region
    left of the point, or within the circle; signed distances follow the
    negative-inside convention.
    """

    kind: str  # "point" | "circle"
    x0: float = 0.0
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("point", "circle"):
            raise ValueError(f"unknown front kind {self.kind!r}")
        if self.kind == "circle" and self.radius <= 0.0:
            raise ValueError("circle front needs a positive radius")

    def signed_distance(self, grid: GridSpec):
        """d0 sampled on the grid nodes, negative inside."""
        if grid.geometry == "rect2d":
            if self.kind != "circle":
                raise ValueError("2D grids take circle fronts")
            X, Y = grid.nodes()
            return np.hypot(X - self.center[0], Y - self.center[1]) - self.radius
        x = grid.nodes()
        if self.kind == "circle":
            if grid.geometry == "radial":
                return x - self.radius
            return np.abs(x - self.center[0]) - self.radius
        return x - self.x0

    def boundary_clearance(self, grid: GridSpec) -> float:
        """Distance from the front to the domain boundary."""
        if grid.geometry == "rect2d":
            cx, cy = self.center
            gaps = (
                cx - self.radius - grid.x_min,
                grid.x_max - (cx + self.radius),
                cy - self.radius - grid.y_min,
                grid.y_max - (cy + self.radius),
            )
            return min(gaps)
        if grid.geometry == "radial":
            return grid.x_max - self.radius
        return min(self.x0 - grid.x_min, grid.x_max - self.x0)
