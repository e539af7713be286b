"""Uniform 1-D grid, conditional densities and their moments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "GridDensity",
    "FilterCollapseError",
    "build_grid",
    "trapezoid",
    "normalize",
    "posterior_stats",
]


class FilterCollapseError(RuntimeError):
    """All density mass vanished: the filter can no longer be normalized."""


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    dx: float
    nodes: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)


@dataclass
class GridDensity:
    grid: Grid
    values: np.ndarray
    kind: str = "unnormalized"  # or "normalized"

    def copy(self) -> "GridDensity":
        return GridDensity(self.grid, self.values.copy(), self.kind)


def build_grid(x_min: float, x_max: float, dx: float) -> Grid:
    """Uniform grid including both endpoints."""
    if dx <= 0:
        raise ValueError("dx must be positive")
    if x_min >= x_max:
        raise ValueError("x_min must be below x_max")
    n_cells = (x_max - x_min) / dx
    if abs(n_cells - round(n_cells)) > 1e-9 * max(1.0, abs(n_cells)):
        raise ValueError("(x_max - x_min) must be an integer multiple of dx")
    n_cells = int(round(n_cells))
    if n_cells < 2:
        raise ValueError("grid needs at least 3 nodes")
    nodes = x_min + dx * np.arange(n_cells + 1)
    return Grid(x_min=x_min, x_max=x_max, dx=dx, nodes=nodes)


def trapezoid(values: np.ndarray, grid: Grid) -> float:
    """Trapezoid quadrature on the uniform grid."""
    return float(grid.dx * (values.sum() - 0.5 * (values[0] + values[-1])))


def trapezoid_weights(grid: Grid) -> np.ndarray:
    w = np.full(grid.n, grid.dx)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def normalize(density: GridDensity):
    """Kallianpur-Striebel normalization: pi = varsigma / varsigma(1)."""
    zeta = trapezoid(density.values, density.grid)
    if not zeta > 0.0:
        raise FilterCollapseError("density has no positive mass")
    pi = GridDensity(density.grid, density.values / zeta, kind="normalized")
    return pi, zeta


def posterior_stats(pi: GridDensity):
    """Trapezoid mean and variance of a normalized density."""
    x = pi.grid.nodes
    mean = trapezoid(x * pi.values, pi.grid)
    var = trapezoid((x - mean) ** 2 * pi.values, pi.grid)
    return mean, max(var, 0.0)
