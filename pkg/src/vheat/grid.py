"""Periodic grid, nodal functions, difference operators, norms, and interpolants.

Everything here works on an equidistant periodic grid on [0, L): node j sits at
x_j = j*dx and index arithmetic wraps mod n.  No ghost nodes are ever created;
the wrap is done with ``np.roll`` so all operators are total and exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PeriodicGrid",
    "GridFunction",
    "DiscreteNorms",
    "forward_diff",
    "backward_diff",
    "second_diff",
    "theta_combination",
    "discrete_norms",
    "eval_interpolant",
    "cross_grid_error",
]


@dataclass(frozen=True)
class PeriodicGrid:
    """Equidistant periodic grid with n cells on [0, domain_length).

    Node j is x_j = j*dx for j = 0..n-1; node n is identified with node 0.
    """

    n: int
    domain_length: float = 1.0

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need at least 3 cells, got n={self.n}")
        if not self.domain_length > 0:
            raise ValueError("domain_length must be positive")

    @property
    def dx(self) -> float:
        return self.domain_length / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @property
    def midpoints(self) -> np.ndarray:
        """Interval midpoints x_{j+1/2}."""
        return (np.arange(self.n) + 0.5) * self.dx


class GridFunction:
    """Real nodal values on a :class:`PeriodicGrid`.  Immutable after construction."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: PeriodicGrid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    def __len__(self):
        return self.grid.n


@dataclass(frozen=True)
class DiscreteNorms:
    """sup = max_j |g_j|, l1 = dx * sum_j |g_j|, bv = sum_j |g_j - g_{j-1}| (periodic)."""

    sup: float
    l1: float
    bv: float


def _same_grid(a: GridFunction, b: GridFunction):
    if a.grid != b.grid:
        raise ValueError("grid functions live on different grids")


def forward_diff(g: GridFunction) -> GridFunction:
    """One-sided difference (g_{j+1} - g_j)/dx with periodic wrap."""
    v = g.values
    return GridFunction(g.grid, (np.roll(v, -1) - v) / g.grid.dx)


def backward_diff(g: GridFunction) -> GridFunction:
    """One-sided difference (g_j - g_{j-1})/dx with periodic wrap."""
    v = g.values
    return GridFunction(g.grid, (v - np.roll(v, 1)) / g.grid.dx)


def second_diff(g: GridFunction) -> GridFunction:
    """Three-point second difference (g_{j+1} - 2 g_j + g_{j-1})/dx^2.

    Equals ``forward_diff(backward_diff(g))`` exactly, including rounding,
    because both are evaluated with the same three-term stencil ordering.
    """
    v = g.values
    dx = g.grid.dx
    return GridFunction(g.grid, ((np.roll(v, -1) - v) / dx - (v - np.roll(v, 1)) / dx) / dx)


def theta_combination(a: GridFunction, b: GridFunction, theta: float) -> GridFunction:
    """Convex combination theta*b + (1-theta)*a of two time levels (a = old, b = new)."""
    _same_grid(a, b)
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    return GridFunction(a.grid, theta * b.values + (1.0 - theta) * a.values)


def bv_of(values: np.ndarray) -> float:
    """Total variation of a periodic nodal array, including the wrap jump."""
    return float(np.sum(np.abs(values - np.roll(values, 1))))


def discrete_norms(g: GridFunction) -> DiscreteNorms:
    v = g.values
    return DiscreteNorms(
        sup=float(np.max(np.abs(v))),
        l1=float(g.grid.dx * np.sum(np.abs(v))),
        bv=bv_of(v),
    )


_KIND_ALIASES = {"constant": "constant_cell"}


def eval_interpolant(g: GridFunction, x, kind: str):
    """Evaluate one of the three interpolants of ``g`` at position(s) ``x``.

    kind:
      * ``linear``            -- continuous, linear between nodes,
      * ``constant_cell``     -- constant on cells [x_{j-1/2}, x_{j+1/2}), value g_j,
      * ``constant_interval`` -- constant on intervals [x_j, x_{j+1}), value g_j.

    Both constant kinds are right-continuous.  ``x`` is reduced modulo the
    domain length, so any real position is valid.
    """
    kind = _KIND_ALIASES.get(kind, kind)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    n = g.grid.n
    s = np.mod(x, g.grid.domain_length) / g.grid.dx  # in [0, n)
    v = g.values
    if kind == "linear":
        j = np.minimum(np.floor(s).astype(int), n - 1)
        t = s - j
        out = (1.0 - t) * v[j] + t * v[(j + 1) % n]
    elif kind == "constant_cell":
        j = np.floor(s + 0.5).astype(int) % n
        out = v[j]
    elif kind == "constant_interval":
        j = np.minimum(np.floor(s).astype(int), n - 1)
        out = v[j]
    else:
        raise ValueError(f"unknown interpolant kind {kind!r}")
    return float(out) if scalar else out


def cross_grid_error(coarse: GridFunction, fine: GridFunction, p, kind: str) -> float:
    """Discrete L^p distance between interpolants living on two grids.

    Both interpolants are evaluated at the cell midpoints of the finer of the
    two grids; for p=1 the result is weighted by that grid's dx.  The grids
    must share the same domain.  ``p`` is 1 or ``np.inf``.
    """
    if not np.isclose(coarse.grid.domain_length, fine.grid.domain_length, rtol=0, atol=1e-14):
        raise ValueError("grids cover different domains")
    if fine.grid.n < coarse.grid.n:
        coarse, fine = fine, coarse
    xq = fine.grid.midpoints
    diff = np.abs(eval_interpolant(coarse, xq, kind) - eval_interpolant(fine, xq, kind))
    if p == 1:
        return float(fine.grid.dx * np.sum(diff))
    if p == np.inf or p == float("inf"):
        return float(np.max(diff))
    raise ValueError("p must be 1 or inf")
