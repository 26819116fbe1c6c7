"""Dense grids and the naive reference executor.

The reference executor is the correctness oracle for every tiling scheme:
one full-domain sweep per time step, cells updated in catalog tap order.
All engines replicate that per-cell summation order, so oracle comparisons
are exact (bitwise), not tolerance-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import uniform_array
from .shapes import StencilShape

BOUNDARY_POLICIES = ("fixed-value", "skip-update")


@dataclass
class Grid:
    """Dense N-D cell array (float64) with a boundary policy tag.

    Under both policies the boundary frame (cells within `radius` of a
    face) is never updated; `fixed-value` states that frame cells keep
    their original values, `skip-update` states the update is simply not
    applied there.  The two coincide for Jacobi sweeps and are kept as
    distinct tags for parity runs.
    """

    cells: np.ndarray
    boundary: str = "fixed-value"

    def __post_init__(self):
        if self.boundary not in BOUNDARY_POLICIES:
            raise ValueError(f"unknown boundary policy {self.boundary!r}")
        self.cells = np.asarray(self.cells, dtype=np.float64)

    @property
    def extents(self) -> tuple[int, ...]:
        return self.cells.shape

    @property
    def dims(self) -> int:
        return self.cells.ndim

    def copy(self) -> "Grid":
        return Grid(self.cells.copy(), self.boundary)


def constant_grid(extents, value: float, boundary: str = "fixed-value") -> Grid:
    return Grid(np.full(tuple(extents), float(value)), boundary)


def random_grid(extents, seed: int, boundary: str = "fixed-value") -> Grid:
    """Uniform [0, 1) cells from the splitmix generator (reproducible)."""
    extents = tuple(extents)
    n = int(np.prod(extents))
    return Grid(uniform_array(seed, n).reshape(extents), boundary)


def _check_compatible(grid: Grid, stencil: StencilShape):
    if grid.dims != stencil.dims:
        raise ValueError(
            f"grid is {grid.dims}-D but stencil {stencil.name} is {stencil.dims}-D"
        )
    rad = stencil.radius
    for n in grid.extents:
        if n <= 2 * rad:
            raise ValueError(
                f"extent {n} too small for radius {rad} (need > {2 * rad})"
            )


def apply_taps(cells: np.ndarray, stencil: StencilShape, out_region=None) -> np.ndarray:
    """Weighted tap sum over the interior of `cells`, in catalog tap order.

    Returns an array covering the interior (the region at distance >= radius
    from every face).  The accumulation order per output cell is fixed by
    the tap order; every execution path in the package funnels through this
    chain so results are reproducible bit for bit.
    """
    rad = stencil.radius
    shape = cells.shape
    acc = None
    for off, c in stencil.taps:
        sl = tuple(
            slice(rad + o, n - rad + o) for o, n in zip(off, shape)
        )
        term = c * cells[sl]
        acc = term if acc is None else acc + term
    return acc


def reference_step(grid: Grid, stencil: StencilShape) -> Grid:
    """One Jacobi update of the interior; pure (input grid unmodified)."""
    _check_compatible(grid, stencil)
    rad = stencil.radius
    out = grid.cells.copy()
    core = tuple(slice(rad, n - rad) for n in grid.extents)
    out[core] = apply_taps(grid.cells, stencil)
    return Grid(out, grid.boundary)


def reference_run(grid: Grid, stencil: StencilShape, t: int) -> Grid:
    """t-fold composition of reference_step."""
    if t < 0:
        raise ValueError("step count must be >= 0")
    out = grid.copy()
    for _ in range(t):
        out = reference_step(out, stencil)
    return out
