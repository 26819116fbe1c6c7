"""Stencil shapes and the benchmark catalog.

A stencil is described by its tap pattern: a list of (offset, coefficient)
pairs over the cell's neighborhood.  The catalog carries, per benchmark, the
per-cell cost constants used by the cost model: FLOPs per cell, global-memory
accesses per cell, and on-chip (shared-level) accesses per cell with and
without redundant register streaming (RST).

Axis convention: for 2D and 3D stencils axis 0 is the streaming axis; the
remaining axes are the spatially tiled ones.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field


class CatalogError(KeyError):
    """Unknown benchmark name."""


Offset = tuple[int, ...]


@dataclass(frozen=True)
class StencilShape:
    """Tap pattern plus the per-cell cost constants of one benchmark."""

    name: str
    dims: int
    taps: tuple[tuple[Offset, float], ...]
    flops_per_cell: int
    gm_accesses_per_cell: int
    sm_accesses_no_rst: int
    sm_accesses_with_rst: float
    default_domain: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.taps:
            raise ValueError("tap set is empty")
        offsets = [off for off, _ in self.taps]
        if any(len(off) != self.dims for off in offsets):
            raise ValueError("tap offsets do not match dims")
        if (0,) * self.dims not in offsets:
            raise ValueError("tap set must contain the zero offset")
        if len(set(offsets)) != len(offsets):
            raise ValueError("duplicate tap offsets")
        if self.sm_accesses_no_rst != len(self.taps) + 1:
            raise ValueError(
                "shared accesses w/o RST must be taps+1 "
                f"(got {self.sm_accesses_no_rst} for {len(self.taps)} taps)"
            )
        if self.sm_accesses_with_rst > self.sm_accesses_no_rst:
            raise ValueError("RST accesses cannot exceed the non-RST count")

    @property
    def radius(self) -> int:
        """Chebyshev radius of the tap pattern."""
        return max(max(abs(c) for c in off) for off, _ in self.taps)

    @property
    def offsets(self) -> tuple[Offset, ...]:
        return tuple(off for off, _ in self.taps)

    @property
    def coefficients(self) -> tuple[float, ...]:
        return tuple(c for _, c in self.taps)

    def with_coefficients(self, coefficients) -> "StencilShape":
        """Same tap pattern with user-supplied coefficients."""
        coefficients = tuple(float(c) for c in coefficients)
        if len(coefficients) != len(self.taps):
            raise ValueError(
                f"expected {len(self.taps)} coefficients, got {len(coefficients)}"
            )
        taps = tuple((off, c) for (off, _), c in zip(self.taps, coefficients))
        return StencilShape(
            name=self.name,
            dims=self.dims,
            taps=taps,
            flops_per_cell=self.flops_per_cell,
            gm_accesses_per_cell=self.gm_accesses_per_cell,
            sm_accesses_no_rst=self.sm_accesses_no_rst,
            sm_accesses_with_rst=self.sm_accesses_with_rst,
            default_domain=self.default_domain,
        )


def _star(dims: int, rad: int) -> tuple[Offset, ...]:
    # Axis-by-axis order, matching the usual written-out kernel: the full
    # streaming-axis column first (including the center), then +/- offsets
    # per remaining axis.
    offs: list[Offset] = []
    for d in range(-rad, rad + 1):
        offs.append((d,) + (0,) * (dims - 1))
    for axis in range(1, dims):
        for d in list(range(-rad, 0)) + list(range(1, rad + 1)):
            off = [0] * dims
            off[axis] = d
            offs.append(tuple(off))
    return tuple(offs)


def _box(dims: int, rad: int) -> tuple[Offset, ...]:
    return tuple(itertools.product(range(-rad, rad + 1), repeat=dims))


def _no_corners(dims: int) -> tuple[Offset, ...]:
    # Radius-1 box without the corner offsets (3D: 19 points).
    return tuple(
        off for off in _box(dims, 1) if sum(abs(c) for c in off) <= 2
    )


def _j3d17pt() -> tuple[Offset, ...]:
    # 17-point radius-1 pattern: corner-free box minus the streaming-axis
    # face neighbors.  Tap count and order-1 radius are what Table-style
    # catalogs pin down; the face choice keeps the tiled axes symmetric.
    return tuple(
        off for off in _no_corners(3) if off not in ((-1, 0, 0), (1, 0, 0))
    )


_3D_DOMAIN = (2560, 288, 384)

# name -> (dims, offsets, flops/cell, a_sm w/o RST, a_sm w/ RST, domain)
_CATALOG: dict[str, tuple] = {
    "j1d3pt": (1, _star(1, 1), 6, 4, 2.0, (8388608,)),
    "j2d5pt": (2, _star(2, 1), 10, 6, 4.0, (8352, 8352)),
    "j2d9pt": (2, _star(2, 2), 18, 10, 6.0, (8064, 8064)),
    "j2d9pt-gol": (2, _box(2, 1), 18, 10, 4.0, (8784, 8784)),
    "j2d25pt": (2, _box(2, 2), 25, 26, 6.0, (8640, 8640)),
    "j3d7pt": (3, _star(3, 1), 14, 8, 4.5, _3D_DOMAIN),
    "j3d13pt": (3, _star(3, 2), 26, 14, 7.0, _3D_DOMAIN),
    "j3d17pt": (3, _j3d17pt(), 34, 18, 5.5, _3D_DOMAIN),
    "j3d27pt": (3, _box(3, 1), 54, 28, 5.5, _3D_DOMAIN),
    "poisson": (3, _no_corners(3), 38, 20, 5.5, _3D_DOMAIN),
}

BENCHMARK_NAMES = tuple(_CATALOG)

# Load + store per cell, assuming perfect caching of neighbor reads.
DEFAULT_GM_ACCESSES = 2


def make_benchmark(name: str, coefficients=None) -> StencilShape:
    """Build a catalog stencil; coefficients default to 1/|taps|."""
    try:
        dims, offsets, flops, sm_no, sm_rst, domain = _CATALOG[name]
    except KeyError:
        raise CatalogError(
            f"unknown benchmark {name!r}; valid names: {', '.join(BENCHMARK_NAMES)}"
        ) from None
    if coefficients is None:
        coefficients = [1.0 / len(offsets)] * len(offsets)
    coefficients = tuple(float(c) for c in coefficients)
    if len(coefficients) != len(offsets):
        raise ValueError(
            f"expected {len(offsets)} coefficients, got {len(coefficients)}"
        )
    return StencilShape(
        name=name,
        dims=dims,
        taps=tuple(zip(offsets, coefficients)),
        flops_per_cell=flops,
        gm_accesses_per_cell=DEFAULT_GM_ACCESSES,
        sm_accesses_no_rst=sm_no,
        sm_accesses_with_rst=sm_rst,
        default_domain=domain,
    )


def catalog_records() -> list[dict]:
    """One record per benchmark, for the exportable catalog document."""
    records = []
    for name in BENCHMARK_NAMES:
        shape = make_benchmark(name)
        records.append(
            {
                "name": name,
                "dims": shape.dims,
                "radius": shape.radius,
                "taps": len(shape.taps),
                "flops_per_cell": shape.flops_per_cell,
                "gm_accesses_per_cell": shape.gm_accesses_per_cell,
                "sm_accesses_no_rst": shape.sm_accesses_no_rst,
                "sm_accesses_with_rst": shape.sm_accesses_with_rst,
                "default_domain": list(shape.default_domain),
            }
        )
    return records


def catalog_document() -> str:
    return json.dumps({"benchmarks": catalog_records()}, indent=2, sort_keys=True) + "\n"
