"""Redundant register streaming: the shared/register access split.

With RST off, every tap read and the result write go through the shared
level: taps+1 accesses per cell.  With RST on, each thread keeps sliding
register windows for the columns it owns, so only the cells that newly
enter a window each stream advance are read from the shared level; the
rest move register-to-register.  RST never changes numeric results, it
only re-attributes on-chip accesses between the two levels.

Threads own ITEMS_PER_THREAD cells per advance: along the streaming axis
for 2D stencils, along the first tiled axis for 3D.  Per advance, the
shared-level reads are the distinct needed cells outside the thread's own
columns; amortized per cell this reproduces the catalog's "w/ RST" column
for every benchmark.
"""

from __future__ import annotations

from fractions import Fraction

from ..shapes import StencilShape

ITEMS_PER_THREAD = 4


def rst_shared_per_cell(stencil: StencilShape, ipt: int = ITEMS_PER_THREAD) -> Fraction:
    """Shared-level accesses per cell update with RST on (1 load + 1 store
    + amortized out-of-register reads)."""
    offsets = stencil.offsets
    if stencil.dims == 1:
        # The whole tap column streams through the thread's own registers.
        return Fraction(2)
    if stencil.dims == 2:
        # Items along the stream: each distinct nonzero x-offset costs one
        # read per item per advance.
        cols = {dx for _, dx in offsets if dx != 0}
        return Fraction(2) + Fraction(len(cols))
    # 3D: items span ipt consecutive cells along the first tiled axis; a
    # column is an (u, v) position whose stream window sits in registers.
    own = {(i, 0) for i in range(ipt)}
    needed = {(du + i, dv) for _, du, dv in offsets for i in range(ipt)}
    return Fraction(2) + Fraction(len(needed - own), ipt)


def onchip_charges(stencil: StencilShape, rst: bool) -> tuple[Fraction, Fraction]:
    """(shared-level, register-level) accesses per cell update."""
    total = Fraction(len(stencil.taps) + 1)
    if not rst:
        return total, Fraction(0)
    shared = rst_shared_per_cell(stencil)
    return shared, total - shared
