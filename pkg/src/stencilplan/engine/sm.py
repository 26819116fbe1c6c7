"""SM tiling: overlapped tiles, one streaming multiprocessor's worth each.

Blocks are sized to fast memory and carry their halo redundantly, so they
never communicate: each block loads core + rad*t on every tiled side,
updates t steps, and stores only the core.  1D runs iterate in place; 2D
and 3D runs stream along axis 0 through a circular multi-queue of row or
plane handles, exactly the buffering the cost model prices.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import prod

import numpy as np

from ..grid import Grid
from ..multiqueue import CircularMultiQueue, naive_range, pipeline_spacing
from ..shapes import StencilShape
from .common import (
    frame_reset,
    level_update,
    local_step,
    pad_own,
    padded_slice,
    partition_cores,
    run_blocks,
)
from .params import SM_TILING, ParamError, TilingParams
from .rst import onchip_charges
from .trace import ExecutionTrace

# Table-1 habit: address computing for the shallow-radius 2D pipelines,
# head shifting for 3D plane queues.
_DEFAULT_VARIANT = {1: "computing-address", 2: "computing-address", 3: "shifting-address"}


def _check(grid: Grid, stencil: StencilShape, params: TilingParams):
    if params.scheme != SM_TILING:
        raise ParamError(f"run_sm_tiling got scheme {params.scheme!r}")
    if grid.dims != stencil.dims:
        raise ParamError("grid/stencil dimensionality mismatch")
    rad = stencil.radius
    for n in grid.extents:
        if n <= 2 * rad:
            raise ParamError(f"extent {n} too small for radius {rad}")
    params.validate(stencil, grid.extents)


def run_sm_tiling(grid: Grid, stencil: StencilShape, params: TilingParams):
    _check(grid, stencil, params)
    if stencil.dims == 1:
        return _sm_1d(grid, stencil, params)
    return _sm_streamed(grid, stencil, params)


def _sm_1d(grid: Grid, stencil: StencilShape, params: TilingParams):
    rad, t = stencil.radius, params.t
    n = grid.extents[0]
    tile = params.tile[0]
    core_w = tile - 2 * rad * t
    cores = partition_cores(rad, n - rad, core_w)
    cells = grid.cells
    out = cells.copy()
    shared_pc, reg_pc = onchip_charges(stencil, params.rst)
    lanes = tile

    def run_block(core):
        clo, chi = core
        lo, hi = max(0, clo - rad * t), min(n, chi + rad * t)
        tr = ExecutionTrace()
        local = cells[lo:hi].copy()
        tr.gm_loads += hi - lo
        original = cells[lo:hi]
        for _ in range(t):
            new = local_step(pad_own(local, rad), stencil)
            frame_reset(new, original, [(lo, hi)], [n], rad)
            local = new
            tr.charge_compute(lanes, shared_pc, reg_pc)
            tr.syncs_block += 1
        out[clo:chi] = local[clo - lo : chi - lo]
        tr.gm_stores += chi - clo
        tr.cells_valid += (chi - clo) * t
        return tr

    traces = run_blocks(run_block, cores, params.workers)
    trace = ExecutionTrace()
    for tr in traces:
        trace.merge(tr)
    _coarse_phases(trace, params)
    return Grid(out, grid.boundary), trace


def _sm_streamed(grid: Grid, stencil: StencilShape, params: TilingParams):
    rad, t = stencil.radius, params.t
    extents = grid.extents
    n0 = extents[0]
    tiled = extents[1:]
    cores_per_axis = [
        partition_cores(rad, n - rad, w - 2 * rad * t)
        for n, w in zip(tiled, params.tile)
    ]
    blocks = list(itertools.product(*cores_per_axis))
    cells = grid.cells
    out = cells.copy()
    shared_pc, reg_pc = onchip_charges(stencil, params.rst)
    lanes = prod(params.tile)
    variant = params.queue_variant or _DEFAULT_VARIANT[stencil.dims]

    def run_block(core_ranges):
        return _stream_block(
            cells, out, stencil, params, core_ranges, shared_pc, reg_pc, lanes,
            variant,
        )

    traces = run_blocks(run_block, blocks, params.workers)
    trace = ExecutionTrace()
    for tr in traces:
        trace.merge(tr)
    _coarse_phases(trace, params)
    return Grid(out, grid.boundary), trace


def _stream_block(
    cells: np.ndarray,
    out: np.ndarray,
    stencil: StencilShape,
    params: TilingParams,
    core_ranges,
    shared_pc: Fraction,
    reg_pc: Fraction,
    lanes: int,
    variant: str,
):
    """Drive one block's plane pipeline along the streaming axis."""
    rad, t = stencil.radius, params.t
    n0 = cells.shape[0]
    tiled = cells.shape[1:]
    loaded = [
        (max(0, lo - rad * t), min(n, hi + rad * t))
        for (lo, hi), n in zip(core_ranges, tiled)
    ]
    widths = tuple(hi - lo for lo, hi in loaded)
    loaded_cells = prod(widths)
    core_cells = prod(hi - lo for lo, hi in core_ranges)
    core_rel = tuple(
        slice(clo - llo, chi - llo)
        for (clo, chi), (llo, lhi) in zip(core_ranges, loaded)
    )
    out_sl = tuple(slice(clo, chi) for clo, chi in core_ranges)

    tr = ExecutionTrace()
    spacing = pipeline_spacing(rad, params.lazy)
    lazy_cap = naive_range(t, rad, spacing) if params.lazy else None
    mq = CircularMultiQueue(
        t, rad, variant, lazy=params.lazy, lazy_capacity=lazy_cap,
        queue_spacing=spacing,
    )

    def padded_orig(p):
        tr.gm_loads += loaded_cells
        return padded_slice(cells[p], loaded, rad)

    counts = [0] * t
    for k in range(n0 + t * rad):
        if k < n0:
            mq.enqueue(0, padded_orig(k))
        if rad <= k < t * rad:
            # Fixed lower-frame planes seed the deeper queues just in time:
            # an element stays in a window for `window` shuffles, so queue s
            # must receive positions 0..rad-1 right before its computed
            # stream starts arriving.
            mq.enqueue(k // rad, padded_orig(k % rad))
        for s in range(t):
            pos = rad + counts[s]
            if pos >= n0:
                continue
            if pos >= n0 - rad:
                plane = padded_orig(pos)  # fixed upper frame passes through
                counted = False
            elif mq.ready(s):
                new = level_update(mq.window_values(s), stencil, widths)
                frame_reset(
                    new,
                    cells[(pos,) + tuple(slice(lo, hi) for lo, hi in loaded)],
                    loaded,
                    tiled,
                    rad,
                )
                plane = new
                counted = True
            else:
                break
            counts[s] += 1
            if counted:
                tr.charge_compute(lanes, shared_pc, reg_pc)
            if s + 1 < t:
                mq.enqueue(s + 1, pad_own(plane, rad) if counted else plane)
            elif counted:
                out[(pos,) + out_sl] = plane[core_rel]
                tr.gm_stores += core_cells
                tr.cells_valid += core_cells * t
        mq.shuffle()
        tr.syncs_block += 1 if params.lazy else t
    return tr


def _coarse_phases(trace: ExecutionTrace, params: TilingParams):
    load_tag = "prefetch-load" if params.prefetch else "load"
    trace.phase(load_tag, trace.gm_loads)
    trace.phase("compute", trace.cells_computed)
    trace.phase("store", trace.gm_stores)
