"""Device tiling: one tile at a time, the whole device per tile.

The domain is cut into device tiles processed sequentially.  Inside a
tile, thread blocks cooperate: instead of recomputing halos they exchange
them through a staging buffer (simulated global memory) under bulk
synchronous phases, with a device-wide barrier per exchange.  The tile
itself carries an overlapped halo of rad*t at boundaries it shares with
other device tiles.

1D/2D tiles are resident for all t steps (per-step phase order: block
update, block sync, push halo, device barrier, swap, pull halo, block
sync).  3D tiles stream along axis 0 with a plane pipeline per queue
level; without lazy buffering every level's exchange barriers the device
(t barriers per advance), with it the exchanges batch into one barrier
per advance.
"""

from __future__ import annotations

import itertools
from math import prod

import numpy as np

from ..grid import Grid
from ..shapes import StencilShape
from .common import (
    coalesced_transactions,
    even_split,
    frame_reset,
    level_update,
    local_step,
    pad_own,
    padded_slice,
    partition_cores,
    run_blocks,
)
from .params import DEVICE_TILING, ParamError, TilingParams
from .rst import onchip_charges
from .trace import ExecutionTrace


def _check(grid: Grid, stencil: StencilShape, params: TilingParams):
    if params.scheme != DEVICE_TILING:
        raise ParamError(f"run_device_tiling got scheme {params.scheme!r}")
    if grid.dims != stencil.dims:
        raise ParamError("grid/stencil dimensionality mismatch")
    rad = stencil.radius
    for n in grid.extents:
        if n <= 2 * rad:
            raise ParamError(f"extent {n} too small for radius {rad}")
    params.validate(stencil, grid.extents)


def run_device_tiling(grid: Grid, stencil: StencilShape, params: TilingParams):
    _check(grid, stencil, params)
    if stencil.dims <= 2:
        return _device_resident(grid, stencil, params)
    return _device_streamed(grid, stencil, params)


def _tile_cores(extents, tile_spans, rad: int, halo: int):
    """Device-tile core ranges per axis: cores partition the interior and
    each tile loads core + halo on sides it shares with another tile."""
    cores_per_axis = []
    for n, span in zip(extents, tile_spans):
        interior = n - 2 * rad
        core_w = span if span >= interior else span - 2 * halo
        if core_w <= 0:
            raise ParamError(
                f"device tile span {span} has no core with halo {halo}"
            )
        cores_per_axis.append(partition_cores(rad, n - rad, core_w))
    return cores_per_axis


def _loaded_range(core, halo, n):
    lo, hi = core
    return max(0, lo - halo), min(n, hi + halo)


# ---------------------------------------------------------------------------
# 1D/2D: tile resident on chip for all t steps
# ---------------------------------------------------------------------------


def _device_resident(grid: Grid, stencil: StencilShape, params: TilingParams):
    rad, t = stencil.radius, params.t
    extents = grid.extents
    dims = stencil.dims
    grid_shape = params.device_tile_grid or (1,) * dims
    tile_spans = [g * w for g, w in zip(grid_shape, params.tile)]
    halo = rad * t
    cores_per_axis = _tile_cores(extents, tile_spans, rad, halo)
    cells = grid.cells
    out = cells.copy()
    shared_pc, reg_pc = onchip_charges(stencil, params.rst)
    trace = ExecutionTrace()

    for tile_core in itertools.product(*cores_per_axis):
        loaded = [
            _loaded_range(core, halo, n) for core, n in zip(tile_core, extents)
        ]
        if params.lazy:
            _resident_tile_lazy(
                cells, out, stencil, params, loaded, tile_core, grid_shape,
                shared_pc, reg_pc, trace,
            )
        else:
            _resident_tile_bsp(
                cells, out, stencil, params, loaded, tile_core, grid_shape,
                shared_pc, reg_pc, trace,
            )
        trace.device_tiles += 1
    return Grid(out, grid.boundary), trace


def _block_regions(loaded, grid_shape):
    per_axis = [even_split(lo, hi, g) for (lo, hi), g in zip(loaded, grid_shape)]
    return list(itertools.product(*per_axis))


def _halo_strip_counts(per_axis_splits, rad: int):
    """(cells, transactions, transposed_transactions) exchanged per step
    across the internal block boundaries of a regular block grid."""
    dims = len(per_axis_splits)
    full = [sum(hi - lo for lo, hi in splits) for splits in per_axis_splits]
    cells = 0
    raw_tx = 0
    posed_tx = 0
    for axis in range(dims):
        internal = len(per_axis_splits[axis]) - 1
        if internal <= 0:
            continue
        cross = prod(full[a] for a in range(dims) if a != axis)
        strip = 2 * rad * cross * internal  # both sides push
        cells += strip
        # Cuts along the last axis produce strided strips unless transposed.
        contiguous = dims == 1 or axis < dims - 1
        raw_tx += coalesced_transactions(strip, 8, contiguous)
        posed_tx += coalesced_transactions(strip, 8, True)
    return cells, raw_tx, posed_tx


def _resident_tile_bsp(
    cells, out, stencil, params, loaded, tile_core, grid_shape,
    shared_pc, reg_pc, trace,
):
    rad, t = stencil.radius, params.t
    extents = cells.shape
    per_axis = [even_split(lo, hi, g) for (lo, hi), g in zip(loaded, grid_shape)]
    regions = list(itertools.product(*per_axis))
    loaded_sl = tuple(slice(lo, hi) for lo, hi in loaded)
    cur = cells[loaded_sl].copy()
    trace.gm_loads += cur.size
    trace.phase("prefetch-load" if params.prefetch else "load", cur.size)
    halo_cells, raw_tx, posed_tx = _halo_strip_counts(per_axis, rad)
    base = tuple(lo for lo, _ in loaded)

    for _ in range(t):
        padded = pad_own(cur, rad)
        new = np.empty_like(cur)

        def update_block(region):
            rel = tuple(
                slice(lo - b, hi - b) for (lo, hi), b in zip(region, base)
            )
            pad_sl = tuple(
                slice(lo - b, hi - b + 2 * rad)
                for (lo, hi), b in zip(region, base)
            )
            block = local_step(padded[pad_sl], stencil)
            frame_reset(
                block,
                cells[tuple(slice(lo, hi) for lo, hi in region)],
                region,
                extents,
                rad,
            )
            new[rel] = block
            return block.size

        sizes = run_blocks(update_block, regions, params.workers)
        for size in sizes:
            trace.charge_compute(size, shared_pc, reg_pc)
        trace.phase("update", int(sum(sizes)))
        trace.syncs_block += len(regions)
        trace.phase("block-sync", 0)
        trace.gm_stores += halo_cells
        trace.gm_halo_stores += halo_cells
        trace.phase("push-halo", halo_cells)
        trace.syncs_device += 1
        trace.phase("device-sync", 0)
        cur = new
        trace.phase("swap", 0)
        trace.gm_loads += halo_cells
        trace.gm_halo_loads += halo_cells
        trace.phase("pull-halo", halo_cells)
        trace.syncs_block += len(regions)
        trace.phase("block-sync", 0)
        trace.halo_transactions += posed_tx if params.transpose_halo else raw_tx

    core_sl = tuple(slice(lo, hi) for lo, hi in tile_core)
    rel = tuple(
        slice(clo - b, chi - b) for (clo, chi), b in zip(tile_core, base)
    )
    out[core_sl] = cur[rel]
    stored = prod(chi - clo for clo, chi in tile_core)
    trace.gm_stores += stored
    trace.cells_valid += stored * t
    trace.phase("store", stored)


def _resident_tile_lazy(
    cells, out, stencil, params, loaded, tile_core, grid_shape,
    shared_pc, reg_pc, trace,
):
    """Lazy variant: blocks enlarge their regions by rad*t and run the t
    steps without exchanging, so one device barrier closes the tile."""
    rad, t = stencil.radius, params.t
    extents = cells.shape
    regions = _block_regions(loaded, grid_shape)
    core_sl = tuple(slice(lo, hi) for lo, hi in tile_core)

    def run_block(region):
        tr = ExecutionTrace()
        work = [
            (max(llo, lo - rad * t), min(lhi, hi + rad * t))
            for (lo, hi), (llo, lhi) in zip(region, loaded)
        ]
        work_sl = tuple(slice(lo, hi) for lo, hi in work)
        local = cells[work_sl].copy()
        tr.gm_loads += local.size
        original = cells[work_sl]
        for _ in range(t):
            new = local_step(pad_own(local, rad), stencil)
            frame_reset(new, original, work, extents, rad)
            local = new
            tr.charge_compute(local.size, shared_pc, reg_pc)
            tr.syncs_block += 1
        store = [
            (max(clo, lo), min(chi, hi))
            for (lo, hi), (clo, chi) in zip(region, tile_core)
        ]
        if all(hi > lo for lo, hi in store):
            dst = tuple(slice(lo, hi) for lo, hi in store)
            src = tuple(
                slice(lo - wlo, hi - wlo) for (lo, hi), (wlo, _) in zip(store, work)
            )
            out[dst] = local[src]
            stored = prod(hi - lo for lo, hi in store)
            tr.gm_stores += stored
            tr.cells_valid += stored * t
        return tr

    traces = run_blocks(run_block, regions, params.workers)
    for tr in traces:
        trace.merge(tr)
    trace.phase("update", sum(tr.cells_computed for tr in traces))
    trace.syncs_device += 1
    trace.phase("device-sync", 0)


# ---------------------------------------------------------------------------
# 3D: stream along axis 0, plane pipeline over the device tile
# ---------------------------------------------------------------------------


def _device_streamed(grid: Grid, stencil: StencilShape, params: TilingParams):
    rad, t = stencil.radius, params.t
    extents = grid.extents
    n0 = extents[0]
    tiled = extents[1:]
    grid_shape = params.device_tile_grid or (1, 1)
    tile_spans = [g * w for g, w in zip(grid_shape, params.tile)]
    halo = rad * t
    cores_per_axis = _tile_cores(tiled, tile_spans, rad, halo)
    cells = grid.cells
    out = cells.copy()
    shared_pc, reg_pc = onchip_charges(stencil, params.rst)
    trace = ExecutionTrace()

    for tile_core in itertools.product(*cores_per_axis):
        loaded = [_loaded_range(c, halo, n) for c, n in zip(tile_core, tiled)]
        _streamed_tile(
            cells, out, stencil, params, loaded, tile_core, grid_shape,
            shared_pc, reg_pc, trace,
        )
    return Grid(out, grid.boundary), trace


def _streamed_tile(
    cells, out, stencil, params, loaded, tile_core, grid_shape,
    shared_pc, reg_pc, trace,
):
    from ..multiqueue import CircularMultiQueue, naive_range, pipeline_spacing

    rad, t = stencil.radius, params.t
    n0 = cells.shape[0]
    tiled = cells.shape[1:]
    widths = tuple(hi - lo for lo, hi in loaded)
    per_axis = [even_split(lo, hi, g) for (lo, hi), g in zip(loaded, grid_shape)]
    regions = list(itertools.product(*per_axis))
    halo_cells, raw_tx, posed_tx = _halo_strip_counts(per_axis, rad)
    # Each block loads its sub-plane with its rad ring (overlapping reads).
    plane_load = sum(
        prod(hi - lo + 2 * rad for lo, hi in region) for region in regions
    )
    lanes = sum(prod(hi - lo for lo, hi in region) for region in regions)
    core_cells = prod(chi - clo for clo, chi in tile_core)
    core_rel = tuple(
        slice(clo - llo, chi - llo)
        for (clo, chi), (llo, _) in zip(tile_core, loaded)
    )
    out_sl = tuple(slice(clo, chi) for clo, chi in tile_core)

    variant = params.queue_variant or "shifting-address"
    spacing = pipeline_spacing(rad, params.lazy)
    lazy_cap = naive_range(t, rad, spacing) if params.lazy else None
    mq = CircularMultiQueue(
        t, rad, variant, lazy=params.lazy, lazy_capacity=lazy_cap,
        queue_spacing=spacing,
    )

    def padded_orig(p):
        trace.gm_loads += plane_load
        return padded_slice(cells[p], loaded, rad)

    counts = [0] * t
    for k in range(n0 + t * rad):
        trace.phase("prefetch-load" if params.prefetch else "load", plane_load)
        if k < n0:
            mq.enqueue(0, padded_orig(k))
        if rad <= k < t * rad:
            # Frame planes seed the deeper queues just in time (see sm.py).
            mq.enqueue(k // rad, padded_orig(k % rad))
        for s in range(t):
            pos = rad + counts[s]
            if pos >= n0:
                continue
            if pos >= n0 - rad:
                plane = padded_orig(pos)
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
                trace.charge_compute(lanes, shared_pc, reg_pc)
                trace.phase("compute", lanes)
                if s + 1 < t:
                    # Ring exchange so neighboring blocks can consume the
                    # new plane at the next level.
                    trace.gm_stores += halo_cells
                    trace.gm_loads += halo_cells
                    trace.gm_halo_stores += halo_cells
                    trace.gm_halo_loads += halo_cells
                    trace.phase("push-halo", halo_cells)
                    trace.phase("pull-halo", halo_cells)
                    trace.halo_transactions += (
                        posed_tx if params.transpose_halo else raw_tx
                    )
            if s + 1 < t:
                mq.enqueue(s + 1, pad_own(plane, rad) if counted else plane)
            elif counted:
                out[(pos,) + out_sl] = plane[core_rel]
                trace.gm_stores += core_cells
                trace.cells_valid += core_cells * t
                trace.phase("store", core_cells)
        mq.shuffle()
        if params.lazy:
            trace.syncs_device += 1
            trace.phase("device-sync", 0)
        else:
            trace.syncs_device += t
            for _ in range(t):
                trace.phase("device-sync", 0)
        trace.syncs_block += len(regions) * (1 if params.lazy else t)
        trace.device_tiles += 1
