"""Shared machinery for the tiling engines."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..shapes import StencilShape


def partition_cores(lo: int, hi: int, width: int) -> list[tuple[int, int]]:
    """Split [lo, hi) into consecutive cores of `width`; last one trimmed."""
    if hi <= lo:
        raise ValueError("empty interior")
    cores = []
    start = lo
    while start < hi:
        cores.append((start, min(start + width, hi)))
        start += width
    return cores


def even_split(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    """Split [lo, hi) into `parts` contiguous chunks, sizes differing by <= 1."""
    n = hi - lo
    parts = min(parts, n)
    base, extra = divmod(n, parts)
    out = []
    start = lo
    for i in range(parts):
        w = base + (1 if i < extra else 0)
        out.append((start, start + w))
        start += w
    return out


def clamp_indices(lo: int, hi: int, pad: int, n: int) -> np.ndarray:
    """Index array for [lo-pad, hi+pad) clamped into [0, n)."""
    return np.clip(np.arange(lo - pad, hi + pad), 0, n - 1)


def padded_slice(array: np.ndarray, ranges, pad: int) -> np.ndarray:
    """Clamp-padded rectangular slice of `array` over the given ranges."""
    idx = [clamp_indices(lo, hi, pad, n) for (lo, hi), n in zip(ranges, array.shape)]
    if len(idx) == 1:
        return array[idx[0]]
    return array[np.ix_(*idx)]


def pad_own(plane: np.ndarray, pad: int) -> np.ndarray:
    """Pad a computed plane by clamping to its own edges."""
    idx = [np.clip(np.arange(-pad, n + pad), 0, n - 1) for n in plane.shape]
    if plane.ndim == 1:
        return plane[idx[0]]
    return plane[np.ix_(*idx)]


def level_update(window, stencil: StencilShape, widths) -> np.ndarray:
    """One stencil level over padded window planes, in catalog tap order.

    `window` holds the 2*rad+1 padded planes oldest first; entry rad+d0
    is the plane at stream offset d0.  The result covers the unpadded
    extent given by `widths`.
    """
    rad = stencil.radius
    acc = None
    for off, c in stencil.taps:
        src = window[rad + off[0]]
        sl = tuple(slice(rad + d, rad + d + w) for d, w in zip(off[1:], widths))
        term = c * src[sl]
        acc = term if acc is None else acc + term
    return acc


def local_step(padded: np.ndarray, stencil: StencilShape) -> np.ndarray:
    """One stencil step over a clamp-padded local block (unstreamed path)."""
    rad = stencil.radius
    widths = tuple(n - 2 * rad for n in padded.shape)
    acc = None
    for off, c in stencil.taps:
        sl = tuple(slice(rad + d, rad + d + w) for d, w in zip(off, widths))
        term = c * padded[sl]
        acc = term if acc is None else acc + term
    return acc


def run_blocks(fn, items, workers: int):
    """Run fn over items, optionally on a thread pool; results in item order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def frame_reset(
    plane: np.ndarray,
    original: np.ndarray,
    ranges,
    extents,
    rad: int,
):
    """Restore fixed boundary cells (per tiled axis) from the original plane."""
    for axis, ((lo, hi), n) in enumerate(zip(ranges, extents)):
        if lo < rad:
            sl = [slice(None)] * plane.ndim
            sl[axis] = slice(0, rad - lo)
            plane[tuple(sl)] = original[tuple(sl)]
        if hi > n - rad:
            sl = [slice(None)] * plane.ndim
            sl[axis] = slice(plane.shape[axis] - (hi - (n - rad)), plane.shape[axis])
            plane[tuple(sl)] = original[tuple(sl)]


def coalesced_transactions(cells: int, cell_bytes: int, coalesced: bool) -> int:
    # 32-byte transaction granularity: contiguous strips batch up, strided
    # strips pay one transaction per cell.
    if coalesced:
        return (cells * cell_bytes + 31) // 32
    return cells
