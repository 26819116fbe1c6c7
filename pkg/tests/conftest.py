"""Shared test helpers: case construction for engine sweeps."""

from __future__ import annotations

import numpy as np
import pytest

from stencilplan import make_benchmark, random_grid, reference_run
from stencilplan.engine import (
    DEVICE_TILING,
    SM_TILING,
    TilingParams,
    run_device_tiling,
    run_sm_tiling,
)
from stencilplan.rng import SplitMix64

ENGINES = {SM_TILING: run_sm_tiling, DEVICE_TILING: run_device_tiling}


def sm_case(stencil, rng: SplitMix64, t: int):
    """Divisible-geometry SM params + domain: interior is an exact multiple
    of the valid core on every tiled axis."""
    rad = stencil.radius
    dims = stencil.dims
    core = rng.randint(max(4, rad * 2), 10)
    tile = core + 2 * rad * t
    if dims == 1:
        blocks = rng.randint(1, 3)
        domain = (blocks * core + 2 * rad,)
        return TilingParams(scheme=SM_TILING, t=t, tile=(tile,)), domain
    n0 = 2 * rad + rng.randint(6, 14)
    if dims == 2:
        blocks = rng.randint(1, 3)
        return (
            TilingParams(scheme=SM_TILING, t=t, tile=(tile,)),
            (n0, blocks * core + 2 * rad),
        )
    b1, b2 = rng.randint(1, 2), rng.randint(1, 2)
    return (
        TilingParams(scheme=SM_TILING, t=t, tile=(tile, tile)),
        (n0, b1 * core + 2 * rad, b2 * core + 2 * rad),
    )


def device_case(stencil, rng: SplitMix64, t: int):
    """Single device tile spanning the domain, with a 1-2 block grid."""
    rad = stencil.radius
    dims = stencil.dims
    if dims == 1:
        interior = rng.randint(24, 60)
        g = rng.randint(1, 2)
        w = -(-interior // g)
        return (
            TilingParams(
                scheme=DEVICE_TILING, t=t, tile=(w,), device_tile_grid=(g,)
            ),
            (interior + 2 * rad,),
        )
    if dims == 2:
        i0 = rng.randint(12, 24)
        i1 = rng.randint(12, 24)
        g = (rng.randint(1, 2), rng.randint(1, 2))
        tile = (-(-i0 // g[0]), -(-i1 // g[1]))
        return (
            TilingParams(
                scheme=DEVICE_TILING, t=t, tile=tile, device_tile_grid=g
            ),
            (i0 + 2 * rad, i1 + 2 * rad),
        )
    n0 = 2 * rad + rng.randint(6, 12)
    i1 = rng.randint(10, 20)
    i2 = rng.randint(10, 20)
    g = (rng.randint(1, 2), rng.randint(1, 2))
    tile = (-(-i1 // g[0]), -(-i2 // g[1]))
    return (
        TilingParams(
            scheme=DEVICE_TILING, t=t, tile=tile, device_tile_grid=g
        ),
        (n0, i1 + 2 * rad, i2 + 2 * rad),
    )


def run_case(name: str, scheme: str, rng: SplitMix64, lazy: bool, rst: bool,
             workers: int = 1):
    """One randomized engine run; returns (exact, params, domain, trace)."""
    stencil = make_benchmark(name)
    t = rng.randint(1, 3)
    if scheme == SM_TILING:
        params, domain = sm_case(stencil, rng, t)
    else:
        params, domain = device_case(stencil, rng, t)
    params.lazy = lazy
    params.rst = rst
    params.workers = workers
    grid = random_grid(domain, seed=rng.next_u64())
    out, trace = ENGINES[scheme](grid, stencil, params)
    oracle = reference_run(grid, stencil, params.t)
    exact = np.array_equal(out.cells, oracle.cells)
    return exact, params, domain, trace


@pytest.fixture
def rng():
    return SplitMix64(0xC0FFEE)
