"""Circular multi-queue: layout, variants, shuffles, and pipeline drives."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stencilplan import make_benchmark, random_grid, reference_run
from stencilplan.multiqueue import (
    CircularMultiQueue,
    QueueError,
    circular_range,
    masked_mod,
    naive_range,
    stream_pipeline,
)
from stencilplan.rng import SplitMix64


def test_published_ranges():
    assert circular_range(3, 1, "shifting-data") == 7
    assert circular_range(3, 1, "shifting-address") == 7
    assert circular_range(3, 1, "computing-address") == 8


def test_lazy_range_and_spacing():
    mq = CircularMultiQueue(3, 1, "computing-address", lazy=True, lazy_capacity=16)
    assert mq.range == 16
    assert mq.queue_spacing == 3


def test_lazy_capacity_too_small():
    with pytest.raises(QueueError, match="capacity"):
        CircularMultiQueue(3, 1, "shifting-data", lazy=True, lazy_capacity=5)


def test_computing_address_rounds_to_power_of_two():
    # Least power of two at or above the shifting range, for any config.
    for depth in range(1, 9):
        for rad in (1, 2):
            shifting = circular_range(depth, rad, "shifting-data")
            computing = circular_range(depth, rad, "computing-address")
            assert computing >= shifting
            assert computing & (computing - 1) == 0
            assert computing < 2 * shifting or shifting == 1


def test_masked_mod_examples():
    assert masked_mod(9, 8) == 1
    assert masked_mod(7, 8) == 7


def test_masked_mod_against_remainder():
    rng = SplitMix64(99)
    for _ in range(1000):
        k = rng.randint(0, 10**9)
        n = 1 << rng.randint(0, 16)
        assert masked_mod(k, n) == k % n
    with pytest.raises(ValueError):
        masked_mod(3, 0)


def test_enqueue_then_compute_reads_fresh_tail():
    mq = CircularMultiQueue(1, 1, "shifting-data")
    mq.enqueue(0, 1.0)
    mq.shuffle()
    mq.enqueue(0, 2.0)
    mq.shuffle()
    mq.enqueue(0, 3.0)
    assert mq.compute(0, [1.0, 1.0, 1.0]) == 6.0


def test_window_sum_example():
    mq = CircularMultiQueue(1, 1, "shifting-data")
    for v in (1.0, 2.0, 3.0):
        mq.enqueue(0, v)
        if v < 3.0:
            mq.shuffle()
    assert mq.window_values(0) == [1.0, 2.0, 3.0]
    assert mq.compute(0, [1.0, 1.0, 1.0]) == 6.0


def test_level0_window_slides_over_input():
    # The shallowest queue exposes the last 2*rad+1 raw inputs, in order.
    mq = CircularMultiQueue(3, 1, "computing-address")
    stream = list(range(10))
    seen = []
    for v in stream:
        mq.enqueue(0, v)
        if mq.ready(0):
            seen.append(mq.window_values(0))
        mq.shuffle()
    assert seen == [[i, i + 1, i + 2] for i in range(8)]


def test_shifting_data_shuffle_moves_elements():
    mq = CircularMultiQueue(3, 1, "shifting-data")
    mq.backing = [1, 2, 3, 4, 5, 6, 7]
    mq.shuffle()
    assert mq.backing == [2, 3, 4, 5, 6, 7, 7]


def test_computing_address_shuffle_advances_heads():
    mq = CircularMultiQueue(3, 1, "computing-address")
    assert mq.heads == [4, 2, 0]
    mq.shuffle()
    mq.shuffle()
    assert mq.heads == [6, 4, 2]
    mq.shuffle()
    assert mq.heads == [7, 5, 3]


def test_full_cycle_restores_heads():
    mq = CircularMultiQueue(3, 1, "computing-address")
    start = list(mq.heads)
    for _ in range(mq.range):
        mq.shuffle()
    assert mq.heads == start


def test_under_filled_compute_raises():
    mq = CircularMultiQueue(2, 1, "shifting-data")
    mq.enqueue(0, 1.0)
    with pytest.raises(QueueError, match="under-filled"):
        mq.compute(0, [1.0, 1.0, 1.0])


def test_stale_window_after_shuffle_raises():
    mq = CircularMultiQueue(1, 1, "shifting-data")
    for v in (1.0, 2.0, 3.0):
        mq.enqueue(0, v)
        mq.shuffle()
    with pytest.raises(QueueError, match="under-filled"):
        mq.compute(0, [1.0, 1.0, 1.0])


def test_level_out_of_range():
    mq = CircularMultiQueue(2, 1, "shifting-data")
    with pytest.raises(QueueError, match="out of range"):
        mq.enqueue(5, 1.0)


def test_heads_pairwise_distinct():
    for variant in ("shifting-data", "shifting-address", "computing-address"):
        mq = CircularMultiQueue(4, 2, variant)
        for _ in range(3 * mq.range):
            slots = [masked_mod(h, mq.range) for h in mq.heads]
            assert len(set(slots)) == len(slots)
            mq.shuffle()


def _drive(variant, depth, rad, values, lazy=False):
    coeffs = [1.0 / (2 * rad + 1)] * (2 * rad + 1)
    return stream_pipeline(values, depth, rad, coeffs, variant, lazy=lazy)


def test_variant_equivalence_small():
    rng = SplitMix64(5)
    for depth in (1, 2, 3, 5, 8):
        for rad in (1, 2):
            values = [rng.uniform() for _ in range(200)]
            results = [
                _drive(v, depth, rad, values).outputs
                for v in ("shifting-data", "shifting-address", "computing-address")
            ]
            assert results[0] == results[1] == results[2]
            assert len(results[0]) == 200 - 2 * depth * rad


@given(
    depth=st.integers(1, 4),
    rad=st.integers(1, 2),
    seed=st.integers(0, 2**32),
)
@settings(max_examples=30, deadline=None)
def test_variant_equivalence_property(depth, rad, seed):
    rng = SplitMix64(seed)
    values = [rng.uniform() for _ in range(60)]
    outs = {
        v: _drive(v, depth, rad, values).outputs
        for v in ("shifting-data", "shifting-address", "computing-address")
    }
    assert outs["shifting-data"] == outs["shifting-address"]
    assert outs["shifting-data"] == outs["computing-address"]


@pytest.mark.parametrize("lazy", [False, True])
@pytest.mark.parametrize("rad", [1, 2])
def test_pipeline_reproduces_reference_interior(rad, lazy):
    # Cells whose dependency cone fits in the stream match the oracle.
    depth = 3
    n = 64
    coeffs = (
        [0.25, 0.5, 0.25] if rad == 1 else [0.1, 0.2, 0.4, 0.2, 0.1]
    )
    grid = random_grid((n,), seed=31)
    oracle = _reference_1d(grid.cells, coeffs, rad, depth)
    result = _drive_values(grid.cells, depth, rad, coeffs, lazy)
    first = depth * rad
    assert result.first_index == first
    assert np.array_equal(np.array(result.outputs), oracle[first : n - first])


def test_pipeline_matches_reference_run_j1d3pt():
    # Same check phrased through the grid oracle for the catalog stencil.
    stencil = make_benchmark("j1d3pt")
    grid = random_grid((32,), seed=13)
    oracle = reference_run(grid, stencil, 3).cells
    result = stream_pipeline(
        list(grid.cells), 3, 1, list(stencil.coefficients), "shifting-data"
    )
    assert np.array_equal(np.array(result.outputs), oracle[3:-3])


def _reference_1d(cells, coeffs, rad, steps):
    cur = cells.copy()
    for _ in range(steps):
        new = cur.copy()
        for i in range(rad, len(cells) - rad):
            acc = coeffs[0] * cur[i - rad]
            for j in range(1, 2 * rad + 1):
                acc = acc + coeffs[j] * cur[i - rad + j]
            new[i] = acc
        cur = new
    return cur


def _drive_values(cells, depth, rad, coeffs, lazy):
    return stream_pipeline(
        list(cells), depth, rad, coeffs, "computing-address", lazy=lazy
    )


def test_sync_counts_lazy_vs_naive():
    values = list(range(100))
    coeffs = [1.0, 1.0, 1.0]
    naive = stream_pipeline(values, 4, 1, coeffs, "shifting-data", lazy=False)
    lazy = stream_pipeline(values, 4, 1, coeffs, "computing-address", lazy=True)
    assert naive.syncs == 4 * len(values)  # one per queue level per cell
    assert lazy.syncs == len(values)  # one per tile advance
    assert naive.outputs == lazy.outputs


def test_debug_dump_format():
    result = stream_pipeline(
        [1.0, 2.0, 3.0], 2, 1, [1.0, 1.0, 1.0], "shifting-address",
        collect_debug=True,
    )
    assert len(result.debug) == 3
    line = result.debug[0]
    assert line.startswith("shuffle=1 heads=[")
    assert "fill=[" in line and "range=" in line


def test_naive_range_formula():
    # spacing * depth + rad, spacing defaulting to rad + 1
    assert naive_range(3, 1) == 7
    assert naive_range(3, 2) == 11
    assert naive_range(5, 1, 3) == 16
