"""Reference executor: the oracle every tiling scheme is checked against."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stencilplan import (
    constant_grid,
    make_benchmark,
    random_grid,
    reference_run,
    reference_step,
)
from stencilplan.grid import Grid


def test_constant_grid_is_fixed_point():
    # Coefficients sum to one, so a constant field is invariant; exact
    # with dyadic coefficients, within rounding for the 1/|taps| defaults.
    stencil = make_benchmark(
        "j2d5pt", coefficients=[0.25, 0.25, 0.25, 0.125, 0.125]
    )
    grid = constant_grid((9, 9), 3.25)
    out = reference_step(grid, stencil)
    assert np.array_equal(out.cells, grid.cells)
    for name in ("j2d5pt", "j3d7pt", "j2d25pt"):
        stencil = make_benchmark(name)
        grid = constant_grid((9,) * stencil.dims, 3.25)
        out = reference_step(grid, stencil)
        np.testing.assert_allclose(out.cells, grid.cells, rtol=1e-14)


def test_impulse_convolution_1d():
    stencil = make_benchmark("j1d3pt", coefficients=[0.25, 0.5, 0.25])
    cells = np.zeros(11)
    cells[5] = 1.0
    out = reference_step(Grid(cells), stencil)
    expected = np.zeros(11)
    expected[4], expected[5], expected[6] = 0.25, 0.5, 0.25
    assert np.array_equal(out.cells, expected)


def _double_loop_2d5pt(cells, coeffs):
    # Independent transcription of the written-out 2D 5-point kernel:
    # out[i][j] = a*in[i-1][j] + b*in[i][j] + c*in[i+1][j]
    #           + d*in[i][j-1] + e*in[i][j+1]
    a, b, c, d, e = coeffs
    n, m = cells.shape
    out = cells.copy()
    for i in range(1, n - 1):
        for j in range(1, m - 1):
            acc = a * cells[i - 1][j]
            acc += b * cells[i][j]
            acc += c * cells[i + 1][j]
            acc += d * cells[i][j - 1]
            acc += e * cells[i][j + 1]
            out[i][j] = acc
    return out


def test_j2d5pt_matches_independent_transcription():
    stencil = make_benchmark("j2d5pt")
    grid = random_grid((16, 16), seed=42)
    expected = _double_loop_2d5pt(grid.cells, stencil.coefficients)
    out = reference_step(grid, stencil)
    assert np.array_equal(out.cells, expected)


def _brute_force_3d(cells, taps, steps):
    cur = cells.copy()
    n0, n1, n2 = cells.shape
    for _ in range(steps):
        new = cur.copy()
        for i in range(1, n0 - 1):
            for j in range(1, n1 - 1):
                for k in range(1, n2 - 1):
                    acc = None
                    for (di, dj, dk), c in taps:
                        term = c * cur[i + di][j + dj][k + dk]
                        acc = term if acc is None else acc + term
                    new[i][j][k] = acc
        cur = new
    return cur


def test_j3d7pt_three_steps_brute_force():
    stencil = make_benchmark("j3d7pt")
    grid = random_grid((12, 12, 12), seed=7)
    expected = _brute_force_3d(grid.cells, stencil.taps, steps=3)
    out = reference_run(grid, stencil, 3)
    assert np.array_equal(out.cells, expected)


def test_run_zero_steps_is_identity():
    stencil = make_benchmark("j2d9pt")
    grid = random_grid((12, 12), seed=1)
    out = reference_run(grid, stencil, 0)
    assert np.array_equal(out.cells, grid.cells)
    assert out.cells is not grid.cells


def test_two_steps_equals_step_twice():
    stencil = make_benchmark("j2d5pt")
    grid = random_grid((10, 14), seed=2)
    twice = reference_step(reference_step(grid, stencil), stencil)
    run = reference_run(grid, stencil, 2)
    assert np.array_equal(run.cells, twice.cells)


@given(a=st.integers(0, 3), b=st.integers(0, 3), seed=st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_run_composes(a, b, seed):
    stencil = make_benchmark("j2d5pt")
    grid = random_grid((9, 9), seed=seed)
    whole = reference_run(grid, stencil, a + b)
    parts = reference_run(reference_run(grid, stencil, a), stencil, b)
    assert np.array_equal(whole.cells, parts.cells)


@given(
    name=st.sampled_from(["j1d3pt", "j2d5pt", "j2d9pt-gol", "j3d7pt"]),
    seed=st.integers(0, 2**32),
    t=st.integers(1, 4),
)
@settings(max_examples=40, deadline=None)
def test_maximum_principle(name, seed, t):
    # Non-negative coefficients summing to one cannot grow the max norm.
    stencil = make_benchmark(name)
    grid = random_grid((8,) * stencil.dims, seed=seed)
    before = np.abs(grid.cells).max()
    after = reference_run(grid, stencil, t)
    assert np.abs(after.cells).max() <= before + 1e-15


def test_boundary_frame_is_fixed():
    stencil = make_benchmark("j2d9pt")  # radius 2
    grid = random_grid((12, 12), seed=9)
    out = reference_run(grid, stencil, 4)
    frame = np.ones((12, 12), dtype=bool)
    frame[2:-2, 2:-2] = False
    assert np.array_equal(out.cells[frame], grid.cells[frame])


def test_skip_update_matches_fixed_value():
    stencil = make_benchmark("j2d5pt")
    grid = random_grid((10, 10), seed=4)
    fixed = reference_run(Grid(grid.cells, "fixed-value"), stencil, 3)
    skip = reference_run(Grid(grid.cells, "skip-update"), stencil, 3)
    assert np.array_equal(fixed.cells, skip.cells)


def test_purity():
    stencil = make_benchmark("j2d5pt")
    grid = random_grid((10, 10), seed=5)
    before = grid.cells.copy()
    reference_step(grid, stencil)
    assert np.array_equal(grid.cells, before)


def test_dimension_mismatch_rejected():
    stencil = make_benchmark("j2d5pt")
    with pytest.raises(ValueError, match="2-D"):
        reference_step(random_grid((10,), seed=0), stencil)


def test_extent_too_small_rejected():
    stencil = make_benchmark("j2d9pt")  # radius 2 needs extents > 4
    with pytest.raises(ValueError, match="too small"):
        reference_step(random_grid((4, 10), seed=0), stencil)


def test_unknown_boundary_rejected():
    with pytest.raises(ValueError, match="boundary"):
        Grid(np.zeros((4, 4)), "wrap")
