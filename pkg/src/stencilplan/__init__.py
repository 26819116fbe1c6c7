"""Temporal-blocking planner and desk-scale simulator for iterative stencils."""

from .grid import Grid, constant_grid, random_grid, reference_run, reference_step
from .model import (
    KernelProfile,
    Plan,
    attainable_perf,
    bottleneck,
    choose_scheme,
    component_times,
    littles_check,
    min_depth_to_shift,
    min_tile_width_3d,
    onchip_bytes_required,
    valid_proportion_device,
    valid_proportion_sm,
)
from .hardware import A100, HardwareSpec, get_hardware
from .multiqueue import CircularMultiQueue, circular_range, masked_mod
from .shapes import BENCHMARK_NAMES, StencilShape, make_benchmark

__version__ = "0.1.0"

__all__ = [
    "A100",
    "BENCHMARK_NAMES",
    "CircularMultiQueue",
    "Grid",
    "HardwareSpec",
    "KernelProfile",
    "Plan",
    "StencilShape",
    "attainable_perf",
    "bottleneck",
    "choose_scheme",
    "circular_range",
    "component_times",
    "constant_grid",
    "get_hardware",
    "littles_check",
    "make_benchmark",
    "masked_mod",
    "min_depth_to_shift",
    "min_tile_width_3d",
    "onchip_bytes_required",
    "random_grid",
    "reference_run",
    "reference_step",
    "valid_proportion_device",
    "valid_proportion_sm",
]
