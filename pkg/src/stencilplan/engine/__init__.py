"""Tiling engines: temporal blocking executed on CPU with full accounting."""

from .device import run_device_tiling
from .params import DEVICE_TILING, SCHEMES, SM_TILING, ParamError, TilingParams
from .rst import ITEMS_PER_THREAD, onchip_charges, rst_shared_per_cell
from .sm import run_sm_tiling
from .summary import trace_summary
from .trace import AccountingReport, ExecutionTrace

__all__ = [
    "AccountingReport",
    "DEVICE_TILING",
    "ExecutionTrace",
    "ITEMS_PER_THREAD",
    "ParamError",
    "SCHEMES",
    "SM_TILING",
    "TilingParams",
    "onchip_charges",
    "rst_shared_per_cell",
    "run_device_tiling",
    "run_sm_tiling",
    "trace_summary",
]
