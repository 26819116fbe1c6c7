"""Reduce a trace to the per-cell quantities the cost model talks about."""

from __future__ import annotations

from ..shapes import StencilShape
from .params import SM_TILING, TilingParams
from .trace import AccountingReport, ExecutionTrace


def trace_summary(
    trace: ExecutionTrace,
    stencil: StencilShape,
    params: TilingParams,
    domain,
    two_sided: bool = True,
) -> AccountingReport:
    """Measured per-valid-cell global traffic, per-computed-cell on-chip
    traffic, and the valid proportion (with the model value for SM runs)."""
    if trace.cells_computed == 0 or trace.cells_valid == 0:
        raise ValueError("empty trace: no computed or valid cells")
    a_gm = (trace.gm_loads + trace.gm_stores) / trace.cells_valid
    a_sm = float(trace.onchip_shared / trace.cells_computed)
    v_measured = trace.cells_valid / trace.cells_computed
    v_model = None
    if params.scheme == SM_TILING:
        k = 2 if two_sided else 1
        v_model = 1.0
        for w in params.tile:
            v_model *= (w - k * params.t * stencil.radius) / w
    return AccountingReport(
        a_gm_measured=a_gm,
        a_sm_measured=a_sm,
        valid_proportion_measured=v_measured,
        valid_proportion_model=v_model,
        syncs_block=trace.syncs_block,
        syncs_device=trace.syncs_device,
        device_tiles=trace.device_tiles,
    )
