"""Practical attainable performance: component times, bottleneck, valid
proportions, and the design-decision procedures built on them.

The projection works from three component times per kernel,

    T_gm  = a_gm * D_gm * S_cell / B_gm
    T_sm  = a_sm * D_sm * t * S_cell / B_sm
    T_cmp = a_cmp * D_cmp * t / THR_cmp

with the attainable performance P = D_all * t / max(T_gm, T_sm, T_cmp)
and the practical attainable performance PP = P * V, where V discounts
either redundant halo computation (SM tiling) or barrier stalls (device
tiling).  All bandwidths are bytes/s internally; GCells/s conversion
happens at the reporting edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .hardware import HardwareSpec
from .shapes import StencilShape

GCELLS = 1e-9


class ModelError(ValueError):
    pass


class UnattainableError(ModelError):
    """The bottleneck cannot be shifted at any depth."""


@dataclass(frozen=True)
class ComponentTimes:
    t_gm: float
    t_sm: float
    t_cmp: float

    def as_dict(self) -> dict:
        return {"gm": self.t_gm, "sm": self.t_sm, "cmp": self.t_cmp}


@dataclass
class KernelProfile:
    """Per-cell costs plus the cell counts each component touches."""

    a_gm: float
    a_sm: float
    a_cmp: float
    d_gm: float
    d_sm: float
    d_cmp: float
    d_all: float
    t: int
    rad: int = 1
    tile_x: int | None = None
    tile_y: int | None = None
    n_syncs: int = 1

    def __post_init__(self):
        if self.d_all <= 0:
            raise ModelError("d_all must be positive")
        if self.t < 1:
            raise ModelError("depth must be >= 1")


@dataclass
class Plan:
    scheme: str
    t: int
    tile_x: int
    tile_y: int | None
    device_tile_grid: tuple[int, ...] | None
    predicted_p: float  # GCells/s
    predicted_v: float
    predicted_pp: float  # GCells/s
    bottleneck: str
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isclose(self.predicted_pp, self.predicted_p * self.predicted_v,
                            rel_tol=1e-12, abs_tol=0.0):
            raise ModelError("practical performance must equal P * V")


def component_times(hw: HardwareSpec, profile: KernelProfile) -> ComponentTimes:
    return ComponentTimes(
        t_gm=profile.a_gm * profile.d_gm * hw.cell_bytes / hw.gm_bandwidth,
        t_sm=profile.a_sm * profile.d_sm * profile.t * hw.cell_bytes / hw.sm_bandwidth,
        t_cmp=profile.a_cmp * profile.d_cmp * profile.t / hw.compute_throughput,
    )


def bottleneck(times: ComponentTimes) -> str:
    """Slowest component; ties resolve gm over sm over cmp."""
    best = "gm"
    value = times.t_gm
    for name, t in (("sm", times.t_sm), ("cmp", times.t_cmp)):
        if t > value:
            best, value = name, t
    return best


def attainable_perf(hw: HardwareSpec, profile: KernelProfile) -> float:
    """Projected throughput in cells/s."""
    times = component_times(hw, profile)
    total = max(times.t_gm, times.t_sm, times.t_cmp)
    if total == 0:
        raise ModelError("all component times are zero")
    return profile.d_all * profile.t / total


def valid_proportion_sm(profile: KernelProfile, two_sided: bool = True) -> float:
    """Valid fraction of an overlapped tile after t steps of halo shrink.

    The published formula counts one halo side (k=1); the worked examples
    count both (k=2, e.g. a 34-wide tile at rad 1, t 3 keeps 28).  Both
    conventions are exposed; two-sided is the default because it is what
    the execution traces measure.
    """
    k = 2 if two_sided else 1
    v = 1.0
    for w in (profile.tile_x, profile.tile_y):
        if w is None:
            continue
        core = w - k * profile.t * profile.rad
        if core <= 0:
            raise ModelError(f"no valid core: tile {w} at depth {profile.t}")
        v *= core / w
    return v


def valid_proportion_device(t_stencil: float, t_dsync: float, n: int = 1) -> float:
    """Fraction of wall time doing stencil work between device barriers."""
    if not t_stencil > 0:
        raise ModelError("stencil time must be positive")
    if n < 1:
        raise ModelError("sync count must be >= 1")
    return t_stencil / (t_stencil + t_dsync * n)


def practical_perf(hw: HardwareSpec, profile: KernelProfile, scheme: str,
                   two_sided: bool = True) -> tuple[float, float, float]:
    """(P cells/s, V, PP cells/s) for one configured kernel."""
    p = attainable_perf(hw, profile)
    if scheme == "sm-tiling":
        v = valid_proportion_sm(profile, two_sided)
    else:
        times = component_times(hw, profile)
        t_stencil = max(times.t_gm, times.t_sm, times.t_cmp)
        v = valid_proportion_device(t_stencil, hw.device_sync_latency, profile.n_syncs)
    return p, v, p * v


def min_depth_to_shift(
    hw: HardwareSpec, profile: KernelProfile, device_gm_halo: bool = False
) -> tuple[float, int]:
    """Least depth t that moves the bottleneck off global memory.

    Solves a_sm*t*d_sm/B_sm >= a_gm*d_gm(t)/B_gm.  With ``device_gm_halo``
    the global traffic grows with depth through the per-step halo
    exchange, d_gm(t) = tile_x*tile_y + (tile_x+tile_y)*2*t*rad, and the
    inequality is solved in closed form (it stays linear in t).
    """
    lhs = profile.a_sm * profile.d_sm * hw.cell_bytes / hw.sm_bandwidth
    if device_gm_halo:
        if profile.tile_x is None or profile.tile_y is None:
            raise ModelError("device halo form needs tile_x and tile_y")
        const = profile.tile_x * profile.tile_y
        slope = (profile.tile_x + profile.tile_y) * 2 * profile.rad
    else:
        const = profile.d_gm
        slope = 0.0
    gm_unit = profile.a_gm * hw.cell_bytes / hw.gm_bandwidth
    coeff = lhs - gm_unit * slope
    if coeff <= 0:
        raise UnattainableError(
            "shared-memory time per step never catches the halo traffic"
        )
    t_real = gm_unit * const / coeff
    t_int = max(1, math.ceil(t_real - 1e-9))
    return t_real, t_int


def min_tile_width_3d(hw: HardwareSpec, profile: KernelProfile) -> tuple[float, int]:
    """Square-tile width above which per-step halo exchange traffic stays
    under the on-chip time; returns the bound and the next multiple of 32."""
    bound = 4 * profile.a_gm * hw.sm_bandwidth / (profile.a_sm * hw.gm_bandwidth)
    bound *= profile.rad
    chosen = max(32, 32 * math.ceil(bound / 32 - 1e-9))
    return bound, chosen


def littles_check(
    hw: HardwareSpec, op: str, n_threads: int, ilp: int
) -> tuple[float, int, bool]:
    """(required concurrency C, supplied parallelism PAR, saturates)."""
    if op not in hw.op_latencies or op not in hw.op_throughputs:
        raise ModelError(
            f"unknown op {op!r}; known: {sorted(hw.op_latencies)}"
        )
    c = hw.op_latencies[op] * hw.op_throughputs[op]
    par = n_threads * ilp
    return c, par, par >= c


@dataclass
class OnchipReport:
    planes: int
    plane_cells: int
    bytes_required: int
    capacity: int | None
    fits: bool | None

    def as_dict(self) -> dict:
        return {
            "planes": self.planes,
            "plane_cells": self.plane_cells,
            "bytes_required": self.bytes_required,
            "capacity": self.capacity,
            "verdict": None if self.fits is None else ("fits" if self.fits else "exceeds"),
        }


def onchip_bytes_required(
    stencil: StencilShape, params, capacity: int | None = None,
    cell_bytes: int = 8,
) -> OnchipReport:
    """On-chip footprint of the circular buffering for one block.

    planes = the circular range of the queue configuration; each plane is
    one streamed element (a cell for 1D, a line for 2D, a plane for 3D;
    device tiling holds the halo ring with it).
    """
    from .engine.params import DEVICE_TILING
    from .multiqueue import circular_range

    rad = stencil.radius
    variant = params.queue_variant or (
        "shifting-address" if stencil.dims == 3 else "computing-address"
    )
    lazy_cap = None
    if params.lazy:
        from .multiqueue import naive_range

        lazy_cap = naive_range(params.t, rad, rad + 2)
    planes = circular_range(
        params.t, rad, variant, lazy=params.lazy, lazy_capacity=lazy_cap
    )
    if stencil.dims == 1:
        plane_cells = 1
    elif params.scheme == DEVICE_TILING:
        plane_cells = 1
        for w in params.tile:
            plane_cells *= w + 2 * rad
    else:
        plane_cells = 1
        for w in params.tile:
            plane_cells *= w
    required = planes * plane_cells * cell_bytes
    fits = None if capacity is None else required <= capacity
    return OnchipReport(planes, plane_cells, required, capacity, fits)


# ---------------------------------------------------------------------------
# Scheme choice
# ---------------------------------------------------------------------------

# Parallelism combination that saturates the device at minimal occupancy.
N_THREADS = 256
ILP = 4
# Convenient streamed-line width for 2D kernels (equals the thread count).
TILE_X_2D = 256
DEPTH_CEILING = 64


def _branch_record(profile: KernelProfile, hw: HardwareSpec, scheme: str,
                   tile, grid, two_sided: bool) -> dict:
    p, v, pp = practical_perf(hw, profile, scheme, two_sided)
    times = component_times(hw, profile)
    return {
        "scheme": scheme,
        "t": profile.t,
        "tile": tuple(tile),
        "device_tile_grid": tuple(grid) if grid else None,
        "p_cells": p,
        "v": v,
        "pp_cells": pp,
        "bottleneck": bottleneck(times),
        "times": times.as_dict(),
        "profile": profile,
    }


def _cost_constants(stencil: StencilShape) -> tuple[float, float, float]:
    # Register streaming is always on in the modeled kernels.
    return (
        stencil.gm_accesses_per_cell,
        stencil.sm_accesses_with_rst,
        stencil.flops_per_cell,
    )


def _block_width_3d(hw: HardwareSpec, stencil: StencilShape) -> int:
    a_gm, a_sm, _ = _cost_constants(stencil)
    probe = KernelProfile(
        a_gm=a_gm, a_sm=a_sm, a_cmp=1, d_gm=1, d_sm=1, d_cmp=1, d_all=1,
        t=1, rad=stencil.radius,
    )
    _, chosen = min_tile_width_3d(hw, probe)
    return chosen


def _sm_branch(hw: HardwareSpec, stencil: StencilShape, two_sided: bool,
               tile_x_2d: int, t_ceiling: int):
    from .engine.params import TilingParams

    rad, dims = stencil.radius, stencil.dims
    a_gm, a_sm, a_cmp = _cost_constants(stencil)
    if dims == 3:
        block_w = _block_width_3d(hw, stencil)
        tile = (block_w + 2 * rad,) * 2  # loaded plane footprint
    else:
        tile = (tile_x_2d,)
    cells = math.prod(tile)

    def profile_at(t: int) -> KernelProfile:
        return KernelProfile(
            a_gm=a_gm, a_sm=a_sm, a_cmp=a_cmp,
            d_gm=cells, d_sm=cells, d_cmp=cells, d_all=cells,
            t=t, rad=rad,
            tile_x=tile[0], tile_y=tile[1] if dims == 3 else None,
        )

    try:
        _, t = min_depth_to_shift(hw, profile_at(1))
    except UnattainableError:
        t = 1
    t = min(t, t_ceiling, (min(tile) - 1) // (2 * rad))
    while t >= 1:
        report = onchip_bytes_required(
            stencil,
            TilingParams(scheme="sm-tiling", t=t, tile=tile),
            hw.onchip_capacity_per_block, hw.cell_bytes,
        )
        if report.fits:
            break
        t -= 1
    if t < 1:
        return None
    return _branch_record(profile_at(t), hw, "sm-tiling", tile, None, two_sided)


def _device_branch(hw: HardwareSpec, stencil: StencilShape, domain,
                   two_sided: bool, tile_x_2d: int, t_ceiling: int):
    from .engine.params import TilingParams

    rad, dims = stencil.radius, stencil.dims
    a_gm, a_sm, a_cmp = _cost_constants(stencil)
    if dims == 3:
        block_w = _block_width_3d(hw, stencil)
        tile = (block_w, block_w)
        variant = "shifting-address"
    else:
        tile = (tile_x_2d,)
        variant = "computing-address"

    t = None
    for cand in range(t_ceiling, 0, -1):
        report = onchip_bytes_required(
            stencil,
            TilingParams(
                scheme="device-tiling", t=cand, tile=tile, queue_variant=variant
            ),
            hw.onchip_capacity_per_block, hw.cell_bytes,
        )
        if report.fits:
            t = cand
            break
    if t is None:
        return None

    tiled_extents = domain[1:] if dims >= 2 else domain
    grid = [max(1, n // w) for n, w in zip(tiled_extents, tile)]
    while math.prod(grid) > hw.blocks:
        grid[grid.index(max(grid))] -= 1
    blocks = math.prod(grid)

    if dims == 3:
        d_sm = blocks * tile[0] * tile[1]
        d_gm = blocks * (
            (tile[0] + 2 * rad) * (tile[1] + 2 * rad)
            + (tile[0] + tile[1]) * 2 * rad * t
        )
        tile_x, tile_y = tile[0], tile[1]
    elif dims == 2:
        d_sm = blocks * tile[0]
        d_gm = blocks * ((tile[0] + 2 * rad) + 2 * rad * t)
        tile_x, tile_y = tile[0], None
    else:
        # Resident 1D tile: one pass is the synchronized unit.
        d_sm = blocks * tile[0]
        d_gm = blocks * tile[0] + blocks * 2 * rad * t
        tile_x, tile_y = tile[0], None

    profile = KernelProfile(
        a_gm=a_gm, a_sm=a_sm, a_cmp=a_cmp,
        d_gm=d_gm, d_sm=d_sm, d_cmp=d_sm, d_all=d_sm,
        t=t, rad=rad, tile_x=tile_x, tile_y=tile_y, n_syncs=1,
    )
    return _branch_record(profile, hw, "device-tiling", tile, grid, two_sided)


def choose_scheme(
    hw: HardwareSpec,
    stencil: StencilShape,
    domain=None,
    two_sided: bool = True,
    tile_x_2d: int = TILE_X_2D,
    t_ceiling: int = DEPTH_CEILING,
) -> Plan:
    """Pick SM tiling or device tiling by practical attainable performance.

    Each branch is parameterized on its own terms: SM tiling takes the
    least depth that shifts the bottleneck off global memory (capped by
    on-chip capacity and tile validity); device tiling goes as deep as the
    on-chip buffers allow and pays one device barrier per synchronized
    unit.  Ties prefer SM tiling for its simpler execution.
    """
    domain = tuple(domain) if domain is not None else stencil.default_domain
    sm = _sm_branch(hw, stencil, two_sided, tile_x_2d, t_ceiling)
    dev = _device_branch(hw, stencil, domain, two_sided, tile_x_2d, t_ceiling)
    if sm is None and dev is None:
        raise ModelError(f"no feasible configuration for {stencil.name}")
    if dev is None:
        winner = sm
    elif sm is None:
        winner = dev
    elif abs(sm["pp_cells"] - dev["pp_cells"]) <= 1e-9 * max(
        sm["pp_cells"], dev["pp_cells"]
    ):
        winner = sm
    else:
        winner = sm if sm["pp_cells"] > dev["pp_cells"] else dev
    tile = winner["tile"]
    return Plan(
        scheme=winner["scheme"],
        t=winner["t"],
        tile_x=tile[0],
        tile_y=tile[1] if len(tile) > 1 else None,
        device_tile_grid=winner["device_tile_grid"],
        predicted_p=winner["p_cells"] * GCELLS,
        predicted_v=winner["v"],
        predicted_pp=winner["pp_cells"] * GCELLS,
        bottleneck=winner["bottleneck"],
        details={
            "sm-tiling": sm,
            "device-tiling": dev,
            "parallelism": {"n_threads": N_THREADS, "ilp": ILP},
            "domain": domain,
        },
    )
