"""Execution traces: every memory access and synchronization, metered.

Counting conventions (shared by all engines):

- ``cells_computed`` counts lane-steps: every level of every counted
  advance charges the nominal tile width, whether or not an edge lane
  produced a meaningful value.  Warm-up and drain advances of a streaming
  pipeline are not counted (their cost amortizes over the stream).
- ``cells_valid`` counts t updates for every cell stored to the output.
- On-chip accesses are charged per lane-step from the stencil's per-cell
  cost (shared/register split per the RST model), as exact rationals.
- A device sync is one barrier event (all blocks rendezvous); a block
  sync is one event per block.
- ``device_tiles`` counts synchronized work units: one per spatial device
  tile for the unstreamed schemes, one per stream advance otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction


@dataclass
class ExecutionTrace:
    gm_loads: int = 0
    gm_stores: int = 0
    gm_halo_loads: int = 0
    gm_halo_stores: int = 0
    onchip_shared: Fraction = Fraction(0)
    onchip_register: Fraction = Fraction(0)
    syncs_block: int = 0
    syncs_device: int = 0
    cells_computed: int = 0
    cells_valid: int = 0
    device_tiles: int = 0
    halo_transactions: int = 0
    wall_phases: list[tuple[str, int]] = field(default_factory=list)

    def merge(self, other: "ExecutionTrace"):
        """Order-independent accumulation of another block's counters."""
        self.gm_loads += other.gm_loads
        self.gm_stores += other.gm_stores
        self.gm_halo_loads += other.gm_halo_loads
        self.gm_halo_stores += other.gm_halo_stores
        self.onchip_shared += other.onchip_shared
        self.onchip_register += other.onchip_register
        self.syncs_block += other.syncs_block
        self.syncs_device += other.syncs_device
        self.cells_computed += other.cells_computed
        self.cells_valid += other.cells_valid
        self.device_tiles += other.device_tiles
        self.halo_transactions += other.halo_transactions

    def charge_compute(self, lanes: int, shared_pc: Fraction, register_pc: Fraction):
        self.cells_computed += lanes
        self.onchip_shared += shared_pc * lanes
        self.onchip_register += register_pc * lanes

    PHASE_CAP = 4096

    def phase(self, tag: str, cells: int):
        # Counters stay exact past the cap; only the log is bounded.
        if len(self.wall_phases) < self.PHASE_CAP:
            self.wall_phases.append((tag, cells))
        elif len(self.wall_phases) == self.PHASE_CAP:
            self.wall_phases.append(("truncated", 1))

    def to_dict(self) -> dict:
        return {
            "gm_loads": self.gm_loads,
            "gm_stores": self.gm_stores,
            "gm_halo_loads": self.gm_halo_loads,
            "gm_halo_stores": self.gm_halo_stores,
            "onchip_accesses": {
                "shared-level": float(self.onchip_shared),
                "register-level": float(self.onchip_register),
            },
            "syncs": {"block": self.syncs_block, "device": self.syncs_device},
            "cells_computed": self.cells_computed,
            "cells_valid": self.cells_valid,
            "device_tiles": self.device_tiles,
            "halo_transactions": self.halo_transactions,
            "wall_phases": [[tag, n] for tag, n in self.wall_phases],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def phases_csv(self) -> str:
        lines = ["phase,cells"]
        lines += [f"{tag},{n}" for tag, n in self.wall_phases]
        return "\n".join(lines) + "\n"


@dataclass
class AccountingReport:
    """Per-valid-cell quantities measured from a completed run."""

    a_gm_measured: float
    a_sm_measured: float
    valid_proportion_measured: float
    valid_proportion_model: float | None
    syncs_block: int
    syncs_device: int
    device_tiles: int

    def to_dict(self) -> dict:
        return {
            "a_gm_measured": self.a_gm_measured,
            "a_sm_measured": self.a_sm_measured,
            "valid_proportion_measured": self.valid_proportion_measured,
            "valid_proportion_model": self.valid_proportion_model,
            "syncs": {"block": self.syncs_block, "device": self.syncs_device},
            "device_tiles": self.device_tiles,
        }
