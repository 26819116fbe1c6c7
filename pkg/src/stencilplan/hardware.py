"""Device parameter sets and the hardware config file format."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HardwareSpec:
    """Bandwidths in bytes/s, throughput in flop/s, latencies in seconds.

    ``op_latencies`` is in cycles and ``op_throughputs`` in operations per
    cycle per multiprocessor; their product is the in-flight concurrency a
    single multiprocessor needs to keep the unit busy.
    """

    name: str
    gm_bandwidth: float
    sm_bandwidth: float
    compute_throughput: float
    cell_bytes: int
    onchip_capacity_per_block: int
    blocks: int
    device_sync_latency: float
    max_threads_per_sm: int
    op_latencies: dict
    op_throughputs: dict

    def __post_init__(self):
        numeric = {
            "gm_bandwidth": self.gm_bandwidth,
            "sm_bandwidth": self.sm_bandwidth,
            "compute_throughput": self.compute_throughput,
            "cell_bytes": self.cell_bytes,
            "onchip_capacity_per_block": self.onchip_capacity_per_block,
            "blocks": self.blocks,
            "device_sync_latency": self.device_sync_latency,
            "max_threads_per_sm": self.max_threads_per_sm,
        }
        for key, value in numeric.items():
            if not value > 0:
                raise ConfigError(f"{key} must be strictly positive, got {value}")

    def scaled(self, factor: float, scale_sync: bool = False) -> "HardwareSpec":
        """Common scaling of the rate parameters (scale-invariance checks)."""
        return HardwareSpec(
            name=f"{self.name}*{factor:g}",
            gm_bandwidth=self.gm_bandwidth * factor,
            sm_bandwidth=self.sm_bandwidth * factor,
            compute_throughput=self.compute_throughput * factor,
            cell_bytes=self.cell_bytes,
            onchip_capacity_per_block=self.onchip_capacity_per_block,
            blocks=self.blocks,
            device_sync_latency=(
                self.device_sync_latency / factor if scale_sync else self.device_sync_latency
            ),
            max_threads_per_sm=self.max_threads_per_sm,
            op_latencies=self.op_latencies,
            op_throughputs=self.op_throughputs,
        )


# Double-precision figures; latencies are microbenchmark-class values,
# throughputs per multiprocessor per cycle (memory ops in 8-byte accesses).
A100 = HardwareSpec(
    name="a100",
    gm_bandwidth=1555e9,
    sm_bandwidth=19.49e12,
    compute_throughput=9.7e12,
    cell_bytes=8,
    onchip_capacity_per_block=164 * 1024,
    blocks=108,
    device_sync_latency=1.2e-6,
    max_threads_per_sm=2048,
    op_latencies={"dfma": 4.0, "gm_access": 480.0, "sm_access": 22.0},
    op_throughputs={"dfma": 32.0, "gm_access": 1.28, "sm_access": 16.0},
)

PRESETS = {"a100": A100}

_FILE_KEYS = {
    "gm_bandwidth_bytes_per_s": "gm_bandwidth",
    "sm_bandwidth_bytes_per_s": "sm_bandwidth",
    "compute_flops_per_s": "compute_throughput",
    "cell_bytes": "cell_bytes",
    "onchip_capacity_bytes": "onchip_capacity_per_block",
    "sm_count": "blocks",
    "device_sync_latency_s": "device_sync_latency",
    "max_threads_per_sm": "max_threads_per_sm",
    "op_latencies": "op_latencies",
    "op_throughputs": "op_throughputs",
}


def load_hardware_file(path) -> HardwareSpec:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"hardware config not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid config: {exc}") from exc
    unknown = set(raw) - set(_FILE_KEYS) - {"name"}
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    missing = set(_FILE_KEYS) - set(raw)
    if missing:
        raise ConfigError(f"{path}: missing keys {sorted(missing)}")
    kwargs = {field: raw[key] for key, field in _FILE_KEYS.items()}
    return HardwareSpec(name=raw.get("name", path.stem), **kwargs)


def hardware_file_dict(spec: HardwareSpec) -> dict:
    out = {key: getattr(spec, field) for key, field in _FILE_KEYS.items()}
    out["name"] = spec.name
    return out


def get_hardware(name_or_path: str) -> HardwareSpec:
    """Resolve a bundled preset name or a config file path."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    return load_hardware_file(name_or_path)
