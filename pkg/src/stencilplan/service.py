"""HTTP service over the planner: plans, simulations, and parity checks."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import planner
from .hardware import ConfigError, PRESETS, get_hardware
from .shapes import BENCHMARK_NAMES, CatalogError, catalog_records, make_benchmark

app = FastAPI(title="stencilplan", version="0.1.0")


class PlanRequest(BaseModel):
    stencils: list[str] = Field(default_factory=lambda: list(BENCHMARK_NAMES))
    hardware: str = "a100"
    two_sided_halo: bool = True


class SimulateRequest(PlanRequest):
    domains: dict[str, list[int]] = Field(default_factory=dict)
    seed: int = 1
    workers: int = 1


class PlanResponse(BaseModel):
    hardware: str
    plans: list[dict]


class SimulateResponse(BaseModel):
    hardware: str
    ok: bool
    runs: list[dict]


class ValidateResponse(BaseModel):
    hardware: str
    reference: bool
    ok: bool
    rows: list[dict]


class CatalogResponse(BaseModel):
    benchmarks: list[dict]


def _suite(req: PlanRequest, **extra) -> planner.SuiteConfig:
    try:
        return planner.SuiteConfig(
            stencils=req.stencils,
            hardware=req.hardware,
            two_sided=req.two_sided_halo,
            **extra,
        )
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _hardware(name: str):
    try:
        return get_hardware(name)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "presets": sorted(PRESETS)}


@app.get("/catalog", response_model=CatalogResponse)
def catalog() -> dict:
    return {"benchmarks": catalog_records()}


@app.get("/catalog/{name}")
def catalog_entry(name: str) -> dict:
    try:
        shape = make_benchmark(name)
    except CatalogError as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc
    return {
        "name": shape.name,
        "dims": shape.dims,
        "radius": shape.radius,
        "taps": [[list(off), c] for off, c in shape.taps],
        "flops_per_cell": shape.flops_per_cell,
        "sm_accesses_no_rst": shape.sm_accesses_no_rst,
        "sm_accesses_with_rst": shape.sm_accesses_with_rst,
        "default_domain": list(shape.default_domain),
    }


@app.post("/plan", response_model=PlanResponse)
def plan(req: PlanRequest) -> dict:
    suite = _suite(req)
    return planner.cmd_plan(suite, _hardware(req.hardware))


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> dict:
    suite = _suite(
        req, domains=req.domains, seed=req.seed, workers=req.workers
    )
    return planner.cmd_simulate(suite, _hardware(req.hardware))


@app.post("/validate", response_model=ValidateResponse)
def validate(req: PlanRequest) -> dict:
    return planner.cmd_validate(_hardware(req.hardware))
