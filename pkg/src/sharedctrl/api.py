"""Stateless HTTP JSON service over the same computation core as the CLI.

Analytic endpoints are synchronous; Monte Carlo requests above the async
cutoff return 202 with a poll token served at /v1/jobs/{id}.  Requests
failing schema validation get 400 with the offending field path; requests
that are well-formed but infeasible (bad thresholds, impossible design) get
422; solver breakdowns get 500.

No auth: this is a local research tool.  CORS is enabled for the configured
UI origin only.
"""

from __future__ import annotations

import argparse
import json
import threading
import time
import uuid
from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .cli import (
    cmd_compare,
    cmd_error_profile,
    cmd_mc_validate,
    cmd_power,
    cmd_thresholds,
    _DEFAULTS,
)
from .thresholds import SolverFailure

ASYNC_REPS_CUTOFF = 1_000_000


class DesignModel(BaseModel):
    n0: int
    n1: int
    n0p: int
    n1p: int


class ThresholdsModel(BaseModel):
    alpha: float
    beta: float
    gamma: float


class ScenarioModel(BaseModel):
    odds_ratio: float = 1.3
    maf: float = 0.1
    kappa0: float = 0.0
    kappa1: float = 0.0


class GridModel(BaseModel):
    grid_points: int = 25
    log_or_min: float = -1.0
    log_or_max: float = 1.0


class ThresholdsRequest(BaseModel):
    design: DesignModel
    thresholds: ThresholdsModel


class PowerCurveRequest(BaseModel):
    design: DesignModel
    thresholds: ThresholdsModel
    scenario: ScenarioModel = ScenarioModel()
    grid: GridModel = GridModel()


class ErrorProfileRequest(BaseModel):
    design: DesignModel
    thresholds: ThresholdsModel
    cohorts: list[Literal["C0", "C1", "C0p", "C1p"]] = Field(default_factory=lambda: ["C1"])
    base_maf: float = 0.1
    grid: GridModel = GridModel(log_or_min=-3.0, log_or_max=3.0)


class CompareRequest(BaseModel):
    design: DesignModel  # n0p/n1p are the candidate shared-control split
    thresholds: ThresholdsModel
    scenario: ScenarioModel = ScenarioModel()
    new_samples: Optional[int] = None


class McValidateRequest(BaseModel):
    design: DesignModel
    thresholds: ThresholdsModel
    scenario: ScenarioModel = ScenarioModel()
    reps: int = 100_000
    seed: int  # explicit, so determinism is claimable


def _params(design: DesignModel, thresholds: ThresholdsModel,
            scenario: Optional[ScenarioModel] = None,
            grid: Optional[GridModel] = None, **extra) -> dict:
    p = dict(_DEFAULTS)
    p.update(design.model_dump())
    p.update(thresholds.model_dump())
    if scenario is not None:
        p.update(scenario.model_dump())
    if grid is not None:
        p.update(grid.model_dump())
    p.update(extra)
    return p


class JobTable:
    """In-memory registry for async MC jobs; all access lock-guarded."""

    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, dict] = {}

    def submit(self, fn) -> str:
        job_id = uuid.uuid4().hex
        with self._lock:
            self._jobs[job_id] = {"status": "running", "result": None, "error": None}

        def run():
            try:
                result = fn()
                with self._lock:
                    self._jobs[job_id].update(status="done", result=result)
            except Exception as e:  # captured for the poller
                with self._lock:
                    self._jobs[job_id].update(status="failed", error=str(e))

        threading.Thread(target=run, daemon=True).start()
        return job_id

    def get(self, job_id: str) -> Optional[dict]:
        with self._lock:
            job = self._jobs.get(job_id)
            return dict(job) if job is not None else None


def _grid_doc(header, rows, meta) -> dict:
    return {**meta, "columns": header, "grid": [dict(zip(header, r)) for r in rows]}


def create_app(config: Optional[dict] = None) -> FastAPI:
    config = config or {}
    app = FastAPI(title="sharedctrl", version=__version__)
    origin = config.get("cors_origin")
    if origin:
        app.add_middleware(
            CORSMiddleware, allow_origins=[origin],
            allow_methods=["*"], allow_headers=["*"],
        )
    jobs = JobTable()

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        details = [
            {
                "field": ".".join(str(p) for p in err["loc"]),
                "message": err["msg"],
            }
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": details})

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(SolverFailure)
    async def solver_handler(request: Request, exc: SolverFailure):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    def wrap(result: dict, started: float, warnings: Optional[list[str]] = None) -> dict:
        return {
            "engine_version": __version__,
            "elapsed_ms": (time.monotonic() - started) * 1000.0,
            "warnings": warnings or [],
            "result": result,
        }

    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/thresholds")
    def thresholds_endpoint(req: ThresholdsRequest):
        started = time.monotonic()
        return wrap(cmd_thresholds(_params(req.design, req.thresholds)), started)

    @app.post("/v1/power-curve")
    def power_endpoint(req: PowerCurveRequest):
        started = time.monotonic()
        header, rows, meta = cmd_power(_params(req.design, req.thresholds,
                                                req.scenario, req.grid))
        return wrap(_grid_doc(header, rows, meta), started)

    @app.post("/v1/error-profile")
    def error_profile_endpoint(req: ErrorProfileRequest):
        started = time.monotonic()
        p = _params(req.design, req.thresholds, grid=req.grid, maf=req.base_maf)
        header, rows, meta = cmd_error_profile(p, list(req.cohorts))
        return wrap(_grid_doc(header, rows, meta), started)

    @app.post("/v1/compare")
    def compare_endpoint(req: CompareRequest):
        started = time.monotonic()
        p = _params(req.design, req.thresholds, req.scenario,
                    new_samples=req.new_samples)
        return wrap(cmd_compare(p), started)

    @app.post("/v1/mc-validate")
    def mc_validate_endpoint(req: McValidateRequest):
        started = time.monotonic()
        p = _params(req.design, req.thresholds, req.scenario,
                    reps=req.reps, seed=req.seed)
        warnings = ["low replicate count"] if req.reps < 10_000 else []
        if req.reps > ASYNC_REPS_CUTOFF:
            job_id = jobs.submit(lambda: cmd_mc_validate(p)[0])
            return JSONResponse(
                status_code=202,
                content={
                    "engine_version": __version__,
                    "job_id": job_id,
                    "status_url": f"/v1/jobs/{job_id}",
                },
            )
        report, _ = cmd_mc_validate(p)
        return wrap(report, started, warnings)

    @app.get("/v1/jobs/{job_id}")
    def job_endpoint(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"detail": "unknown job"})
        body = {"status": job["status"]}
        if job["status"] == "done":
            body["result"] = job["result"]
        if job["status"] == "failed":
            body["detail"] = job["error"]
        return body

    return app


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sharedctrl-api")
    parser.add_argument("--config", type=str, default=None,
                        help="JSON config: {port, threads, cors_origin}")
    args = parser.parse_args(argv)
    config = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
    import os

    if config.get("threads"):
        os.environ.setdefault("SHARED_CTRL_THREADS", str(config["threads"]))
    import uvicorn

    uvicorn.run(create_app(config), host=config.get("host", "127.0.0.1"),
                port=int(config.get("port", 8710)))
    return 0


if __name__ == "__main__":
    import sys

    sys.exit(main())
