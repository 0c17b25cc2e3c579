"""FastAPI application exposing the experiment harness."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ConfigError, HT6DMAError, Infeasible
from ..harness import build_config, run_beampattern, run_experiment, sweep
from ..harness.experiment import ResultRecord, angular_grid
from .schemas import (BeampatternResponse, ConfigRequest, ErrorResponse, RunRequest,
                      SweepRequest, SweepResponse, SweepRun, ValidateResponse)

app = FastAPI(title="ht6dma", version=__version__)

_CLIENT_ERRORS = (ConfigError, Infeasible)


def error_payload(exc: Exception) -> dict:
    code = getattr(exc, "code", "internal_error")
    return {"error": {"code": code, "message": str(exc)}}


@app.exception_handler(HT6DMAError)
async def _domain_error(request: Request, exc: HT6DMAError):
    status = 422 if isinstance(exc, _CLIENT_ERRORS) else 500
    return JSONResponse(error_payload(exc), status_code=status)


@app.exception_handler(RequestValidationError)
async def _bad_request(request: Request, exc: RequestValidationError):
    msg = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors())
    return JSONResponse({"error": {"code": "bad_request", "message": msg}}, status_code=422)


def _config(req: ConfigRequest):
    return build_config(req.config, req.overrides, req.paper_scale)


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/validate-config", response_model=ValidateResponse,
          responses={422: {"model": ErrorResponse}})
def validate_config(req: ConfigRequest):
    cfg = _config(req)
    return ValidateResponse(valid=True, config_hash=cfg.config_hash(),
                            config=cfg.model_dump(mode="json"))


@app.post("/run", response_model=ResultRecord, responses={422: {"model": ErrorResponse}})
def run(req: RunRequest):
    cfg = _config(req)
    return run_experiment(cfg, req.out_dir, write=req.out_dir is not None)


@app.post("/sweep", response_model=SweepResponse, responses={422: {"model": ErrorResponse}})
def run_sweep(req: SweepRequest):
    cfg = _config(req)
    runs = sweep(cfg, req.key, req.values, req.seeds, req.out_dir, req.workers)
    return SweepResponse(key=req.key, runs=[SweepRun(value=v, seed=s, result=r)
                                            for v, s, r in runs])


@app.post("/beampattern", response_model=BeampatternResponse,
          responses={422: {"model": ErrorResponse}})
def beampattern(req: RunRequest):
    cfg = _config(req)
    out = req.out_dir if req.out_dir is not None else cfg.output_dir
    record, power = run_beampattern(cfg, out)
    theta, phi = angular_grid(cfg.beampattern.theta_step_deg, cfg.beampattern.phi_step_deg)
    return BeampatternResponse(result=record, theta=theta.tolist(), phi=phi.tolist(),
                               power=power.tolist())
