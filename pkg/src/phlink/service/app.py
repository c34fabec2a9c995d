"""HTTP service exposing the simulator.

Thin wrapper: endpoints translate JSON bodies into harness calls and
harness results back into JSON.  Artifacts are returned inline so the
service stays stateless and writes nothing to disk.

Status codes: 422 for configuration or input-validation failures, 500
for unexpected runtime failures inside a run.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..harness import (
    ConfigError,
    ExperimentConfig,
    build_config,
    detect_trace_csv,
    load_toml,
    run_experiment,
)
from .models import (
    Artifact,
    DetectRequest,
    DetectResponse,
    FrameModel,
    HealthResponse,
    SimulateRequest,
    SimulateResponse,
    ValidateRequest,
    ValidateResponse,
)

__all__ = ["create_app"]


def _parse_raw(config_toml: str) -> dict:
    try:
        return load_toml(config_toml)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail={"errors": exc.errors}) from None


def _build(raw: dict) -> ExperimentConfig:
    try:
        return build_config(raw)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail={"errors": exc.errors}) from None


def create_app() -> FastAPI:
    app = FastAPI(title="phlink", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/validate", response_model=ValidateResponse)
    def validate(req: ValidateRequest) -> ValidateResponse:
        try:
            build_config(load_toml(req.config_toml))
        except ConfigError as exc:
            return ValidateResponse(valid=False, errors=exc.errors)
        return ValidateResponse(valid=True)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        raw = _parse_raw(req.config_toml)
        if req.experiment is not None:
            raw.setdefault("experiment", {})["kind"] = req.experiment
        if req.seed is not None:
            raw.setdefault("experiment", {})["seed"] = req.seed
        cfg = _build(raw)
        try:
            result = run_experiment(cfg, threads=req.threads)
        except HTTPException:
            raise
        except Exception as exc:
            raise HTTPException(
                status_code=500, detail={"errors": [f"run failed: {exc}"]}
            ) from exc
        return SimulateResponse(
            run_id=result.run_id,
            kind=result.kind,
            seed=result.seed,
            summary=result.summary,
            artifacts=[
                Artifact(name=name, content=content)
                for name, content in sorted(result.artifacts.items())
            ],
        )

    @app.post("/detect", response_model=DetectResponse)
    def detect(req: DetectRequest) -> DetectResponse:
        raw = _parse_raw(req.config_toml)
        cfg = _build(raw)
        try:
            frames, thresholds, _ = detect_trace_csv(cfg, req.trace_csv)
        except ValueError as exc:
            raise HTTPException(
                status_code=422, detail={"errors": [str(exc)]}
            ) from None
        except Exception as exc:
            raise HTTPException(
                status_code=500, detail={"errors": [f"detection failed: {exc}"]}
            ) from exc
        symbols = [f.decided_symbol for f in frames]
        return DetectResponse(
            n_symbols=len(frames),
            thresholds_mv=thresholds,
            symbols=symbols,
            bits="".join(cfg.alphabet.bits_of(s) for s in symbols),
            frames=[
                FrameModel(
                    index=f.index,
                    t_start_s=f.t_start,
                    t_end_s=f.t_end,
                    peak_mv=f.peak_dv,
                    fwhm_s=None if math.isnan(f.fwhm) else f.fwhm,
                    symbol=f.decided_symbol,
                    bits=cfg.alphabet.bits_of(f.decided_symbol),
                )
                for f in frames
            ],
        )

    return app
