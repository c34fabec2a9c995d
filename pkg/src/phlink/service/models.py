"""Request and response schemas for the HTTP service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ValidateRequest(BaseModel):
    """A configuration to check, as TOML text (empty string = defaults)."""

    config_toml: str = ""


class ValidateResponse(BaseModel):
    valid: bool
    errors: list[str] = Field(default_factory=list)


class SimulateRequest(BaseModel):
    """An experiment to run.

    ``experiment`` and ``seed`` override the corresponding configuration
    entries when given; ``threads`` parallelizes independent simulations
    within the run.
    """

    config_toml: str = ""
    experiment: str | None = None
    seed: int | None = Field(default=None, ge=0)
    threads: int = Field(default=1, ge=1, le=64)


class Artifact(BaseModel):
    name: str
    content: str


class SimulateResponse(BaseModel):
    run_id: str
    kind: str
    seed: int
    summary: dict[str, Any]
    artifacts: list[Artifact]


class DetectRequest(BaseModel):
    """A stored sensor trace to decode under a configuration."""

    trace_csv: str
    config_toml: str = ""


class FrameModel(BaseModel):
    index: int
    t_start_s: float
    t_end_s: float
    peak_mv: float
    fwhm_s: float | None
    symbol: int
    bits: str


class DetectResponse(BaseModel):
    n_symbols: int
    thresholds_mv: tuple[float, float, float]
    symbols: list[int]
    bits: str
    frames: list[FrameModel]
