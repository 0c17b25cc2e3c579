"""Request and response bodies of the HTTP service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from ..harness.experiment import ResultRecord


class ConfigRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    paper_scale: bool = False
    overrides: dict[str, Any] = Field(default_factory=dict)


class RunRequest(ConfigRequest):
    out_dir: str | None = None


class SweepRequest(RunRequest):
    key: str
    values: list[Any] = Field(min_length=1)
    seeds: list[int] | None = None
    workers: int = Field(1, ge=1)


class ValidateResponse(BaseModel):
    valid: bool
    config_hash: str
    config: dict[str, Any]


class SweepRun(BaseModel):
    value: Any
    seed: int
    result: ResultRecord


class SweepResponse(BaseModel):
    key: str
    runs: list[SweepRun]


class BeampatternResponse(BaseModel):
    result: ResultRecord
    theta: list[float]
    phi: list[float]
    power: list[list[float]]


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody
