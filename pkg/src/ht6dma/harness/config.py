"""Experiment configuration: YAML in, validated pydantic models out.

Keys carry their units (``radius_m``, ``power_w``, ``*_deg``).  Angles are
given in degrees in the file and converted to radians where the core package
needs them.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path
from typing import Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..channel import ArrayGeometry, PathLossParams, wavelength_for
from ..errors import ConfigError
from ..objectives import CommObjectiveCfg, SensingObjectiveCfg
from ..optimizers import SolverParams
from ..pattern import PatternParams
from ..scenario import (DEFAULT_AIRWAYS, DEFAULT_HOTSPOT_CENTERS, AirwaySegment, Hotspot,
                        UserDistribution, airway_grid, union_grid)

Vec3 = tuple[float, float, float]

FULL_SCALE = {"bs.num_arrays": 16, "comm.num_samples": 100, "comm.total_mean_users": 24.0}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BaseStationCfg(_Section):
    num_arrays: int = Field(8, ge=1)
    antennas_per_array: int = Field(4, ge=1)
    radius_m: float = Field(1.0, gt=0)
    d_min_m: float = Field(0.25, ge=0)
    carrier_hz: float = Field(2.4e9, gt=0)
    spacing_wavelengths: float = Field(0.5, gt=0)

    @property
    def wavelength_m(self) -> float:
        return wavelength_for(self.carrier_hz)

    @property
    def total_antennas(self) -> int:
        return self.num_arrays * self.antennas_per_array

    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry.upa(self.antennas_per_array, self.wavelength_m,
                                 self.spacing_wavelengths)


class PatternCfg(_Section):
    phi_3db_deg: float = Field(65.0, gt=0)
    theta_3db_deg: float = Field(65.0, gt=0)
    front_back_db: float = Field(30.0, gt=0)
    sidelobe_db: float = Field(30.0, gt=0)
    g_max_dbi: float = 8.0
    convention: Literal["boresight", "literal"] = "boresight"

    def params(self) -> PatternParams:
        return PatternParams.from_degrees(self.phi_3db_deg, self.theta_3db_deg,
                                          self.front_back_db, self.sidelobe_db,
                                          self.g_max_dbi, self.convention)


class PathLossCfg(_Section):
    # None selects the free-space reference (lambda / 4 pi)^2
    eps0: float | None = Field(None, gt=0)
    exponent_comm: float = Field(2.0, ge=1)
    exponent_sensing: float = Field(2.0, ge=1)

    def params(self, wavelength_m: float, exponent: float) -> PathLossParams:
        if self.eps0 is None:
            return PathLossParams.free_space(wavelength_m, exponent)
        return PathLossParams(self.eps0, exponent)


class HotspotCfg(_Section):
    center_m: Vec3
    radius_m: float = Field(15.0, gt=0)


class CommCfg(_Section):
    tx_power_w: float = Field(0.03, gt=0)
    noise_power_dbm: float = -50.0
    num_samples: int = Field(20, ge=1)
    total_mean_users: float = Field(12.0, ge=0)
    eta: float = Field(0.0, ge=0, le=1)
    annulus_inner_m: float = Field(50.0, ge=0)
    annulus_outer_m: float = Field(120.0, gt=0)
    hotspots: tuple[HotspotCfg, ...] = tuple(HotspotCfg(center_m=c) for c in DEFAULT_HOTSPOT_CENTERS)

    @property
    def noise_power_w(self) -> float:
        return 10.0 ** (self.noise_power_dbm / 10.0) * 1e-3

    def distribution(self) -> UserDistribution:
        n = len(self.hotspots)
        per = (1.0 - self.eta) * self.total_mean_users / n if n else 0.0
        background = self.total_mean_users if n == 0 else self.eta * self.total_mean_users
        spots = tuple(Hotspot(h.center_m, h.radius_m, per) for h in self.hotspots)
        try:
            return UserDistribution(self.annulus_inner_m, self.annulus_outer_m, spots, background)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


class AirwayCfg(_Section):
    start_m: Vec3
    end_m: Vec3


class SensingCfg(_Section):
    power_budget_w: float = Field(1.0, gt=0)
    beta: float = Field(50.0, gt=0)
    points_per_segment: int = Field(64, ge=2)
    include_endpoint: bool = False
    airways: tuple[AirwayCfg, ...] = tuple(AirwayCfg(start_m=a.start, end_m=a.end)
                                           for a in DEFAULT_AIRWAYS)
    sdp_gap_tol: float = Field(1e-6, gt=0)
    sdp_max_iter: int = Field(200, ge=1)

    def segments(self) -> list[AirwaySegment]:
        try:
            return [AirwaySegment(a.start_m, a.end_m) for a in self.airways]
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self):
        return union_grid(airway_grid(s, self.points_per_segment, self.include_endpoint)
                          for s in self.segments())


class SolverCfg(_Section):
    eps_th: float = Field(5e-4, gt=0)
    t_in_position: int = Field(50, ge=1)
    t_in_rotation: int = Field(50, ge=1)
    t_out_position: int = Field(2, ge=1)
    t_out_rotation: int = Field(2, ge=1)
    tau_init: float = Field(1.0, gt=0, le=1)
    backtrack_factor: float = Field(0.5, gt=0, lt=1)
    armijo_ell: float = Field(1e-4, gt=0, lt=1)
    trust_radius_deg: float = Field(float(np.degrees(0.2)), gt=0)
    fd_step: float = Field(1e-5, gt=0)
    max_backtracks: int = Field(30, ge=1)

    def params(self) -> SolverParams:
        return SolverParams(
            eps_th=self.eps_th, t_in_l=self.t_in_position, t_in_u=self.t_in_rotation,
            t_ou_l=self.t_out_position, t_ou_u=self.t_out_rotation, tau_init=self.tau_init,
            delta=self.backtrack_factor, ell=self.armijo_ell,
            trust_radius_rad=float(np.radians(self.trust_radius_deg)),
            fd_step=self.fd_step, max_backtracks=self.max_backtracks,
        )


class BeampatternCfg(_Section):
    theta_step_deg: float = Field(2.0, gt=0, le=90)
    phi_step_deg: float = Field(2.0, gt=0, le=180)
    distance_m: float = Field(50.0, gt=0)


class ExperimentConfig(_Section):
    mode: Literal["comm", "sensing"] = "comm"
    variant: Literal["fpa", "pa", "ra", "full", "full+cov"] = "full"
    seed: int = Field(0, ge=0, lt=2**64)
    output_dir: str = "results"
    bs: BaseStationCfg = BaseStationCfg()
    pattern: PatternCfg = PatternCfg()
    pathloss: PathLossCfg = PathLossCfg()
    comm: CommCfg = CommCfg()
    sensing: SensingCfg = SensingCfg()
    solver: SolverCfg = SolverCfg()
    beampattern: BeampatternCfg = BeampatternCfg()

    @model_validator(mode="after")
    def _check_variant(self):
        if self.variant == "full+cov" and self.mode != "sensing":
            raise ValueError("variant 'full+cov' is only valid in sensing mode")
        if self.variant == "fpa" and self.bs.total_antennas < 3:
            raise ValueError("the fpa variant needs at least 3 antennas in total")
        if self.comm.annulus_inner_m >= self.comm.annulus_outer_m:
            raise ValueError("comm.annulus_inner_m must be below comm.annulus_outer_m")
        return self

    # -- derived core objects ------------------------------------------------

    def comm_objective(self) -> CommObjectiveCfg:
        pl = self.pathloss.params(self.bs.wavelength_m, self.pathloss.exponent_comm)
        return CommObjectiveCfg(self.comm.tx_power_w, self.comm.noise_power_w,
                                self.comm.num_samples, pl)

    def sensing_objective(self) -> SensingObjectiveCfg:
        pl = self.pathloss.params(self.bs.wavelength_m, self.pathloss.exponent_sensing)
        return SensingObjectiveCfg(self.sensing.power_budget_w, self.sensing.beta, pl)

    def canonical_json(self) -> str:
        """Key-sorted JSON of every field except the output directory."""
        data = self.model_dump(mode="json", exclude={"output_dir"})
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def _set_dotted(data: dict, key: str, value: Any) -> None:
    parts = key.split(".")
    node = data
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set {key!r}: {p!r} is not a section")
    node[parts[-1]] = value


def build_config(data: dict | None = None, overrides: dict | None = None,
                 paper_scale: bool = False) -> ExperimentConfig:
    """Validate raw config data, applying paper-scale settings then overrides."""
    data = copy.deepcopy(data or {})
    if paper_scale:
        for k, v in FULL_SCALE.items():
            _set_dotted(data, k, v)
    for k, v in (overrides or {}).items():
        _set_dotted(data, k, v)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from exc


def _format_validation(exc: ValidationError) -> str:
    return "; ".join(f"{'.'.join(map(str, e['loc'])) or '<root>'}: {e['msg']}"
                     for e in exc.errors())


def load_config(path, overrides: dict | None = None, paper_scale: bool = False) -> ExperimentConfig:
    """Read a YAML config file.

    Raises:
        ConfigError: on unreadable files, bad YAML or invalid values.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at the top level")
    return build_config(data, overrides, paper_scale)
