"""Experiment orchestration: build the scenario, run a variant, write results."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from ..channel import ArrayGeometry, channel_tensor
from ..geometry import SphereLayout, layout_feasible, pointing_vectors
from ..objectives import (CommEvaluator, SensingEvaluator, isotropic_covariance, min_power,
                          powers_from_channels)
from ..optimizers import (OptTrace, optimize_covariance, optimize_positions,
                          optimize_rotations)
from ..scenario import sample_drops
from .config import ExperimentConfig, build_config
from .layouts import fpa_layout, uniform_sphere_layout

LAYOUT_COLUMNS = ("array_id", "theta", "phi", "vartheta", "varphi", "x_m", "y_m", "z_m")
BEAMPATTERN_COLUMNS = ("theta", "phi", "power")
SWEEP_COLUMNS = ("key", "value", "seed", "variant", "objective", "runtime_s")


class PoseRecord(BaseModel):
    array_id: int
    theta: float
    phi: float
    vartheta: float
    varphi: float
    x_m: float
    y_m: float
    z_m: float


class ResultRecord(BaseModel):
    mode: str
    variant: str
    seed: int
    config_hash: str
    initial_layout: str
    objective: float
    objective_unit: str
    stages: dict[str, float]
    surrogate: float | None = None
    covariance_gap: float | None = None
    feasible: bool
    trace_records: int
    layout: list[PoseRecord]
    files: dict[str, str] = {}
    runtime_s: float

    def payload(self) -> dict:
        """Everything except the wall-clock runtime; identical for identical inputs."""
        return self.model_dump(exclude={"runtime_s"})


@dataclass
class RunArtifacts:
    """In-memory products of a run, for callers that post-process them."""

    record: ResultRecord
    layout: SphereLayout
    geometry: ArrayGeometry
    trace: OptTrace
    covariance: np.ndarray
    drops: list | None = None


# -- file helpers ------------------------------------------------------------


def write_atomic(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def layout_rows(layout: SphereLayout) -> list[PoseRecord]:
    centers = layout.radius_m * layout.centers_unit()
    return [PoseRecord(array_id=p.array_id, theta=p.placement.theta, phi=p.placement.phi,
                       vartheta=p.rotation.vartheta, varphi=p.rotation.varphi,
                       x_m=float(c[0]), y_m=float(c[1]), z_m=float(c[2]))
            for p, c in zip(layout.poses, centers)]


def layout_csv(layout: SphereLayout) -> str:
    return _csv_text(LAYOUT_COLUMNS, ([getattr(r, k) for k in LAYOUT_COLUMNS]
                                      for r in layout_rows(layout)))


# -- variants ------------------------------------------------------------------


def _centers_frames(layout: SphereLayout):
    return layout.radius_m * layout.centers_unit(), layout.frames()


def _run_comm(cfg: ExperimentConfig):
    obj_cfg = cfg.comm_objective()
    pattern = cfg.pattern.params()
    drops = sample_drops(cfg.comm.distribution(), cfg.comm.num_samples, cfg.seed)
    params = cfg.solver.params()
    trace = OptTrace()
    stages = {}

    if cfg.variant == "fpa":
        layout, geom = fpa_layout(cfg.bs.total_antennas, cfg.bs.radius_m, cfg.bs.wavelength_m,
                                  cfg.bs.d_min_m)
        ev = CommEvaluator(geom, drops, obj_cfg, pattern)
        stages["initial"] = ev(*_centers_frames(layout))
        trace.append("init", -1, stages["initial"], 0.0, float("nan"))
        return layout, geom, trace, stages, stages["initial"], drops, "fpa"

    geom = cfg.bs.geometry()
    ev = CommEvaluator(geom, drops, obj_cfg, pattern)
    layout = uniform_sphere_layout(cfg.bs.num_arrays, cfg.bs.radius_m, cfg.bs.d_min_m)
    stages["initial"] = ev(*_centers_frames(layout))
    if cfg.variant in ("pa", "full"):
        layout, trace = optimize_positions(layout, ev, params, trace)
        stages["positions"] = ev(*_centers_frames(layout))
    if cfg.variant in ("ra", "full"):
        layout, trace = optimize_rotations(layout, ev, params, trace)
        stages["rotations"] = ev(*_centers_frames(layout))
    final = ev(*_centers_frames(layout))
    return layout, geom, trace, stages, final, drops, "fibonacci"


def _run_sensing(cfg: ExperimentConfig):
    obj_cfg = cfg.sensing_objective()
    pattern = cfg.pattern.params()
    grid = cfg.sensing.grid()
    params = cfg.solver.params()
    trace = OptTrace()
    stages = {}
    extras = {}

    if cfg.variant == "fpa":
        layout, geom = fpa_layout(cfg.bs.total_antennas, cfg.bs.radius_m, cfg.bs.wavelength_m,
                                  cfg.bs.d_min_m)
        initial_layout = "fpa"
    else:
        geom = cfg.bs.geometry()
        layout = uniform_sphere_layout(cfg.bs.num_arrays, cfg.bs.radius_m, cfg.bs.d_min_m)
        initial_layout = "fibonacci"

    nb = layout.num_arrays * geom.antennas_per_array
    iso = isotropic_covariance(nb, obj_cfg.power_budget_w)

    def true_min(lay):
        return min_power(lay, geom, iso, grid, obj_cfg, pattern)

    stages["initial"] = true_min(layout)
    ev = SensingEvaluator(geom, grid, obj_cfg, layout.num_arrays, pattern,
                          power_ref_w=stages["initial"])
    if cfg.variant == "fpa":
        trace.append("init", -1, ev(*_centers_frames(layout)), 0.0, float("nan"))
    if cfg.variant in ("pa", "full", "full+cov"):
        layout, trace = optimize_positions(layout, ev, params, trace)
        stages["positions"] = true_min(layout)
    if cfg.variant in ("ra", "full", "full+cov"):
        layout, trace = optimize_rotations(layout, ev, params, trace)
        stages["rotations"] = true_min(layout)
    extras["surrogate"] = ev(*_centers_frames(layout))
    covariance = iso
    final = true_min(layout)
    if cfg.variant == "full+cov":
        res = optimize_covariance(layout, geom, grid, obj_cfg, pattern,
                                  cfg.sensing.sdp_gap_tol, cfg.sensing.sdp_max_iter)
        covariance = res.covariance
        stages["covariance"] = res.chi
        extras["covariance_gap"] = res.gap
        final = res.chi
    return layout, geom, trace, stages, final, covariance, extras, initial_layout


def execute(cfg: ExperimentConfig) -> RunArtifacts:
    """Run the configured variant in memory without writing anything."""
    t0 = time.perf_counter()
    drops = None
    extras: dict[str, Any] = {}
    if cfg.mode == "comm":
        layout, geom, trace, stages, final, drops, init_name = _run_comm(cfg)
        nb = layout.num_arrays * geom.antennas_per_array
        covariance = isotropic_covariance(nb, cfg.sensing.power_budget_w)
        unit = "bit/s/Hz"
    else:
        layout, geom, trace, stages, final, covariance, extras, init_name = _run_sensing(cfg)
        unit = "W"
    runtime = time.perf_counter() - t0
    record = ResultRecord(
        mode=cfg.mode, variant=cfg.variant, seed=cfg.seed, config_hash=cfg.config_hash(),
        initial_layout=init_name, objective=float(final), objective_unit=unit,
        stages={k: float(v) for k, v in stages.items()},
        surrogate=extras.get("surrogate"), covariance_gap=extras.get("covariance_gap"),
        feasible=layout_feasible(layout).ok if cfg.variant != "fpa" else True,
        trace_records=len(trace.records), layout=layout_rows(layout), runtime_s=runtime,
    )
    return RunArtifacts(record, layout, geom, trace, covariance, drops)


def write_outputs(cfg: ExperimentConfig, art: RunArtifacts, out_dir,
                  extra_files: dict[str, str] | None = None) -> ResultRecord:
    """Write trace, layout, drops and the JSON manifest into ``out_dir``."""
    out = Path(out_dir)
    files = {"trace": "trace.csv", "layout": "layout.csv", "manifest": "manifest.json",
             **(extra_files or {})}
    write_atomic(out / files["trace"], art.trace.to_csv())
    write_atomic(out / files["layout"], layout_csv(art.layout))
    if art.drops is not None:
        files["drops"] = "drops"
        for s, d in enumerate(art.drops):
            write_atomic(out / "drops" / f"drop_{s:04d}.csv", d.to_csv())
    record = art.record.model_copy(update={"files": files})
    manifest = {"result": record.model_dump(mode="json"),
                "config": json.loads(cfg.canonical_json())}
    write_atomic(out / files["manifest"], json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    art.record = record
    return record


def run_experiment(cfg: ExperimentConfig, out_dir=None, write: bool = True) -> ResultRecord:
    """Run one experiment and (by default) write its files to ``out_dir``.

    ``out_dir`` defaults to ``cfg.output_dir``.
    """
    art = execute(cfg)
    if write:
        return write_outputs(cfg, art, out_dir if out_dir is not None else cfg.output_dir)
    return art.record


# -- sweeps ------------------------------------------------------------------


def _sweep_job(args):
    data, key, value, seed, out_dir = args
    cfg = build_config(data, {key: value, "seed": seed})
    return key, value, seed, run_experiment(cfg, out_dir, write=out_dir is not None)


def sweep(cfg: ExperimentConfig, key: str, values, seeds=None, out_dir=None,
          workers: int = 1) -> list[tuple[Any, int, ResultRecord]]:
    """Run ``cfg`` for every value of the dotted config ``key`` and every seed.

    Independent runs go to a process pool when ``workers > 1``; each run
    writes into its own sub-directory, and ``sweep.csv`` summarises all runs.
    """
    seeds = [cfg.seed] if seeds is None else list(seeds)
    data = cfg.model_dump(mode="json")
    root = None if out_dir is None else Path(out_dir)
    jobs = []
    for v in values:
        build_config(data, {key: v})  # fail fast on bad values
        for s in seeds:
            sub = None if root is None else str(root / f"{key}={v}" / f"seed={s}")
            jobs.append((data, key, v, s, sub))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    out = [(v, s, rec) for _, v, s, rec in results]
    if root is not None:
        rows = [(key, v, s, rec.variant, rec.objective, rec.runtime_s) for v, s, rec in out]
        write_atomic(root / "sweep.csv", _csv_text(SWEEP_COLUMNS, rows))
    return out


# -- beampattern ----------------------------------------------------------------


def angular_grid(theta_step_deg: float, phi_step_deg: float):
    """Elevation in [-90, 90] and azimuth in [-180, 180) degrees, returned in radians."""
    theta = np.radians(np.arange(-90.0, 90.0 + 1e-9, theta_step_deg))
    phi = np.radians(np.arange(-180.0, 180.0 - 1e-9, phi_step_deg))
    return theta, phi


def emit_beampattern(layout: SphereLayout, geom: ArrayGeometry, R_d, theta, phi,
                     distance_m: float, cfg, pattern) -> np.ndarray:
    """Received power (W) on the ``theta x phi`` grid at a fixed distance, shape (T, P)."""
    th, ph = np.meshgrid(np.asarray(theta, float), np.asarray(phi, float), indexing="ij")
    dirs = pointing_vectors(th.ravel(), ph.ravel())
    gain = cfg.pathloss.gain(np.full(len(dirs), float(distance_m)))
    h = channel_tensor(layout.radius_m * layout.centers_unit(), layout.frames(), geom,
                       dirs, gain, pattern).reshape(len(dirs), -1)
    return powers_from_channels(h, R_d).reshape(th.shape)


def beampattern_csv(theta, phi, power) -> str:
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    rows = zip(th.ravel().tolist(), ph.ravel().tolist(), np.asarray(power).ravel().tolist())
    return _csv_text(BEAMPATTERN_COLUMNS, rows)


def run_beampattern(cfg: ExperimentConfig, out_dir=None) -> tuple[ResultRecord, np.ndarray]:
    """Run the experiment, then write the beampattern of its final layout.

    The covariance is the optimised one for ``full+cov`` and isotropic otherwise.
    """
    art = execute(cfg)
    theta, phi = angular_grid(cfg.beampattern.theta_step_deg, cfg.beampattern.phi_step_deg)
    power = emit_beampattern(art.layout, art.geometry, art.covariance, theta, phi,
                             cfg.beampattern.distance_m, cfg.sensing_objective(),
                             cfg.pattern.params())
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    write_atomic(out / "beampattern.csv", beampattern_csv(theta, phi, power))
    record = write_outputs(cfg, art, out, {"beampattern": "beampattern.csv"})
    return record, power


__all__ = [
    "BEAMPATTERN_COLUMNS", "LAYOUT_COLUMNS", "PoseRecord", "ResultRecord", "RunArtifacts",
    "angular_grid", "beampattern_csv", "emit_beampattern", "execute",
    "layout_csv", "run_beampattern", "run_experiment", "sweep", "write_atomic",
    "write_outputs",
]
