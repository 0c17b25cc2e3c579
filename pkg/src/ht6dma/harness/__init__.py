from .config import ExperimentConfig, build_config, load_config
from .experiment import (BEAMPATTERN_COLUMNS, LAYOUT_COLUMNS, SWEEP_COLUMNS, ResultRecord,
                         angular_grid, emit_beampattern, execute, run_beampattern,
                         run_experiment, sweep)
from .layouts import fpa_layout, uniform_sphere_layout

__all__ = [
    "BEAMPATTERN_COLUMNS", "ExperimentConfig", "LAYOUT_COLUMNS", "ResultRecord",
    "SWEEP_COLUMNS", "angular_grid", "build_config", "emit_beampattern", "execute",
    "fpa_layout", "load_config", "run_beampattern", "run_experiment", "sweep",
    "uniform_sphere_layout",
]
