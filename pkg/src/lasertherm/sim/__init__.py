"""Simulation driver, configuration, presets and output files."""

from .config import ConfigError, SimulationConfig, config_from_dict, load_config
from .driver import PointProbe, RunResult, Simulation, compare, resample, rmse, run
from .io import ProbeSeries, read_probe_csv, read_snapshot, write_probe_csv
from .materials import PRESETS, material_from_water_content, preset

__all__ = [
    "ConfigError", "SimulationConfig", "config_from_dict", "load_config",
    "PointProbe", "RunResult", "Simulation", "compare", "resample", "rmse", "run",
    "ProbeSeries", "read_probe_csv", "read_snapshot", "write_probe_csv",
    "PRESETS", "material_from_water_content", "preset",
]
