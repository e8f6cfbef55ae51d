"""Scenario configs, Monte Carlo driver, cube files and the command line."""

from .config import EstimatorSpec, ScenarioConfig, load_config, parse_config
from .cubefile import read_cube, write_cube
from .runner import ScenarioResult, calibrate_xi, run_scenario, write_outputs
