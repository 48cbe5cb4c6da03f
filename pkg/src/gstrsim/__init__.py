"""Discrete-event simulator for social-trust geographic routing in vehicular networks."""

from .config import ScenarioConfig, SweepSpec
from .engine import RunResult, run_scenario
from .metrics import RunRecord

__all__ = ["ScenarioConfig", "SweepSpec", "RunResult", "RunRecord", "run_scenario"]
__version__ = "0.1.0"
