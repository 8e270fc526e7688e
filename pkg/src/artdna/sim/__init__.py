from .config import (
    ConfigError,
    FailureEvent,
    FailureScript,
    Scenario,
    SimConfig,
    grid_cluster,
    load_scenario,
    scenario_from_dict,
)
from .engine import RunResult, Simulation, run, run_scenario
from .metrics import Metrics, metrics
from .trace import TraceCollector, TraceRecord, from_ndjson, read_trace, signals_csv, to_ndjson, write_trace

__all__ = [
    "ConfigError", "FailureEvent", "FailureScript", "Metrics", "RunResult", "Scenario", "SimConfig",
    "Simulation", "TraceCollector", "TraceRecord", "from_ndjson", "grid_cluster", "load_scenario",
    "metrics", "read_trace", "run", "run_scenario", "scenario_from_dict", "signals_csv", "to_ndjson", "write_trace",
]
