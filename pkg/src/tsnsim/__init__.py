"""Discrete-event simulator for TSN scheduled traffic with faulty-frame injection."""
from .config import config_from_dict, load_config
from .engine import Simulator, run
from .faults import FaultAction, FaultScenario, Injection
from .model import ConfigError, SimConfig
from .trace import TraceLog, all_latencies, latency_series, occupancy_series, save_trace
from .validator import check_feasibility, validate_config

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "FaultAction", "FaultScenario", "Injection", "SimConfig", "Simulator", "TraceLog",
    "all_latencies", "check_feasibility", "config_from_dict", "latency_series", "load_config",
    "occupancy_series", "run", "save_trace", "validate_config",
]
