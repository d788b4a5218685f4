"""Proactive relaying on top of CSMA with genie channel knowledge."""
from .config import ScenarioConfig, load_config, parse_config
from .engine import Simulation, simulate

__all__ = ["ScenarioConfig", "load_config", "parse_config", "Simulation", "simulate"]
__version__ = "0.1.0"
