"""Slow-fast simulator contrasting gradient-only and curl-augmented plasticity."""

from .config import ConfigError, RunConfig
from .coupled import CoupledSystem, RunResult, SwitchEvent, detect_switches, run_scenario
from .fast_layer import FhnParams, Regime, bifurcation_scan, classify_regime, fhn_rhs
from .integrator import IntegrationError, integrate, rk4_step

__all__ = [
    "ConfigError", "CoupledSystem", "FhnParams", "IntegrationError", "Regime",
    "RunConfig", "RunResult", "SwitchEvent", "bifurcation_scan", "classify_regime",
    "detect_switches", "fhn_rhs", "integrate", "rk4_step", "run_scenario",
]
__version__ = "0.1.0"
