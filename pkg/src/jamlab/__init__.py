"""Random sequential adsorption and annihilation: simulation and exact analytics."""

from .errors import CapacityError, DomainError, ModelError
from .lattice import ConfigType, Model, Region, blocks, builtin_model, conflict_graph, enumerate_configs, load_model
from .rng import RngSpec
from .sim import estimate_mean_duration, estimate_p, run_rsa, sweep
from .stats import StatSummary

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConfigType",
    "DomainError",
    "Model",
    "ModelError",
    "Region",
    "RngSpec",
    "StatSummary",
    "blocks",
    "builtin_model",
    "conflict_graph",
    "enumerate_configs",
    "estimate_mean_duration",
    "estimate_p",
    "load_model",
    "run_rsa",
    "sweep",
]
