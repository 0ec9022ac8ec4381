"""Exact and numeric tools for H-flux survival under T-duality on products
``Sigma_g x N x T^k``."""

from __future__ import annotations

from .cohomology import (
    Circle,
    Generic,
    MixedFluxClass,
    ProductSpec,
    StratumVerdict,
    Surface,
    Torus,
    decompose,
    irreducible_kernel,
    is_in_parallel_stratum,
    r_sharp,
)
from .config import ScenarioConfig, load_config, parse_config
from .errors import (
    ConfigInvalid,
    ExampleAssertionFailed,
    FluxError,
    HypothesisViolation,
    NumericFailure,
)
from .harness import run_example
from .report import Report, run_scenario

__version__ = "0.1.0"

__all__ = [
    "Circle",
    "ConfigInvalid",
    "ExampleAssertionFailed",
    "FluxError",
    "Generic",
    "HypothesisViolation",
    "MixedFluxClass",
    "NumericFailure",
    "ProductSpec",
    "Report",
    "ScenarioConfig",
    "StratumVerdict",
    "Surface",
    "Torus",
    "decompose",
    "irreducible_kernel",
    "is_in_parallel_stratum",
    "load_config",
    "parse_config",
    "r_sharp",
    "run_example",
    "run_scenario",
]
