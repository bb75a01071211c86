"""Sudden expansion of hard-core bosons with a three-body interaction.

Three engines share one set of observables: free fermions (W = 0), exact
fixed-N Fock space for small chains, and number-conserving TEBD on matrix
product states.
"""

from .config import ScenarioConfig, load, loads
from .errors import (
    CapacityError,
    ConfigError,
    ConvergenceError,
    EngineDomainError,
    HcbError,
    IntegrityError,
    QuenchError,
)
from .model import ModelParams
from .observables import ObservableSeries, melt_time, radius
from .scenarios import resume, run_gs_quench, run_mi_expansion, run_scenario, run_sweep

__version__ = "0.1.0"
