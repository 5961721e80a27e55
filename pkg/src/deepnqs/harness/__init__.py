from ..seeding import derive_seed
from .config import Experiment, SweepConfig, load_config, parse_config_text
from .sweeps import (
    CorrelationRow,
    EnsembleResult,
    empirical_correlation,
    empirical_correlation_check,
    empirical_decay_length,
    run_energy_sweep,
    run_entanglement_sweep,
    run_meanfield_sweep,
    run_scaling_sweep,
    summarize,
)

__all__ = [
    "CorrelationRow",
    "EnsembleResult",
    "Experiment",
    "SweepConfig",
    "derive_seed",
    "empirical_correlation",
    "empirical_correlation_check",
    "empirical_decay_length",
    "load_config",
    "parse_config_text",
    "run_energy_sweep",
    "run_entanglement_sweep",
    "run_meanfield_sweep",
    "run_scaling_sweep",
    "summarize",
]
