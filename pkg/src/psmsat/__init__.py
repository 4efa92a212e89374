"""Saturation attempt rates and throughput of an 802.11 AP serving one
power-save-mode station: closed-form model, Monte-Carlo oracle and a
slot-level protocol simulator."""

__version__ = "0.1.0"

from .analysis import (
    AttemptRates,
    ModelBreakdownError,
    SolverOptions,
    ThroughputReport,
    saturation_throughput,
    solve_fixed_point,
)
from .backoff import BackoffSchedule, default_schedule
from .phy import PhyParams, frame_durations
from .simulator import SimConfig, derive_estimates, run_simulation

__all__ = [
    "AttemptRates", "BackoffSchedule", "ModelBreakdownError", "PhyParams", "SimConfig",
    "SolverOptions", "ThroughputReport", "default_schedule", "derive_estimates",
    "frame_durations", "run_simulation", "saturation_throughput", "solve_fixed_point",
]
