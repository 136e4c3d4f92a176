"""Trajectory generators used to cross-check certificates."""

from .des import (PRNG_ALGORITHM, ConfigError, DESConfig, DESTrajectory, Distribution, QRPolicy,
                  StaticPriority, count_slope, simulate_des)
from .fluid import FluidTrajectory, StepError, TieBreak, chattering_band, simulate_fluid
from .skorohod import NoReflectionError, SkorohodProblem, SkorohodTrajectory, simulate_skorohod
from .writers import des_csv, fluid_csv, skorohod_csv

__all__ = [
    "PRNG_ALGORITHM", "ConfigError", "DESConfig", "DESTrajectory", "Distribution", "QRPolicy",
    "StaticPriority", "count_slope", "simulate_des", "FluidTrajectory", "StepError", "TieBreak",
    "chattering_band", "simulate_fluid", "NoReflectionError", "SkorohodProblem",
    "SkorohodTrajectory", "simulate_skorohod", "des_csv", "fluid_csv", "skorohod_csv",
]
