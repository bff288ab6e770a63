"""Precision limits for estimating the damping rate and bath temperature of a lossy bosonic channel."""

from .bounds import (
    Divergent,
    damping_bound_finite_T,
    damping_bound_zero_T,
    damping_sensitivity,
    optimal_interaction_time,
    temperature_bound,
    vacuum_temperature_uncertainty,
)
from .channel import evolve, ode_evolve
from .fisher import FisherResult, NonIdentifiableError, counting_fisher, state_fisher
from .fockspace import ChannelParams, InputState, NumberDistribution, Parameter
from .report import BoundReport, Settings, SweepSpec, point_report, run_sweep
from .sequential import (
    SequentialSpec,
    sequential_damping_uncertainty,
    sequential_temperature_limit,
    sequential_temperature_uncertainty,
)

__all__ = [
    "BoundReport",
    "ChannelParams",
    "Divergent",
    "FisherResult",
    "InputState",
    "NonIdentifiableError",
    "NumberDistribution",
    "Parameter",
    "SequentialSpec",
    "Settings",
    "SweepSpec",
    "counting_fisher",
    "damping_bound_finite_T",
    "damping_bound_zero_T",
    "damping_sensitivity",
    "evolve",
    "ode_evolve",
    "optimal_interaction_time",
    "point_report",
    "run_sweep",
    "sequential_damping_uncertainty",
    "sequential_temperature_limit",
    "sequential_temperature_uncertainty",
    "state_fisher",
    "temperature_bound",
    "vacuum_temperature_uncertainty",
]
