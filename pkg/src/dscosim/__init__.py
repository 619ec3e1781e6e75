"""Distributed stochastic compositional optimization simulator."""

from .algorithms import (
    ab_dscsc_init,
    ab_dscsc_step,
    dscgd_init,
    dscgd_step,
    run,
    scgd_step,
    scsc_step,
)
from .schedules import ConstantSqrtK, Polynomial, StepSchedule
from .topology import (
    DirectedGraph,
    WeightPair,
    build_weight_pair,
    check_assumption2,
    contraction_factor,
    generate_ring_plus_random,
    underlying_metropolis,
)

__all__ = [
    "DirectedGraph",
    "WeightPair",
    "generate_ring_plus_random",
    "check_assumption2",
    "build_weight_pair",
    "contraction_factor",
    "underlying_metropolis",
    "StepSchedule",
    "Polynomial",
    "ConstantSqrtK",
    "ab_dscsc_init",
    "ab_dscsc_step",
    "scgd_step",
    "scsc_step",
    "dscgd_init",
    "dscgd_step",
    "run",
]

__version__ = "0.1.0"
