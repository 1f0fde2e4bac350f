"""Simulation and verification of the reduced dynamics of quantized vortices.

Each vortex ``j`` sits at ``x_j`` with winding ``m_j = +1`` or ``-1`` and moves by

    dx_j/dt = 2 m_j sum_{k != j} m_k (x_j - x_k) / |x_j - x_k|^2,

the negative gradient of ``W = -sum_{j != k} m_j m_k ln|x_j - x_k|``.
"""
from .core import (
    DegenerateConfigurationError,
    IntegralSet,
    SubsetWinding,
    VortexConfiguration,
    collective_winding,
    collision_upper_bound,
    integral_set,
    interaction_energy,
    min_pairwise_distance,
    pair_sum_m0,
    velocity_field,
    velocity_field_complex,
)
from .integrator import (
    CollisionEvent,
    TerminalEvent,
    Trajectory,
    classify_clusters,
    integrate,
    refine_collision_time,
)
from .stepper import StepControl

__version__ = "0.1.0"

__all__ = [
    "CollisionEvent",
    "DegenerateConfigurationError",
    "IntegralSet",
    "StepControl",
    "SubsetWinding",
    "TerminalEvent",
    "Trajectory",
    "VortexConfiguration",
    "classify_clusters",
    "collective_winding",
    "collision_upper_bound",
    "integral_set",
    "integrate",
    "interaction_energy",
    "min_pairwise_distance",
    "pair_sum_m0",
    "refine_collision_time",
    "velocity_field",
    "velocity_field_complex",
]
