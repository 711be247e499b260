"""Entanglement dynamics of Grover search and pi/3 fixed-point search."""

__version__ = "0.1.0"

from .search import (  # noqa: E402
    EffectiveState,
    GroverAngle,
    SearchSpec,
    SolutionClass,
    grover_angle,
    grover_state,
    k_opt,
    pi3_oracle_calls,
    pi3_operators,
    pi3_state,
    success_probability,
)
