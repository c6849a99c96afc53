"""Potentials, initial states, propagators and closed-form reference solutions."""

from duality_lab.dynamics.potentials import PotentialSpec, StaticPotential
from duality_lab.dynamics.propagators import PropagationMethod, PropagatorConfig, hamiltonian_matrix, propagate
from duality_lab.dynamics.reference import ReferenceSpec, analytic_reference, reference_state
from duality_lab.dynamics.states import InitialStateSpec, build_initial_state

__all__ = [
    "InitialStateSpec",
    "PotentialSpec",
    "PropagationMethod",
    "PropagatorConfig",
    "ReferenceSpec",
    "StaticPotential",
    "analytic_reference",
    "build_initial_state",
    "hamiltonian_matrix",
    "propagate",
    "reference_state",
]
