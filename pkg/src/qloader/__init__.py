"""Circuits that load classical bit strings into quantum states, with an exact simulator."""

from .circuit import Circuit, CircuitBuilder, Gate, GateKind, Role, dumps, loads, validate
from .families import build, build_family1, build_family2, build_family3, target_state
from .simulator import StateVector, fidelity, purity_of_subset, run, unitary_of

__all__ = [
    "Circuit",
    "CircuitBuilder",
    "Gate",
    "GateKind",
    "Role",
    "StateVector",
    "build",
    "build_family1",
    "build_family2",
    "build_family3",
    "dumps",
    "fidelity",
    "loads",
    "purity_of_subset",
    "run",
    "target_state",
    "unitary_of",
    "validate",
]
