"""Non-local gates exp(i xi U_A U_B) between qudits by LOCC over a three-qubit channel."""
from __future__ import annotations

from .hilbert import Operator, StateVector, basis_state, tensor
from .operators import named_gate, u3_solve, ud_spin
from .protocol import BellLikeBasis, ResourceState, multi_party_operator, resource_report, run_protocol

__all__ = [
    "BellLikeBasis",
    "Operator",
    "ResourceState",
    "StateVector",
    "basis_state",
    "multi_party_operator",
    "named_gate",
    "resource_report",
    "run_protocol",
    "tensor",
    "u3_solve",
    "ud_spin",
]
