"""Constructions built from the non-local primitive on two qutrits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .hilbert import (
    BUILD_TOL,
    Operator,
    StateVector,
    apply,
    expm_involution,
    tensor,
)
from .operators import named_gate, resolve_gate
from .protocol import ProtocolError, ResourceState, check_local_operator, run_protocol


@dataclass(frozen=True)
class NonlocalStep:
    xi: float
    ua: str
    ub: str

    def to_json(self) -> dict:
        return {"kind": "nonlocal", "xi": self.xi, "ua": self.ua, "ub": self.ub}


@dataclass(frozen=True)
class LocalStep:
    party: str
    gate: str

    def to_json(self) -> dict:
        return {"kind": "local", "party": self.party, "gate": self.gate}


Step = Union[NonlocalStep, LocalStep]
Recipe = tuple[Step, ...]

_PARTY_INDEX = {"A": 0, "B": 1}


def step_from_json(record: dict) -> Step:
    kind = record.get("kind")
    if kind == "nonlocal":
        return NonlocalStep(float(record["xi"]), record["ua"], record["ub"])
    if kind == "local":
        if record["party"] not in _PARTY_INDEX:
            raise ValueError(f"party must be A or B, got {record['party']!r}")
        return LocalStep(record["party"], record["gate"])
    raise ValueError(f"unknown step kind {kind!r}")


def recipe_to_json(recipe: Recipe) -> list[dict]:
    return [s.to_json() for s in recipe]


def recipe_from_json(records: Sequence[dict]) -> Recipe:
    return tuple(step_from_json(r) for r in records)


def ghz3_recipe() -> Recipe:
    """(|00> + |11> + |22>)/sqrt(3) from |00>, using the primitive twice."""
    return (
        NonlocalStep(math.asin(math.sqrt(2 / 3)), "ghz_step1_U", "ghz_step1_U"),
        NonlocalStep(math.pi / 4, "ghz_step2_UA", "ghz_step2_UB"),
        LocalStep("A", "ghz_final_phase"),
    )


def nonlocal_step_count(recipe: Recipe) -> int:
    return sum(isinstance(s, NonlocalStep) for s in recipe)


def validate_recipe(recipe: Recipe, dims: tuple[int, int]) -> None:
    for s in recipe:
        if isinstance(s, NonlocalStep):
            check_local_operator(resolve_gate(s.ua, dims[0]), s.ua)
            check_local_operator(resolve_gate(s.ub, dims[1]), s.ub)
        else:
            resolve_gate(s.gate, dims[_PARTY_INDEX[s.party]])


def execute_recipe(
    recipe: Recipe,
    psi: StateVector,
    engine: str = "ideal",
    resource: ResourceState | None = None,
    trace: bool = False,
    tol: float = BUILD_TOL,
) -> StateVector | list[StateVector]:
    """Run a recipe on a bipartite state.

    ``engine="ideal"`` applies exp(i xi U_A U_B) directly. ``engine="protocol"``
    simulates the LOCC protocol for each non-local step, requires every one
    of the eight outcome paths to realize the same gate up to phase, and
    applies the path with both outcomes trivial. With ``trace=True`` the
    state after every step is returned.
    """
    if len(psi.dims) != 2:
        raise ValueError(f"recipes act on two parties, got dims {psi.dims}")
    if engine not in ("ideal", "protocol"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "protocol" and resource is not None and not resource.is_maximal():
        raise ProtocolError("the protocol engine needs a maximally entangled channel")
    dims = psi.dims
    validate_recipe(recipe, dims)
    states = []
    for s in recipe:
        if isinstance(s, LocalStep):
            gate = resolve_gate(s.gate, dims[_PARTY_INDEX[s.party]])
            psi = apply(psi, gate, [_PARTY_INDEX[s.party]])
        else:
            ua, ub = resolve_gate(s.ua, dims[0]), resolve_gate(s.ub, dims[1])
            if engine == "ideal":
                op = expm_involution(s.xi, tensor([ua, ub]))
            else:
                transcripts = run_protocol(s.xi, ua, ub, resource=resource, tol=tol)
                if not all(t.verified for t in transcripts):
                    raise ProtocolError(f"protocol failed to realize step {s}")
                op = transcripts[0].realized_operator
            psi = apply(psi, op, [0, 1])
        states.append(psi)
    return states if trace else psi


def ghz3_target() -> StateVector:
    amps = np.zeros(9, dtype=complex)
    amps[[0, 4, 8]] = 1 / math.sqrt(3)
    return StateVector((3, 3), amps)


# sign of U_A(j) U_B(k) on |jk>, rows j, columns k
_FIRST_SIGNS = ((1, -1, 1), (1, -1, 1), (-1, 1, -1))
_SECOND_SIGNS = ((1, 1, -1), (1, 1, -1), (-1, -1, 1))


def _signed_phases(angle: float, signs) -> Operator:
    return Operator((3, 3), np.diag([np.exp(1j * angle * s) for row in signs for s in row]))


def u_prime(gamma: float) -> Operator:
    return _signed_phases(gamma, _FIRST_SIGNS)


def u_double_prime(delta: float) -> Operator:
    return _signed_phases(delta, _SECOND_SIGNS)


def build_phase_gate() -> Operator:
    """Two-qutrit phase gate exp(2 pi i jk / 3) from four uses of the primitive."""
    ss = tensor([named_gate("swap12"), named_gate("swap12")])
    pp = tensor([named_gate("P_A"), named_gate("P_B")])
    first = u_prime(math.pi / 3) @ ss @ u_prime(math.pi / 3)
    second = u_double_prime(math.pi / 6) @ ss @ u_double_prime(math.pi / 6)
    return pp @ second @ first


def fourier_on(party: str, inverse: bool = False) -> Operator:
    f = named_gate("fourier3")
    if inverse:
        f = f.dagger
    ident = Operator.identity(3)
    return tensor([f, ident] if party == "A" else [ident, f])


def build_xor() -> Operator:
    """|j>|k> -> |j>|j+k mod 3> as a Fourier conjugation of the phase gate.

    The Fourier pair sits on the target qutrit B: F^-1 P F. Conjugating on
    A instead yields |j-k mod 3>|k>.
    """
    return fourier_on("B", inverse=True) @ build_phase_gate() @ fourier_on("B")


def xor_truth_table_matches(op: Operator, tol: float = 1e-12) -> int:
    """Number of basis inputs |jk> mapped to exactly |j, j+k mod 3>."""
    hits = 0
    for j in range(3):
        for k in range(3):
            col = op.matrix[:, 3 * j + k]
            expected = np.zeros(9)
            expected[3 * j + (j + k) % 3] = 1
            hits += int(np.linalg.norm(col - expected) <= tol)
    return hits

