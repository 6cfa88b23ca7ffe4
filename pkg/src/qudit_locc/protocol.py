"""Two-cbit LOCC protocol for exp(i xi U_A U_B) with a three-qubit channel.

Register layout of the full simulation is ``(a, b, b1, A, B)``: Alice holds
the ancilla ``a`` and target ``A``; Bob holds ancillas ``b``, ``b1`` and
target ``B``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hilbert import (
    ARITH_TOL,
    BUILD_TOL,
    Operator,
    OperatorError,
    StateVector,
    apply,
    basis_state,
    entropy,
    expm_involution,
    measure,
    partial_trace,
    tensor,
    to_json,
)

A_ANC, B_ANC, B1_ANC, A_SYS, B_SYS = range(5)

_SIGMA_Z = Operator((2,), np.diag([1, -1]))
_PLUS_MINUS = (
    StateVector((2,), np.array([1, 1]) / math.sqrt(2)),
    StateVector((2,), np.array([1, -1]) / math.sqrt(2)),
)

# branch -> (Alice applies U_A, Bob applies U_B)
CORRECTIONS = {1: (False, False), 2: (True, True), 3: (False, True), 4: (True, False)}


class ProtocolError(ValueError):
    """A protocol precondition does not hold."""


@dataclass(frozen=True)
class ResourceState:
    """Real nonnegative channel amplitudes on |000>, |001>, |110>, |111>."""

    lambdas: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        lams = tuple(float(x) for x in self.lambdas)
        if len(lams) != 4:
            raise ProtocolError(f"need four channel amplitudes, got {len(lams)}")
        if any(x < 0 for x in lams):
            raise ProtocolError(f"channel amplitudes must be nonnegative: {lams}")
        if abs(sum(x * x for x in lams) - 1.0) > ARITH_TOL:
            raise ProtocolError(f"channel amplitudes are not normalized: {lams}")
        object.__setattr__(self, "lambdas", lams)

    @classmethod
    def maximal(cls, h: float = 0.5) -> "ResourceState":
        """lambda0 = lambda3 = sqrt(h), lambda1 = lambda2 = sqrt(1/2 - h)."""
        if not 0 <= h <= 0.5:
            raise ProtocolError(f"maximal channel needs 0 <= h <= 1/2, got {h}")
        x, y = math.sqrt(h), math.sqrt(0.5 - h)
        return cls((x, y, y, x))

    @property
    def h(self) -> float:
        return self.lambdas[0] ** 2 + self.lambdas[1] ** 2

    def is_maximal(self, tol: float = ARITH_TOL) -> bool:
        l0, l1, l2, l3 = self.lambdas
        return abs(l0 - l3) <= tol and abs(l1 - l2) <= tol


def build_resource(lams: Sequence[float] | ResourceState) -> StateVector:
    r = lams if isinstance(lams, ResourceState) else ResourceState(tuple(lams))
    amps = np.zeros(8, dtype=complex)
    for label, lam in zip((0b000, 0b001, 0b110, 0b111), r.lambdas):
        amps[label] = lam
    return StateVector((2, 2, 2), amps)


def binary_entropy(h: float) -> float:
    return 0.0 - sum(p * math.log2(p) for p in (h, 1 - h) if p > 0)


def channel_entanglement(r: ResourceState) -> float:
    """Entanglement of ``a`` against ``(b, b1)`` in ebits."""
    return binary_entropy(r.h)


def channel_entanglement_by_reduction(r: ResourceState) -> float:
    return entropy(partial_trace(build_resource(r), [A_ANC]))


@dataclass(frozen=True)
class BellLikeBasis:
    alpha: float
    beta: float

    def vectors(self) -> tuple[StateVector, ...]:
        """B1..B4 on (b, b1)."""
        ca, sa = math.cos(self.alpha), math.sin(self.alpha)
        cb, sb = math.cos(self.beta), math.sin(self.beta)
        rows = (
            (ca, 0, 0, sa),
            (-sa, 0, 0, ca),
            (0, cb, sb, 0),
            (0, -sb, cb, 0),
        )
        return tuple(StateVector((2, 2), np.array(r, dtype=complex)) for r in rows)

    def probabilities(self, r: ResourceState) -> tuple[float, float, float, float]:
        """Closed-form outcome probabilities of the Bell-like round."""
        l0, l1, l2, l3 = r.lambdas
        ca2, sa2 = math.cos(self.alpha) ** 2, math.sin(self.alpha) ** 2
        cb2, sb2 = math.cos(self.beta) ** 2, math.sin(self.beta) ** 2
        return (
            l0**2 * ca2 + l3**2 * sa2,
            l0**2 * sa2 + l3**2 * ca2,
            l1**2 * cb2 + l2**2 * sb2,
            l1**2 * sb2 + l2**2 * cb2,
        )


def check_local_operator(u: Operator, name: str, tol: float = BUILD_TOL) -> None:
    if not (u.is_unitary(tol) and u.is_hermitian(tol)):
        raise OperatorError(
            f"{name} must be unitary and Hermitian "
            f"(unitarity defect {u.unitarity_defect():.3e}, "
            f"hermiticity defect {u.hermiticity_defect():.3e})"
        )


def _single(u: Operator) -> Operator:
    """View a party's operator as acting on one flat subsystem."""
    return u if len(u.dims) == 1 else Operator((u.dim,), u.matrix)


def _controlled(u: Operator, phase: complex = 1.0) -> Operator:
    """|0><0| (x) I + phase |1><1| (x) u on (control qubit, target)."""
    d = u.dim
    m = np.zeros((2 * d, 2 * d), dtype=complex)
    m[:d, :d] = np.eye(d)
    m[d:, d:] = phase * u.matrix
    return Operator((2,) + u.dims, m)


@dataclass(frozen=True, eq=False)
class Stator:
    """Ancilla basis label -> operator on the targets.

    Applied to a target state the stator gives sum_label |label> (x) op|psi>.
    """

    ancilla_dims: tuple[int, ...]
    terms: dict[str, Operator]

    def apply(self, psi: StateVector) -> StateVector:
        n_anc = math.prod(self.ancilla_dims)
        amps = np.zeros((n_anc, psi.size), dtype=complex)
        for label, op in self.terms.items():
            amps[int(label, 2)] += (op @ psi).amps
        return StateVector(self.ancilla_dims + psi.dims, amps.reshape(-1))

    def isometry_defect(self) -> float:
        ops = list(self.terms.values())
        gram = sum(op.dagger.matrix @ op.matrix for op in ops)
        return float(np.linalg.norm(gram - np.eye(ops[0].dim)))

    def project(self, bra: StateVector) -> Operator:
        """sum_label <bra|label> op for a bra on all ancillas."""
        coeffs = bra.amps.conj()
        ops = list(self.terms.items())
        acc = np.zeros_like(ops[0][1].matrix)
        for label, op in ops:
            acc = acc + coeffs[int(label, 2)] * op.matrix
        return Operator(ops[0][1].dims, acc)


def stator_after_control(r: ResourceState, ua: Operator, ub: Operator) -> Stator:
    l0, l1, l2, l3 = r.lambdas
    ia, ib = Operator.identity(ua.dims), Operator.identity(ub.dims)
    terms = {
        "000": l0 * tensor([ia, ib]),
        "001": l1 * tensor([ia, ub]),
        "110": 1j * l2 * tensor([ua, ib]),
        "111": 1j * l3 * tensor([ua, ub]),
    }
    return Stator((2, 2, 2), terms)


def stator_after_x_round(r: ResourceState, ua: Operator, ub: Operator) -> Stator:
    s1 = stator_after_control(r, ua, ub)
    return Stator((2, 2), {label[1:]: op for label, op in s1.terms.items()})


@dataclass(frozen=True)
class ClassicalMessage:
    sender: str
    bit: int
    purpose: str

    def to_json(self) -> dict:
        return {"sender": self.sender, "bit": self.bit, "purpose": self.purpose}


@dataclass(frozen=True)
class XRound:
    outcome: int
    probability: float
    message: ClassicalMessage
    state: StateVector | None
    corrections: tuple[str, ...]


@dataclass(frozen=True)
class BellRound:
    branch: int
    probability: float
    state: StateVector | None


def control_stage(psi: StateVector, ua: Operator, ub: Operator) -> StateVector:
    """Controlled-(i U_A) from ``a`` onto ``A`` and controlled-U_B from ``b1`` onto ``B``."""
    check_local_operator(ua, "U_A")
    check_local_operator(ub, "U_B")
    if psi.dims != (2, 2, 2, ua.dim, ub.dim):
        raise ProtocolError(f"expected register (a, b, b1, A, B) = (2, 2, 2, {ua.dim}, {ub.dim}), got {psi.dims}")
    psi = apply(psi, _controlled(_single(ua), 1j), [A_ANC, A_SYS])
    return apply(psi, _controlled(_single(ub)), [B1_ANC, B_SYS])


def alice_x_round(psi: StateVector) -> list[XRound]:
    """Alice measures sigma_x on ``a`` and sends one bit; Bob fixes ``b`` on -1.

    Returns both outcomes; the post-states live on ``(b, b1, A, B)``.
    """
    rounds = []
    for outcome in measure(psi, _PLUS_MINUS, [A_ANC]):
        sign = 1 if outcome.index == 0 else -1
        post = outcome.post
        corrections: tuple[str, ...] = ()
        if sign == -1 and post is not None:
            post = apply(post, _SIGMA_Z, [0])
            corrections = ("sigma_z(b)",)
        msg = ClassicalMessage("Alice", 0 if sign == 1 else 1, "x-outcome")
        rounds.append(XRound(sign, outcome.probability, msg, post, corrections))
    return rounds


def bob_bell_round(psi: StateVector, basis: BellLikeBasis) -> list[BellRound]:
    """Bob measures ``(b, b1)`` in the Bell-like basis; post-states on ``(A, B)``."""
    return [BellRound(o.index + 1, o.probability, o.post) for o in measure(psi, basis.vectors(), [0, 1])]


def correction_round(
    branch: int, psi: StateVector | None, ua: Operator, ub: Operator
) -> tuple[ClassicalMessage, StateVector | None, tuple[str, ...]]:
    """Bob tells Alice whether to apply U_A; each side applies its correction."""
    if branch not in CORRECTIONS:
        raise ProtocolError(f"Bell-like branch must be 1..4, got {branch}")
    alice_applies, bob_applies = CORRECTIONS[branch]
    msg = ClassicalMessage("Bob", int(alice_applies), "bell-outcome-needs-UA")
    applied = []
    if alice_applies:
        applied.append("U_A")
        if psi is not None:
            psi = apply(psi, ua, [0])
    if bob_applies:
        applied.append("U_B")
        if psi is not None:
            psi = apply(psi, ub, [1])
    return msg, psi, tuple(applied)


def branch_operator(branch: int, r: ResourceState, basis: BellLikeBasis, ua: Operator, ub: Operator) -> Operator | None:
    """Closed-form conditional operator of a Bell-like branch (None if P = 0)."""
    l0, l1, l2, l3 = r.lambdas
    probs = basis.probabilities(r)
    p = probs[branch - 1]
    if p < 1e-14:
        return None
    angle = basis.alpha if branch in (1, 2) else basis.beta
    first, second = {1: (l0, l3), 2: (l3, l0), 3: (l1, l2), 4: (l2, l1)}[branch]
    m = tensor([ua, ub])
    ident = Operator.identity(m.dims)
    return ((first * math.cos(angle)) * ident + (1j * second * math.sin(angle)) * m) * (1 / math.sqrt(p))


def nonlocal_gate(xi: float, ua: Operator, ub: Operator) -> Operator:
    """Target operator exp(i xi U_A (x) U_B)."""
    return expm_involution(xi, tensor([ua, ub]))


@dataclass
class ProtocolTranscript:
    x_outcome: int
    bell_branch: int
    probability: float
    bell_probability: float
    messages: list[ClassicalMessage]
    corrections: list[str]
    realized_operator: Operator | None
    # relates the realized operator to the closed-form branch operator
    global_phase: complex | None
    branch_defect: float | None = None
    # distance to exp(i xi U_A U_B) up to phase; None when not applicable
    target_defect: float | None = None
    verified: bool | None = None

    @property
    def cbits(self) -> int:
        return len(self.messages)

    def to_json(self) -> dict:
        phase = self.global_phase
        return {
            "x_outcome": self.x_outcome,
            "bell_branch": self.bell_branch,
            "probability": self.probability,
            "messages": [m.to_json() for m in self.messages],
            "corrections": list(self.corrections),
            "realized_operator": to_json(self.realized_operator) if self.realized_operator is not None else None,
            "global_phase": {"re": phase.real, "im": phase.imag} if phase is not None else None,
        }


def _phase_defect(a: Operator, b: Operator) -> tuple[float, complex]:
    """Minimum of ||a - c b|| over unit c, and the minimizer."""
    overlap = np.vdot(b.matrix, a.matrix)
    c = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a.matrix - c * b.matrix)), complex(c)


def _snap_phase(c: complex, tol: float = 1e-9) -> complex:
    for ref in (1, 1j, -1, -1j):
        if abs(c - ref) <= tol:
            return complex(ref)
    return c


def run_protocol(
    xi: float,
    ua: Operator,
    ub: Operator,
    resource: ResourceState | None = None,
    basis: BellLikeBasis | None = None,
    mode: str = "exhaustive",
    rng: np.random.Generator | None = None,
    tol: float = BUILD_TOL,
) -> list[ProtocolTranscript]:
    """Simulate the protocol on every computational basis input of ``A (x) B``.

    The realized operator of an outcome path is assembled column by column
    from the corrected output states. ``resource`` defaults to the maximal
    channel with all amplitudes 1/2 and ``basis`` to alpha = beta = xi;
    under those conditions each realized operator is checked against
    exp(i xi U_A U_B). Every defined path is also checked against its own
    closed-form branch operator.

    ``mode="sampled"`` draws one path with ``rng`` (required).
    """
    check_local_operator(ua, "U_A", tol)
    check_local_operator(ub, "U_B", tol)
    ua, ub = _single(ua), _single(ub)
    resource = resource or ResourceState((0.5, 0.5, 0.5, 0.5))
    basis = basis or BellLikeBasis(xi, xi)
    if mode not in ("exhaustive", "sampled"):
        raise ProtocolError(f"unknown mode {mode!r}")
    if mode == "sampled" and rng is None:
        raise ProtocolError("sampled mode needs an explicit random generator")

    deterministic = resource.is_maximal() and abs(basis.alpha - xi) <= ARITH_TOL and abs(basis.beta - xi) <= ARITH_TOL
    target = nonlocal_gate(xi, ua, ub) if deterministic else None
    channel = build_resource(resource)
    target_dims = ua.dims + ub.dims
    n = math.prod(target_dims)

    # paths[(x, k)] -> columns, probabilities, messages, corrections
    columns: dict[tuple[int, int], list] = {}
    meta: dict[tuple[int, int], tuple] = {}
    for j in range(n):
        psi = tensor([channel, basis_state(target_dims, j)])
        psi = control_stage(psi, ua, ub)
        for xr in alice_x_round(psi):
            bell = bob_bell_round(xr.state, basis) if xr.state is not None else [BellRound(k, 0.0, None) for k in range(1, 5)]
            for br in bell:
                msg, out, applied = correction_round(br.branch, br.state, ua, ub)
                key = (xr.outcome, br.branch)
                columns.setdefault(key, []).append(out)
                if key not in meta:
                    meta[key] = (
                        xr.probability,
                        br.probability,
                        [xr.message, msg],
                        list(xr.corrections) + list(applied),
                    )

    transcripts = []
    for key in sorted(columns, key=lambda k: (-k[0], k[1])):
        x_outcome, branch = key
        px, pk, messages, corrections = meta[key]
        cols = columns[key]
        realized = None
        if all(c is not None for c in cols):
            realized = Operator(target_dims, np.stack([c.amps for c in cols], axis=1))
        t = ProtocolTranscript(x_outcome, branch, px * pk, pk, messages, corrections, realized, None)
        if realized is not None:
            reference = branch_operator(branch, resource, basis, ua, ub)
            if reference is not None:
                t.branch_defect, phase = _phase_defect(realized, reference)
                t.global_phase = _snap_phase(phase)
            if target is not None:
                t.target_defect = _phase_defect(realized, target)[0]
            checks = [d for d in (t.branch_defect, t.target_defect) if d is not None]
            t.verified = all(d <= tol for d in checks)
        transcripts.append(t)

    if mode == "sampled":
        probs = np.array([t.probability for t in transcripts])
        pick = rng.choice(len(transcripts), p=probs / probs.sum())
        return [transcripts[pick]]
    return transcripts


def realized_agrees_with_stator(
    transcripts: Sequence[ProtocolTranscript],
    ua: Operator,
    ub: Operator,
    resource: ResourceState,
    basis: BellLikeBasis,
    tol: float = BUILD_TOL,
) -> bool:
    """Compare full-state realized operators with stator algebra, phase included."""
    s2 = stator_after_x_round(resource, ua, ub)
    probs = basis.probabilities(resource)
    for t in transcripts:
        if t.realized_operator is None:
            continue
        op = s2.project(basis.vectors()[t.bell_branch - 1])
        alice_applies, bob_applies = CORRECTIONS[t.bell_branch]
        fix = tensor([ua if alice_applies else Operator.identity(ua.dims), ub if bob_applies else Operator.identity(ub.dims)])
        expected = (fix @ op) * (1 / math.sqrt(probs[t.bell_branch - 1]))
        if t.realized_operator.distance(expected) > tol:
            return False
    return True


def multi_party_operator(xi: float, ops: Sequence[Operator], tol: float = BUILD_TOL) -> Operator:
    """exp(i xi U_1 (x) ... (x) U_N) for unitary Hermitian factors."""
    ops = list(ops)
    if len(ops) < 2:
        raise ProtocolError(f"need at least two parties, got {len(ops)}")
    for i, u in enumerate(ops):
        check_local_operator(u, f"U_{i + 1}", tol)
    return expm_involution(xi, tensor(ops), tol)


@dataclass(frozen=True)
class ResourceLedger:
    """Resources consumed by one application of the non-local gate.

    ``dit_bit_equivalent`` counts each classical d-ary symbol as log2(d) bits.
    """

    scheme: str
    parties: int
    dimension: int
    entangled_resources: int
    resource_kind: str
    ebits_across_cut: float | None
    cbit_pairs: int
    cbits: int
    dit_pairs: int
    dits: int
    dit_bit_equivalent: float
    classical_bit_total: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "classical_bit_total", self.cbits + self.dit_bit_equivalent)

    def to_record(self) -> dict:
        return {
            "scheme": self.scheme,
            "parties": self.parties,
            "dimension": self.dimension,
            "entangled_resources": self.entangled_resources,
            "resource_kind": self.resource_kind,
            "ebits_across_cut": self.ebits_across_cut,
            "cbit_pairs": self.cbit_pairs,
            "cbits": self.cbits,
            "dit_pairs": self.dit_pairs,
            "dits": self.dits,
            "dit_bit_equivalent": self.dit_bit_equivalent,
            "classical_bit_total": self.classical_bit_total,
        }


SCHEMES = ("ancilla-channel", "qudit-channel-reference")


def resource_report(n_parties: int, d: int, scheme: str = "ancilla-channel") -> ResourceLedger:
    if n_parties < 2:
        raise ValueError(f"need at least two parties, got {n_parties}")
    if d < 2:
        raise ValueError(f"need dimension >= 2, got {d}")
    if scheme == "ancilla-channel":
        kind = "3-qubit entangled state" if n_parties == 2 else f"{n_parties}-party multi-qubit entangled state"
        return ResourceLedger(
            scheme=scheme,
            parties=n_parties,
            dimension=d,
            entangled_resources=1,
            resource_kind=kind,
            ebits_across_cut=1.0 if n_parties == 2 else None,
            cbit_pairs=n_parties - 1,
            cbits=2 * (n_parties - 1),
            dit_pairs=0,
            dits=0,
            dit_bit_equivalent=0.0,
        )
    if scheme == "qudit-channel-reference":
        # one d-ary message per party, so two dits for a pair of parties
        return ResourceLedger(
            scheme=scheme,
            parties=n_parties,
            dimension=d,
            entangled_resources=n_parties,
            resource_kind=f"entangled qudit pair (d={d})",
            ebits_across_cut=None,
            cbit_pairs=0,
            cbits=0,
            dit_pairs=n_parties,
            dits=n_parties,
            dit_bit_equivalent=n_parties * math.log2(d),
        )
    raise ValueError(f"unknown scheme {scheme!r}; known: {', '.join(SCHEMES)}")


def audited_cbits(transcripts: Sequence[ProtocolTranscript]) -> set[int]:
    """Distinct message counts over the given transcripts (expected ``{2}``)."""
    return {t.cbits for t in transcripts}
