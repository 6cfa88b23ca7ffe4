"""Unitary-Hermitian local operators and the fixed qutrit gate library."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import least_squares

from .hilbert import BUILD_TOL, Operator

AxisLike = Union[str, Sequence[float]]

_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
PHASE_TOL = 1e-10


class SolverError(RuntimeError):
    """No valid U3 parameters were found within the restart budget."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.residual = residual


def axis_vector(axis: AxisLike) -> np.ndarray:
    if isinstance(axis, str):
        try:
            return np.array(_AXES[axis.lower()])
        except KeyError:
            raise ValueError(f"unknown spin axis {axis!r}; use x, y, z or a unit 3-vector") from None
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,):
        raise ValueError(f"spin axis must have 3 components, got {n.shape}")
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError(f"spin axis must be a unit vector (norm {np.linalg.norm(n):.15f})")
    return n


def spin_matrix(d: int, axis: AxisLike) -> Operator:
    """n.J for spin j = (d-1)/2; basis state |s> carries J_z eigenvalue s - j."""
    if d < 2:
        raise ValueError(f"spin matrices need d >= 2, got {d}")
    n = axis_vector(axis)
    j = (d - 1) / 2
    m = np.arange(d) - j
    jz = np.diag(m).astype(complex)
    jp = np.zeros((d, d), dtype=complex)
    for s in range(d - 1):
        jp[s + 1, s] = math.sqrt(j * (j + 1) - m[s] * (m[s] + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return Operator((d,), n[0] * jx + n[1] * jy + n[2] * jz)


def ud_spin(d: int, axis: AxisLike) -> Operator:
    """exp(i pi J_n), times i for even d, which is a Hermitian involution."""
    jn = spin_matrix(d, axis)
    mu, v = np.linalg.eigh(jn.matrix)
    # n.J has the same spectrum as J_z: half-integers, snapped exactly
    twice = np.rint(2 * mu).astype(int)
    phases = np.array([(1, 1j, -1, -1j)[k % 4] for k in twice])
    if d % 2 == 0:
        phases = 1j * phases
    return Operator((d,), (v * phases) @ v.conj().T)


@dataclass(frozen=True)
class U3Params:
    """Parameters of the general Hermitian qutrit matrix.

    Diagonal ``a``, off-diagonal moduli ``b`` for entries (0,1), (0,2), (1,2)
    and their phases ``phi``. ``branch`` is ``"plus"`` when
    phi1 = phi2 - phi3 and ``"minus"`` when phi1 = phi2 - phi3 + pi.
    """

    a: tuple[float, float, float]
    b: tuple[float, float, float]
    phi: tuple[float, float, float] = (0.0, 0.0, 0.0)
    branch: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        object.__setattr__(self, "phi", tuple(float(x) for x in self.phi))
        if self.branch is None:
            object.__setattr__(self, "branch", phase_branch(self.phi))

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "phi": list(self.phi), "branch": self.branch}


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def phase_branch(phases: Sequence[float], tol: float = PHASE_TOL) -> str | None:
    """Which phase condition holds, compared modulo 2 pi; None if neither."""
    p1, p2, p3 = phases
    diff = p1 - (p2 - p3)
    if abs(_wrap(diff)) <= tol:
        return "plus"
    if abs(_wrap(diff - math.pi)) <= tol:
        return "minus"
    return None


def u3_assemble(p: U3Params) -> Operator:
    a1, a2, a3 = p.a
    b1, b2, b3 = p.b
    e1, e2, e3 = (np.exp(1j * f) for f in p.phi)
    m = np.array(
        [
            [a1, b1 * e1, b2 * e2],
            [b1 * np.conj(e1), a2, b3 * e3],
            [b2 * np.conj(e2), b3 * np.conj(e3), a3],
        ],
        dtype=complex,
    )
    return Operator((3,), m)


def u3_is_valid(p: U3Params, tol: float = BUILD_TOL) -> bool:
    return u3_assemble(p).is_unitary_hermitian(tol)


def u3_constraints(p: U3Params, literal: bool = False) -> np.ndarray:
    """Real constraint residuals for the given phase branch.

    ``literal=True`` evaluates the five equations exactly as printed, where
    the last one couples b1*b2 to row/column 3. The default is the system
    that U^2 = I actually implies: three row norms and three orthogonality
    conditions.
    """
    branch = p.branch or phase_branch(p.phi)
    if branch is None:
        raise ValueError(f"phases {p.phi} satisfy neither phase condition")
    s = 1.0 if branch == "plus" else -1.0
    a1, a2, a3 = p.a
    b1, b2, b3 = p.b
    rows = [
        a1**2 + b1**2 + b2**2 - 1,
        a2**2 + b1**2 + b3**2 - 1,
        a3**2 + b2**2 + b3**2 - 1,
        (a1 + a2) * b1 + s * b2 * b3,
    ]
    if literal:
        rows.append((a1 + a3) * b2 + s * b1 * b2)
    else:
        rows += [(a1 + a3) * b2 + s * b1 * b3, (a2 + a3) * b3 + s * b1 * b2]
    return np.array(rows)


def printed_system_holds(p: U3Params, tol: float = BUILD_TOL) -> bool:
    return bool(np.linalg.norm(u3_constraints(p, literal=True)) <= tol)


def householder_u3(v: Sequence[float]) -> U3Params:
    """2 v v^T - I for a real unit vector ``v``."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    a = tuple(2 * v**2 - 1)
    b = (2 * v[0] * v[1], 2 * v[0] * v[2], 2 * v[1] * v[2])
    return U3Params(a, b, (0.0, 0.0, 0.0), "plus")


def _residual(x: np.ndarray, phases: tuple[float, float, float]) -> np.ndarray:
    u = u3_assemble(U3Params(x[:3], x[3:], phases)).matrix
    r = u.conj().T @ u - np.eye(3)
    iu = np.triu_indices(3, 1)
    return np.concatenate([np.diag(r).real, r[iu].real, r[iu].imag])


def _polish(x: np.ndarray, phases, iterations: int) -> np.ndarray:
    # a 2-point Jacobian costs 6 extra evaluations per LM iteration
    fit = least_squares(
        _residual, x, args=(phases,), method="lm",
        max_nfev=iterations * 7, xtol=1e-15, ftol=1e-15, gtol=1e-15,
    )
    return fit.x


def u3_solve(
    phases: Sequence[float],
    seed: int = 0,
    starts: int = 64,
    iterations: int = 200,
    tol: float = 1e-12,
    x0: Sequence[float] | None = None,
) -> U3Params:
    """One validated solution; ``x0`` = (a1, a2, a3, b1, b2, b3) is tried first."""
    sols = u3_solutions(phases, seed=seed, count=1, starts=starts, iterations=iterations, tol=tol, x0=x0)
    return sols[0]


def u3_solutions(
    phases: Sequence[float],
    seed: int = 0,
    count: int = 1,
    starts: int = 64,
    iterations: int = 200,
    tol: float = 1e-12,
    x0: Sequence[float] | None = None,
    distinct_tol: float = 1e-6,
) -> list[U3Params]:
    """Multi-start damped least squares on U^dagger U = I.

    Returns up to ``count`` solutions whose assembled matrices are pairwise
    more than ``distinct_tol`` apart in Frobenius norm. Each accepted point
    passes the unitary-Hermitian validator at 1e-10.
    """
    phases = tuple(float(f) for f in phases)
    branch = phase_branch(phases)
    if branch is None:
        raise ValueError(f"phases {phases} satisfy neither phase condition")
    rng = np.random.default_rng(seed)
    candidates = [np.asarray(x0, dtype=float)] if x0 is not None else []
    found: list[U3Params] = []
    best = math.inf
    for attempt in range(starts):
        start = candidates[attempt] if attempt < len(candidates) else rng.uniform(-1, 1, 6)
        x = _polish(start, phases, iterations)
        res = float(np.linalg.norm(_residual(x, phases)))
        best = min(best, res)
        if res > tol:
            continue
        p = U3Params(tuple(x[:3]), tuple(x[3:]), phases, branch)
        if not u3_is_valid(p):
            continue
        mat = u3_assemble(p)
        if all(mat.distance(u3_assemble(q)) > distinct_tol for q in found):
            found.append(p)
            if len(found) >= count:
                break
    if not found:
        raise SolverError(f"no unitary-Hermitian U3 found in {starts} starts", best)
    return found


_W = np.exp(2j * math.pi / 3)


def _fourier3() -> np.ndarray:
    # F|j> = sum_l w^{jl} |l> / sqrt(3): column j holds the image of |j>
    return np.array([[_W ** (j * l) for j in range(3)] for l in range(3)]) / math.sqrt(3)


def _xor3() -> np.ndarray:
    m = np.zeros((9, 9))
    for j in range(3):
        for k in range(3):
            m[3 * j + (j + k) % 3, 3 * j + k] = 1
    return m


def _phase3() -> np.ndarray:
    return np.diag([_W ** ((j * k) % 3) for j in range(3) for k in range(3)])


def _qutrit(*rows) -> np.ndarray:
    return np.array(rows, dtype=complex)


_SWAP12 = _qutrit([1, 0, 0], [0, 0, 1], [0, 1, 0])

_QUTRIT_GATES = {
    "fourier3": _fourier3,
    "swap12": lambda: _SWAP12,
    "P_A": lambda: np.diag([1, -1, -1]),
    "P_B": lambda: np.diag([-1, 1, 1]),
    "phase_first_UA": lambda: np.diag([1, 1, -1]),
    "phase_first_UB": lambda: np.diag([1, -1, 1]),
    "phase_second_UA": lambda: np.diag([1, 1, -1]),
    "phase_second_UB": lambda: np.diag([1, 1, -1]),
    "ghz_step1_U": lambda: _qutrit([0, 1, 0], [1, 0, 0], [0, 0, 1]),
    "ghz_step2_UA": lambda: _SWAP12,
    "ghz_step2_UB": lambda: _qutrit([1, 0, 0], [0, 0, 1j], [0, -1j, 0]),
    "ghz_final_phase": lambda: np.diag([np.exp(1j * math.pi / 4), 1, 1]),
}

_TWO_QUTRIT_GATES = {"xor3": _xor3, "phase3_AB": _phase3}

_QUBIT_GATES = {
    "sigma_x": ((0, 1), (1, 0)),
    "sigma_y": ((0, -1j), (1j, 0)),
    "sigma_z": ((1, 0), (0, -1)),
}

GATE_NAMES = tuple(_QUTRIT_GATES) + tuple(_TWO_QUTRIT_GATES) + tuple(_QUBIT_GATES) + ("identity",)


def named_gate(name: str, d: int = 3) -> Operator:
    """Fixed gate by name; ``d`` only matters for ``identity``."""
    if name in _QUTRIT_GATES:
        return Operator((3,), _QUTRIT_GATES[name]())
    if name in _TWO_QUTRIT_GATES:
        return Operator((3, 3), _TWO_QUTRIT_GATES[name]())
    if name in _QUBIT_GATES:
        return Operator((2,), np.array(_QUBIT_GATES[name], dtype=complex))
    if name == "identity":
        return Operator.identity(d)
    raise KeyError(f"unknown gate {name!r}; known: {', '.join(GATE_NAMES)}")


def resolve_gate(name: str, d: int) -> Operator:
    """Gate lookup that also understands ``ud_<axis>`` as ``ud_spin(d, axis)``."""
    if name.startswith("ud_"):
        return ud_spin(d, name[3:])
    gate = named_gate(name, d)
    if gate.dim != d:
        raise ValueError(f"gate {name!r} acts on dimension {gate.dim}, not {d}")
    return gate
