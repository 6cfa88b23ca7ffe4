"""Dense mixed-dimension state-vector algebra.

Subsystems are stored in declaration order and flattened row-major, so the
first listed subsystem is the most significant digit of the flat index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

ARITH_TOL = 1e-12
BUILD_TOL = 1e-10
# measurement branches below this probability have no post-state
DEGENERATE_PROB = 1e-14


class DimensionError(ValueError):
    """Raised when subsystem dimensions do not line up."""


class OperatorError(ValueError):
    """Raised when an operator fails a structural precondition."""


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class StateVector:
    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise DimensionError(f"subsystem dimensions must be positive: {dims}")
        amps = _frozen(np.ravel(self.amps))
        if amps.size != math.prod(dims):
            raise DimensionError(
                f"{amps.size} amplitudes do not match dims {dims} (need {math.prod(dims)})"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @property
    def size(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.dims, self.amps / n)

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        if self.dims != other.dims:
            raise DimensionError(f"dims differ: {self.dims} vs {other.dims}")
        return complex(np.vdot(self.amps, other.amps))

    def tensor_view(self) -> np.ndarray:
        return self.amps.reshape(self.dims) if self.dims else self.amps.reshape(())

    def __repr__(self) -> str:
        return f"StateVector(dims={self.dims}, amps={np.round(self.amps, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class Operator:
    """Square matrix acting on the product space of ``dims``."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise DimensionError(f"subsystem dimensions must be positive: {dims}")
        matrix = _frozen(self.matrix)
        n = math.prod(dims)
        if matrix.shape != (n, n):
            raise DimensionError(f"matrix shape {matrix.shape} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_matrix(cls, matrix, dims: Sequence[int] | None = None) -> "Operator":
        matrix = np.asarray(matrix, dtype=complex)
        return cls(tuple(dims) if dims is not None else (matrix.shape[0],), matrix)

    @classmethod
    def identity(cls, dims: Sequence[int] | int) -> "Operator":
        dims = (dims,) if isinstance(dims, int) else tuple(dims)
        return cls(dims, np.eye(math.prod(dims)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dagger(self) -> "Operator":
        return Operator(self.dims, self.matrix.conj().T)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            if other.dim != self.dim:
                raise DimensionError(f"cannot compose {self.dims} with {other.dims}")
            return Operator(self.dims, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            if other.size != self.dim:
                raise DimensionError(f"cannot apply {self.dims} to state of dims {other.dims}")
            return StateVector(other.dims, self.matrix @ other.amps)
        return NotImplemented

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.dims, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __add__(self, other: "Operator") -> "Operator":
        if other.dim != self.dim:
            raise DimensionError(f"cannot add {self.dims} and {other.dims}")
        return Operator(self.dims, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        return self + (-1) * other

    def distance(self, other: "Operator") -> float:
        return float(np.linalg.norm(self.matrix - other.matrix))

    def unitarity_defect(self) -> float:
        return float(np.linalg.norm(self.matrix.conj().T @ self.matrix - np.eye(self.dim)))

    def hermiticity_defect(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T))

    def involution_defect(self) -> float:
        return float(np.linalg.norm(self.matrix @ self.matrix - np.eye(self.dim)))

    def is_unitary(self, tol: float = BUILD_TOL) -> bool:
        return self.unitarity_defect() <= tol

    def is_hermitian(self, tol: float = BUILD_TOL) -> bool:
        return self.hermiticity_defect() <= tol

    def is_involution(self, tol: float = BUILD_TOL) -> bool:
        return self.involution_defect() <= tol

    def is_unitary_hermitian(self, tol: float = BUILD_TOL) -> bool:
        return self.is_unitary(tol) and self.is_hermitian(tol)

    def __repr__(self) -> str:
        return f"Operator(dims={self.dims}, matrix={np.round(self.matrix, 6).tolist()})"


Kind = Union[StateVector, Operator]


def basis_state(dims: Sequence[int] | int, digits: Sequence[int] | int) -> StateVector:
    """Computational basis ket; ``digits`` is one level per subsystem or a flat index."""
    dims = (dims,) if isinstance(dims, int) else tuple(dims)
    if isinstance(digits, (int, np.integer)):
        flat = int(digits)
    else:
        if len(digits) != len(dims):
            raise DimensionError(f"{len(digits)} digits for {len(dims)} subsystems")
        flat = int(np.ravel_multi_index(tuple(digits), dims)) if dims else 0
    amps = np.zeros(math.prod(dims), dtype=complex)
    amps[flat] = 1.0
    return StateVector(dims, amps)


def state(dims: Sequence[int] | int, amps) -> StateVector:
    dims = (dims,) if isinstance(dims, int) else tuple(dims)
    return StateVector(dims, np.asarray(amps, dtype=complex))


def check_selector(dims: Sequence[int], where: Iterable[int]) -> tuple[int, ...]:
    where = tuple(int(i) for i in where)
    if len(set(where)) != len(where):
        raise DimensionError(f"repeated subsystem in selector {where}")
    for i in where:
        if not 0 <= i < len(dims):
            raise DimensionError(f"subsystem {i} out of range for dims {tuple(dims)}")
    return where


def tensor(parts: Sequence[Kind]) -> Kind:
    """Kronecker product of states or of operators, in the given order."""
    parts = list(parts)
    if not parts:
        raise ValueError("tensor of an empty list")
    if all(isinstance(p, StateVector) for p in parts):
        amps = np.ones(1, dtype=complex)
        dims: tuple[int, ...] = ()
        for p in parts:
            amps = np.kron(amps, p.amps)
            dims += p.dims
        return StateVector(dims, amps)
    if all(isinstance(p, Operator) for p in parts):
        mat = np.ones((1, 1), dtype=complex)
        dims = ()
        for p in parts:
            mat = np.kron(mat, p.matrix)
            dims += p.dims
        return Operator(dims, mat)
    raise TypeError("tensor parts must be all StateVector or all Operator")


def _front(psi: StateVector, where: tuple[int, ...]) -> np.ndarray:
    """Selected subsystems moved to the leading axes, flattened to (sel, rest)."""
    t = psi.tensor_view()
    t = np.moveaxis(t, where, tuple(range(len(where))))
    sel = math.prod(psi.dims[i] for i in where)
    return t.reshape(sel, -1)


def apply(psi: StateVector, op: Operator, where: Sequence[int]) -> StateVector:
    """Apply ``op`` to the subsystems ``where`` (in that order), identity elsewhere."""
    where = check_selector(psi.dims, where)
    sel_dims = tuple(psi.dims[i] for i in where)
    if op.dim != math.prod(sel_dims):
        raise DimensionError(f"operator of dim {op.dim} applied to subsystems with dims {sel_dims}")
    front = op.matrix @ _front(psi, where)
    rest_dims = tuple(d for i, d in enumerate(psi.dims) if i not in where)
    t = front.reshape(sel_dims + rest_dims)
    t = np.moveaxis(t, tuple(range(len(where))), where)
    return StateVector(psi.dims, t.reshape(-1))


@dataclass(frozen=True)
class Outcome:
    index: int
    probability: float
    # None when the branch probability is below DEGENERATE_PROB
    post: StateVector | None


def _check_basis(basis: Sequence[StateVector], sel_dims: tuple[int, ...], tol: float) -> np.ndarray:
    n = math.prod(sel_dims)
    for b in basis:
        if b.dims != sel_dims:
            raise DimensionError(f"basis vector dims {b.dims} do not match selected {sel_dims}")
    if len(basis) != n:
        raise ValueError(f"incomplete basis: {len(basis)} vectors for a {n}-dimensional subspace")
    mat = np.stack([b.amps for b in basis], axis=1)
    gram_defect = np.linalg.norm(mat.conj().T @ mat - np.eye(n))
    if gram_defect > tol:
        raise ValueError(f"basis is not orthonormal (Gram defect {gram_defect:.3e})")
    return mat


def measure(
    psi: StateVector,
    basis: Sequence[StateVector],
    where: Sequence[int],
    tol: float = BUILD_TOL,
) -> list[Outcome]:
    """Projective measurement of ``where`` in ``basis``, all outcomes returned.

    Measured subsystems are removed from the post-states. Post-states are
    renormalized and keep the phase of the projection <b|psi>.
    """
    where = check_selector(psi.dims, where)
    sel_dims = tuple(psi.dims[i] for i in where)
    mat = _check_basis(basis, sel_dims, tol)
    rest_dims = tuple(d for i, d in enumerate(psi.dims) if i not in where)
    projected = mat.conj().T @ _front(psi, where)
    outcomes = []
    for k, row in enumerate(projected):
        p = float(np.vdot(row, row).real)
        post = StateVector(rest_dims, row / math.sqrt(p)) if p >= DEGENERATE_PROB else None
        outcomes.append(Outcome(k, p, post))
    return outcomes


def partial_trace(psi: StateVector, keep: Sequence[int]) -> Operator:
    """Reduced density matrix on ``keep`` (kept in the listed order)."""
    keep = check_selector(psi.dims, keep)
    m = _front(psi, keep)
    return Operator(tuple(psi.dims[i] for i in keep), m @ m.conj().T)


def entropy(rho: Operator, tol: float = BUILD_TOL) -> float:
    """Von Neumann entropy in bits."""
    if not rho.is_hermitian(tol):
        raise OperatorError("density matrix is not Hermitian")
    mu = np.linalg.eigvalsh(rho.matrix)
    if mu.min() < -tol:
        raise OperatorError(f"density matrix has negative eigenvalue {mu.min():.3e}")
    mu = mu[mu > 0]
    return float(max(0.0, -np.sum(mu * np.log2(mu))))


def expm_involution(xi: float, m: Operator, tol: float = BUILD_TOL) -> Operator:
    """exp(i xi m) = cos(xi) I + i sin(xi) m for a unitary Hermitian ``m``."""
    if not (m.is_hermitian(tol) and m.is_involution(tol)):
        raise OperatorError(
            "expm_involution needs a Hermitian involution "
            f"(hermiticity defect {m.hermiticity_defect():.3e}, "
            f"involution defect {m.involution_defect():.3e})"
        )
    return Operator(m.dims, math.cos(xi) * np.eye(m.dim) + 1j * math.sin(xi) * m.matrix)


def expm_hermitian(theta: float, h: Operator, tol: float = BUILD_TOL) -> Operator:
    """exp(i theta h) through the eigendecomposition of a Hermitian ``h``."""
    if not h.is_hermitian(tol):
        raise OperatorError("expm_hermitian needs a Hermitian operator")
    herm = (h.matrix + h.matrix.conj().T) / 2
    mu, v = np.linalg.eigh(herm)
    return Operator(h.dims, (v * np.exp(1j * theta * mu)) @ v.conj().T)


def equal_up_to_global_phase(a: Kind, b: Kind, tol: float = BUILD_TOL) -> tuple[bool, complex | None]:
    """Whether ``a == c * b`` for a unit complex ``c``; returns ``(ok, c)``.

    ``c`` is read off the largest-magnitude entry of ``b``; it is ``None``
    when the check fails.
    """
    if type(a) is not type(b):
        raise TypeError("operands must be the same kind")
    x = a.matrix if isinstance(a, Operator) else a.amps
    y = b.matrix if isinstance(b, Operator) else b.amps
    if x.shape != y.shape:
        raise DimensionError(f"shapes differ: {x.shape} vs {y.shape}")
    if not np.any(x) or not np.any(y):
        raise ValueError("global phase is undefined for zero operands")
    idx = np.unravel_index(np.argmax(np.abs(y)), y.shape)
    ratio = x[idx] / y[idx]
    if ratio == 0:
        return False, None
    c = complex(ratio / abs(ratio))
    if np.linalg.norm(x - c * y) <= tol:
        return True, c
    return False, None


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for normalized pure states."""
    return abs(a.inner(b)) ** 2


def to_json(obj: Kind) -> dict:
    """Row-major ``{"dims", "re", "im"}`` record shared by states and operators."""
    flat = obj.matrix.reshape(-1) if isinstance(obj, Operator) else obj.amps
    return {
        "dims": list(obj.dims),
        "re": [float(v) for v in flat.real],
        "im": [float(v) for v in flat.imag],
    }


def from_json(record: dict) -> Kind:
    """Inverse of :func:`to_json`; the kind is inferred from the entry count."""
    dims = tuple(int(d) for d in record["dims"])
    re, im = record["re"], record["im"]
    if len(re) != len(im):
        raise ValueError("re and im lengths differ")
    flat = np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
    n = math.prod(dims)
    if flat.size == n:
        return StateVector(dims, flat)
    if flat.size == n * n:
        return Operator(dims, flat.reshape(n, n))
    raise DimensionError(f"{flat.size} entries fit neither a state nor an operator on dims {dims}")
