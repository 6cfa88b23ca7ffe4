"""Self-check suites shared by the ``verify`` command."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .applications import (
    build_phase_gate,
    build_xor,
    execute_recipe,
    ghz3_recipe,
    ghz3_target,
    nonlocal_step_count,
    xor_truth_table_matches,
)
from .hilbert import (
    Operator,
    basis_state,
    entropy,
    fidelity,
    partial_trace,
)
from .operators import householder_u3, named_gate, u3_assemble, u3_solutions, ud_spin
from .protocol import (
    BellLikeBasis,
    ResourceState,
    audited_cbits,
    realized_agrees_with_stator,
    run_protocol,
)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    # "<=" for defects, ">=" for counts and fidelities
    relation: str = "<="

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "relation": self.relation,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def at_most(name: str, value: float, threshold: float) -> Check:
    return Check(name, float(value), threshold, bool(value <= threshold), "<=")


def at_least(name: str, value: float, threshold: float) -> Check:
    return Check(name, float(value), threshold, bool(value >= threshold), ">=")


def random_axis(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_u3_phases(rng: np.random.Generator) -> tuple[float, float, float]:
    p2, p3 = rng.uniform(0, 2 * math.pi, 2)
    shift = math.pi if rng.random() < 0.5 else 0.0
    return (p2 - p3 + shift, p2, p3)


def random_local_operator(d: int, rng: np.random.Generator) -> Operator:
    """A unitary Hermitian operator: a spin exponential, or a solved U3 for d = 3."""
    if d == 3 and rng.random() < 0.5:
        phases = random_u3_phases(rng)
        p = u3_solutions(phases, seed=int(rng.integers(2**31)), count=1)[0]
        return u3_assemble(p)
    return ud_spin(d, random_axis(rng))


def suite_nonlocal(cases: int = 20, seed: int = 0, tol: float = 1e-10) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst_target = worst_prob = 0.0
    counts: set[int] = set()
    stator_ok = True
    for _ in range(cases):
        da, db = (int(x) for x in rng.choice([2, 3, 4], size=2))
        ua, ub = random_local_operator(da, rng), random_local_operator(db, rng)
        xi = float(rng.uniform(0, 2 * math.pi))
        ts = run_protocol(xi, ua, ub, tol=tol)
        worst_target = max([worst_target] + [t.target_defect for t in ts])
        worst_prob = max(worst_prob, abs(sum(t.probability for t in ts) - 1))
        counts |= audited_cbits(ts)
        stator_ok &= realized_agrees_with_stator(ts, ua, ub, ResourceState((0.5,) * 4), BellLikeBasis(xi, xi))
    return [
        at_most("max defect to exp(i xi U_A U_B) over all paths", worst_target, tol),
        at_most("probability sum deviation", worst_prob, 1e-12),
        at_most("classical bits per run deviation from 2", max(abs(c - 2) for c in counts), 0),
        at_least("stator algebra agrees with full simulation", float(stator_ok), 1),
    ]


def suite_xor(tol: float = 1e-12) -> list[Check]:
    phase = build_phase_gate()
    xor = build_xor()
    return [
        at_most("phase gate composition defect", phase.distance(named_gate("phase3_AB")), tol),
        at_least("XOR truth table rows", xor_truth_table_matches(xor, tol), 9),
        at_most("XOR vs permutation matrix", xor.distance(named_gate("xor3")), tol),
    ]


def suite_ghz3(tol: float = 1e-10) -> list[Check]:
    recipe = ghz3_recipe()
    psi0 = basis_state((3, 3), (0, 0))
    ideal = execute_recipe(recipe, psi0, "ideal", trace=True)
    full = execute_recipe(recipe, psi0, "protocol", trace=True)
    step1 = np.zeros(9, dtype=complex)
    step1[[0, 4]] = [math.sqrt(1 / 3), 1j * math.sqrt(2 / 3)]
    step2 = np.zeros(9, dtype=complex)
    step2[[0, 4, 8]] = np.array([np.exp(1j * math.pi / 4), 1j, 1j]) / math.sqrt(3)
    final = ideal[-1]
    overlap = final.inner(full[-1])
    dual = np.linalg.norm(full[-1].amps - overlap / abs(overlap) * final.amps)
    s_a = entropy(partial_trace(final, [0]))
    s_b = entropy(partial_trace(final, [1]))
    return [
        at_most("step 1 amplitude defect", np.linalg.norm(ideal[0].amps - step1), 1e-12),
        at_most("step 2 amplitude defect", np.linalg.norm(ideal[1].amps - step2), 1e-12),
        at_least("fidelity with (|00>+|11>+|22>)/sqrt(3)", fidelity(final, ghz3_target()), 1 - tol),
        at_most("reduced entropy of A minus log2(3)", abs(s_a - math.log2(3)), tol),
        at_most("reduced entropy of B minus log2(3)", abs(s_b - math.log2(3)), tol),
        at_most("ideal vs protocol engine distance up to phase", dual, tol),
        at_most("non-local uses minus 2", abs(nonlocal_step_count(recipe) - 2), 0),
    ]


def suite_ud(d: int = 2, axis="z", tol: float = 1e-10) -> list[Check]:
    u = ud_spin(d, axis)
    return [
        at_most("unitarity defect", u.unitarity_defect(), tol),
        at_most("hermiticity defect", u.hermiticity_defect(), tol),
        at_most("involution defect", u.involution_defect(), tol),
    ]


def suite_u3(seed: int = 0, starts: int = 64) -> list[Check]:
    point = u3_assemble(householder_u3((1, 1, 1)))
    sols = u3_solutions((0.0, 0.0, 0.0), seed=seed, count=3, starts=starts)
    worst = max(max(u3_assemble(p).unitarity_defect(), u3_assemble(p).hermiticity_defect()) for p in sols)
    return [
        at_most("Householder point unitarity defect", point.unitarity_defect(), 1e-12),
        at_most("Householder point hermiticity defect", point.hermiticity_defect(), 1e-12),
        at_least(f"distinct solutions for phases (0,0,0) in {starts} starts", len(sols), 2),
        at_most("worst solver validator defect", worst, 1e-10),
    ]


SUITES = ("nonlocal", "xor", "ghz3", "ud", "u3")
