from __future__ import annotations

import json
import math

import numpy as np
import pytest

from qudit_locc.applications import (
    LocalStep,
    NonlocalStep,
    build_phase_gate,
    build_xor,
    execute_recipe,
    fourier_on,
    ghz3_recipe,
    ghz3_target,
    nonlocal_step_count,
    recipe_from_json,
    recipe_to_json,
    u_double_prime,
    u_prime,
    xor_truth_table_matches,
)
from qudit_locc.hilbert import (
    Operator,
    basis_state,
    entropy,
    equal_up_to_global_phase,
    expm_involution,
    fidelity,
    partial_trace,
    tensor,
)
from qudit_locc.operators import named_gate
from qudit_locc.protocol import ProtocolError, ResourceState

W = np.exp(2j * math.pi / 3)


def ket(pairs):
    v = np.zeros(9, dtype=complex)
    for (j, k), c in pairs.items():
        v[3 * j + k] = c
    return v


class TestGhz3:
    def test_recipe_shape(self):
        r = ghz3_recipe()
        assert nonlocal_step_count(r) == 2
        assert r[0] == NonlocalStep(math.asin(math.sqrt(2 / 3)), "ghz_step1_U", "ghz_step1_U")
        assert r[1] == NonlocalStep(math.pi / 4, "ghz_step2_UA", "ghz_step2_UB")
        assert r[2] == LocalStep("A", "ghz_final_phase")

    def test_intermediate_states(self):
        states = execute_recipe(ghz3_recipe(), basis_state((3, 3), (0, 0)), trace=True)
        s1 = ket({(0, 0): math.sqrt(1 / 3), (1, 1): 1j * math.sqrt(2 / 3)})
        s2 = ket({(0, 0): np.exp(1j * math.pi / 4), (1, 1): 1j, (2, 2): 1j}) / math.sqrt(3)
        assert np.linalg.norm(states[0].amps - s1) <= 1e-12
        assert np.linalg.norm(states[1].amps - s2) <= 1e-12

    def test_final_state_is_target_up_to_i(self):
        final = execute_recipe(ghz3_recipe(), basis_state((3, 3), (0, 0)))
        assert np.linalg.norm(final.amps - 1j * ghz3_target().amps) <= 1e-12
        assert fidelity(final, ghz3_target()) >= 1 - 1e-10

    def test_reduced_entropies(self):
        final = execute_recipe(ghz3_recipe(), basis_state((3, 3), (0, 0)))
        for keep in ([0], [1]):
            assert abs(entropy(partial_trace(final, keep)) - math.log2(3)) <= 1e-10

    def test_engines_agree(self):
        psi0 = basis_state((3, 3), (0, 0))
        ideal = execute_recipe(ghz3_recipe(), psi0)
        full = execute_recipe(ghz3_recipe(), psi0, engine="protocol")
        same, _ = equal_up_to_global_phase(full, ideal, 1e-10)
        assert same

    def test_engines_agree_on_random_input(self, rng):
        from conftest import random_state

        psi = random_state((3, 3), rng)
        ideal = execute_recipe(ghz3_recipe(), psi)
        full = execute_recipe(ghz3_recipe(), psi, engine="protocol", resource=ResourceState.maximal(0.2))
        assert equal_up_to_global_phase(full, ideal, 1e-10)[0]


class TestPhaseGate:
    def test_u_prime_entries(self):
        g = math.pi / 3
        d = np.diag(u_prime(g).matrix)
        # U_A = diag(1,1,-1), U_B = diag(1,-1,1): sign of |jk> is a_j b_k
        a, b = (1, 1, -1), (1, -1, 1)
        for j in range(3):
            for k in range(3):
                assert abs(d[3 * j + k] - np.exp(1j * g * a[j] * b[k])) <= 1e-15

    def test_u_double_prime_entries(self):
        g = math.pi / 6
        d = np.diag(u_double_prime(g).matrix)
        a = b = (1, 1, -1)
        for j in range(3):
            for k in range(3):
                assert abs(d[3 * j + k] - np.exp(1j * g * a[j] * b[k])) <= 1e-15

    @pytest.mark.parametrize("angle", [0.3, math.pi / 3, 2.0])
    def test_diagonal_forms_match_exponential(self, angle):
        first = tensor([named_gate("phase_first_UA"), named_gate("phase_first_UB")])
        second = tensor([named_gate("phase_second_UA"), named_gate("phase_second_UB")])
        assert u_prime(angle).distance(expm_involution(angle, first)) <= 1e-14
        assert u_double_prime(angle).distance(expm_involution(angle, second)) <= 1e-14

    def test_basis_examples(self):
        p = build_phase_gate()
        for (j, k), phase in {(0, 0): 1, (1, 1): W, (1, 2): W**2, (2, 2): W}.items():
            out = p @ basis_state((3, 3), (j, k))
            assert np.linalg.norm(out.amps - phase * basis_state((3, 3), (j, k)).amps) <= 1e-12

    def test_whole_gate(self):
        ref = np.diag([W ** (j * k) for j in range(3) for k in range(3)])
        assert np.linalg.norm(build_phase_gate().matrix - ref) <= 1e-12
        assert build_phase_gate().distance(named_gate("phase3_AB")) <= 1e-12


class TestXor:
    def test_truth_table(self):
        x = build_xor()
        assert xor_truth_table_matches(x) == 9
        for j in range(3):
            for k in range(3):
                out = x @ basis_state((3, 3), (j, k))
                assert np.linalg.norm(out.amps - basis_state((3, 3), (j, (j + k) % 3)).amps) <= 1e-12

    def test_example(self):
        out = build_xor() @ basis_state((3, 3), (1, 2))
        assert np.linalg.norm(out.amps - basis_state((3, 3), (1, 0)).amps) <= 1e-12

    def test_conjugation_on_control_gives_difference(self):
        # oracle: F_A P F_A^-1 |j>|k> = |j - k mod 3>|k>, by direct DFT sums
        alt = fourier_on("A") @ build_phase_gate() @ fourier_on("A", inverse=True)
        for j in range(3):
            for k in range(3):
                out = alt @ basis_state((3, 3), (j, k))
                assert np.linalg.norm(out.amps - basis_state((3, 3), ((j - k) % 3, k)).amps) <= 1e-12
        assert xor_truth_table_matches(alt) == 1

    def test_inverse_fourier(self):
        f = fourier_on("B")
        assert (fourier_on("B", inverse=True) @ f).distance(Operator.identity((3, 3))) <= 1e-14


class TestRecipes:
    def test_json_roundtrip(self):
        r = ghz3_recipe()
        assert recipe_from_json(json.loads(json.dumps(recipe_to_json(r)))) == r

    def test_bad_records(self):
        with pytest.raises(ValueError):
            recipe_from_json([{"kind": "teleport"}])
        with pytest.raises(ValueError):
            recipe_from_json([{"kind": "local", "party": "C", "gate": "swap12"}])

    def test_empty_recipe(self, rng):
        from conftest import random_state

        psi = random_state((3, 3), rng)
        assert np.array_equal(execute_recipe((), psi).amps, psi.amps)
        assert execute_recipe((), psi, trace=True) == []

    def test_zero_angle_step(self, rng):
        from conftest import random_state

        psi = random_state((3, 3), rng)
        out = execute_recipe((NonlocalStep(0.0, "ghz_step1_U", "swap12"),), psi, engine="protocol")
        assert equal_up_to_global_phase(out, psi, 1e-12)[0]

    def test_non_maximal_rejected_by_protocol_engine(self):
        psi = basis_state((3, 3), 0)
        r = ResourceState((0.6, 0, 0, 0.8))
        with pytest.raises(ProtocolError):
            execute_recipe(ghz3_recipe(), psi, engine="protocol", resource=r)
        # the ideal engine ignores the channel
        execute_recipe(ghz3_recipe(), psi, engine="ideal", resource=r)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            execute_recipe(ghz3_recipe(), basis_state((3, 3, 3), 0))
        with pytest.raises(ValueError):
            execute_recipe(ghz3_recipe(), basis_state((3, 3), 0), engine="fast")
        with pytest.raises(KeyError):
            execute_recipe((LocalStep("A", "nope"),), basis_state((3, 3), 0))
