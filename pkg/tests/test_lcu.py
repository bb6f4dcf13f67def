import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcusim import kak, lcu, qmath
from lcusim.qmath import KET0, KET1, KET_PLUS, kron

UNITARY_GATES = ["CNOT", "CZ", "CH", "SWAP", "ISWAP", "SQRT_SWAP"]


@pytest.mark.parametrize("name", UNITARY_GATES + ["EF", "ES", "I"])
def test_library_recipes_reproduce_textbook_matrices(name):
    r = lcu.gate_library(name)
    assert np.max(np.abs(r.matrix() - lcu.textbook_matrix(name))) < 1e-12


def test_unknown_gate_raises_keyerror():
    with pytest.raises(KeyError):
        lcu.gate_library("TOFFOLI")


def test_cu_hermitian_uses_two_terms():
    r = lcu.gate_library("CU", qmath.Y)
    assert len(r.terms) == 2
    assert np.allclose(r.matrix(), lcu.textbook_matrix("CU", qmath.Y))


def test_cu_nonhermitian_falls_back_to_four_terms():
    v = np.diag([1, np.exp(0.3j)])
    r = lcu.gate_library("CU", v)
    assert len(r.terms) == 4
    assert qmath.global_phase_distance(r.matrix(), lcu.textbook_matrix("CU", v)) < 1e-10
    for _, a, b in r.terms:
        assert qmath.is_unitary(a) and qmath.is_unitary(b)


def test_ulc_for_swap_is_unitary_with_expected_first_row():
    u = lcu.build_ulc([0.5, 0.5, 0.5, 0.5])
    assert qmath.is_unitary(u)
    assert np.allclose(u[0], 0.5)


def test_ulc_rejects_coefficients_violating_constraints():
    with pytest.raises(lcu.LcuConstraintError, match="XX cross term|YY cross term|ZZ cross term"):
        lcu.build_ulc([0.5, 0.5, 0.5j, 0.5])


def test_probabilistic_cnot_on_10():
    spec = lcu.spec_from_recipe(lcu.gate_library("CNOT"))
    br = lcu.simulate_probabilistic(spec, kron(KET1, KET0))
    assert spec.k == 2
    assert np.isclose(br[0].probability, 0.5)
    assert qmath.state_phase_distance(br[0].state, kron(KET1, KET1)) < 1e-12
    assert np.isclose(sum(b.probability for b in br.values()), 1.0)


def test_entanglement_filter_projects_plus_plus_onto_bell_pair():
    spec = lcu.spec_from_recipe(lcu.gate_library("EF"))
    br = lcu.simulate_probabilistic(spec, kron(KET_PLUS, KET_PLUS))
    bell = (kron(KET0, KET0) + kron(KET1, KET1)) / np.sqrt(2)
    assert np.isclose(br[0].probability, 0.5)
    assert qmath.state_phase_distance(br[0].state, bell) < 1e-12


def test_deterministic_swap_branches_are_equiprobable_and_correct():
    d = kak.kak_decompose(qmath.SWAP)
    br = lcu.deterministic_branches(d, kron(KET0, KET1))
    for b in br.values():
        assert np.isclose(b.probability, 0.25)
        assert qmath.state_phase_distance(b.state, kron(KET1, KET0)) < 1e-10


def test_deterministic_sampling_is_seeded(rng):
    d = kak.kak_decompose(qmath.haar_su(4, rng))
    psi = qmath.random_state(4, rng)
    assert lcu.simulate_deterministic(d, psi, 5)[0] == lcu.simulate_deterministic(d, psi, 5)[0]


def test_complete_unitary_keeps_first_row():
    row = np.array([0.6, 0.8j, 0, 0])
    u = lcu.complete_unitary(row)
    assert qmath.is_unitary(u)
    assert np.allclose(u[0], row)


def test_spec_rejects_mismatched_first_row():
    with pytest.raises(ValueError):
        lcu.LcuCircuitSpec(1, ((0.5, np.eye(4)), (0.5, np.eye(4))), np.eye(2, dtype=complex))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_gates_all_three_routes_agree(seed):
    rng = np.random.default_rng(seed)
    u = qmath.haar_su(4, rng)
    psi = qmath.random_state(4, rng)
    target = u @ psi
    recipe = lcu.recipe_from_unitary(u)
    br = lcu.simulate_probabilistic(lcu.spec_from_recipe(recipe), psi)
    assert np.isclose(br[0].probability, 0.25, atol=1e-10)
    assert qmath.state_phase_distance(br[0].state, target) < 1e-9
    for b in lcu.deterministic_branches(kak.kak_decompose(u), psi).values():
        assert np.isclose(b.probability, 0.25, atol=1e-10)
        assert qmath.state_phase_distance(b.state, target) < 1e-9
