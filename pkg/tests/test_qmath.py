import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcusim import qmath


def test_kron_ordering_puts_first_factor_on_slow_index():
    psi = qmath.kron(qmath.KET1, qmath.KET0)
    assert np.allclose(psi, [0, 0, 1, 0])


def test_cnot_flips_target_when_control_set():
    assert np.allclose(qmath.CNOT @ qmath.kron(qmath.KET1, qmath.KET0), qmath.kron(qmath.KET1, qmath.KET1))


def test_global_phase_distance_ignores_phase(rng):
    u = qmath.haar_unitary(4, rng)
    assert qmath.global_phase_distance(np.exp(0.7j) * u, u) < 1e-14


def test_global_phase_distance_falls_back_to_grid_for_orthogonal_operators():
    # Tr(X^dagger Z) = 0 so the trace phase is undefined
    d = qmath.global_phase_distance(qmath.X, qmath.Z)
    assert np.isclose(d, qmath.phase_grid_distance(qmath.X, qmath.Z))
    assert d > 0.9


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        qmath.global_phase_distance(np.eye(2), np.eye(4))


def test_unitarity_defect_rejects_nonsquare():
    with pytest.raises(ValueError):
        qmath.unitarity_defect(np.ones((2, 3)))


def test_nan_rejected():
    with pytest.raises(ValueError):
        qmath.as_matrix([[np.nan, 0], [0, 1]])


def test_state_fidelity_of_bell_pair():
    bell = (qmath.kron(qmath.KET0, qmath.KET0) + qmath.kron(qmath.KET1, qmath.KET1)) / np.sqrt(2)
    assert np.isclose(qmath.state_fidelity(bell, qmath.density(bell)), 1.0)
    assert np.isclose(qmath.state_fidelity(bell, np.eye(4) / 4), 0.25)


def test_pauli_basis_is_orthogonal():
    g = np.einsum("aij,bij->ab", qmath.PAULI_BASIS_2Q.conj(), qmath.PAULI_BASIS_2Q)
    assert np.allclose(g, 4 * np.eye(16))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([2, 4, 8]))
def test_haar_samples_are_unitary(seed, n):
    u = qmath.haar_unitary(n, np.random.default_rng(seed))
    assert qmath.is_unitary(u)
    assert np.isclose(np.linalg.det(qmath.haar_su(n, np.random.default_rng(seed))), 1.0)
