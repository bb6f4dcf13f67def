import numpy as np
import pytest

from lcusim import qmath, szegedy as sz


def _oracle_usz(p):
    # elementwise: <i,j| S (2 Pi - I) |k,l> = 2 sqrt(P[i,l] P[k,l])... built by explicit loops
    n = p.shape[0]
    out = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    # S maps |j,i> -> |i,j>, so row (i,j) reads row (j,i) of (2 Pi - I)
                    pi = np.sqrt(p[i, j] * p[l, k]) if j == k else 0.0
                    out[i * n + j, k * n + l] = 2 * pi - (1.0 if (j, i) == (k, l) else 0.0)
    return out


def test_dense_operator_matches_loop_oracle_n3():
    p = np.full((3, 3), 1 / 3)
    u = sz.build_usz(p)
    assert qmath.unitarity_defect(u) < 1e-10
    assert np.allclose(u, _oracle_usz(p))


def test_dense_operator_matches_loop_oracle_two_node():
    p = sz.transition_matrix(0.2, 0.7)
    assert np.allclose(sz.build_usz(p), _oracle_usz(p))


def test_nonstochastic_rejected_with_sums():
    with pytest.raises(sz.StochasticError) as info:
        sz.build_usz([[0.5, 0.5], [0.4, 0.5]])
    assert np.allclose(info.value.column_sums, [0.9, 1.0])


def test_weights_validated():
    with pytest.raises(ValueError):
        sz.TwoNodeGraph(1.2, 0.1)


def test_half_half_spectrum():
    g = sz.TwoNodeGraph(0.5, 0.5)
    ref = [-1, 1, 1j, -1j]
    assert sz.multiset_distance(np.linalg.eigvals(sz.two_node_circuit(g)), ref) < 1e-12
    assert sz.multiset_distance(sz.usz_eigenvalues(g), ref) < 1e-12
    assert sz.multiset_distance(sz.usz_eigenvalues(sz.TwoNodeGraph(1, 1)), [-1, 1, -1, -1]) < 1e-12


def test_circuit_equals_dense_on_grid():
    for a in np.linspace(0, 1, 21):
        for b in np.linspace(0, 1, 21):
            g = sz.TwoNodeGraph(a, b)
            u = sz.build_usz(g.matrix())
            assert qmath.global_phase_distance(sz.two_node_circuit(g), u) < 1e-9
            assert sz.multiset_distance(np.linalg.eigvals(u), sz.usz_eigenvalues(g)) < 1e-8


@pytest.mark.parametrize("a, b, period", [(0.25, 0.25, 6), (0.5, 0.5, 4), (0.75, 0.75, 6), (1, 1, 2), (0.1, 0.9, 4), (0.2, 0.3, 6)])
def test_periods(a, b, period):
    g = sz.TwoNodeGraph(a, b)
    assert sz.detect_period(sz.build_usz(g.matrix())) == period
    assert sz.eigenvalue_period(sz.usz_eigenvalues(g)) == period


def test_quasi_periodic_case():
    g = sz.TwoNodeGraph(0.43, 0.43)
    assert sz.detect_period(sz.build_usz(g.matrix()), n_max=256) is None


def test_node_probability_sequence_period_six():
    u = sz.build_usz(sz.transition_matrix(0.25, 0.25))
    trace = sz.evolve(u, [1, 0, 0, 0], 200)
    p = np.array([probs[0] for _, _, probs in trace])
    assert np.allclose(p[6:], p[:-6])
    assert not np.allclose(p[3:], p[:-3])
    assert abs(np.linalg.norm(trace[-1][1]) - 1) < 1e-9


def test_identity_evolution_is_constant():
    trace = sz.evolve(np.eye(4), [0.6, 0, 0.8, 0], 5)
    assert all(np.allclose(pr, [0.36, 0.64]) for _, _, pr in trace)
