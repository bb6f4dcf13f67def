import numpy as np
import pytest
from scipy.linalg import expm

from lcusim import qaoa
from lcusim.qmath import X, Z

XI, IX, ZZ = np.kron(X, np.eye(2)), np.kron(np.eye(2), X), np.kron(Z, Z)
PLUS2 = np.full(4, 0.5, dtype=complex)


def _oracle_state(csp, g, b):
    return expm(-1j * b * (XI + IX)) @ expm(-1j * g * np.diag(csp.values())) @ PLUS2


def test_csp1_cost_values():
    assert np.allclose(qaoa.csp1().values(), [1, 0, 0, 1])


def test_clause_built_costs():
    # counting satisfied clauses gives these tables
    assert np.allclose(qaoa.csp2().values(), [3, 1, 1, 1])
    assert np.allclose(qaoa.csp3().values(), [2, 2, 2, 0])


def test_bad_clause_rejected():
    with pytest.raises(ValueError):
        qaoa.Clause("z3")


def test_angle_ranges_enforced():
    with pytest.raises(ValueError):
        qaoa.QaoaAngles([1.0], [4.0])
    with pytest.raises(ValueError):
        qaoa.QaoaAngles([1.0, 2.0], [0.5])


def test_csp1_closed_form():
    for g, b in [(0.3, 0.7), (2.1, 0.1), (np.pi, np.pi / 3)]:
        psi = qaoa.qaoa_state(qaoa.csp1(), qaoa.QaoaAngles([g], [b]))
        rx = expm(-1j * b * X)
        ref = np.exp(-1j * g / 2) * np.kron(rx, rx) @ expm(-1j * g * ZZ / 2) @ PLUS2
        assert np.allclose(psi, ref)


def test_p2_matches_sequential_oracle(rng):
    g, b = rng.uniform(0, 2 * np.pi, 2), rng.uniform(0, np.pi, 2)
    csp = qaoa.csp2()
    psi = qaoa.qaoa_state(csp, qaoa.QaoaAngles(g, b))
    ref = PLUS2
    for gk, bk in zip(g, b):
        ref = expm(-1j * bk * (XI + IX)) @ expm(-1j * gk * np.diag(csp.values())) @ ref
    assert np.allclose(psi, ref)
    assert np.linalg.norm(psi) == pytest.approx(1.0)


def test_expectation_values():
    c = qaoa.build_cost(qaoa.Csp(0, 1, 1, 1))
    assert qaoa.expectation(PLUS2, c) == pytest.approx(np.mean(np.diag(c).real))
    assert qaoa.expectation([1, 0, 0, 0], c) == pytest.approx(3)
    assert qaoa.expectation([0, 0, 0, 1], c) == pytest.approx(-1)


def test_grid_shape():
    r = qaoa.grid_search(qaoa.csp1())
    assert r.values.shape == (20, 30)
    assert qaoa.grid_search(qaoa.csp1(), closed=True).values.shape == (21, 31)


# maxima and argmax cells frozen from an expm-based 600-cell evaluation
@pytest.mark.parametrize(
    "csp, best, cell, dist",
    [
        (qaoa.csp1(), 0.9972609476841362, (5, 4), [0.49863, 0.00137, 0.00137, 0.49863]),
        (qaoa.csp2(), 2.3880127457812095, (3, 6), [0.694006, 0.032121, 0.032121, 0.241752]),
        (qaoa.csp3(), 1.9944466970393118, (2, 4), [0.356163, 0.32053, 0.32053, 0.002777]),
    ],
)
def test_grid_search_matches_oracle(csp, best, cell, dist):
    r = qaoa.grid_search(csp)
    assert r.best_value == pytest.approx(best, abs=1e-12)
    assert (r.gamma, r.beta) == pytest.approx((cell[0] * np.pi / 10, cell[1] * np.pi / 30))
    psi = _oracle_state(csp, r.gamma, r.beta)
    assert np.allclose(qaoa.solution_distribution(psi), dist, atol=1e-6)
    assert np.allclose(qaoa.qaoa_state(csp, qaoa.QaoaAngles([r.gamma], [r.beta])), psi)


def test_grid_max_close_to_refined_optimum():
    from scipy.optimize import minimize

    csp = qaoa.csp1()
    r = qaoa.grid_search(csp)
    f = lambda x: -qaoa.expectation(_oracle_state(csp, *x), csp.values())
    cont = -minimize(f, [r.gamma, r.beta], method="Nelder-Mead").fun
    assert r.best_value >= 0.9 * cont


def test_parallel_rows_equal_serial():
    from concurrent.futures import ThreadPoolExecutor

    csp = qaoa.csp2()
    r = qaoa.grid_search(csp)
    with ThreadPoolExecutor(8) as ex:
        rows = list(ex.map(lambda g: qaoa.grid_row(csp, g, r.betas), r.gammas))
    assert np.array_equal(np.array(rows), r.values)


def test_csp_from_config():
    csp = qaoa.csp_from_config([{"terms": "z1z2", "sign": 1}])
    assert csp == qaoa.csp1()
