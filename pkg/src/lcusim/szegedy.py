"""Szegedy quantum walks: operator construction, the two-node circuit, evolution and periodicity.

Registers are ``|i, j>`` with ``i`` the walker position (slow index) and ``j``
the coin. Transition matrices are column-stochastic: ``P[j, i]`` is the
probability of stepping from node ``i`` to node ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .qmath import I2, Z, as_state, global_phase_distance, is_unitary

__all__ = [
    "TwoNodeGraph",
    "StochasticError",
    "transition_matrix",
    "swap_operator",
    "build_usz",
    "rotation",
    "two_node_gates",
    "two_node_circuit",
    "evolve",
    "usz_eigenvalues",
    "multiset_distance",
    "detect_period",
    "eigenvalue_period",
]


class StochasticError(ValueError):
    def __init__(self, column_sums):
        self.column_sums = np.asarray(column_sums)
        super().__init__(f"transition matrix is not column-stochastic; column sums {self.column_sums.tolist()}")


@dataclass(frozen=True)
class TwoNodeGraph:
    """Two nodes: node 0 leaves with weight ``alpha``, node 1 with weight ``beta``."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v!r} outside [0, 1]")

    def matrix(self) -> np.ndarray:
        return transition_matrix(self.alpha, self.beta)


def transition_matrix(alpha: float, beta: float) -> np.ndarray:
    return np.array([[1 - alpha, beta], [alpha, 1 - beta]], dtype=float)


def swap_operator(n: int) -> np.ndarray:
    s = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            s[i * n + j, j * n + i] = 1
    return s


def build_usz(p) -> np.ndarray:
    """``S (2 Pi - I)`` with ``Pi = sum_i |phi_i><phi_i|``, ``|phi_i> = |i> (x) sum_j sqrt(P[j, i]) |j>``.

    Raises:
        StochasticError: negative entries or column sums away from 1.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("transition matrix must be square")
    sums = p.sum(axis=0)
    if np.any(p < -1e-15) or np.any(np.abs(sums - 1) > 1e-12):
        raise StochasticError(sums)
    n = p.shape[0]
    phis = np.zeros((n, n * n))
    for i in range(n):
        phis[i, i * n : (i + 1) * n] = np.sqrt(np.clip(p[:, i], 0, None))
    proj = phis.T @ phis
    return (swap_operator(n) @ (2 * proj - np.eye(n * n))).astype(complex)


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _controlled(u):
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u
    return out


def two_node_gates(g: TwoNodeGraph) -> list[tuple[str, np.ndarray]]:
    """Single-step circuit in time order (first applied first)."""
    t1 = np.arccos(np.sqrt(1 - g.alpha))
    t2 = np.arccos(np.sqrt(g.beta))
    return [
        ("I(x)R(-theta1)", np.kron(I2, rotation(-t1))),
        ("CR(theta1-theta2)", _controlled(rotation(t1 - t2))),
        ("I(x)Z", np.kron(I2, Z)),
        ("CR(theta2-theta1)", _controlled(rotation(t2 - t1))),
        ("I(x)R(theta1)", np.kron(I2, rotation(t1))),
        ("SWAP", swap_operator(2).astype(complex)),
    ]


def two_node_circuit(g: TwoNodeGraph) -> np.ndarray:
    """Dense product of :func:`two_node_gates`; equals ``build_usz`` of the graph up to phase."""
    u = np.eye(4, dtype=complex)
    for _, gate in two_node_gates(g):
        u = gate @ u
    return u


def evolve(u, psi0, t_max: int) -> list[tuple[int, np.ndarray, np.ndarray]]:
    """States ``u^t psi0`` for ``t = 0..t_max`` with node (position) marginals."""
    u = np.asarray(u, dtype=complex)
    psi = as_state(psi0, normalized=True)
    n = int(round(np.sqrt(psi.size)))
    if n * n != psi.size:
        raise ValueError("state dimension must be a square")
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    out = []
    for t in range(t_max + 1):
        probs = (np.abs(psi.reshape(n, n)) ** 2).sum(axis=1)
        out.append((t, psi.copy(), probs))
        psi = u @ psi
    return out


def usz_eigenvalues(g: TwoNodeGraph) -> np.ndarray:
    """Closed-form spectrum ``{-1, 1, 1 - s - sqrt(s^2 - 2s), 1 - s + sqrt(s^2 - 2s)}``, ``s = alpha + beta``."""
    s = g.alpha + g.beta
    r = np.sqrt(complex(s * s - 2 * s))
    return np.array([-1, 1, 1 - s - r, 1 - s + r], dtype=complex)


def multiset_distance(a, b) -> float:
    """Max distance under the optimal matching of two equal-size complex multisets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def detect_period(u, n_max: int = 256, tol: float = 1e-6) -> int | None:
    """Smallest ``n <= n_max`` with ``u^n`` equal to a multiple of the identity, else ``None``."""
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, 1e-8):
        raise ValueError("period detection needs a unitary")
    eye = np.eye(u.shape[0], dtype=complex)
    v = eye.copy()
    for n in range(1, n_max + 1):
        v = u @ v
        if global_phase_distance(v, eye) <= tol:
            return n
    return None


def eigenvalue_period(eigs, n_max: int = 256, tol: float = 1e-6) -> int | None:
    """Least common multiple of the root-of-unity orders of ``eigs``, or ``None``."""
    period = 1
    for lam in np.asarray(eigs, dtype=complex):
        for n in range(1, n_max + 1):
            if abs(lam**n - 1) <= tol:
                period = np.lcm(period, n)
                break
        else:
            return None
    return int(period) if period <= n_max else None
