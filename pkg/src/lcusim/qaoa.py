"""p-level QAOA for two-bit constraint satisfaction problems.

Spin strings map to bits by ``z = +1 <-> 0``, so basis index ``2 b1 + b2``
holds the string ``(z1, z2) = ((-1)^b1, (-1)^b2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Clause",
    "Csp",
    "QaoaAngles",
    "GridResult",
    "csp1",
    "csp2",
    "csp3",
    "SPIN_STRINGS",
    "build_cost",
    "qaoa_state",
    "expectation",
    "grid_search",
    "grid_row",
    "solution_distribution",
    "csp_from_config",
]

SPIN_STRINGS = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=float)
_TERMS = ("1", "z1", "z2", "z1z2")


@dataclass(frozen=True)
class Clause:
    """Constraint ``1/2 + sign/2 * term``: satisfied (value 1) or not (value 0)."""

    terms: str
    sign: int = 1

    def __post_init__(self):
        if self.terms not in _TERMS[1:]:
            raise ValueError(f"clause term must be one of {_TERMS[1:]}, got {self.terms!r}")
        if self.sign not in (1, -1):
            raise ValueError("clause sign must be +1 or -1")


@dataclass(frozen=True)
class Csp:
    """Objective ``C(z) = constant + coeff_z1 z1 + coeff_z2 z2 + coeff_z1z2 z1 z2``."""

    constant: float = 0.0
    coeff_z1: float = 0.0
    coeff_z2: float = 0.0
    coeff_z1z2: float = 0.0
    n_clauses: int | None = None

    @classmethod
    def from_clauses(cls, clauses) -> "Csp":
        coeffs = dict.fromkeys(_TERMS, 0.0)
        for c in clauses:
            coeffs["1"] += 0.5
            coeffs[c.terms] += 0.5 * c.sign
        return cls(coeffs["1"], coeffs["z1"], coeffs["z2"], coeffs["z1z2"], len(clauses))

    def values(self) -> np.ndarray:
        """``C(z)`` on the strings in bit order 00, 01, 10, 11."""
        z1, z2 = SPIN_STRINGS.T
        return self.constant + self.coeff_z1 * z1 + self.coeff_z2 * z2 + self.coeff_z1z2 * z1 * z2

    def shifted(self, c: float) -> "Csp":
        return Csp(self.constant + c, self.coeff_z1, self.coeff_z2, self.coeff_z1z2, None)


def csp1() -> Csp:
    return Csp.from_clauses([Clause("z1z2", 1)])


def csp2() -> Csp:
    return Csp.from_clauses([Clause("z1", 1), Clause("z2", 1), Clause("z1z2", 1)])


def csp3() -> Csp:
    return Csp.from_clauses([Clause("z1", 1), Clause("z2", 1), Clause("z1z2", -1)])


@dataclass(frozen=True)
class QaoaAngles:
    gammas: tuple
    betas: tuple

    def __post_init__(self):
        g = tuple(float(x) for x in np.atleast_1d(self.gammas))
        b = tuple(float(x) for x in np.atleast_1d(self.betas))
        if len(g) != len(b) or not g:
            raise ValueError("need the same positive number of gammas and betas")
        if any(x < 0 or x > 2 * np.pi + 1e-12 for x in g):
            raise ValueError("gammas must lie in [0, 2 pi]")
        if any(x < 0 or x > np.pi + 1e-12 for x in b):
            raise ValueError("betas must lie in [0, pi]")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def p(self) -> int:
        return len(self.gammas)


def build_cost(csp: Csp) -> np.ndarray:
    return np.diag(csp.values()).astype(complex)


def _mixer(beta: float) -> np.ndarray:
    rx = np.array([[np.cos(beta), -1j * np.sin(beta)], [-1j * np.sin(beta), np.cos(beta)]])
    return np.kron(rx, rx)


def qaoa_state(csp: Csp, angles: QaoaAngles) -> np.ndarray:
    """``prod_k e^{-i beta_k B} e^{-i gamma_k C}`` applied to ``|++>``, with ``B = X1 + X2``."""
    c = csp.values()
    psi = np.full(4, 0.5, dtype=complex)
    for g, b in zip(angles.gammas, angles.betas):
        psi = _mixer(b) @ (np.exp(-1j * g * c) * psi)
    return psi


def expectation(state, cost) -> float:
    """``<psi|C|psi>`` for a diagonal cost (matrix or its diagonal)."""
    c = np.asarray(cost)
    c = np.diag(c).real if c.ndim == 2 else c.real
    return float(np.sum(c * np.abs(np.asarray(state)) ** 2))


def solution_distribution(state) -> np.ndarray:
    p = np.abs(np.asarray(state)) ** 2
    return p / p.sum()


@dataclass(frozen=True)
class GridResult:
    gamma: float
    beta: float
    gammas: np.ndarray
    betas: np.ndarray
    values: np.ndarray  # values[i, j] at (gammas[i], betas[j])

    @property
    def best_value(self) -> float:
        return float(self.values.max())


def _axis(step, upper, closed):
    n = int(round(upper / step))
    if abs(n * step - upper) > 1e-9 * upper:
        n = int(np.floor(upper / step))
        return np.arange(n + 1) * step
    return np.arange(n + (1 if closed else 0)) * step


def grid_row(csp: Csp, gamma: float, betas) -> np.ndarray:
    """``<C>`` at one gamma for every beta in ``betas``."""
    c = csp.values()
    phased = 0.5 * np.exp(-1j * gamma * c)
    psi = np.array([_mixer(b) @ phased for b in betas])
    return (np.abs(psi) ** 2) @ c


def grid_search(csp: Csp, delta_gamma: float = 2 * np.pi / 20, delta_beta: float = np.pi / 30, closed: bool = False) -> GridResult:
    """p=1 grid search of ``<C>`` over ``[0, 2 pi) x [0, pi)``.

    The default steps give 20 x 30 = 600 cells. ``closed=True`` also includes
    the upper endpoints, which duplicate the lower ones for integer-valued
    costs. Ties go to the lowest gamma index, then beta index.
    """
    if delta_gamma <= 0 or delta_beta <= 0:
        raise ValueError("step sizes must be positive")
    gammas = _axis(delta_gamma, 2 * np.pi, closed)
    betas = _axis(delta_beta, np.pi, closed)
    values = np.array([grid_row(csp, g, betas) for g in gammas])
    top = values.max()
    flat = np.flatnonzero(values.reshape(-1) >= top - 1e-12)[0]
    i, j = np.unravel_index(flat, values.shape)
    return GridResult(float(gammas[i]), float(betas[j]), gammas, betas, values)


def csp_from_config(clauses) -> Csp:
    """Build a CSP from ``[{"terms": "z1z2", "sign": 1}, ...]``."""
    return Csp.from_clauses([Clause(c["terms"], int(c.get("sign", 1))) for c in clauses])
