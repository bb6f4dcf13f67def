"""Abstract LCU circuits: probabilistic ancilla scheme, deterministic feedforward scheme,
and the library of named two-qubit gate recipes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmath
from .kak import (
    KakDecomposition,
    NonUnitaryError,
    kak_decompose,
    lcu_terms,
    reconstruct_from_terms,
    unitarity_constraints,
)
from .qmath import I2, PAULIS, X, Z, as_state, dagger, unitarity_defect

__all__ = [
    "LcuConstraintError",
    "LcuCircuitSpec",
    "GateRecipe",
    "Branch",
    "GATE_NAMES",
    "build_ulc",
    "complete_unitary",
    "spec_from_recipe",
    "simulate_probabilistic",
    "deterministic_branches",
    "simulate_deterministic",
    "gate_library",
    "recipe_from_unitary",
    "textbook_matrix",
]

GATE_NAMES = ("CNOT", "CZ", "CH", "SWAP", "ISWAP", "SQRT_SWAP", "CU", "EF", "ES")
_ALIASES = {"IDENTITY": "I", "SQRTSWAP": "SQRT_SWAP", "CU(V)": "CU"}

# Outcome j of the deterministic circuit is fixed by sigma_j (x) sigma_j.
CORRECTIONS = tuple(np.kron(p, p) for p in PAULIS)


class LcuConstraintError(ValueError):
    """Coefficients violate the conditions for the 4x4 ancilla unitary."""

    NAMES = ("normalisation", "XX cross term", "YY cross term", "ZZ cross term")

    def __init__(self, residuals, tol):
        self.residuals = np.asarray(residuals)
        failed = [
            f"{n} off by {r:.3e}"
            for n, r in zip(self.NAMES, self.residuals)
            if abs(r) > tol
        ]
        super().__init__(
            "coefficients do not come from a unitary gate: " + "; ".join(failed)
        )


@dataclass(frozen=True)
class GateRecipe:
    """Named linear combination ``sum_i alpha_i A_i (x) B_i``."""

    name: str
    terms: tuple
    unitary_flag: bool = True

    @property
    def alphas(self) -> np.ndarray:
        return np.array([t[0] for t in self.terms], dtype=complex)

    def matrix(self) -> np.ndarray:
        return reconstruct_from_terms(self.terms)

    def padded_terms(self, n: int = 4) -> list:
        """Terms padded with zero-weight identity terms up to ``n``."""
        out = list(self.terms)
        while len(out) < n:
            out.append((0j, I2.copy(), I2.copy()))
        return out


@dataclass(frozen=True)
class LcuCircuitSpec:
    """Probabilistic LCU circuit: ``k = 2**n_ancilla`` target operators and the ancilla unitary."""

    n_ancilla: int
    terms: tuple  # (coefficient, V_i) pairs, V_i acting on the target register
    ulc: np.ndarray

    def __post_init__(self):
        k = 2 ** self.n_ancilla
        if len(self.terms) != k:
            raise ValueError(f"{len(self.terms)} terms for {self.n_ancilla} ancilla qubits")
        if self.ulc.shape != (k, k):
            raise ValueError(f"ancilla unitary has shape {self.ulc.shape}, expected {(k, k)}")
        if unitarity_defect(self.ulc) > 1e-10:
            raise ValueError("ancilla unitary is not unitary")
        first = np.array([c for c, _ in self.terms], dtype=complex)
        if np.max(np.abs(self.ulc[0] - first)) > 1e-10:
            raise ValueError("first row of the ancilla unitary must equal the coefficients")

    @property
    def k(self) -> int:
        return 2 ** self.n_ancilla

    def operator(self) -> np.ndarray:
        return sum(c * v for c, v in self.terms)


@dataclass(frozen=True)
class Branch:
    probability: float
    state: np.ndarray


def build_ulc(alphas, tol: float = 1e-8) -> np.ndarray:
    """4x4 ancilla unitary of the deterministic two-qubit LCU circuit.

    Raises:
        LcuConstraintError: the coefficients cannot come from a unitary gate.
    """
    a0, a1, a2, a3 = np.asarray(alphas, dtype=complex)
    res = unitarity_constraints([a0, a1, a2, a3])
    if abs(res[0]) > max(tol, 1e-9) or np.any(np.abs(res[1:]) > tol):
        raise LcuConstraintError(res, tol)
    ulc = np.array(
        [
            [a0, a1, a2, a3],
            [a1, a0, -a3, -a2],
            [a2, -a3, a0, -a1],
            [a3, -a2, -a1, a0],
        ],
        dtype=complex,
    )
    defect = unitarity_defect(ulc)
    if defect > 1e-8:
        raise LcuConstraintError(res, tol)
    return ulc


def complete_unitary(first_row) -> np.ndarray:
    """Unitary whose first row is ``first_row``; remaining rows by Gram-Schmidt.

    Canonical basis vectors seed the completion, in order, so the result is
    deterministic.
    """
    r0 = np.asarray(first_row, dtype=complex)
    n = r0.size
    if abs(np.linalg.norm(r0) - 1.0) > 1e-9:
        raise ValueError(f"first row has norm {np.linalg.norm(r0)!r}, expected 1")
    rows = [r0]
    for j in range(n):
        v = np.zeros(n, dtype=complex)
        v[j] = 1.0
        for r in rows:
            v = v - np.vdot(r, v) * r
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            rows.append(v / nv)
        if len(rows) == n:
            break
    u = np.array(rows)
    if unitarity_defect(u) > 1e-10:
        raise ArithmeticError("Gram-Schmidt completion lost orthogonality")
    return u


def spec_from_recipe(recipe: GateRecipe) -> LcuCircuitSpec:
    """Probabilistic circuit spec for a recipe.

    Four-term recipes whose coefficients satisfy the unitarity conditions use
    the structured ancilla unitary; anything else (two-term recipes, EF, ES)
    gets a Gram-Schmidt completion of the coefficient row.
    """
    terms = list(recipe.terms)
    n = max(1, int(np.ceil(np.log2(len(terms)))))
    terms = recipe.padded_terms(2**n)
    alphas = np.array([t[0] for t in terms], dtype=complex)
    ulc = None
    if len(terms) == 4:
        try:
            ulc = build_ulc(alphas, tol=1e-10)
        except LcuConstraintError:
            ulc = None
    if ulc is None:
        ulc = complete_unitary(alphas)
    ops = tuple((complex(a), np.kron(A, B)) for a, A, B in terms)
    return LcuCircuitSpec(n_ancilla=n, terms=ops, ulc=ulc)


def simulate_probabilistic(spec: LcuCircuitSpec, psi) -> dict[int, Branch]:
    """Run the ancilla-assisted LCU circuit and return every ancilla outcome.

    The ancilla register starts in ``|0...0>``, is put into uniform
    superposition, controls ``V_i`` on the target, and is rotated by the
    ancilla unitary before measurement. Outcome 0 carries
    ``(sum alpha_i V_i)|psi>``.

    Returns:
        Mapping ``outcome -> Branch(probability, normalized post-state)``.
        A branch with zero probability has an all-zero state.
    """
    psi = as_state(psi, normalized=True)
    k = spec.k
    dim = psi.size
    # joint amplitudes after uniform superposition and controlled V_i
    controlled = np.array([v @ psi for _, v in spec.terms]) / np.sqrt(k)  # (k, dim)
    # ancilla rotation: |i> -> sum_j ulc[j, i] |j>
    joint = spec.ulc @ controlled
    out = {}
    for j in range(k):
        amp = joint[j]
        p = float(np.vdot(amp, amp).real)
        state = amp / np.sqrt(p) if p > 1e-300 else np.zeros(dim, dtype=complex)
        out[j] = Branch(p, state)
    return out


def deterministic_branches(d: KakDecomposition, psi) -> dict[int, Branch]:
    """Exhaustive branch map of the deterministic feedforward circuit.

    The two control qubits are a single four-level register. After the
    ancilla unitary each outcome ``j`` is corrected by ``sigma_j (x) sigma_j``
    and the output layer ``p1 (x) p2`` is applied.
    """
    psi = as_state(psi, normalized=True)
    if psi.size != 4:
        raise ValueError("deterministic circuit acts on two qubits")
    ulc = build_ulc(d.alphas)
    q = np.kron(d.q1, d.q2)
    p = np.kron(d.p1, d.p2)
    x = q @ psi
    # 16-dim register: ancilla (4) (x) target (4)
    state = np.kron(np.full(4, 0.5, dtype=complex), x)
    ctrl = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        ctrl[4 * i : 4 * i + 4, 4 * i : 4 * i + 4] = CORRECTIONS[i]
    state = np.kron(ulc, np.eye(4)) @ (ctrl @ state)
    out = {}
    for j in range(4):
        amp = p @ (CORRECTIONS[j] @ state[4 * j : 4 * j + 4])
        prob = float(np.vdot(amp, amp).real)
        out[j] = Branch(prob, amp / np.sqrt(prob) if prob > 1e-300 else amp)
    return out


def simulate_deterministic(d: KakDecomposition, psi, outcome_seed=None) -> tuple[int, np.ndarray]:
    """Sample one ancilla outcome and return ``(outcome, corrected output state)``."""
    branches = deterministic_branches(d, psi)
    probs = np.array([branches[j].probability for j in range(4)])
    rng = np.random.default_rng(outcome_seed)
    j = int(rng.choice(4, p=probs / probs.sum()))
    return j, branches[j].state


def _controlled_recipe(name: str, v) -> GateRecipe:
    """Two-term controlled-V recipe ``S (x) (I - iV)/sqrt2 + S^dagger (x) (I + iV)/sqrt2``, each over sqrt2."""
    v = np.asarray(v, dtype=complex)
    s = np.diag([1, 1j]).astype(complex)
    r = 1 / np.sqrt(2)
    return GateRecipe(
        name,
        (
            (complex(r), s, (I2 - 1j * v) * r),
            (complex(r), dagger(s), (I2 + 1j * v) * r),
        ),
        True,
    )


def recipe_from_unitary(u, name: str = "U") -> GateRecipe:
    """Four-term recipe from the KAK decomposition; the global phase goes into the coefficients."""
    d = kak_decompose(u)
    ph = np.exp(1j * d.global_phase)
    return GateRecipe(name, tuple((a * ph, A, B) for a, A, B in lcu_terms(d)), True)


def gate_library(name: str, v=None) -> GateRecipe:
    """Named gate recipe.

    ``CU`` takes a 2x2 unitary ``v``. Hermitian ``v`` gives the two-term
    controlled recipe with unitary terms; for other ``v`` those terms are not
    unitary, so the KAK-derived four-term recipe is returned instead.

    Raises:
        KeyError: unknown gate name.
    """
    key = name.upper()
    key = _ALIASES.get(key, key)
    r = 1 / np.sqrt(2)
    if key == "I":
        return GateRecipe("I", ((1 + 0j, I2.copy(), I2.copy()),), True)
    if key == "CNOT":
        return _controlled_recipe("CNOT", X)
    if key == "CZ":
        return _controlled_recipe("CZ", Z)
    if key == "CH":
        return _controlled_recipe("CH", qmath.H)
    if key == "SWAP":
        return GateRecipe("SWAP", tuple((0.5 + 0j, p, p) for p in PAULIS), True)
    if key == "ISWAP":
        coeffs = (0.5, 0.5j, 0.5j, 0.5)
        return GateRecipe("ISWAP", tuple((complex(c), p, p) for c, p in zip(coeffs, PAULIS)), True)
    if key == "SQRT_SWAP":
        coeffs = (0.75 + 0.25j, 0.25 - 0.25j, 0.25 - 0.25j, 0.25 - 0.25j)
        return GateRecipe("SQRT_SWAP", tuple((complex(c), p, p) for c, p in zip(coeffs, PAULIS)), True)
    if key == "EF":
        return GateRecipe("EF", ((complex(r), I2.copy(), I2.copy()), (complex(r), Z, Z)), False)
    if key == "ES":
        return GateRecipe("ES", ((complex(r), I2.copy(), I2.copy()), (complex(-r), Z, Z)), False)
    if key == "CU":
        if v is None:
            raise ValueError("CU needs a 2x2 unitary")
        v = qmath.as_matrix(v)
        if v.shape != (2, 2) or unitarity_defect(v) > 1e-10:
            raise NonUnitaryError(unitarity_defect(v) if v.shape == (2, 2) else float("inf"))
        if np.max(np.abs(v - dagger(v))) < 1e-12:
            return _controlled_recipe("CU", v)
        cu = np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), v]])
        return recipe_from_unitary(cu, "CU")
    raise KeyError(f"unknown gate {name!r}; expected one of {GATE_NAMES}")


def textbook_matrix(name: str, v=None) -> np.ndarray:
    """Standard 4x4 matrix of a named gate (independent of any recipe)."""
    key = _ALIASES.get(name.upper(), name.upper())
    table = {
        "I": np.eye(4, dtype=complex),
        "CNOT": qmath.CNOT,
        "CZ": qmath.CZ,
        "CH": qmath.CH,
        "SWAP": qmath.SWAP,
        "ISWAP": qmath.ISWAP,
        "SQRT_SWAP": qmath.SQRT_SWAP,
        "EF": np.diag([np.sqrt(2), 0, 0, np.sqrt(2)]).astype(complex),
        "ES": np.diag([0, np.sqrt(2), np.sqrt(2), 0]).astype(complex),
    }
    if key == "CU":
        return np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), np.asarray(v, dtype=complex)]])
    return table[key].copy()
