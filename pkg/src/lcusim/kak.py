"""Cartan (KAK) decomposition of two-qubit gates and its four-term LCU form.

Any ``U`` in U(4) is written as::

    U = e^{i g} (p1 (x) p2) exp(-i (k1 XX + k2 YY + k3 ZZ)) (q1 (x) q2)

and, expanding the exponential, as the linear combination
``sum_i alpha_i (p1 sigma_i q1) (x) (p2 sigma_i q2)`` with ``sigma = (I, X, Y, Z)``.

The decomposition works in the magic (Bell) basis, where local gates become
real orthogonal matrices and the nonlocal core becomes diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qmath import I2, PAULIS, X, Y, Z, S, H, as_matrix, dagger, unitarity_defect

__all__ = [
    "KakDecomposition",
    "KakConvergenceError",
    "NonUnitaryError",
    "kak_decompose",
    "canonical_gate",
    "lcu_coefficients",
    "lcu_terms",
    "reconstruct_from_terms",
    "unitarity_constraints",
]

MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / np.sqrt(2)

# Phases of exp(-i k.sigma sigma) on the magic basis columns are -(LAMBDA @ k).
LAMBDA = np.array([[1, -1, 1], [1, 1, -1], [-1, -1, -1], [-1, 1, 1]], dtype=float)

# Fixed seed for the real-symmetric diagonalisation; keeps results reproducible.
_DIAG_SEED = 20180501
_DIAG_ATTEMPTS = 64


class NonUnitaryError(ValueError):
    """Input was expected to be unitary."""

    def __init__(self, defect: float):
        super().__init__(f"input is not unitary (defect {defect:.3e})")
        self.defect = defect


class KakConvergenceError(RuntimeError):
    """The magic-basis diagonalisation did not produce a real orthogonal frame."""


@dataclass(frozen=True)
class KakDecomposition:
    """Factors of ``U = e^{i global_phase} (p1 x p2) U_D(k) (q1 x q2)``.

    ``alphas`` are the LCU coefficients of the core ``U_D(k)``; the global
    phase is kept separately so that they match the closed-form expressions.
    """

    p1: np.ndarray
    p2: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    k: tuple[float, float, float]
    alphas: np.ndarray
    global_phase: float

    @property
    def k1(self) -> float:
        return self.k[0]

    @property
    def k2(self) -> float:
        return self.k[1]

    @property
    def k3(self) -> float:
        return self.k[2]

    def unitary(self) -> np.ndarray:
        """Rebuild the full 4x4 matrix, global phase included."""
        core = canonical_gate(*self.k)
        return (
            np.exp(1j * self.global_phase)
            * np.kron(self.p1, self.p2)
            @ core
            @ np.kron(self.q1, self.q2)
        )


def canonical_gate(k1: float, k2: float, k3: float) -> np.ndarray:
    """``exp(-i (k1 XX + k2 YY + k3 ZZ))`` evaluated in the magic basis."""
    phases = np.exp(-1j * (LAMBDA @ np.array([k1, k2, k3], dtype=float)))
    return MAGIC @ np.diag(phases) @ dagger(MAGIC)


def lcu_coefficients(k1: float, k2: float, k3: float) -> np.ndarray:
    """Coefficients of ``U_D(k)`` on ``(II, XX, YY, ZZ)``."""
    c1, c2, c3 = np.cos([k1, k2, k3])
    s1, s2, s3 = np.sin([k1, k2, k3])
    return np.array(
        [
            c1 * c2 * c3 - 1j * s1 * s2 * s3,
            c1 * s2 * s3 - 1j * s1 * c2 * c3,
            s1 * c2 * s3 - 1j * c1 * s2 * c3,
            s1 * s2 * c3 - 1j * c1 * c2 * s3,
        ],
        dtype=complex,
    )


def unitarity_constraints(alphas) -> np.ndarray:
    """Residuals of the four conditions making ``sum alpha_i sigma_i sigma_i`` unitary.

    Returns ``[sum|a|^2 - 1, c_xx, c_yy, c_zz]``; all vanish for the
    coefficients of a unitary core.
    """
    a0, a1, a2, a3 = np.asarray(alphas, dtype=complex)

    def cross(a, b):
        return 2.0 * (a * np.conj(b)).real

    return np.array(
        [
            float(np.sum(np.abs([a0, a1, a2, a3]) ** 2) - 1.0),
            cross(a0, a1) - cross(a2, a3),
            cross(a0, a2) - cross(a1, a3),
            cross(a0, a3) - cross(a1, a2),
        ]
    )


def _split_product(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor ``k ~ a (x) b`` into two SU(2) matrices (phase discarded)."""
    t = k.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(t)
    a = np.sqrt(s[0]) * u[:, 0].reshape(2, 2)
    a = a / np.sqrt(np.linalg.det(a))
    # with a fixed, b_kl = sum_ij conj(a_ij) K[(i,k),(j,l)] / 2
    b = np.einsum("ij,ikjl->kl", np.conj(a), k.reshape(2, 2, 2, 2)) / 2.0
    b = b / np.sqrt(np.linalg.det(b))
    return a, b


def _diagonalize_symmetric_unitary(m2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real orthogonal ``V`` (det +1) with ``V^T m2 V`` diagonal.

    ``Re(m2)`` and ``Im(m2)`` commute, so a generic real combination shares
    their eigenvectors. Combinations are drawn from a fixed-seed generator and
    retried until the frame diagonalises ``m2``.
    """
    rng = np.random.default_rng(_DIAG_SEED)
    best = None
    for _ in range(_DIAG_ATTEMPTS):
        a, b = rng.standard_normal(2)
        _, v = np.linalg.eigh(a * m2.real + b * m2.imag)
        d = v.T @ m2 @ v
        off = np.max(np.abs(d - np.diag(np.diagonal(d))))
        if best is None or off < best[0]:
            best = (off, v)
        if off < 1e-13:
            break
    off, v = best
    if off > 1e-9:
        raise KakConvergenceError(f"magic-basis diagonalisation failed (off-diagonal {off:.3e})")
    if np.linalg.det(v) < 0:
        v = v.copy()
        v[:, -1] = -v[:, -1]
    return v, np.diagonal(v.T @ m2 @ v)


class _Frame:
    """Mutable bookkeeping for ``U = e^{i g} (p1 x p2) U_D(k) (q1 x q2)``."""

    def __init__(self, p1, p2, q1, q2, k, g):
        self.p1, self.p2, self.q1, self.q2 = p1, p2, q1, q2
        self.k = np.array(k, dtype=float)
        self.g = float(g)

    def shift(self, j: int, n: int) -> None:
        # U_D(k) = U_D(k - n pi/2 e_j) (-i sigma_j sigma_j)^n
        if n == 0:
            return
        sig = PAULIS[j + 1]
        power = np.linalg.matrix_power(sig, n % 2)
        self.k[j] -= n * np.pi / 2
        self.q1 = power @ self.q1
        self.q2 = power @ self.q2
        self.g -= n * np.pi / 2

    def flip(self, keep: int) -> None:
        # conjugating by sigma_keep on qubit 1 negates the two other angles
        sig = PAULIS[keep + 1]
        for j in range(3):
            if j != keep:
                self.k[j] = -self.k[j]
        self.p1 = self.p1 @ sig
        self.q1 = sig @ self.q1

    def swap(self, a: int, b: int) -> None:
        # (C x C) U_D(k) (C x C)^dagger = U_D(k with k_a <-> k_b)
        pair = {a, b}
        if pair == {0, 1}:
            c = S
        elif pair == {0, 2}:
            c = H
        else:
            c = (I2 - 1j * X) / np.sqrt(2)
        self.k[[a, b]] = self.k[[b, a]]
        cd = dagger(c)
        self.p1 = self.p1 @ cd
        self.p2 = self.p2 @ cd
        self.q1 = c @ self.q1
        self.q2 = c @ self.q2


def _canonicalize(fr: _Frame, tol: float = 1e-9) -> None:
    """Move ``k`` into ``pi/4 >= k1 >= k2 >= |k3|``, compensating in the local gates."""
    # reduce each angle into (-pi/4, pi/4]
    for j in range(3):
        n = int(np.ceil((fr.k[j] - np.pi / 4) / (np.pi / 2) - 1e-12))
        fr.shift(j, n)
    # order by magnitude, largest first (bubble sort via pairwise swaps)
    for _ in range(3):
        for a in range(2):
            if abs(fr.k[a]) + tol < abs(fr.k[a + 1]):
                fr.swap(a, a + 1)
    # make k1, k2 non-negative
    if fr.k[0] < 0 and fr.k[1] < 0:
        fr.flip(2)
    elif fr.k[0] < 0:
        fr.flip(1)
    elif fr.k[1] < 0:
        fr.flip(0)
    # on the k1 = pi/4 face, (pi/4, k2, k3) ~ (pi/4, k2, -k3): prefer k3 >= 0
    if abs(fr.k[0] - np.pi / 4) < tol and fr.k[2] < -tol:
        fr.shift(0, 1)
        fr.flip(1)
    # snap values a rounding error away from exact ties
    for j in range(3):
        if abs(fr.k[j]) < 1e-15:
            fr.k[j] = 0.0


def kak_decompose(u) -> KakDecomposition:
    """Decompose a two-qubit unitary into local gates and canonical angles.

    Raises:
        NonUnitaryError: if ``u`` has a unitarity defect above 1e-8.
        KakConvergenceError: if the internal diagonalisation fails.
    """
    u = as_matrix(u)
    if u.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {u.shape}")
    defect = unitarity_defect(u)
    if defect > 1e-8:
        raise NonUnitaryError(defect)

    det = np.linalg.det(u)
    su = u / det ** 0.25
    up = dagger(MAGIC) @ su @ MAGIC
    v, d2 = _diagonalize_symmetric_unitary(up.T @ up)

    # up = O1 diag(dg) O2 with O2 = V^T; pick square roots so det(dg) = 1
    dg = np.sqrt(d2.astype(complex))
    if np.prod(dg).real < 0:
        dg[-1] = -dg[-1]
    lam = -np.angle(dg)
    lam[3] = -lam[:3].sum()
    dg = np.exp(-1j * lam)
    o1 = up @ v @ np.diag(1.0 / dg)

    k = np.linalg.lstsq(LAMBDA, lam, rcond=None)[0]
    k1_local = MAGIC @ o1.real @ dagger(MAGIC)
    k2_local = MAGIC @ v.T @ dagger(MAGIC)
    p1, p2 = _split_product(k1_local)
    q1, q2 = _split_product(k2_local)

    fr = _Frame(p1, p2, q1, q2, k, 0.0)
    _canonicalize(fr)

    # bring local gates into SU(2) and read off the global phase exactly
    locs = []
    for m in (fr.p1, fr.p2, fr.q1, fr.q2):
        locs.append(m / np.sqrt(np.linalg.det(m)))
    p1, p2, q1, q2 = locs
    k_final = tuple(float(x) for x in fr.k)
    w = np.kron(p1, p2) @ canonical_gate(*k_final) @ np.kron(q1, q2)
    g = float(np.angle(np.vdot(w, u)))
    return KakDecomposition(
        p1=p1,
        p2=p2,
        q1=q1,
        q2=q2,
        k=k_final,
        alphas=lcu_coefficients(*k_final),
        global_phase=g,
    )


def lcu_terms(d: KakDecomposition) -> list[tuple[complex, np.ndarray, np.ndarray]]:
    """The four ``(alpha_i, A_i, B_i)`` with ``A_i = p1 sigma_i q1`` and ``B_i = p2 sigma_i q2``."""
    return [
        (complex(d.alphas[i]), d.p1 @ PAULIS[i] @ d.q1, d.p2 @ PAULIS[i] @ d.q2)
        for i in range(4)
    ]


def reconstruct_from_terms(terms) -> np.ndarray:
    """``sum_i alpha_i A_i (x) B_i``."""
    out = np.zeros((4, 4), dtype=complex)
    for alpha, a, b in terms:
        out += alpha * np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    return out
