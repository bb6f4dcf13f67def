"""Dense complex linear algebra shared by the simulator modules.

Matrices and states are plain ``numpy`` arrays of dtype ``complex128``.
Two-qubit operators use the ordering ``|q1 q2>`` with ``q1`` the most
significant index, so ``kron(a, b)`` acts with ``a`` on qubit 1.
"""

from __future__ import annotations

import numpy as np

# Tolerances used across the package.
UNITARY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-8
PSD_SLACK = 1e-9

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
PAULIS = (I2, X, Y, Z)

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
CH = np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), H]]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
ISWAP = np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex)
SQRT_SWAP = np.array(
    [
        [1, 0, 0, 0],
        [0, (1 + 1j) / 2, (1 - 1j) / 2, 0],
        [0, (1 - 1j) / 2, (1 + 1j) / 2, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
KET_PLUS_I = np.array([1, 1j], dtype=complex) / np.sqrt(2)
KET_MINUS_I = np.array([1, -1j], dtype=complex) / np.sqrt(2)


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array, raising ``ValueError`` otherwise."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def as_state(v, normalized: bool = False) -> np.ndarray:
    """Return ``v`` as a finite 1-D complex state vector.

    With ``normalized=True`` the norm is checked (not rescaled) to within 1e-10.
    """
    psi = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(psi)):
        raise ValueError("state contains NaN or Inf entries")
    if normalized:
        norm2 = float(np.vdot(psi, psi).real)
        if abs(norm2 - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm^2 = {norm2!r})")
    return psi


def normalize(v) -> np.ndarray:
    psi = np.asarray(v, dtype=complex).reshape(-1)
    n = np.linalg.norm(psi)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / n


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product with ``a`` on the slow (most significant) index."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices or vectors."""
    out = np.array([[1.0 + 0j]]) if np.ndim(ops[0]) == 2 else np.array([1.0 + 0j])
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def dagger(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def unitarity_defect(u) -> float:
    """Max-norm of ``u^dagger u - I``."""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ValueError(f"unitarity defect needs a square matrix, got {u.shape}")
    return float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))))


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(u) <= tol


def global_phase_distance(u, v) -> float:
    """Smallest max-norm distance between ``u`` and ``e^{i phi} v`` over ``phi``.

    The phase is taken from ``arg Tr(v^dagger u)``. When that trace vanishes
    the phase is undefined, and a 360-point grid over ``phi`` is searched
    instead.
    """
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    overlap = np.vdot(v, u)  # Tr(v^dagger u)
    scale = max(np.linalg.norm(u), np.linalg.norm(v), 1.0)
    if abs(overlap) > 1e-12 * scale * scale:
        phase = np.exp(1j * np.angle(overlap))
        return float(np.max(np.abs(u - phase * v)))
    return phase_grid_distance(u, v, 360)


def phase_grid_distance(u, v, n_points: int = 360) -> float:
    """Brute-force ``min_phi max|u - e^{i phi} v|`` on an ``n_points`` grid."""
    u = as_matrix(u)
    v = as_matrix(v)
    phis = np.arange(n_points) * (2 * np.pi / n_points)
    diffs = u[None] - np.exp(1j * phis)[:, None, None] * v[None]
    return float(np.min(np.max(np.abs(diffs), axis=(1, 2))))


def state_phase_distance(psi, phi) -> float:
    """Max-norm distance between two state vectors up to a global phase."""
    psi = as_state(psi)
    phi = as_state(phi)
    return global_phase_distance(psi[:, None], phi[:, None])


def density(psi) -> np.ndarray:
    psi = as_state(psi)
    return np.outer(psi, np.conj(psi))


def state_fidelity(pure, rho) -> float:
    """Fidelity ``<psi|rho|psi>`` of a pure state against a density matrix."""
    psi = as_state(pure, normalized=True)
    rho = as_matrix(rho)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: state {psi.size}, density matrix {rho.shape}")
    return float(np.vdot(psi, rho @ psi).real)


def is_density_matrix(rho, tol: float = PSD_SLACK) -> bool:
    """Hermitian, positive semidefinite and unit trace, within ``tol``."""
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        return False
    if np.max(np.abs(rho - dagger(rho))) > UNITARY_TOL:
        return False
    if abs(np.trace(rho).real - 1.0) > tol or abs(np.trace(rho).imag) > tol:
        return False
    return bool(np.min(np.linalg.eigvalsh((rho + dagger(rho)) / 2)) >= -tol)


def trace_distance(rho, sigma) -> float:
    d = as_matrix(rho) - as_matrix(sigma)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((d + dagger(d)) / 2))))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``n x n`` unitary via QR of a complex Gaussian matrix."""
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_su(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SU(n)."""
    u = haar_unitary(n, rng)
    return u / np.linalg.det(u) ** (1.0 / n)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def pauli_product(a: int, b: int) -> np.ndarray:
    """``sigma_a (x) sigma_b`` with 0..3 = I, X, Y, Z."""
    return np.kron(PAULIS[a], PAULIS[b])


PAULI_BASIS_2Q = np.array([pauli_product(a, b) for a in range(4) for b in range(4)])
