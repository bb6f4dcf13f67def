"""Two-qubit state and process tomography with Poisson maximum likelihood.

Process matrices use the unnormalised Pauli products ``sigma_a (x) sigma_b``
(index ``4a + b``) as operator basis with ``Tr(chi) = 1``, so a unitary ``U``
has ``chi = c c^dagger`` with ``c_m = Tr(sigma_m U) / 4`` and the process
fidelity of two unitaries is ``|Tr(U^dagger V) / 4|^2``.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .qmath import KET0, KET1, KET_PLUS, KET_PLUS_I, PAULI_BASIS_2Q, dagger

__all__ = [
    "TomographyError",
    "TomographyDataset",
    "SINGLE_QUBIT_STATES",
    "tomography_bases",
    "chi_from_unitary",
    "chi_from_kraus",
    "predict_probability",
    "predict_all",
    "expected_dataset",
    "sample_counts",
    "linear_inversion",
    "mle_reconstruct_state",
    "mle_reconstruct_process",
    "tp_residual",
    "process_fidelity",
    "classical_fidelity",
    "monte_carlo_errorbars",
    "mc_replica",
    "tp_map",
    "chi_to_json",
    "chi_from_json",
]

SINGLE_QUBIT_STATES = (KET0, KET1, KET_PLUS, KET_PLUS_I)
LABELS = ("0", "1", "+", "+i")
DEFAULT_RATE = 100.0
DEFAULT_TIME = 10.0
TP_WEIGHT = 1e3


class TomographyError(RuntimeError):
    """Reconstruction impossible (no data, rank-deficient design) or not converged."""

    def __init__(self, message, nll=None):
        super().__init__(message)
        self.nll = nll


def tomography_bases() -> tuple[np.ndarray, np.ndarray]:
    """The 16 product inputs and the 16 product projector vectors, both in ``4a + b`` order.

    Returns:
        Two ``(16, 4)`` arrays of kets.
    """
    kets = np.array([np.kron(a, b) for a in SINGLE_QUBIT_STATES for b in SINGLE_QUBIT_STATES])
    return kets, kets.copy()


_INPUTS, _PROJ = tomography_bases()
# a[i, k, m] = <pi_k| sigma_m |psi_i>; probabilities are v^dagger chi v with v = conj(a)
_AMPS = np.einsum("kx,mxy,iy->ikm", _PROJ.conj(), PAULI_BASIS_2Q, _INPUTS)
_V = _AMPS.conj()
# B[m, n] = sigma_n^dagger sigma_m for the trace-preservation map
_B = np.einsum("nyx,myz->mnxz", PAULI_BASIS_2Q.conj(), PAULI_BASIS_2Q)


def chi_from_unitary(u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    c = np.einsum("mij,ji->m", PAULI_BASIS_2Q, u) / 4.0
    return np.outer(c, c.conj())


def chi_from_kraus(kraus) -> np.ndarray:
    """Chi matrix of ``rho -> sum_k K rho K^dagger``."""
    return sum(chi_from_unitary(k) for k in kraus)


def _probs(chi, v):
    return np.einsum("km,mn,kn->k", v.conj(), chi, v).real


def predict_probability(chi, input_index: int, projector_index: int) -> float:
    """``Tr(Pi_j sum chi_mn A_m rho_i A_n^dagger)`` clipped to [0, 1]."""
    v = _V[input_index, projector_index]
    p = float(np.real(v.conj() @ np.asarray(chi) @ v))
    if p < -1e-8 or p > 1 + 1e-8:
        warnings.warn(f"predicted probability {p!r} outside [0, 1]; clipped", RuntimeWarning, stacklevel=2)
    return min(max(p, 0.0), 1.0)


def predict_all(chi) -> np.ndarray:
    """All 256 probabilities, row ``i`` = input, column ``j`` = projector."""
    p = _probs(np.asarray(chi, dtype=complex), _V.reshape(256, 16)).reshape(16, 16)
    return np.clip(p, 0.0, 1.0)


@dataclass
class TomographyDataset:
    """Coincidence records ``(input, projector, counts, time, rate)``; counts may be
    non-integer expectations for noiseless studies."""

    input_index: np.ndarray
    projector_index: np.ndarray
    counts: np.ndarray
    time_s: np.ndarray
    rate_hint: np.ndarray

    def __post_init__(self):
        self.input_index = np.asarray(self.input_index, dtype=int)
        self.projector_index = np.asarray(self.projector_index, dtype=int)
        self.counts = np.asarray(self.counts, dtype=float)
        n = self.counts.size
        self.time_s = np.broadcast_to(np.asarray(self.time_s, dtype=float), (n,)).copy()
        self.rate_hint = np.broadcast_to(np.asarray(self.rate_hint, dtype=float), (n,)).copy()
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        if np.any(self.time_s <= 0) or np.any(self.rate_hint <= 0):
            raise ValueError("integration time and rate must be positive")

    def __len__(self):
        return self.counts.size

    @property
    def exposure(self) -> np.ndarray:
        return self.time_s * self.rate_hint

    def with_counts(self, counts) -> "TomographyDataset":
        return TomographyDataset(self.input_index, self.projector_index, counts, self.time_s, self.rate_hint)

    def subset(self, input_index: int) -> "TomographyDataset":
        m = self.input_index == input_index
        return TomographyDataset(
            self.input_index[m], self.projector_index[m], self.counts[m], self.time_s[m], self.rate_hint[m]
        )

    def to_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["input_index", "projector_index", "counts", "time_s", "rate_hint"])
            for row in zip(self.input_index, self.projector_index, self.counts, self.time_s, self.rate_hint):
                w.writerow([int(row[0]), int(row[1])] + [f"{float(x):.17g}" for x in row[2:]])

    @classmethod
    def from_csv(cls, path) -> "TomographyDataset":
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
        cols = {k: [r[k] for r in rows] for k in ("input_index", "projector_index", "counts", "time_s", "rate_hint")}
        return cls(
            np.array(cols["input_index"], dtype=int),
            np.array(cols["projector_index"], dtype=int),
            np.array(cols["counts"], dtype=float),
            np.array(cols["time_s"], dtype=float),
            np.array(cols["rate_hint"], dtype=float),
        )


def _full_index():
    i, j = np.divmod(np.arange(256), 16)
    return i, j


def expected_dataset(chi, rate: float = DEFAULT_RATE, time: float = DEFAULT_TIME) -> TomographyDataset:
    """Infinite-statistics dataset: counts equal their expectations."""
    i, j = _full_index()
    p = predict_all(chi).reshape(-1)
    return TomographyDataset(i, j, p * rate * time, time, rate)


def sample_counts(probabilities, rate: float = DEFAULT_RATE, time: float = DEFAULT_TIME, seed=0) -> TomographyDataset:
    """Poisson counts for a ``(16, 16)`` table (or flat 256-vector) of probabilities."""
    if rate <= 0 or time <= 0:
        raise ValueError("rate and time must be positive")
    p = np.asarray(probabilities, dtype=float).reshape(-1)
    if p.size != 256:
        raise ValueError("expected 256 probabilities")
    if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
        raise ValueError("probabilities must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(np.clip(p, 0, 1) * rate * time)
    i, j = _full_index()
    return TomographyDataset(i, j, counts, time, rate)


def _hermitian_basis(d: int) -> np.ndarray:
    """``d^2`` real-orthogonal Hermitian basis matrices."""
    out = []
    for m in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[m, m] = 1
        out.append(e)
    for m in range(d):
        for n in range(m + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[m, n] = e[n, m] = 1
            out.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[m, n], e[n, m] = -1j, 1j
            out.append(e)
    return np.array(out)


_HB16 = _hermitian_basis(16)


def _design(ds: TomographyDataset) -> np.ndarray:
    v = _V[ds.input_index, ds.projector_index]  # (n, 16)
    return np.einsum("km,bmn,kn->kb", v.conj(), _HB16, v).real


def linear_inversion(ds: TomographyDataset) -> np.ndarray:
    """Unconstrained least-squares chi from the count frequencies.

    Raises:
        TomographyError: the records do not determine chi.
    """
    a = _design(ds)
    if np.linalg.matrix_rank(a, tol=1e-9) < 256:
        raise TomographyError("rank-deficient tomography data: records do not determine chi")
    x, *_ = np.linalg.lstsq(a, ds.counts / ds.exposure, rcond=None)
    return np.einsum("b,bmn->mn", x, _HB16)


def tp_map(chi) -> np.ndarray:
    """``sum_mn chi_mn A_n^dagger A_m`` (identity for trace-preserving chi)."""
    return np.einsum("mn,mnij->ij", chi, _B)


def tp_residual(chi) -> float:
    return float(np.max(np.abs(tp_map(chi) - np.eye(4))))


def _unpack_t(x, d):
    t = np.zeros((d, d), dtype=complex)
    il = np.tril_indices(d)
    n = il[0].size
    t[il] = x[:n] + 1j * x[n:]
    return t


def _tri_grad(g, d):
    il = np.tril_indices(d)
    return np.concatenate([2 * g.real[il], -2 * g.imag[il]])


def _mle(v, counts, exposure, d, penalty=None, maxiter=2000):
    """Minimise the Poisson NLL over ``rho = T^dagger T / Tr`` (T lower-triangular).

    ``v`` holds one measurement vector per record with ``p = v^dagger rho v``.
    ``penalty(rho) -> (value, hermitian gradient)`` is added when given.
    """
    il = np.tril_indices(d)
    n = il[0].size
    # the real-lower-triangle slice of T is the full parameter set for the
    # complex part too; the imaginary diagonal is a gauge freedom and harmless
    floor = 1e-15

    def f(x):
        t = _unpack_t(x, d)
        tr = float(np.vdot(t, t).real)
        rho = dagger(t) @ t / tr
        p = _probs(rho, v)
        lam = exposure * np.maximum(p, floor)
        nll = float(np.sum(lam - counts * np.log(lam)))
        c = exposure - counts / np.maximum(p, floor)
        g = (v.T * c) @ v.conj()
        if penalty is not None:
            pv, pg = penalty(rho)
            nll += pv
            g = g + pg
        h = (g - np.trace(g @ rho).real * np.eye(d)) / tr
        grad = _tri_grad((h @ dagger(t)).T, d)
        return nll, grad

    x0 = np.zeros(2 * n)
    x0[:n][il[0] == il[1]] = 1.0  # T = I: maximally mixed start
    res = minimize(f, x0, jac=True, method="L-BFGS-B", options={"maxiter": maxiter, "ftol": 1e-16, "gtol": 1e-12, "maxcor": 30})
    t = _unpack_t(res.x, d)
    rho = dagger(t) @ t
    rho = rho / np.trace(rho).real
    if not np.all(np.isfinite(rho)):
        raise TomographyError("likelihood maximisation diverged", nll=float(res.fun))
    if res.nit >= maxiter:
        warnings.warn(f"MLE hit the iteration cap; final NLL {res.fun!r}", RuntimeWarning, stacklevel=3)
    return (rho + dagger(rho)) / 2, float(res.fun)


def _tp_penalty(chi):
    r = tp_map(chi) - np.eye(4)
    val = TP_WEIGHT * float(np.sum(np.abs(r) ** 2))
    m = np.einsum("ji,mnij->mn", r, _B)  # Tr(R B_mn)
    return val, 2 * TP_WEIGHT * m.T


def _check_data(ds: TomographyDataset):
    if len(ds) == 0 or np.sum(ds.counts) <= 0:
        raise TomographyError("no counts recorded: nothing to reconstruct")


def mle_reconstruct_state(ds: TomographyDataset) -> np.ndarray:
    """Physical density matrix from the projector records of a single input.

    Raises:
        TomographyError: empty or non-informationally-complete data.
    """
    _check_data(ds)
    if np.unique(ds.input_index).size != 1:
        raise ValueError("state reconstruction needs records of a single input")
    v = _PROJ[ds.projector_index]
    gram = np.einsum("km,kn->kmn", v, v.conj()).reshape(len(ds), 16)
    if np.linalg.matrix_rank(gram, tol=1e-9) < 16:
        raise TomographyError("projector records are not informationally complete")
    rho, _ = _mle(v, ds.counts, ds.exposure, 4)
    return rho


def mle_reconstruct_process(ds: TomographyDataset, maxiter: int = 2000) -> np.ndarray:
    """Physical chi maximising the Poisson likelihood, with a soft trace-preservation penalty.

    Raises:
        TomographyError: empty or rank-deficient data.
    """
    _check_data(ds)
    if np.linalg.matrix_rank(_design(ds), tol=1e-9) < 256:
        raise TomographyError("rank-deficient tomography data: records do not determine chi")
    v = _V[ds.input_index, ds.projector_index]
    chi, _ = _mle(v, ds.counts, ds.exposure, 16, penalty=_tp_penalty, maxiter=maxiter)
    return chi


def process_fidelity(a, b) -> float:
    """``Tr(a b)`` for two trace-normalised chi matrices."""
    f = np.trace(np.asarray(a) @ np.asarray(b))
    if abs(f.imag) > 1e-9:
        warnings.warn(f"process fidelity has imaginary part {f.imag!r}", RuntimeWarning, stacklevel=2)
    f = float(f.real)
    if f < -1e-8 or f > 1 + 1e-8:
        warnings.warn(f"process fidelity {f!r} outside [0, 1]", RuntimeWarning, stacklevel=2)
    return f


def classical_fidelity(p, q) -> float:
    """Bhattacharyya overlap ``sum sqrt(p_i q_i)`` of two distributions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    for name, d in (("p", p), ("q", q)):
        if np.any(d < 0) or abs(d.sum() - 1) > 1e-9:
            raise ValueError(f"{name} is not a probability distribution")
    return min(float(np.sum(np.sqrt(p * q))), 1.0)


def mc_replica(ds: TomographyDataset, ideal_chi, seed: int, k: int, maxiter: int = 2000) -> float | None:
    """Fidelity of Monte-Carlo replica ``k``, or ``None`` if its reconstruction failed."""
    rng = np.random.default_rng([int(seed), int(k)])
    replica = ds.with_counts(rng.poisson(ds.counts))
    try:
        chi = mle_reconstruct_process(replica, maxiter=maxiter)
    except TomographyError:
        return None
    return process_fidelity(ideal_chi, chi)


def monte_carlo_errorbars(ds: TomographyDataset, ideal_chi, n_resamples: int = 50, seed: int = 0, maxiter: int = 2000) -> tuple[float, float, int]:
    """Poisson-resample the counts, reconstruct each replica, and summarise the fidelity.

    Replica ``k`` uses the generator seeded by ``(seed, k)``, so results do not
    depend on evaluation order.

    Returns:
        ``(mean fidelity, std, number of failed replicas)``.

    Raises:
        TomographyError: every replica failed.
    """
    if n_resamples < 2:
        raise ValueError("need at least two resamples")
    _check_data(ds)
    fids = []
    failed = 0
    for k in range(n_resamples):
        f = mc_replica(ds, ideal_chi, seed, k, maxiter)
        if f is None:
            failed += 1
        else:
            fids.append(f)
    if not fids:
        raise TomographyError("all Monte-Carlo replicas failed")
    return float(np.mean(fids)), float(np.std(fids, ddof=1)) if len(fids) > 1 else 0.0, failed


def chi_to_json(chi) -> str:
    chi = np.asarray(chi, dtype=complex)
    return json.dumps([[[float(z.real), float(z.imag)] for z in row] for row in chi])


def chi_from_json(text: str) -> np.ndarray:
    return np.array([[complex(a, b) for a, b in row] for row in json.loads(text)], dtype=complex)
