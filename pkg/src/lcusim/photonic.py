"""Path-encoded two-photon model of the LCU chip.

A two-photon state is an amplitude tensor of shape ``(4, 2, 4, 2)`` indexed by
(signal path, signal rail, idler path, idler rail). Paths 0..3 stand for the
signal waveguides a..d and the idler waveguides e..h.

The pipeline is: ququard preparation (heralding factor 1/4), preparation and
local rotations on each path, then a balanced 4-to-1 fan-in per photon with
coincidence post-selection (factor 1/16 times the squared output norm).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import calib
from .lcu import GateRecipe
from .qmath import I2, KET0, as_state, dagger, normalize, unitarity_defect

__all__ = [
    "AnnihilatedStateError",
    "PhotonicState",
    "NoiseModel",
    "ChipConfig",
    "prepare_ququard",
    "apply_prep_and_local_ops",
    "combine_paths",
    "end_to_end_gate",
    "advanced_combiner",
    "measure_in_basis",
    "config_from_recipe",
    "heralded_operator",
    "noisy_config",
    "gate_process_fidelity",
    "mean_noisy_fidelity",
    "FANIN",
    "STAGE1_SUCCESS",
]

STAGE1_SUCCESS = 0.25

# Balanced 4-port fan-in (Sylvester-Hadamard). Port 0 is the port kept by the
# standard design; the advanced design keeps all four.
FANIN = 0.5 * np.array(
    [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=complex
)

_BASES = {
    "Z": I2,
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "Y": np.array([[1, -1j], [1, 1j]], dtype=complex) / np.sqrt(2),
}


class AnnihilatedStateError(ArithmeticError):
    """The post-selected output has zero norm: the operator annihilates the input."""


@dataclass
class PhotonicState:
    amplitudes: np.ndarray
    success_prob_accumulated: float = 1.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (4, 2, 4, 2):
            raise ValueError(f"amplitude tensor must have shape (4, 2, 4, 2), got {self.amplitudes.shape}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian errors on every programmed phase and every MMI splitting ratio."""

    phase_sigma: float = 0.0
    eta_offset_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.phase_sigma < 0 or self.eta_offset_sigma < 0:
            raise ValueError("noise sigmas must be non-negative")

    def rng(self, run_index: int = 0) -> np.random.Generator:
        # independent substream per (seed, run)
        return np.random.default_rng([int(self.seed), int(run_index)])


def _check_unitary_2x2(m, what):
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"{what} must be 2x2, got {m.shape}")
    return m


@dataclass
class ChipConfig:
    """Programmable settings of one gate run on the chip.

    Attributes:
        pump_splitting: four pump amplitudes, unit norm.
        prep_settings: the two input single-qubit states.
        local_ops: ``(A0..A3, B0..B3)``, the per-path rotations.
        measurement_settings: per-qubit basis, ``"Z"``, ``"X"``, ``"Y"`` or a 2x2 unitary.
        noise: optional hardware noise.
        allow_nonunitary: accept non-unitary local operators (idealised studies only).
    """

    pump_splitting: np.ndarray
    prep_settings: tuple = (KET0, KET0)
    local_ops: tuple = field(default_factory=lambda: tuple(I2.copy() for _ in range(8)))
    measurement_settings: tuple = ("Z", "Z")
    noise: NoiseModel | None = None
    allow_nonunitary: bool = False

    def __post_init__(self):
        a = np.asarray(self.pump_splitting, dtype=complex).reshape(-1)
        if a.size != 4:
            raise ValueError("pump splitting needs four amplitudes")
        if abs(np.vdot(a, a).real - 1.0) > 1e-10:
            raise ValueError(f"pump amplitudes not normalized (sum |a|^2 = {np.vdot(a, a).real!r})")
        self.pump_splitting = a
        if len(self.local_ops) != 8:
            raise ValueError("local_ops needs eight 2x2 operators A0..A3, B0..B3")
        self.local_ops = tuple(_check_unitary_2x2(m, "local op") for m in self.local_ops)
        if not self.allow_nonunitary:
            for m in self.local_ops:
                if unitarity_defect(m) > 1e-10:
                    raise ValueError("local operator is not unitary")
        self.prep_settings = tuple(as_state(p, normalized=True) for p in self.prep_settings)

    @property
    def A(self):
        return self.local_ops[:4]

    @property
    def B(self):
        return self.local_ops[4:]

    def to_json(self) -> str:
        def c(z):
            return [float(np.real(z)), float(np.imag(z))]

        def mat(m):
            return [[c(z) for z in row] for row in np.asarray(m)]

        meas = [b if isinstance(b, str) else mat(b) for b in self.measurement_settings]
        d = {
            "pump_splitting": [c(z) for z in self.pump_splitting],
            "prep_settings": [[c(z) for z in p] for p in self.prep_settings],
            "local_ops": [mat(m) for m in self.local_ops],
            "measurement_settings": meas,
            "noise": None
            if self.noise is None
            else {
                "phase_sigma": self.noise.phase_sigma,
                "eta_offset_sigma": self.noise.eta_offset_sigma,
                "seed": self.noise.seed,
            },
            "allow_nonunitary": self.allow_nonunitary,
        }
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ChipConfig":
        d = json.loads(text)

        def z(p):
            return complex(p[0], p[1])

        def mat(m):
            return np.array([[z(p) for p in row] for row in m], dtype=complex)

        meas = tuple(b if isinstance(b, str) else mat(b) for b in d["measurement_settings"])
        noise = None if d.get("noise") is None else NoiseModel(**d["noise"])
        return cls(
            np.array([z(p) for p in d["pump_splitting"]]),
            tuple(np.array([z(p) for p in s]) for s in d["prep_settings"]),
            tuple(mat(m) for m in d["local_ops"]),
            meas,
            noise,
            bool(d.get("allow_nonunitary", False)),
        )


def prepare_ququard(alphas) -> PhotonicState:
    """Path-entangled pair ``sum_i alpha_i |1>_i |1>_i'`` on rail 0, heralded with probability 1/4."""
    a = np.asarray(alphas, dtype=complex).reshape(-1)
    if a.size != 4:
        raise ValueError("need four pump amplitudes")
    if abs(np.vdot(a, a).real - 1.0) > 1e-10:
        raise ValueError("pump amplitudes must be normalized")
    amp = np.zeros((4, 2, 4, 2), dtype=complex)
    for i in range(4):
        amp[i, 0, i, 0] = a[i]
    return PhotonicState(amp, STAGE1_SUCCESS)


def _prep_unitary(phi) -> np.ndarray:
    """A unitary mapping rail 0 (``|0>``) to ``phi``."""
    p0, p1 = as_state(phi, normalized=True)
    return np.array([[p0, -np.conj(p1)], [p1, np.conj(p0)]], dtype=complex)


def apply_prep_and_local_ops(st: PhotonicState, cfg: ChipConfig) -> PhotonicState:
    """Rotate rail 0 of every path into the input qubit, then apply ``A_i`` / ``B_i`` on path ``i``."""
    u1 = _prep_unitary(cfg.prep_settings[0])
    u2 = _prep_unitary(cfg.prep_settings[1])
    sig = np.array([a @ u1 for a in cfg.A])  # (path, out rail, in rail)
    idl = np.array([b @ u2 for b in cfg.B])
    amp = np.einsum("irs,jtu,isju->irjt", sig, idl, st.amplitudes)
    return PhotonicState(amp, st.success_prob_accumulated)


def _fanin(amp, port_s: int, port_i: int) -> np.ndarray:
    """Two-qubit amplitudes at output ports ``(port_s, port_i)`` of the two fan-in networks."""
    return np.einsum("i,j,irjt->rt", FANIN[port_s], FANIN[port_i], amp).reshape(4)


def combine_paths(st: PhotonicState) -> tuple[np.ndarray, float]:
    """Merge the four paths of each photon and post-select one photon per output port.

    Returns:
        ``(normalized two-qubit state, accumulated success probability)``.

    Raises:
        AnnihilatedStateError: nothing survives post-selection.
    """
    out = _fanin(st.amplitudes, 0, 0)
    p = float(np.vdot(out, out).real)
    if p < 1e-24:
        raise AnnihilatedStateError("input annihilated by operator: post-selected state has zero norm")
    return out / np.sqrt(p), st.success_prob_accumulated * p


def advanced_combiner(st: PhotonicState) -> list[tuple[int, np.ndarray, float]]:
    """Keep all four fan-in ports per photon and herald on matched port pairs.

    Signal/idler separation is taken as deterministic, so the stage-1 factor
    is dropped. Port pair ``k`` pairs output ``k`` of both networks; sign
    patterns on unmatched pairs do not reproduce the gate and are discarded.

    Returns:
        ``(pair id, normalized state, probability)`` per pair. Pairs with zero
        probability carry a zero state.

    Raises:
        AnnihilatedStateError: all four pairs vanish.
    """
    scale = 1.0 / STAGE1_SUCCESS
    branches = []
    for k in range(4):
        out = _fanin(st.amplitudes, k, k)
        p = float(np.vdot(out, out).real) * st.success_prob_accumulated * scale
        state = out / np.linalg.norm(out) if p > 1e-24 else np.zeros(4, dtype=complex)
        branches.append((k, state, p))
    if all(p <= 1e-24 for _, _, p in branches):
        raise AnnihilatedStateError("input annihilated by operator on every port pair")
    return branches


def _basis_matrix(b) -> np.ndarray:
    if isinstance(b, str):
        try:
            return _BASES[b.upper()]
        except KeyError:
            raise ValueError(f"unknown measurement basis {b!r}") from None
    u = np.asarray(b, dtype=complex)
    if u.shape != (2, 2) or unitarity_defect(u) > 1e-10:
        raise ValueError("measurement rotation must be a 2x2 unitary")
    return u


def measure_in_basis(output, basis=("Z", "Z")) -> np.ndarray:
    """Born probabilities of the four outcomes ``(00, 01, 10, 11)`` in the chosen bases.

    A string basis measures the eigenbasis of that Pauli (``+`` first); a 2x2
    unitary ``R`` measures the basis ``R^dagger |0>, R^dagger |1>``.
    """
    psi = normalize(output)
    r = np.kron(_basis_matrix(basis[0]), _basis_matrix(basis[1]))
    amp = r @ psi
    p = np.abs(amp) ** 2
    return p / p.sum()


def config_from_recipe(recipe: GateRecipe, inputs=(KET0, KET0), basis=("Z", "Z"), noise=None) -> ChipConfig:
    """Chip settings for a named gate recipe; fewer than four terms get zero-amplitude paths."""
    terms = recipe.padded_terms(4)
    if len(terms) > 4:
        raise ValueError("the chip realises at most four terms")
    alphas = np.array([t[0] for t in terms], dtype=complex)
    n = np.linalg.norm(alphas)
    # Only the direction matters for the gate; the chip needs unit pump power.
    alphas = alphas / n
    ops = tuple(t[1] for t in terms) + tuple(t[2] for t in terms)
    return ChipConfig(alphas, tuple(inputs), ops, tuple(basis), noise, not recipe.unitary_flag)


def _noisy_op(u, rng, noise: NoiseModel):
    s = calib.mzi_settings(u)
    ps = noise.phase_sigma
    s2 = calib.MziSettings(
        s.theta + ps * rng.standard_normal(),
        s.phi_in + ps * rng.standard_normal(),
        s.phi_out + ps * rng.standard_normal(),
        s.global_phase,
    )
    e = 0.5 + noise.eta_offset_sigma * rng.standard_normal(2)
    e = np.clip(e, 1e-6, 1 - 1e-6)
    return calib.mzi_unitary(s2, e[0], e[1])


def noisy_config(cfg: ChipConfig, run_index: int = 0) -> ChipConfig:
    """Draw one hardware realisation of ``cfg`` under its noise model.

    Every local rotation and state preparation is compiled to MZI settings,
    whose phases and splitting ratios are perturbed; each pump amplitude gets
    a phase error.
    """
    if cfg.noise is None or (cfg.noise.phase_sigma == 0 and cfg.noise.eta_offset_sigma == 0):
        return cfg
    rng = cfg.noise.rng(run_index)
    ps = cfg.noise.phase_sigma
    alphas = cfg.pump_splitting * np.exp(1j * ps * rng.standard_normal(4))
    ops = tuple(_noisy_op(m, rng, cfg.noise) if unitarity_defect(m) <= 1e-10 else m for m in cfg.local_ops)
    preps = tuple(_noisy_op(_prep_unitary(p), rng, cfg.noise) @ KET0 for p in cfg.prep_settings)
    return replace(cfg, pump_splitting=alphas, local_ops=ops, prep_settings=preps)


def end_to_end_gate(cfg: ChipConfig, inputs=None, run_index: int = 0) -> tuple[np.ndarray, float]:
    """Full chip run: prepare, rotate, combine.

    Args:
        cfg: chip settings.
        inputs: optional pair of single-qubit states overriding ``cfg.prep_settings``.
        run_index: selects the noise substream.

    Returns:
        ``(normalized output state, total success probability)``.
    """
    if inputs is not None:
        cfg = replace(cfg, prep_settings=tuple(inputs))
        cfg.__post_init__()
    cfg = noisy_config(cfg, run_index)
    st = prepare_ququard(cfg.pump_splitting)
    st = apply_prep_and_local_ops(st, cfg)
    return combine_paths(st)


def heralded_operator(cfg: ChipConfig) -> np.ndarray:
    """The 4x4 operator ``sum_i alpha_i A_i (x) B_i`` programmed by ``cfg``."""
    return sum(a * np.kron(A, B) for a, A, B in zip(cfg.pump_splitting, cfg.A, cfg.B))


def gate_process_fidelity(target, cfg: ChipConfig, run_index: int = 0) -> float:
    """Process fidelity of the heralded (trace-normalized) chip operator with ``target``.

    For a single-Kraus process ``M`` the Pauli chi-matrix overlap with the
    unitary ``U`` is ``|Tr(U^dagger M)|^2 / (4 Tr(M^dagger M))``.
    """
    m = heralded_operator(noisy_config(cfg, run_index))
    u = np.asarray(target, dtype=complex)
    return float(abs(np.trace(dagger(u) @ m)) ** 2 / (4 * np.trace(dagger(m) @ m).real))


def mean_noisy_fidelity(recipe: GateRecipe, target, phase_sigma: float, n_seeds: int = 20, eta_offset_sigma: float = 0.0) -> float:
    """Mean process fidelity over seeds ``0..n_seeds-1``."""
    vals = []
    for seed in range(n_seeds):
        noise = NoiseModel(phase_sigma, eta_offset_sigma, seed)
        cfg = config_from_recipe(recipe, noise=noise)
        vals.append(gate_process_fidelity(target, cfg))
    return float(np.mean(vals))
