"""Hardware model of the chip's interferometers and its calibration procedures.

Conventions: currents in mA, voltages in V, phases in rad, so a heater's
quadratic coefficient ``phi1`` is in rad/mA^2. Beam splitter and phase shifter::

    BS[eta] = [[sqrt(eta), i sqrt(1-eta)], [i sqrt(1-eta), sqrt(eta)]]
    PS[theta] = diag(1, e^{i theta})
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "CalibrationError",
    "ShifterModel",
    "ArrayModel",
    "MziSettings",
    "PumpFilterConfig",
    "component_matrix",
    "beam_splitter",
    "phase_shifter",
    "mzi",
    "mzi_settings",
    "mzi_unitary",
    "array_transfer",
    "array_intensity",
    "fit_iv",
    "phase_from_current",
    "current_for_phase",
    "simulate_fringe",
    "fit_independent_shifter",
    "synthetic_array_scan",
    "fit_cascaded_array",
    "pump_filter_transmission",
    "pump_filter_cross",
    "extinction_db",
    "eta_band_for_extinction",
    "read_scan_csv",
    "write_scan_csv",
]

PUMP_NM = 1550.8
SIGNAL_NM = 1544.2
IDLER_NM = 1557.4
DEFAULT_DELTA_L_UM = 54.0
DEFAULT_GROUP_INDEX = 3.37


class CalibrationError(RuntimeError):
    """A fit did not converge or the data carry no usable signal."""

    def __init__(self, message, residual=None, diagnostics=None):
        super().__init__(message)
        self.residual = residual
        self.diagnostics = diagnostics or []


def beam_splitter(eta: float) -> np.ndarray:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"splitting ratio {eta!r} outside [0, 1]")
    t = np.sqrt(eta)
    r = 1j * np.sqrt(1.0 - eta)
    return np.array([[t, r], [r, t]], dtype=complex)


def phase_shifter(theta: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)


def component_matrix(kind: str, param: float) -> np.ndarray:
    """Transfer matrix of an MMI beam splitter (``"BS"``) or phase shifter (``"PS"``)."""
    kind = kind.upper()
    if kind == "BS":
        if not 0.0 < param < 1.0:
            raise ValueError(f"splitting ratio {param!r} outside (0, 1)")
        return beam_splitter(param)
    if kind == "PS":
        return phase_shifter(param)
    raise ValueError(f"unknown component kind {kind!r}")


def mzi(theta: float, eta_in: float = 0.5, eta_out: float = 0.5) -> np.ndarray:
    """``BS[eta_out] PS[theta] BS[eta_in]``."""
    return beam_splitter(eta_out) @ phase_shifter(theta) @ beam_splitter(eta_in)


@dataclass(frozen=True)
class MziSettings:
    """``e^{i global} PS[phi_out] MZI[theta] PS[phi_in]`` realisation of a 2x2 unitary."""

    theta: float
    phi_in: float
    phi_out: float
    global_phase: float


def mzi_unitary(s: MziSettings, eta_in: float = 0.5, eta_out: float = 0.5) -> np.ndarray:
    return (
        np.exp(1j * s.global_phase)
        * phase_shifter(s.phi_out)
        @ mzi(s.theta, eta_in, eta_out)
        @ phase_shifter(s.phi_in)
    )


def mzi_settings(u) -> MziSettings:
    """Closed-form MZI and phase settings reproducing a 2x2 unitary exactly.

    The balanced MZI is ``i e^{i theta/2} [[-sin(theta/2), cos(theta/2)],
    [cos(theta/2), sin(theta/2)]]``; magnitudes fix ``theta`` and the entry
    phases fix the two external shifters and the global phase.
    """
    u = np.asarray(u, dtype=complex)
    s = abs(u[0, 0])
    c = abs(u[1, 0])
    theta = 2.0 * np.arctan2(s, c)
    mu = np.pi / 2 + theta / 2
    if s > 1e-12 and c > 1e-12:
        g = np.angle(u[0, 0]) - mu - np.pi
        b = np.angle(u[0, 1]) - g - mu
        a = np.angle(u[1, 0]) - g - mu
    elif s <= 1e-12:  # anti-diagonal
        b = 0.0
        g = np.angle(u[0, 1]) - mu
        a = np.angle(u[1, 0]) - g - mu
    else:  # diagonal
        b = 0.0
        g = np.angle(u[0, 0]) - mu - np.pi
        a = np.angle(u[1, 1]) - g - mu
    wrap = lambda x: float(np.mod(x, 2 * np.pi))
    return MziSettings(float(theta), wrap(b), wrap(a), wrap(g))


@dataclass(frozen=True)
class ShifterModel:
    """Thermo-optic heater: ``theta(I) = phi1 I^2 + phi0``."""

    phi1: float
    phi0: float
    resistance: float = 800.0

    def __post_init__(self):
        if self.resistance <= 0:
            raise ValueError("resistance must be positive")

    def phase(self, current):
        return phase_from_current(current, self.phi1, self.phi0)


@dataclass
class ArrayModel:
    """Five cascaded heaters between six MMIs: 16 parameters plus an intensity scale."""

    etas: np.ndarray = field(default_factory=lambda: np.full(6, 0.5))
    phi1: np.ndarray = field(default_factory=lambda: np.full(5, 0.11))
    dtheta: np.ndarray = field(default_factory=lambda: np.full(5, 0.38))
    scale: float = 1.0
    residual: float | None = None

    def __post_init__(self):
        self.etas = np.asarray(self.etas, dtype=float)
        self.phi1 = np.asarray(self.phi1, dtype=float)
        self.dtheta = np.asarray(self.dtheta, dtype=float)
        if self.etas.shape != (6,) or self.phi1.shape != (5,) or self.dtheta.shape != (5,):
            raise ValueError("array model needs 6 splitting ratios and 5 heaters")
        if np.any(self.etas <= 0) or np.any(self.etas >= 1):
            raise ValueError("splitting ratios must lie in (0, 1)")

    def phases(self, currents) -> np.ndarray:
        currents = np.asarray(currents, dtype=float)
        return self.phi1 * currents**2 + self.dtheta

    def intensity(self, currents) -> np.ndarray:
        """Predicted normalised output for rows of 5 currents."""
        return self.scale * array_intensity(self.etas, self.phases(currents))

    def to_dict(self) -> dict:
        return {
            "etas": self.etas.tolist(),
            "phi1": self.phi1.tolist(),
            "dtheta": self.dtheta.tolist(),
            "scale": self.scale,
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArrayModel":
        return cls(d["etas"], d["phi1"], d["dtheta"], d.get("scale", 1.0), d.get("residual"))


def array_transfer(m: ArrayModel | np.ndarray, thetas) -> np.ndarray:
    """``BS[eta5] PS[theta5] ... BS[eta1] PS[theta1] BS[eta0]``.

    ``m`` is an :class:`ArrayModel` or just the six splitting ratios.
    """
    etas = m.etas if isinstance(m, ArrayModel) else np.asarray(m, dtype=float)
    u = beam_splitter(etas[0])
    for eta, th in zip(etas[1:], thetas):
        u = beam_splitter(eta) @ phase_shifter(th) @ u
    return u


def array_intensity(etas, thetas) -> np.ndarray:
    """Vectorised ``|<0|U_array|0>|^2`` for an ``(n, 5)`` array of phases."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    etas = np.asarray(etas, dtype=float)
    # propagate the column U|0> through the mesh for every row at once
    t0, r0 = np.sqrt(etas[0]), np.sqrt(1 - etas[0])
    a = np.full(thetas.shape[0], t0, dtype=complex)
    b = np.full(thetas.shape[0], 1j * r0, dtype=complex)
    for j in range(5):
        b = b * np.exp(1j * thetas[:, j])
        t, r = np.sqrt(etas[j + 1]), np.sqrt(1 - etas[j + 1])
        a, b = t * a + 1j * r * b, 1j * r * a + t * b
    return np.abs(a) ** 2


def fit_iv(samples) -> tuple[float, float, float]:
    """Linear I-V fit ``V = R I + dV``.

    Args:
        samples: ``(current_mA, voltage_V)`` pairs.

    Returns:
        ``(R in ohm, dV in V, residual RMS in V)``.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("expected (current, voltage) pairs")
    i_ma, v = data[:, 0], data[:, 1]
    if np.unique(i_ma).size < 2:
        raise ValueError("I-V fit needs at least two distinct currents")
    a = np.column_stack([i_ma, np.ones_like(i_ma)])
    (slope, offset), *_ = np.linalg.lstsq(a, v, rcond=None)
    rms = float(np.sqrt(np.mean((a @ [slope, offset] - v) ** 2)))
    return float(slope * 1e3), float(offset), rms


def phase_from_current(i, phi1: float, phi0: float):
    return phi1 * np.asarray(i, dtype=float) ** 2 + phi0 if np.ndim(i) else phi1 * float(i) ** 2 + phi0


def current_for_phase(theta: float, phi1: float, phi0: float) -> float:
    """Smallest current ``I >= 0`` giving ``theta`` modulo 2 pi."""
    if phi1 <= 0:
        raise ValueError("phi1 must be positive")
    n = np.ceil((phi0 - theta) / (2 * np.pi) - 1e-15)
    target = theta + 2 * np.pi * max(n, 0.0) if theta < phi0 else theta
    return float(np.sqrt((target - phi0) / phi1))


def simulate_fringe(phi1: float, phi0: float, currents) -> np.ndarray:
    """Output of a balanced MZI with one calibrated heater: ``sin^2(theta(I)/2)``."""
    theta = phase_from_current(np.asarray(currents, dtype=float), phi1, phi0)
    amp = np.array([mzi(t)[0, 0] for t in np.atleast_1d(theta)])
    return np.abs(amp) ** 2


def _fringe_model(p, x):
    return np.sin((p[0] * x + p[1]) / 2.0) ** 2


def _sinusoid_scan(x, y, freqs):
    """Best linear fit ``c0 + c1 cos(f x) + c2 sin(f x)`` over a frequency grid."""
    best = None
    for f in freqs:
        a = np.column_stack([np.ones_like(x), np.cos(f * x), np.sin(f * x)])
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        r = float(np.sum((a @ coef - y) ** 2))
        if best is None or r < best[0]:
            best = (r, f, coef)
    return best


def fit_independent_shifter(scan, max_nfev: int = 500) -> tuple[float, float, float]:
    """Fit ``(phi1, phi0)`` of a heater inside a balanced MZI from an intensity scan.

    Intensity is a sinusoid in ``x = I^2``, so a frequency scan seeds a
    damped least-squares refinement. ``phi1 > 0`` and ``phi0`` in [0, 2 pi)
    fix the sign and 2 pi ambiguities.

    Returns:
        ``(phi1, phi0, residual RMS)``.

    Raises:
        CalibrationError: no fringe in the data or the refinement failed.
    """
    data = np.asarray(scan, dtype=float)
    x = data[:, 0] ** 2
    y = data[:, 1]
    if np.ptp(y) < 1e-6:
        raise CalibrationError("flat scan: no interference fringe to fit", residual=float(np.std(y)))
    span = np.ptp(x)
    # lowest useful frequency: a quarter fringe over the scan; highest: Nyquist-ish
    n = len(x)
    freqs = np.linspace(np.pi / (2 * span), np.pi * n / (2 * span), 40 * n)
    _, f0, coef = _sinusoid_scan(x, y, freqs)
    # y = 1/2 - 1/2 cos(f x + phi0) = 1/2 - 1/2 cos(phi0) cos(fx) + 1/2 sin(phi0) sin(fx)
    phi0_0 = np.arctan2(coef[2], -coef[1])
    res = least_squares(
        lambda p: _fringe_model(p, x) - y,
        x0=[f0, phi0_0],
        method="lm",
        diff_step=1e-6,
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=max_nfev,
    )
    phi1, phi0 = res.x
    if phi1 < 0:
        phi1, phi0 = -phi1, -phi0
    phi0 = float(np.mod(phi0, 2 * np.pi))
    rms = float(np.sqrt(np.mean(res.fun**2)))
    if not res.success and rms > 1e-3:
        raise CalibrationError("fringe fit did not converge", residual=rms)
    if rms > 0.1:
        raise CalibrationError("fringe fit residual too large", residual=rms)
    return float(phi1), phi0, rms


def synthetic_array_scan(
    model: ArrayModel,
    line_step: float = 0.05,
    n_random: int = 600,
    i_max: float = 9.0,
    seed: int = 0,
) -> np.ndarray:
    """Noiseless 5-D scan: one fine line per heater (others at 0 mA) plus random points.

    Returns an ``(n, 6)`` array of ``I1..I5, intensity``.
    """
    rng = np.random.default_rng(seed)
    line = np.arange(0.0, i_max + 1e-9, line_step)
    rows = []
    for j in range(5):
        c = np.zeros((line.size, 5))
        c[:, j] = line
        rows.append(c)
    rows.append(rng.uniform(0.0, i_max, size=(n_random, 5)))
    currents = np.vstack(rows)
    return np.column_stack([currents, model.intensity(currents)])


def _axis_lines(currents):
    """For each heater, the longest run of points where only that heater varies."""
    out = {}
    for j in range(5):
        others = np.delete(currents, j, axis=1)
        keys, inv = np.unique(np.round(others, 9), axis=0, return_inverse=True)
        counts = np.bincount(inv.ravel())
        best = int(np.argmax(counts))
        if counts[best] >= 12:
            out[j] = np.flatnonzero(inv.ravel() == best)
    return out


def _pack(etas, phi1, dtheta, scale):
    return np.concatenate([etas, phi1, dtheta, [scale]])


def _unpack(p):
    return p[:6], p[6:11], p[11:16], p[16]


def _array_residuals(p, currents, y):
    etas, phi1, dtheta, scale = _unpack(p)
    etas = np.clip(etas, 1e-9, 1 - 1e-9)
    return scale * array_intensity(etas, phi1 * currents**2 + dtheta) - y


def fit_cascaded_array(
    scan5d,
    n_starts: int = 8,
    seed: int = 0,
    threshold: float = 1e-6,
    max_nfev: int = 500,
) -> ArrayModel:
    """Least-squares fit of the 16 array parameters and the intensity scale.

    Heater coefficients are seeded from axis-aligned lines in the scan when
    present; offsets are seeded by a coarse per-heater grid search; each of
    ``n_starts`` seeded starts is then refined with a damped least-squares
    solver and the lowest residual wins.

    Raises:
        CalibrationError: best RMS residual above ``threshold``; carries
            per-start diagnostics.
    """
    data = np.asarray(scan5d, dtype=float)
    currents, y = data[:, :5], data[:, 5]
    if np.max(np.abs(y)) < 1e-12:
        raise CalibrationError("all intensities are zero: no light through the array", residual=0.0)
    rng = np.random.default_rng(seed)
    lines = _axis_lines(currents)
    phi_guess = np.full(5, np.nan)
    for j, idx in lines.items():
        x = currents[idx, j] ** 2
        if np.ptp(x) > 0 and np.ptp(y[idx]) > 1e-9:
            n = idx.size
            freqs = np.linspace(np.pi / (2 * np.ptp(x)), np.pi * n / (2 * np.ptp(x)), 20 * n)
            phi_guess[j] = _sinusoid_scan(x, y[idx], freqs)[1]

    diagnostics = []
    best = None
    grid = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    for s in range(n_starts):
        phi1 = np.where(np.isnan(phi_guess), rng.uniform(0.05, 0.3, 5), phi_guess)
        dtheta = rng.uniform(0, 2 * np.pi, 5)
        etas = np.full(6, 0.5) + rng.normal(0, 0.01, 6) * (s > 0)
        scale = float(np.max(y))
        p = _pack(etas, phi1, dtheta, scale)
        # coordinate sweeps over the offsets
        for _ in range(2):
            for j in range(5):
                costs = []
                for g in grid:
                    q = p.copy()
                    q[11 + j] = g
                    costs.append(np.sum(_array_residuals(q, currents, y) ** 2))
                p[11 + j] = grid[int(np.argmin(costs))]
        res = least_squares(
            _array_residuals,
            p,
            args=(currents, y),
            method="lm",
            diff_step=1e-6,
            xtol=1e-10,
            ftol=1e-15,
            gtol=1e-15,
            max_nfev=max_nfev * p.size,
        )
        rms = float(np.sqrt(np.mean(res.fun**2)))
        diagnostics.append({"start": s, "rms": rms, "nfev": int(res.nfev), "status": int(res.status)})
        if best is None or rms < best[0]:
            best = (rms, res.x)
        if rms < threshold * 1e-3:
            break
    rms, p = best
    if rms > threshold:
        raise CalibrationError("calibration failed", residual=rms, diagnostics=diagnostics)
    etas, phi1, dtheta, scale = _unpack(p)
    return ArrayModel(np.clip(etas, 1e-9, 1 - 1e-9), phi1, np.mod(dtheta, 2 * np.pi), float(scale), rms)


@dataclass(frozen=True)
class PumpFilterConfig:
    """Imbalanced MZI used as an on-chip pump filter."""

    delta_l_um: float = DEFAULT_DELTA_L_UM
    group_index: float = DEFAULT_GROUP_INDEX
    eta: float = 0.5
    theta_trim: float | None = None  # None: place the pump at a transmission minimum

    def trim(self) -> float:
        if self.theta_trim is not None:
            return self.theta_trim
        return float(np.mod(-_delay_phase(PUMP_NM, self), 2 * np.pi))


def _delay_phase(lambda_nm, cfg: PumpFilterConfig):
    return 2 * np.pi * cfg.group_index * cfg.delta_l_um * 1e3 / np.asarray(lambda_nm, dtype=float)


def _filter_amplitudes(lambda_nm, cfg: PumpFilterConfig):
    phase = _delay_phase(lambda_nm, cfg) + cfg.trim()
    t, r = np.sqrt(cfg.eta), np.sqrt(1 - cfg.eta)
    # [BS PS BS] column 0: top->top and top->bottom
    e = np.exp(1j * phase)
    top = t * t - r * r * e
    bottom = 1j * r * t + 1j * r * t * e
    return top, bottom


def pump_filter_transmission(lambda_nm, cfg: PumpFilterConfig = PumpFilterConfig()):
    """Top-in to top-out transmission of the imbalanced MZI at wavelength ``lambda_nm``."""
    top, _ = _filter_amplitudes(lambda_nm, cfg)
    return np.abs(top) ** 2


def pump_filter_cross(lambda_nm, cfg: PumpFilterConfig = PumpFilterConfig()):
    _, bottom = _filter_amplitudes(lambda_nm, cfg)
    return np.abs(bottom) ** 2


def extinction_db(cfg: PumpFilterConfig = PumpFilterConfig()) -> float:
    """``10 log10(T_pass / T_pump)`` with the pass level taken at the signal wavelength."""
    t_pass = float(pump_filter_transmission(SIGNAL_NM, cfg))
    t_min = float(pump_filter_transmission(PUMP_NM, cfg))
    if t_min <= 0:
        return float("inf")
    return 10 * np.log10(t_pass / t_min)


def eta_band_for_extinction(min_db: float) -> tuple[float, float]:
    """Splitting ratios whose ideal filter reaches ``min_db`` of pump extinction.

    At the pump minimum ``T = (2 eta - 1)^2`` and the pass level is 1, so the
    band is ``|2 eta - 1| <= 10^(-min_db / 20)``.
    """
    half = 10 ** (-min_db / 20) / 2
    return 0.5 - half, 0.5 + half


def write_scan_csv(path, rows, header):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{float(v):.17g}" for v in r])


def read_scan_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a calibration CSV (``I,V``, ``I,intensity`` or ``I1..I5,intensity``)."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = [h.strip() for h in next(reader)]
        rows = [[float(v) for v in r] for r in reader if r]
    expected = (["I", "V"], ["I", "intensity"], ["I1", "I2", "I3", "I4", "I5", "intensity"])
    if header not in [list(e) for e in expected]:
        raise ValueError(f"unrecognised calibration header {header}")
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def model_to_json(model: ArrayModel) -> str:
    return json.dumps(model.to_dict(), indent=2, sort_keys=True)
