"""Command-line experiment runner.

Usage::

    lcusim <command> --config FILE [--seed N] [--out DIR] [--parallel K]

A config is a JSON object ``{"command", "seed", "parameters", "output_dir"}``
validated against a per-command schema. Outputs are deterministic in
``(config, seed)``: independent tasks draw seeds from a hash of the master
seed and the task name, and results are assembled in task order whatever the
worker count. Exit status is 0 on success, 2 for configuration or I/O
errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import calib, kak, lcu, photonic, qaoa, szegedy, tomography
from .qmath import KET0, KET1, KET_PLUS, KET_PLUS_I, haar_su, normalize, random_state, state_phase_distance

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRecord",
    "COMMANDS",
    "validate_config",
    "run",
    "emit_outputs",
    "task_seed",
    "main",
]

COMMANDS = ("decompose", "gate", "qpt", "qaoa", "szegedy", "calibrate")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

NUMERICAL_ERRORS = (
    ArithmeticError,
    np.linalg.LinAlgError,
    calib.CalibrationError,
    tomography.TomographyError,
    kak.KakConvergenceError,
    lcu.LcuConstraintError,
)


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every violation found."""

    def __init__(self, errors):
        self.errors = list(errors) if not isinstance(errors, str) else [errors]
        super().__init__("; ".join(self.errors))


# ---------------------------------------------------------------- schemas

_NUM = {"type": "number"}
_COMPLEX = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}


def _matrix(n):
    row = {"type": "array", "items": _COMPLEX, "minItems": n, "maxItems": n}
    return {"type": "array", "items": row, "minItems": n, "maxItems": n}


_GATE_NAMES = ["I", "CNOT", "CZ", "CH", "SWAP", "ISWAP", "SQRT_SWAP", "CU", "EF", "ES"]
_GATE_PROPS = {
    "gate": {"type": "string", "enum": _GATE_NAMES},
    "v": _matrix(2),
    "matrix": _matrix(4),
}
_NOISE = {
    "type": "object",
    "properties": {
        "phase_sigma": {"type": "number", "minimum": 0},
        "eta_offset_sigma": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


PARAM_SCHEMAS = {
    "decompose": _obj(
        {
            **_GATE_PROPS,
            "gate": {"type": "string", "enum": _GATE_NAMES + ["RANDOM"]},
            "count": {"type": "integer", "minimum": 1, "maximum": 100000},
        }
    ),
    "gate": _obj(
        {
            **_GATE_PROPS,
            "design": {"type": "string", "enum": ["standard", "advanced"]},
            "noise": _NOISE,
            "runs": {"type": "integer", "minimum": 1, "maximum": 10000},
            "n_random": {"type": "integer", "minimum": 0, "maximum": 100000},
        }
    ),
    "qpt": _obj(
        {
            **_GATE_PROPS,
            "rate": {"type": "number", "exclusiveMinimum": 0},
            "time": {"type": "number", "exclusiveMinimum": 0},
            "sampling": {"type": "string", "enum": ["expected", "poisson"]},
            "noise": _NOISE,
            "mc_resamples": {"type": "integer", "minimum": 0, "maximum": 10000},
        }
    ),
    "qaoa": _obj(
        {
            "csp": {
                "oneOf": [
                    {"type": "integer", "enum": [1, 2, 3]},
                    {
                        "type": "array",
                        "minItems": 1,
                        "items": _obj(
                            {
                                "terms": {"type": "string", "enum": ["z1", "z2", "z1z2"]},
                                "sign": {"type": "integer", "enum": [-1, 1]},
                            },
                            ["terms"],
                        ),
                    },
                ]
            },
            "delta_gamma": {"type": "number", "exclusiveMinimum": 0},
            "delta_beta": {"type": "number", "exclusiveMinimum": 0},
            "closed": {"type": "boolean"},
        },
        ["csp"],
    ),
    "szegedy": _obj(
        {
            "cases": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "oneOf": [
                        _obj(
                            {
                                "alpha": {"type": "number", "minimum": 0, "maximum": 1},
                                "beta": {"type": "number", "minimum": 0, "maximum": 1},
                            },
                            ["alpha", "beta"],
                        ),
                        _obj(
                            {
                                "matrix": {
                                    "type": "array",
                                    "minItems": 2,
                                    "items": {"type": "array", "items": {"type": "number", "minimum": 0}},
                                }
                            },
                            ["matrix"],
                        ),
                    ]
                },
            },
            "initial_states": {
                "type": "array",
                "minItems": 1,
                "items": {"type": "string", "enum": ["00", "0+", "0+i"]},
            },
            "steps": {"type": "integer", "minimum": 1, "maximum": 100000},
            "n_max": {"type": "integer", "minimum": 1, "maximum": 100000},
        }
    ),
    "calibrate": _obj(
        {
            "mode": {"type": "string", "enum": ["iv", "shifter", "array", "filter"]},
            "data": {"type": "string"},
            "truth": {"type": "object"},
            "noise": {"type": "number", "minimum": 0},
            "n_starts": {"type": "integer", "minimum": 1, "maximum": 1000},
            "threshold": {"type": "number", "exclusiveMinimum": 0},
            "filter": _obj(
                {
                    "delta_l_um": {"type": "number", "exclusiveMinimum": 0},
                    "group_index": {"type": "number", "exclusiveMinimum": 0},
                    "eta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                    "theta_trim": {"type": "number"},
                    "lambda_min": {"type": "number", "exclusiveMinimum": 0},
                    "lambda_max": {"type": "number", "exclusiveMinimum": 0},
                    "n_points": {"type": "integer", "minimum": 2, "maximum": 1000000},
                }
            ),
        },
        ["mode"],
    ),
}

CONFIG_SCHEMA = _obj(
    {
        "command": {"type": "string", "enum": list(COMMANDS)},
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "parameters": {"type": "object"},
    },
    ["command"],
)


@dataclass
class ExperimentConfig:
    command: str
    parameters: dict
    seed: int = 0
    output_dir: str | None = None
    base_dir: Path = field(default_factory=Path.cwd)

    def canonical(self) -> str:
        return json.dumps(
            {"command": self.command, "parameters": self.parameters, "seed": self.seed},
            sort_keys=True,
            separators=(",", ":"),
        )

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def _reject_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ConfigError([f"duplicate key {k!r}"])
        out[k] = v
    return out


def _path(err) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def _describe(err) -> str:
    # for oneOf/anyOf failures, name the most specific offending field
    if err.context:
        specific = [e for e in err.context if e.validator not in ("required", "additionalProperties", "type", "enum")]
        specific = specific or [e for e in err.context if e.validator == "enum"]
        err = min(specific, key=lambda e: list(e.absolute_path)) if specific else jsonschema.exceptions.best_match(err.context)
    return f"{_path(err)}: {err.message}"


def validate_config(text: str, base_dir=None) -> ExperimentConfig:
    """Parse and validate a config, reporting all schema violations at once.

    Raises:
        ConfigError: malformed JSON, duplicate keys, or schema violations.
    """
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON: {exc}"]) from None
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = [_describe(e) for e in sorted(validator.iter_errors(raw), key=str)]
    if isinstance(raw, dict) and raw.get("command") in PARAM_SCHEMAS:
        pv = jsonschema.Draft202012Validator(PARAM_SCHEMAS[raw["command"]])
        params = raw.get("parameters", {})
        for e in sorted(pv.iter_errors(params), key=lambda e: (_path(e), e.message)):
            errors.append(f"parameters/{_describe(e)}")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        raw["command"],
        raw.get("parameters", {}),
        raw.get("seed", 0),
        raw.get("output_dir"),
        Path(base_dir) if base_dir is not None else Path.cwd(),
    )


def task_seed(master: int, task: str) -> int:
    """Stable per-task seed from the master seed and a task name."""
    digest = hashlib.sha256(f"{master}/{task}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


# ---------------------------------------------------------------- records


@dataclass
class ResultRecord:
    command: str
    config_hash: str
    seed: int
    metrics: dict
    files: dict = field(default_factory=dict)  # name -> text content

    def to_json(self) -> str:
        return json.dumps(
            {
                "command": self.command,
                "config_hash": self.config_hash,
                "seed": self.seed,
                "metrics": self.metrics,
                "files": self.files,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        d = json.loads(text)
        return cls(d["command"], d["config_hash"], d["seed"], d["metrics"], d["files"])


def _g(x) -> str:
    return f"{float(x):.17g}"


def _csv(header, rows, config_hash) -> str:
    lines = [f"# config_hash={config_hash}", ",".join(header)]
    for r in rows:
        lines.append(",".join(v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else _g(v)) for v in r))
    return "\n".join(lines) + "\n"


def _json(obj, config_hash) -> str:
    return json.dumps({"config_hash": config_hash, **obj}, indent=2, sort_keys=True) + "\n"


def _cjson(z):
    return [float(np.real(z)), float(np.imag(z))]


def _mjson(m):
    return [[_cjson(z) for z in row] for row in np.asarray(m)]


def _from_mjson(m):
    return np.array([[complex(a, b) for a, b in row] for row in m], dtype=complex)


def _versions():
    import scipy

    from . import __version__

    return {"lcusim": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def emit_outputs(record: ResultRecord, out_dir) -> list[Path]:
    """Write every file of ``record`` plus ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(record.files):
        p = out / name
        p.write_text(record.files[name], encoding="utf-8", newline="\n")
        written.append(p)
    manifest = {
        "command": record.command,
        "seed": record.seed,
        "metrics": record.metrics,
        "provenance": _versions(),
        "files": {n: hashlib.sha256(record.files[n].encode()).hexdigest() for n in sorted(record.files)},
    }
    p = out / "manifest.json"
    p.write_text(_json(manifest, record.config_hash), encoding="utf-8", newline="\n")
    written.append(p)
    return written


# ---------------------------------------------------------------- helpers


def _map(fn, items, parallel: int):
    if parallel <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=parallel) as ex:
        return list(ex.map(fn, items))


def _target(params) -> tuple[str, np.ndarray, lcu.GateRecipe]:
    """Gate name, ideal matrix and recipe from ``gate``/``v``/``matrix`` parameters."""
    if "matrix" in params:
        if "gate" in params:
            raise ConfigError(["parameters: give either 'gate' or 'matrix', not both"])
        u = _from_mjson(params["matrix"])
        try:
            return "U", u, lcu.recipe_from_unitary(u)
        except kak.NonUnitaryError as exc:
            raise ConfigError([f"parameters/matrix: {exc}"]) from None
    name = params.get("gate")
    if name is None:
        raise ConfigError(["parameters: 'gate' or 'matrix' is required"])
    v = _from_mjson(params["v"]) if "v" in params else None
    if name == "CU" and v is None:
        raise ConfigError(["parameters/v: CU needs a 2x2 unitary 'v'"])
    try:
        recipe = lcu.gate_library(name, v)
    except kak.NonUnitaryError as exc:
        raise ConfigError([f"parameters/v: {exc}"]) from None
    return name, lcu.textbook_matrix(name, v), recipe


_COMP = (KET0, KET1)
_LABELS = ("00", "01", "10", "11")


# ---------------------------------------------------------------- commands


def _cmd_decompose(cfg: ExperimentConfig, h: str, parallel: int) -> ResultRecord:
    p = cfg.parameters
    if p.get("gate", "") == "RANDOM":
        count = p.get("count", 1)

        def task(k):
            rng = np.random.default_rng(task_seed(cfg.seed, f"decompose/{k}"))
            u = haar_su(4, rng)
            d = kak.kak_decompose(u)
            err = float(np.max(np.abs(np.exp(1j * d.global_phase) * kak.reconstruct_from_terms(kak.lcu_terms(d)) - u)))
            return [k, d.k1, d.k2, d.k3] + [x for a in d.alphas for x in (a.real, a.imag)] + [err]

        rows = _map(task, range(count), parallel)
        header = ["index", "k1", "k2", "k3"] + [f"alpha{i}_{c}" for i in range(4) for c in ("re", "im")] + ["reconstruction_error"]
        worst = max(r[-1] for r in rows)
        files = {"decompositions.csv": _csv(header, rows, h)}
        return ResultRecord(cfg.command, h, cfg.seed, {"count": count, "max_reconstruction_error": worst}, files)

    name, u, _ = _target(p)
    d = kak.kak_decompose(u)
    terms = kak.lcu_terms(d)
    recon = np.exp(1j * d.global_phase) * kak.reconstruct_from_terms(terms)
    err = float(np.max(np.abs(recon - u)))
    body = {
        "gate": name,
        "k": [d.k1, d.k2, d.k3],
        "alphas": [_cjson(a) for a in d.alphas],
        "global_phase": d.global_phase,
        "p1": _mjson(d.p1),
        "p2": _mjson(d.p2),
        "q1": _mjson(d.q1),
        "q2": _mjson(d.q2),
        "terms": [{"alpha": _cjson(a), "A": _mjson(A), "B": _mjson(B)} for a, A, B in terms],
        "reconstruction_error": err,
        "constraint_residuals": kak.unitarity_constraints(d.alphas).tolist(),
    }
    return ResultRecord(cfg.command, h, cfg.seed, {"reconstruction_error": err}, {"decomposition.json": _json(body, h)})


def _cmd_gate(cfg: ExperimentConfig, h: str, parallel: int) -> ResultRecord:
    p = cfg.parameters
    name, u, recipe = _target(p)
    design = p.get("design", "standard")
    runs = p.get("runs", 1)
    nz = p.get("noise")
    noise_seed = task_seed(cfg.seed, "gate/noise") % (2**32)
    noise = None if nz is None else photonic.NoiseModel(nz.get("phase_sigma", 0.0), nz.get("eta_offset_sigma", 0.0), noise_seed)

    def one_input(idx):
        a, b = _COMP[idx >> 1], _COMP[idx & 1]
        chip = photonic.config_from_recipe(recipe, (a, b), noise=noise)
        probs = np.zeros(4)
        succ = 0.0
        for r in range(runs):
            c = photonic.noisy_config(chip, r)
            st = photonic.apply_prep_and_local_ops(photonic.prepare_ququard(c.pump_splitting), c)
            try:
                if design == "standard":
                    out, s = photonic.combine_paths(st)
                    probs += s * photonic.measure_in_basis(out)
                    succ += s
                else:
                    for _, out, s in photonic.advanced_combiner(st):
                        if s > 0:
                            probs += s * photonic.measure_in_basis(out)
                            succ += s
            except photonic.AnnihilatedStateError:
                pass
        dist = probs / succ if succ > 0 else probs
        return [_LABELS[idx]] + list(dist) + [succ / runs]

    rows = _map(one_input, range(4), parallel)
    files = {
        "truth_table.csv": _csv(["input"] + [f"p_{l}" for l in _LABELS] + ["success_prob"], rows, h),
    }
    metrics = {"gate": name, "design": design, "success_probs": [r[-1] for r in rows]}
    ideal = u / np.sqrt(np.trace(u.conj().T @ u).real / 4)
    table_ideal = []
    for idx in range(4):
        out = ideal @ np.kron(_COMP[idx >> 1], _COMP[idx & 1])
        n = np.vdot(out, out).real
        table_ideal.append(np.abs(out) ** 2 / n if n > 1e-24 else np.zeros(4))
    fids = [
        float(np.sum(np.sqrt(np.clip(np.array(r[1:5]), 0, None) * t))) for r, t in zip(rows, table_ideal) if r[-1] > 0
    ]
    metrics["truth_table_classical_fidelity"] = float(np.mean(fids)) if fids else None
    n_random = p.get("n_random", 0)
    if n_random:

        def rand(k):
            rng = np.random.default_rng(task_seed(cfg.seed, f"gate/random/{k}"))
            a, b = random_state(2, rng), random_state(2, rng)
            chip = photonic.config_from_recipe(recipe, (a, b), noise=noise)
            try:
                out, s = photonic.end_to_end_gate(chip)
            except photonic.AnnihilatedStateError:
                return [k, float("nan"), 0.0]
            return [k, state_phase_distance(out, normalize(u @ np.kron(a, b))), s]

        rrows = _map(rand, range(n_random), parallel)
        files["random_inputs.csv"] = _csv(["index", "distance_vs_dense", "success_prob"], rrows, h)
        metrics["max_distance_vs_dense"] = float(np.nanmax([r[1] for r in rrows]))
    files["summary.json"] = _json(metrics, h)
    return ResultRecord(cfg.command, h, cfg.seed, metrics, files)


def _cmd_qpt(cfg: ExperimentConfig, h: str, parallel: int) -> ResultRecord:
    p = cfg.parameters
    name, u, recipe = _target(p)
    rate = p.get("rate", tomography.DEFAULT_RATE)
    time = p.get("time", tomography.DEFAULT_TIME)
    ideal = tomography.chi_from_unitary(u / np.sqrt(np.trace(u.conj().T @ u).real / 4))
    nz = p.get("noise")
    if nz is not None:
        noise = photonic.NoiseModel(nz.get("phase_sigma", 0.0), nz.get("eta_offset_sigma", 0.0), task_seed(cfg.seed, "qpt/noise") % (2**32))
        chip = photonic.noisy_config(photonic.config_from_recipe(recipe, noise=noise))
        m = photonic.heralded_operator(chip)
        true_chi = tomography.chi_from_unitary(m / np.sqrt(np.trace(m.conj().T @ m).real / 4))
    else:
        true_chi = ideal
    if p.get("sampling", "expected") == "expected":
        ds = tomography.expected_dataset(true_chi, rate, time)
    else:
        ds = tomography.sample_counts(tomography.predict_all(true_chi), rate, time, task_seed(cfg.seed, "qpt/counts"))
    chi = tomography.mle_reconstruct_process(ds)
    fid = tomography.process_fidelity(ideal, chi)
    metrics = {"gate": name, "process_fidelity": fid, "tp_residual": tomography.tp_residual(chi)}
    n_mc = p.get("mc_resamples", 0)
    if n_mc:
        mc_seed = task_seed(cfg.seed, "qpt/mc") % (2**63)
        fids = _map(lambda k: tomography.mc_replica(ds, ideal, mc_seed, k), range(n_mc), parallel)
        good = [f for f in fids if f is not None]
        metrics["mc_mean"] = float(np.mean(good)) if good else None
        metrics["mc_std"] = float(np.std(good, ddof=1)) if len(good) > 1 else None
        metrics["mc_failed"] = len(fids) - len(good)
    rows = list(zip(ds.input_index.tolist(), ds.projector_index.tolist(), ds.counts, ds.time_s, ds.rate_hint))
    files = {
        "chi.json": _json({"chi": _mjson(chi), "ideal_chi": _mjson(ideal)}, h),
        "fidelity.txt": f"# config_hash={h}\n{_g(fid)}\n",
        "counts.csv": _csv(["input_index", "projector_index", "counts", "time_s", "rate_hint"], rows, h),
    }
    return ResultRecord(cfg.command, h, cfg.seed, metrics, files)


def _cmd_qaoa(cfg: ExperimentConfig, h: str, parallel: int) -> ResultRecord:
    p = cfg.parameters
    spec = p["csp"]
    csp = {1: qaoa.csp1, 2: qaoa.csp2, 3: qaoa.csp3}[spec]() if isinstance(spec, int) else qaoa.csp_from_config(spec)
    closed = p.get("closed", False)
    gammas = qaoa._axis(p.get("delta_gamma", 2 * np.pi / 20), 2 * np.pi, closed)
    betas = qaoa._axis(p.get("delta_beta", np.pi / 30), np.pi, closed)
    values = np.array(_map(lambda g: qaoa.grid_row(csp, g, betas), gammas, parallel))
    flat = int(np.flatnonzero(values.reshape(-1) >= values.max() - 1e-12)[0])
    i, j = np.unravel_index(flat, values.shape)
    state = qaoa.qaoa_state(csp, qaoa.QaoaAngles(gammas[i], betas[j]))
    dist = qaoa.solution_distribution(state)
    rows = [[gammas[a], betas[b], values[a, b], "1" if (a, b) == (i, j) else "0"] for a in range(len(gammas)) for b in range(len(betas))]
    best = {
        "cost_values": csp.values().tolist(),
        "gamma": float(gammas[i]),
        "beta": float(betas[j]),
        "expC": float(values[i, j]),
        "distribution": dict(zip(_LABELS, dist.tolist())),
        "cells": int(values.size),
    }
    files = {"grid.csv": _csv(["gamma", "beta", "expC", "argmax"], rows, h), "best.json": _json(best, h)}
    return ResultRecord(cfg.command, h, cfg.seed, {"cells": int(values.size), "best": best}, files)


_INIT = {
    "00": np.kron(KET0, KET0),
    "0+": np.kron(KET0, KET_PLUS),
    "0+i": np.kron(KET0, KET_PLUS_I),
}
DEFAULT_SZEGEDY_CASES = [(0.1, 0.9), (0.3, 0.7), (0.25, 0.25), (0.5, 0.5), (0.43, 0.43), (0.45, 0.45), (0.47, 0.47)]


def _cmd_szegedy(cfg: ExperimentConfig, h: str, parallel: int) -> ResultRecord:
    p = cfg.parameters
    cases = p.get("cases") or [{"alpha": a, "beta": b} for a, b in DEFAULT_SZEGEDY_CASES]
    inits = p.get("initial_states", ["00", "0+", "0+i"])
    steps = p.get("steps", 200)
    n_max = p.get("n_max", 256)

    def task(item):
        case, label = item
        if "matrix" in case:
            pm = np.array(case["matrix"], dtype=float)
            u = szegedy.build_usz(pm)
            tag = "matrix" + hashlib.sha256(json.dumps(case["matrix"]).encode()).hexdigest()[:8]
            n = pm.shape[0]
        else:
            g = szegedy.TwoNodeGraph(case["alpha"], case["beta"])
            u = szegedy.two_node_circuit(g)
            tag = f"a{case['alpha']:g}_b{case['beta']:g}"
            pm = g.matrix()
            n = 2
        psi0 = _INIT[label]
        if n != 2:
            psi0 = np.zeros(n * n, dtype=complex)
            psi0[0] = 1.0
        # theory: spectral expansion of the dense walk operator
        w, vecs = np.linalg.eig(szegedy.build_usz(pm))
        coeff = np.linalg.solve(vecs, psi0)
        trace = szegedy.evolve(u, psi0, steps)
        rows = []
        for t, _, probs in trace:
            theory = vecs @ (w**t * coeff)
            tp = (np.abs(theory.reshape(n, n)) ** 2).sum(axis=1)
            fid = float(np.sum(np.sqrt(np.clip(probs, 0, None) * np.clip(tp, 0, None))))
            rows.append([t] + [float(x) for x in probs] + [fid])
        header = ["step"] + [f"p_node{k + 1}" for k in range(n)] + ["fidelity_vs_theory"]
        period = szegedy.detect_period(u, n_max)
        name = f"trace_{tag}_{label.replace('+', 'p')}.csv"
        return name, _csv(header, rows, h), {"case": case, "initial_state": label, "period": period, "mean_fidelity": float(np.mean([r[-1] for r in rows]))}

    items = [(c, s) for c in cases for s in inits]
    results = _map(task, items, parallel)
    files = {name: text for name, text, _ in results}
    summary = [m for _, _, m in results]
    files["periods.json"] = _json({"runs": summary, "steps": steps}, h)
    return ResultRecord(cfg.command, h, cfg.seed, {"runs": summary}, files)


def _read_data(cfg: ExperimentConfig, path: str):
    full = (cfg.base_dir / path) if not os.path.isabs(path) else Path(path)
    try:
        return calib.read_scan_csv(full)
    except (OSError, ValueError, StopIteration) as exc:
        raise ConfigError([f"parameters/data: cannot read {path!r}: {exc}"]) from None


def _cmd_calibrate(cfg: ExperimentConfig, h: str, parallel: int) -> ResultRecord:
    p = cfg.parameters
    mode = p["mode"]
    truth = p.get("truth", {})
    noise = p.get("noise", 0.0)
    rng = np.random.default_rng(task_seed(cfg.seed, f"calibrate/{mode}"))
    files = {}
    if mode == "iv":
        if "data" in p:
            _, data = _read_data(cfg, p["data"])
        else:
            i = np.linspace(0, 9, 50)
            v = truth.get("resistance", 800.0) * i * 1e-3 + truth.get("offset", 0.0) + noise * rng.standard_normal(i.size)
            data = np.column_stack([i, v])
        r, dv, rms = calib.fit_iv(data)
        model = {"resistance": r, "delta_v": dv, "residual_rms": rms}
        files["iv.csv"] = _csv(["I", "V", "V_fit"], [[a, b, r * a * 1e-3 + dv] for a, b in data], h)
    elif mode == "shifter":
        if "data" in p:
            _, data = _read_data(cfg, p["data"])
        else:
            i = np.arange(0, 9 + 1e-9, 0.05)
            y = calib.simulate_fringe(truth.get("phi1", 0.1123), truth.get("phi0", 0.3814), i)
            y = y * (1 + noise * rng.standard_normal(y.size))
            data = np.column_stack([i, y])
        phi1, phi0, rms = calib.fit_independent_shifter(data)
        model = {"phi1": phi1, "phi0": phi0, "residual_rms": rms}
        fit = calib.simulate_fringe(phi1, phi0, data[:, 0])
        files["fringe.csv"] = _csv(["I", "intensity", "fit"], [[a, b, c] for (a, b), c in zip(data, fit)], h)
    elif mode == "array":
        if "data" in p:
            _, data = _read_data(cfg, p["data"])
            true_model = None
        else:
            true_model = calib.ArrayModel(
                truth.get("etas", [0.5] * 6), truth.get("phi1", [0.11] * 5), truth.get("dtheta", [0.38] * 5)
            )
            data = calib.synthetic_array_scan(true_model, seed=task_seed(cfg.seed, "calibrate/scan") % (2**32))
            if noise:
                data[:, 5] *= 1 + noise * rng.standard_normal(data.shape[0])
        fitted = calib.fit_cascaded_array(
            data,
            n_starts=p.get("n_starts", 8),
            seed=task_seed(cfg.seed, "calibrate/starts") % (2**32),
            threshold=p.get("threshold", 1e-6 if not noise else 10 * noise),
        )
        model = fitted.to_dict()
        if true_model is not None:
            held = np.random.default_rng(task_seed(cfg.seed, "calibrate/held")).uniform(0, 9, (500, 5))
            model["heldout_max_error"] = float(np.max(np.abs(fitted.intensity(held) - true_model.intensity(held))))
        pred = fitted.intensity(data[:, :5])
        files["scan_fit.csv"] = _csv(["I1", "I2", "I3", "I4", "I5", "intensity", "fit"], [list(r) + [f] for r, f in zip(data, pred)], h)
    else:
        fp = p.get("filter", {})
        fcfg = calib.PumpFilterConfig(
            fp.get("delta_l_um", calib.DEFAULT_DELTA_L_UM),
            fp.get("group_index", calib.DEFAULT_GROUP_INDEX),
            fp.get("eta", 0.5),
            fp.get("theta_trim"),
        )
        lam = np.linspace(fp.get("lambda_min", 1540.0), fp.get("lambda_max", 1560.0), fp.get("n_points", 2001))
        t = calib.pump_filter_transmission(lam, fcfg)
        files["spectrum.csv"] = _csv(["lambda_nm", "transmission", "cross"], [[a, b, c] for a, b, c in zip(lam, t, calib.pump_filter_cross(lam, fcfg))], h)
        model = {
            "T_pump": float(calib.pump_filter_transmission(calib.PUMP_NM, fcfg)),
            "T_signal": float(calib.pump_filter_transmission(calib.SIGNAL_NM, fcfg)),
            "T_idler": float(calib.pump_filter_transmission(calib.IDLER_NM, fcfg)),
            "extinction_db": calib.extinction_db(fcfg),
            "theta_trim": fcfg.trim(),
            "eta_band_28db": list(calib.eta_band_for_extinction(28.0)),
        }
    files["model.json"] = _json({"mode": mode, **model}, h)
    return ResultRecord(cfg.command, h, cfg.seed, {"mode": mode, **model}, files)


_DISPATCH = {
    "decompose": _cmd_decompose,
    "gate": _cmd_gate,
    "qpt": _cmd_qpt,
    "qaoa": _cmd_qaoa,
    "szegedy": _cmd_szegedy,
    "calibrate": _cmd_calibrate,
}


def run(cfg: ExperimentConfig, parallel: int = 1) -> ResultRecord:
    """Execute a validated config and return its record (nothing is written)."""
    return _DISPATCH[cfg.command](cfg, cfg.hash(), max(1, int(parallel)))


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lcusim", description="Two-qubit photonic LCU processor experiments")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON experiment config")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("--out", default=None, help="output directory (default: config output_dir, then $LCUSIM_OUT)")
    ap.add_argument("--parallel", type=int, default=1, help="worker threads for independent tasks")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        path = Path(args.config)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError([f"cannot read config: {exc}"]) from None
        cfg = validate_config(text, base_dir=path.parent)
        if cfg.command != args.command:
            raise ConfigError([f"config is for {cfg.command!r}, not {args.command!r}"])
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(["--seed must be non-negative"])
            cfg.seed = args.seed
        if args.parallel < 1:
            raise ConfigError(["--parallel must be at least 1"])
        out = args.out or cfg.output_dir or os.environ.get("LCUSIM_OUT") or "lcusim_out"
        record = run(cfg, args.parallel)
        try:
            emit_outputs(record, out)
        except OSError as exc:
            raise ConfigError([f"cannot write outputs to {out!r}: {exc}"]) from None
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{record.command}: wrote {len(record.files) + 1} files to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
