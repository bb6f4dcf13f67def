import json

import numpy as np
import pytest

from lcusim import lcu, photonic, qmath
from lcusim.qmath import KET0, KET1, KET_PLUS, kron


def _dense_oracle(cfg):
    # amplitude bookkeeping without the einsum: each path contributes alpha_i A_i psi1 (x) B_i psi2,
    # the two fan-ins give 1/2 each on port 0 and the source heralds with 1/4
    psi1, psi2 = cfg.prep_settings
    out = sum(0.25 * a * np.kron(A @ psi1, B @ psi2) for a, A, B in zip(cfg.pump_splitting, cfg.A, cfg.B))
    p = np.vdot(out, out).real
    return out / np.sqrt(p), 0.25 * p


def test_fanin_is_unitary_hadamard():
    assert np.allclose(photonic.FANIN @ photonic.FANIN.conj().T, np.eye(4))
    assert np.allclose(photonic.FANIN[0], 0.5)


def test_ququard_rejects_unnormalized_pump():
    with pytest.raises(ValueError):
        photonic.prepare_ququard([1, 1, 0, 0])


def test_swap_maps_01_to_10_at_one_in_sixty_four():
    cfg = photonic.config_from_recipe(lcu.gate_library("SWAP"), inputs=(KET0, KET1))
    out, p = photonic.end_to_end_gate(cfg)
    assert qmath.state_phase_distance(out, kron(KET1, KET0)) < 1e-12
    assert np.isclose(p, 1 / 64)


def test_cnot_and_ch_truth_actions():
    cfg = photonic.config_from_recipe(lcu.gate_library("CNOT"), inputs=(KET1, KET0))
    out, p = photonic.end_to_end_gate(cfg)
    assert qmath.state_phase_distance(out, kron(KET1, KET1)) < 1e-12
    assert np.isclose(p, 1 / 64)
    cfg = photonic.config_from_recipe(lcu.gate_library("CH"), inputs=(KET1, KET0))
    out, _ = photonic.end_to_end_gate(cfg)
    assert qmath.state_phase_distance(out, kron(KET1, KET_PLUS)) < 1e-12


def test_entanglement_filter_annihilates_anticorrelated_input():
    cfg = photonic.config_from_recipe(lcu.gate_library("EF"), inputs=(KET0, KET1))
    with pytest.raises(photonic.AnnihilatedStateError):
        photonic.end_to_end_gate(cfg)


def test_random_configs_match_dense_oracle(rng):
    for _ in range(25):
        u = qmath.haar_su(4, rng)
        inputs = (qmath.random_state(2, rng), qmath.random_state(2, rng))
        cfg = photonic.config_from_recipe(lcu.recipe_from_unitary(u), inputs=inputs)
        out, p = photonic.end_to_end_gate(cfg)
        ref, p_ref = _dense_oracle(cfg)
        assert qmath.state_phase_distance(out, ref) < 1e-10
        assert np.isclose(p, p_ref, atol=1e-14)
        assert qmath.state_phase_distance(out, u @ np.kron(*inputs)) < 1e-8


def test_advanced_combiner_swap_branches():
    cfg = photonic.config_from_recipe(lcu.gate_library("SWAP"), inputs=(KET0, KET1))
    st = photonic.apply_prep_and_local_ops(photonic.prepare_ququard(cfg.pump_splitting), cfg)
    branches = photonic.advanced_combiner(st)
    assert len(branches) == 4
    for _, state, p in branches:
        assert np.isclose(p, 1 / 16)
        assert qmath.state_phase_distance(state, kron(KET1, KET0)) < 1e-12


def test_advanced_combiner_filter_total_matches_operator_norm():
    recipe = lcu.gate_library("EF")
    cfg = photonic.config_from_recipe(recipe, inputs=(KET0, KET0))
    st = photonic.apply_prep_and_local_ops(photonic.prepare_ququard(cfg.pump_splitting), cfg)
    total = sum(p for _, _, p in photonic.advanced_combiner(st))
    m = recipe.matrix() / np.linalg.norm(recipe.alphas)
    assert np.isclose(total, np.linalg.norm(m @ kron(KET0, KET0)) ** 2 / 4)


def test_measure_bell_in_xx():
    bell = (kron(KET0, KET0) + kron(KET1, KET1)) / np.sqrt(2)
    assert np.allclose(photonic.measure_in_basis(bell, ("X", "X")), [0.5, 0, 0, 0.5])


def test_measure_rejects_unknown_basis():
    with pytest.raises(ValueError):
        photonic.measure_in_basis(np.array([1, 0, 0, 0]), ("Q", "Z"))


def test_chip_config_json_round_trip():
    cfg = photonic.config_from_recipe(lcu.gate_library("ISWAP"), inputs=(KET_PLUS, KET1),
                                      noise=photonic.NoiseModel(0.05, 0.01, 7))
    back = photonic.ChipConfig.from_json(cfg.to_json())
    assert back.to_json() == cfg.to_json()
    assert json.loads(cfg.to_json())
    assert np.allclose(back.pump_splitting, cfg.pump_splitting)


def test_noise_is_reproducible_per_run_index():
    cfg = photonic.config_from_recipe(lcu.gate_library("CNOT"), noise=photonic.NoiseModel(0.1, 0.0, 3))
    f0 = photonic.gate_process_fidelity(qmath.CNOT, cfg, 0)
    assert f0 == photonic.gate_process_fidelity(qmath.CNOT, cfg, 0)
    assert f0 != photonic.gate_process_fidelity(qmath.CNOT, cfg, 1)


def test_noiseless_fidelity_is_one():
    cfg = photonic.config_from_recipe(lcu.gate_library("CNOT"))
    assert np.isclose(photonic.gate_process_fidelity(qmath.CNOT, cfg), 1.0)


def test_fidelity_degrades_with_phase_noise():
    r = lcu.gate_library("CNOT")
    f = [photonic.mean_noisy_fidelity(r, qmath.CNOT, s, n_seeds=10) for s in (0.0, 0.05, 0.2)]
    assert f[0] > f[1] > f[2]
