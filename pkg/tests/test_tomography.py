import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcusim import lcu, qmath, tomography as tomo
from lcusim.qmath import KET0, KET1, kron

BELL = (kron(KET0, KET0) + kron(KET1, KET1)) / np.sqrt(2)
CHI_CNOT = tomo.chi_from_unitary(qmath.CNOT)


def _direct_probability(u, i, j):
    kets, proj = tomo.tomography_bases()
    return abs(np.vdot(proj[j], u @ kets[i])) ** 2


def test_first_input_is_00():
    kets, _ = tomo.tomography_bases()
    assert np.allclose(kets[0], kron(KET0, KET0))


def test_projector_pp_on_bell_pair():
    _, proj = tomo.tomography_bases()
    # <++|00> = <++|11> = 1/2, so the overlap is 1/sqrt(2)
    assert abs(np.vdot(proj[10], BELL)) ** 2 == pytest.approx(0.5)


def test_inputs_are_linearly_independent():
    kets, _ = tomo.tomography_bases()
    rhos = np.array([np.outer(k, k.conj()).reshape(-1) for k in kets])
    assert np.linalg.matrix_rank(rhos) == 16


def test_cnot_predictions():
    assert tomo.predict_probability(CHI_CNOT, 4, 5) == pytest.approx(1.0)
    assert tomo.predict_probability(CHI_CNOT, 8, 10) == pytest.approx(0.5)


def test_predictions_match_direct_evolution(rng):
    u = qmath.haar_unitary(4, rng)
    p = tomo.predict_all(tomo.chi_from_unitary(u))
    ref = np.array([[_direct_probability(u, i, j) for j in range(16)] for i in range(16)])
    assert np.allclose(p, ref, atol=1e-12)


def test_chi_invariants(rng):
    chi = tomo.chi_from_unitary(qmath.haar_unitary(4, rng))
    assert np.allclose(chi, chi.conj().T)
    assert np.trace(chi).real == pytest.approx(1.0)
    assert np.min(np.linalg.eigvalsh(chi)) > -1e-12
    assert tomo.tp_residual(chi) < 1e-12


def test_sample_counts_poisson_mean():
    p = np.zeros(256)
    p[0] = 1.0
    draws = np.array([tomo.sample_counts(p, 100, 10, seed=s).counts[0] for s in range(1000)])
    assert abs(draws.mean() - 1000) < 3 * np.sqrt(1000) / np.sqrt(draws.size)
    assert np.mean((draws >= 800) & (draws <= 1200)) > 0.999


def test_sample_counts_rejects_bad_probabilities():
    with pytest.raises(ValueError):
        tomo.sample_counts(np.full(256, 1.5))


def test_linear_inversion_exact():
    chi = tomo.linear_inversion(tomo.expected_dataset(CHI_CNOT))
    assert np.max(np.abs(chi - CHI_CNOT)) < 1e-10


def test_state_mle_bell_and_mixed():
    def ds_for(rho):
        _, proj = tomo.tomography_bases()
        p = np.array([np.vdot(v, rho @ v).real for v in proj])
        return tomo.TomographyDataset(np.zeros(16, int), np.arange(16), p * 1000, 10.0, 100.0)

    rho = tomo.mle_reconstruct_state(ds_for(np.outer(BELL, BELL.conj())))
    assert qmath.state_fidelity(BELL, rho) >= 0.9999
    rho = tomo.mle_reconstruct_state(ds_for(np.eye(4) / 4))
    assert np.max(np.abs(rho - np.eye(4) / 4)) < 1e-4


def test_process_mle_on_expected_counts():
    chi = tomo.mle_reconstruct_process(tomo.expected_dataset(CHI_CNOT))
    assert tomo.process_fidelity(CHI_CNOT, chi) >= 0.9999
    assert np.max(np.abs(chi - tomo.linear_inversion(tomo.expected_dataset(CHI_CNOT)))) < 1e-4


def test_empty_data_raises():
    ds = tomo.expected_dataset(CHI_CNOT).with_counts(np.zeros(256))
    with pytest.raises(tomo.TomographyError):
        tomo.mle_reconstruct_process(ds)


def test_rank_deficient_data_raises():
    ds = tomo.expected_dataset(CHI_CNOT).subset(0)
    with pytest.raises(tomo.TomographyError):
        tomo.mle_reconstruct_process(ds)


@pytest.mark.parametrize("other, expected", [(qmath.CZ, 0.25), (np.eye(4), 0.25), (qmath.CNOT, 1.0)])
def test_pure_process_fidelity(other, expected):
    assert tomo.process_fidelity(CHI_CNOT, tomo.chi_from_unitary(other)) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["CNOT", "CZ", "CH", "SWAP", "ISWAP", "SQRT_SWAP", "I"]),
       st.sampled_from(["CNOT", "CZ", "CH", "SWAP", "ISWAP", "SQRT_SWAP", "I"]))
def test_process_fidelity_trace_formula(a, b):
    u, v = lcu.textbook_matrix(a), lcu.textbook_matrix(b)
    f = tomo.process_fidelity(tomo.chi_from_unitary(u), tomo.chi_from_unitary(v))
    assert f == pytest.approx(abs(np.trace(u.conj().T @ v) / 4) ** 2, abs=1e-9)


def test_classical_fidelity():
    assert tomo.classical_fidelity([0.5, 0.5, 0, 0], [0.25] * 4) == pytest.approx(np.sqrt(0.5))
    with pytest.raises(ValueError):
        tomo.classical_fidelity([0.5, 0.5], [0.25] * 4)


def test_dataset_csv_round_trip(tmp_path):
    ds = tomo.sample_counts(tomo.predict_all(CHI_CNOT), seed=3)
    ds.to_csv(tmp_path / "c.csv")
    back = tomo.TomographyDataset.from_csv(tmp_path / "c.csv")
    assert np.array_equal(back.counts, ds.counts)
    assert np.array_equal(back.exposure, ds.exposure)


def test_chi_json_round_trip(rng):
    chi = tomo.chi_from_unitary(qmath.haar_unitary(4, rng))
    assert np.array_equal(tomo.chi_from_json(tomo.chi_to_json(chi)), chi)


def test_monte_carlo_is_seeded_and_small():
    ds = tomo.expected_dataset(CHI_CNOT)
    a = tomo.monte_carlo_errorbars(ds, CHI_CNOT, n_resamples=4, seed=9)
    b = tomo.monte_carlo_errorbars(ds, CHI_CNOT, n_resamples=4, seed=9)
    assert a == b
    assert a[1] <= 0.01 and a[2] == 0
