import numpy as np
import pytest

from lcusim import calib


def test_balanced_beam_splitter():
    assert np.allclose(calib.component_matrix("BS", 0.5), np.array([[1, 1j], [1j, 1]]) / np.sqrt(2))


def test_component_kind_validated():
    with pytest.raises(ValueError):
        calib.component_matrix("XX", 0.5)


def test_six_balanced_splitters_product():
    # frozen from a direct product of six BS[0.5] matrices
    assert np.allclose(calib.array_transfer(np.full(6, 0.5), np.zeros(5)), [[0, -1j], [-1j, 0]])


def test_first_mzi_pi_phase_matches_direct_product():
    bs, ps = calib.beam_splitter(0.5), calib.phase_shifter
    ref = bs
    for th in (np.pi, 0, 0, 0, 0):
        ref = bs @ ps(th) @ ref
    assert np.allclose(calib.array_transfer(np.full(6, 0.5), [np.pi, 0, 0, 0, 0]), ref)


def test_mzi_settings_round_trip(rng):
    from lcusim.qmath import haar_unitary

    for _ in range(50):
        u = haar_unitary(2, rng)
        assert np.max(np.abs(calib.mzi_unitary(calib.mzi_settings(u)) - u)) < 1e-12


@pytest.mark.parametrize("r, dv", [(800.0, 0.0), (580.0, 0.02)])
def test_fit_iv_exact_line(r, dv):
    i = np.linspace(0, 9, 20)
    got = calib.fit_iv(np.column_stack([i, r * i * 1e-3 + dv]))
    assert np.isclose(got[0], r, rtol=1e-9)
    assert np.isclose(got[1], dv, atol=1e-12)


def test_fit_iv_two_points():
    assert np.isclose(calib.fit_iv([(0, 0), (1, 0.58)])[0], 580.0)


def test_fit_iv_noisy_line():
    rng = np.random.default_rng(11)
    i = np.linspace(0, 9, 50)
    v = 0.8 * i + rng.normal(0, 1e-3, i.size)
    assert abs(calib.fit_iv(np.column_stack([i, v]))[0] - 800) < 8


def test_phase_from_current_and_inverse():
    assert calib.phase_from_current(0, 0.1123, 0.3814) == pytest.approx(0.3814)
    i = calib.current_for_phase(np.pi, 0.1123, 0.3814)
    assert i == pytest.approx(np.sqrt((np.pi - 0.3814) / 0.1123))


def test_fringe_extremes():
    # theta = 0 gives the dark port, theta = pi the bright one
    assert calib.simulate_fringe(1.0, 0.0, [0.0])[0] == pytest.approx(0.0, abs=1e-15)
    assert calib.simulate_fringe(1.0, np.pi, [0.0])[0] == pytest.approx(1.0)


def test_independent_shifter_noiseless_recovery():
    i = np.linspace(0, 9, 181)
    phi1, phi0, _ = calib.fit_independent_shifter(np.column_stack([i, calib.simulate_fringe(0.1123, 0.3814, i)]))
    assert abs(phi1 - 0.1123) < 1e-6 and abs(phi0 - 0.3814) < 1e-6


def test_independent_shifter_noisy_recovery():
    rng = np.random.default_rng(5)
    i = np.linspace(0, 9, 181)
    y = calib.simulate_fringe(0.1123, 0.3814, i) * (1 + 0.01 * rng.standard_normal(i.size))
    phi1, _, _ = calib.fit_independent_shifter(np.column_stack([i, y]))
    assert abs(phi1 - 0.1123) / 0.1123 < 0.02


def test_flat_scan_raises():
    i = np.linspace(0, 9, 50)
    with pytest.raises(calib.CalibrationError):
        calib.fit_independent_shifter(np.column_stack([i, np.full(i.size, 0.5)]))


def test_cascaded_array_zero_light_raises():
    with pytest.raises(calib.CalibrationError):
        calib.fit_cascaded_array(np.zeros((50, 6)))


def test_pump_filter_passes_pairs_and_blocks_pump():
    assert calib.pump_filter_transmission(calib.PUMP_NM) <= 1e-6
    assert calib.pump_filter_transmission(calib.SIGNAL_NM) == pytest.approx(0.99997649924757, abs=1e-9)
    assert calib.pump_filter_transmission(calib.IDLER_NM) == pytest.approx(0.9999276351730338, abs=1e-9)


def test_pump_filter_fsr_matches_pair_spacing():
    cfg = calib.PumpFilterConfig()
    fsr = calib.PUMP_NM**2 / (cfg.group_index * cfg.delta_l_um * 1e3)
    assert fsr == pytest.approx(13.2156, abs=1e-3)


def test_pump_filter_energy_conservation():
    lam = np.linspace(1540, 1560, 101)
    cfg = calib.PumpFilterConfig(eta=0.47)
    assert np.allclose(calib.pump_filter_transmission(lam, cfg) + calib.pump_filter_cross(lam, cfg), 1)


def test_extinction_band():
    lo, hi = calib.eta_band_for_extinction(28)
    assert calib.extinction_db(calib.PumpFilterConfig(eta=lo + 1e-4)) >= 28
    assert calib.extinction_db(calib.PumpFilterConfig(eta=hi - 1e-4)) >= 28
    assert calib.extinction_db(calib.PumpFilterConfig(eta=0.47)) == pytest.approx(24.44, abs=0.01)


def test_scan_csv_round_trip(tmp_path):
    rows = np.array([[0.0, 0.1], [1.5, 0.25]])
    calib.write_scan_csv(tmp_path / "s.csv", rows, ["I", "intensity"])
    header, data = calib.read_scan_csv(tmp_path / "s.csv")
    assert header == ["I", "intensity"]
    assert np.array_equal(data, rows)
