"""Calibrate heaters: I-V line, single-shifter fringe, five-heater array, pump filter."""

import numpy as np

from lcusim import calib

rng = np.random.default_rng(0)

i = np.linspace(0, 9, 50)
r, dv, _ = calib.fit_iv(np.column_stack([i, 0.58 * i + rng.normal(0, 1e-3, i.size)]))
print(f"I-V fit: R = {r:.1f} ohm")

i = np.linspace(0, 9, 181)
y = calib.simulate_fringe(0.1123, 0.3814, i)
phi1, phi0, _ = calib.fit_independent_shifter(np.column_stack([i, y]))
print(f"shifter: phi1 = {phi1:.6f} rad/mA^2, phi0 = {phi0:.6f} rad")

truth = calib.ArrayModel(etas=np.linspace(0.45, 0.55, 6))
fit = calib.fit_cascaded_array(calib.synthetic_array_scan(truth))
held = rng.uniform(0, 9, size=(200, 5))
print("array: held-out max error", np.max(np.abs(fit.intensity(held) - truth.intensity(held))))

for lam in (calib.SIGNAL_NM, calib.PUMP_NM, calib.IDLER_NM):
    print(f"filter T({lam} nm) = {float(calib.pump_filter_transmission(lam)):.3e}")
lo, hi = calib.eta_band_for_extinction(28)
print(f"28 dB pump extinction needs eta in [{lo:.4f}, {hi:.4f}]")
