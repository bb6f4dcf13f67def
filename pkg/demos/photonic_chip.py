"""Run gates through the two-photon chip model, ideal and with phase noise."""

import numpy as np

from lcusim import lcu, photonic, qmath
from lcusim.qmath import KET0, KET1, KET_PLUS

# SWAP on |01>: one photon per output port with probability 1/64.
cfg = photonic.config_from_recipe(lcu.gate_library("SWAP"), inputs=(KET0, KET1))
out, p = photonic.end_to_end_gate(cfg)
print("SWAP|01> ->", np.round(out, 4), " success", p)

# The entanglement filter turns |++> into a Bell pair and kills |01>.
cfg = photonic.config_from_recipe(lcu.gate_library("EF"), inputs=(KET_PLUS, KET_PLUS))
out, p = photonic.end_to_end_gate(cfg)
print("EF|++>   ->", np.round(out, 4), " success", p)
try:
    photonic.end_to_end_gate(cfg, inputs=(KET0, KET1))
except photonic.AnnihilatedStateError as exc:
    print("EF|01>   ->", exc)

# Keeping all four combiner ports raises the heralding rate to 1/4.
cfg = photonic.config_from_recipe(lcu.gate_library("CNOT"), inputs=(KET1, KET0))
st = photonic.apply_prep_and_local_ops(photonic.prepare_ququard(cfg.pump_splitting), cfg)
print("advanced combiner:", [(k, round(p, 4)) for k, _, p in photonic.advanced_combiner(st)])

# Phase noise on every programmable element lowers the CNOT process fidelity.
for sigma in (0.0, 0.05, 0.1, 0.15):
    f = photonic.mean_noisy_fidelity(lcu.gate_library("CNOT"), qmath.CNOT, sigma, n_seeds=20)
    print(f"sigma = {sigma:.2f} rad: mean CNOT fidelity {f:.4f}")
