"""Decompose two-qubit gates into four weighted local products and rebuild them."""

import numpy as np

from lcusim import kak, lcu, qmath

np.set_printoptions(precision=4, suppress=True)

# Named gates land on known points of the Weyl chamber.
for name in ["CNOT", "CH", "ISWAP", "SQRT_SWAP", "SWAP"]:
    d = kak.kak_decompose(lcu.textbook_matrix(name))
    print(f"{name:10s} k = {np.round(np.array(d.k) / np.pi, 4)} pi   alphas = {np.round(d.alphas, 4)}")

# A random gate: four terms, unit-norm weights, exact reconstruction.
rng = np.random.default_rng(0)
u = qmath.haar_su(4, rng)
d = kak.kak_decompose(u)
terms = kak.lcu_terms(d)
print("\nrandom SU(4): sum |alpha|^2 =", sum(abs(a) ** 2 for a, _, _ in terms))
print("reconstruction error up to phase:", qmath.global_phase_distance(kak.reconstruct_from_terms(terms), u))

# The ancilla-assisted circuit succeeds with probability 1/4; the feedforward one always does.
psi = qmath.random_state(4, rng)
spec = lcu.spec_from_recipe(lcu.recipe_from_unitary(u))
print("probabilistic success:", lcu.simulate_probabilistic(spec, psi)[0].probability)
for j, br in lcu.deterministic_branches(d, psi).items():
    print(f"  outcome {j}: p = {br.probability:.3f}, error = {qmath.state_phase_distance(br.state, u @ psi):.1e}")
