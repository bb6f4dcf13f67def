"""Process tomography of a CNOT: expected counts, Poisson counts, and error bars."""

from lcusim import qmath, tomography as tomo

ideal = tomo.chi_from_unitary(qmath.CNOT)

ds = tomo.expected_dataset(ideal, rate=100, time=10)
chi = tomo.mle_reconstruct_process(ds)
print("expected counts: F =", tomo.process_fidelity(ideal, chi))

ds = tomo.sample_counts(tomo.predict_all(ideal), rate=100, time=10, seed=1)
chi = tomo.mle_reconstruct_process(ds)
print("Poisson counts:  F =", tomo.process_fidelity(ideal, chi), " TP residual", tomo.tp_residual(chi))

for t in (1, 10, 100):
    mean, std, _ = tomo.monte_carlo_errorbars(tomo.expected_dataset(ideal, 100, t), ideal, n_resamples=8, seed=0)
    print(f"{t:4d} s: F = {mean:.5f} +- {std:.1e}")

print("CNOT vs CZ:", tomo.process_fidelity(ideal, tomo.chi_from_unitary(qmath.CZ)))
