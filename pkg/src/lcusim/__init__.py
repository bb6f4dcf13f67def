"""Simulator for a two-qubit photonic processor built on linear combinations of unitaries.

Modules:
    qmath: shared dense linear algebra.
    kak: KAK decomposition and four-term LCU coefficients.
    lcu: probabilistic and deterministic LCU circuits, gate recipes.
    photonic: two-photon path-encoded chip model.
    calib: interferometer hardware model and calibration fits.
    tomography: state/process tomography with maximum likelihood.
    qaoa: p-level QAOA for two-bit CSPs.
    szegedy: Szegedy walks and their periodicity.
    cli: the ``lcusim`` experiment runner.
"""

__version__ = "0.1.0"
