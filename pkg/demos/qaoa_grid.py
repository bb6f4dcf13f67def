"""p=1 QAOA on the three two-bit CSPs with a 20 x 30 angle grid."""

import numpy as np

from lcusim import qaoa

for label, csp in [("CSP1", qaoa.csp1()), ("CSP2", qaoa.csp2()), ("CSP3", qaoa.csp3())]:
    r = qaoa.grid_search(csp)
    psi = qaoa.qaoa_state(csp, qaoa.QaoaAngles([r.gamma], [r.beta]))
    dist = qaoa.solution_distribution(psi)
    print(f"{label}: C = {csp.values()}, best <C> = {r.best_value:.4f} at gamma={r.gamma:.4f}, beta={r.beta:.4f}")
    print("       P(00, 01, 10, 11) =", np.round(dist, 4))
