"""Szegedy walk on a weighted two-node graph: circuit, spectrum and periods."""

import numpy as np

from lcusim import qmath, szegedy as sz

for a, b in [(0.25, 0.25), (0.5, 0.5), (0.75, 0.75), (1, 1), (0.1, 0.9), (0.2, 0.3), (0.43, 0.43)]:
    g = sz.TwoNodeGraph(a, b)
    u = sz.build_usz(g.matrix())
    gap = qmath.global_phase_distance(sz.two_node_circuit(g), u)
    print(f"alpha={a:.2f} beta={b:.2f}: period {sz.detect_period(u)}, circuit/dense gap {gap:.1e}")

u = sz.build_usz(sz.transition_matrix(0.25, 0.25))
trace = sz.evolve(u, [1, 0, 0, 0], 12)
print("node-0 probability, alpha=beta=0.25:", np.round([p[0] for _, _, p in trace], 3))
