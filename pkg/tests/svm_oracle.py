"""Brute-force reference for tiny SVM duals, independent of the SMO solver."""
import numpy as np


def grid_dual_max(K, y, C, steps=200):
    """Maximise sum(a) - 0.5 (a*y)'K(a*y) over 0 <= a <= C, a'y = 0 for n = 4.

    The first three multipliers walk a grid of spacing C/steps; the fourth is
    fixed by the equality constraint and kept only when inside the box.
    """
    assert K.shape == (4, 4)
    g = np.linspace(0.0, C, steps + 1)
    a2, a3 = np.meshgrid(g, g, indexing="ij")
    best = -np.inf
    best_a = None
    for a1 in g:
        a4 = -y[3] * (a1 * y[0] + a2 * y[1] + a3 * y[2])
        ok = (a4 >= -1e-12) & (a4 <= C + 1e-12)
        if not ok.any():
            continue
        u = np.stack([np.full_like(a2, a1 * y[0]), a2 * y[1], a3 * y[2], a4 * y[3]], axis=-1)
        quad = np.einsum("...i,ij,...j->...", u, K, u)
        W = a1 + a2 + a3 + a4 - 0.5 * quad
        W = np.where(ok, W, -np.inf)
        idx = np.unravel_index(np.argmax(W), W.shape)
        if W[idx] > best:
            best = float(W[idx])
            best_a = np.array([a1, a2[idx], a3[idx], a4[idx]])
    return best, best_a
