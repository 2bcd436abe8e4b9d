"""Pure NumPy implementations of the hot kernels.

Reference semantics for the compiled extension in ``_core.pyx``: both
backends must select the same cubes bit-for-bit (same float comparisons in
the same order) and agree on quadrature sums to rounding.
"""

from __future__ import annotations

import math

import numpy as np


def select_bad_cubes(cell_integrals: np.ndarray, h: float, alpha: float):
    """Maximal bad dyadic cubes of the stopping-time selection.

    ``cell_integrals[i]`` is the integral of ||f||_X over grid cell i (>= 0).
    A cube spanning w cells starting at cell s is bad when its integral
    exceeds alpha * (w * h); badness is strict, ties count as good.  Returns
    ``(levels, indices)``: relative level j (cube width 2^j cells) and dyadic
    index k (cube start cell = k * 2^j), sorted by left endpoint.
    """
    c = np.asarray(cell_integrals, dtype=float)
    N = c.shape[0]
    prefix = np.concatenate(([0.0], np.cumsum(c)))

    def cube_sum(start, width):
        return prefix[min(start + width, N)] - prefix[min(start, N)]

    # smallest level at which every cube meeting the grid is good
    j_root = 0
    while True:
        w = 1 << j_root
        n_cubes = (N + w - 1) >> j_root
        if not any(cube_sum(k << j_root, w) > alpha * (w * h)
                   for k in range(n_cubes)):
            break
        j_root += 1

    levels, indices = [], []
    if j_root > 0:
        w = 1 << j_root
        stack = [(j_root, k) for k in range((N + w - 1) >> j_root)]
        while stack:
            j, k = stack.pop()
            jc = j - 1
            wc = 1 << jc
            for kc in (2 * k, 2 * k + 1):
                start = kc << jc
                if start >= N:
                    continue
                s = cube_sum(start, wc)
                if s > alpha * (wc * h):
                    levels.append(jc)
                    indices.append(kc)
                elif jc >= 1 and s > 0.0:
                    stack.append((jc, kc))
    levels = np.asarray(levels, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    order = np.argsort(indices << levels, kind="stable")
    return levels[order], indices[order]


def model_kernel_cell_sums(t: float, lefts: np.ndarray, h: float,
                           coeffs: np.ndarray, nodes: np.ndarray,
                           weights: np.ndarray, s_shift: float = math.nan) -> float:
    """Gauss-Legendre accumulation of the scalar kernel 1/(t - s) over cells.

    Computes sum_i coeffs[i] * (h/2) * sum_a weights[a] * K(t, s_{ia}) with
    s_{ia} = lefts[i] + (nodes[a] + 1) h/2; when ``s_shift`` is finite the
    integrand is the shifted difference K(t, s) - K(t, s_shift).
    """
    lefts = np.asarray(lefts, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    s = lefts[:, None] + (nodes[None, :] + 1.0) * (0.5 * h)
    vals = 1.0 / (t - s)
    if not math.isnan(s_shift):
        vals = vals - 1.0 / (t - s_shift)
    return float(0.5 * h * np.einsum("i,ia,a->", coeffs, vals, weights))
