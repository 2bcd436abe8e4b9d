# cython: language_level=3
"""Compiled hot kernels: stopping-time cube selection and scalar-kernel quadrature.

Must match ``_purepy`` decision-for-decision: same float expressions in the
same order, so selections are bit-identical across backends.
"""

from libc.math cimport isnan

import numpy as np

cimport numpy as cnp

cnp.import_array()


def select_bad_cubes(const double[::1] cell_integrals, double h, double alpha):
    """See ``volterra_cz._purepy.select_bad_cubes``."""
    cdef Py_ssize_t N = cell_integrals.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prefix_arr = np.empty(N + 1, dtype=np.float64)
    cdef double[::1] prefix = prefix_arr
    cdef Py_ssize_t i
    cdef double acc = 0.0
    prefix[0] = 0.0
    for i in range(N):
        acc += cell_integrals[i]
        prefix[i + 1] = acc

    cdef Py_ssize_t j_root = 0
    cdef Py_ssize_t w, n_cubes, k, start, end
    cdef bint any_bad
    while True:
        w = (<Py_ssize_t>1) << j_root
        n_cubes = (N + w - 1) >> j_root
        any_bad = False
        for k in range(n_cubes):
            start = k << j_root
            end = start + w
            if end > N:
                end = N
            if prefix[end] - prefix[start] > alpha * (w * h):
                any_bad = True
                break
        if not any_bad:
            break
        j_root += 1

    cdef cnp.ndarray[cnp.int64_t, ndim=1] levels_arr = np.empty(N, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] indices_arr = np.empty(N, dtype=np.int64)
    cdef cnp.int64_t[::1] levels = levels_arr
    cdef cnp.int64_t[::1] indices = indices_arr
    cdef Py_ssize_t n_found = 0

    # explicit DFS stack of good cubes (level, index); depth bounded by
    # j_root levels x width, use a generous preallocation
    cdef cnp.ndarray[cnp.int64_t, ndim=2] stack_arr
    cdef cnp.int64_t[:, ::1] stack
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t j, jc, wc, kc, child
    cdef double s
    if j_root > 0:
        w = (<Py_ssize_t>1) << j_root
        n_cubes = (N + w - 1) >> j_root
        stack_arr = np.empty((2 * N + n_cubes + 2, 2), dtype=np.int64)
        stack = stack_arr
        for k in range(n_cubes):
            stack[top, 0] = j_root
            stack[top, 1] = k
            top += 1
        while top > 0:
            top -= 1
            j = stack[top, 0]
            k = stack[top, 1]
            jc = j - 1
            wc = (<Py_ssize_t>1) << jc
            for child in range(2):
                kc = 2 * k + child
                start = kc << jc
                if start >= N:
                    continue
                end = start + wc
                if end > N:
                    end = N
                s = prefix[end] - prefix[start]
                if s > alpha * (wc * h):
                    levels[n_found] = jc
                    indices[n_found] = kc
                    n_found += 1
                elif jc >= 1 and s > 0.0:
                    stack[top, 0] = jc
                    stack[top, 1] = kc
                    top += 1

    levels_out = levels_arr[:n_found].copy()
    indices_out = indices_arr[:n_found].copy()
    order = np.argsort(indices_out << levels_out, kind="stable")
    return levels_out[order], indices_out[order]


def model_kernel_cell_sums(double t, const double[::1] lefts, double h,
                           const double[::1] coeffs, const double[::1] nodes,
                           const double[::1] weights, double s_shift=float("nan")):
    """See ``volterra_cz._purepy.model_kernel_cell_sums``."""
    cdef Py_ssize_t M = lefts.shape[0]
    cdef Py_ssize_t q = nodes.shape[0]
    cdef bint shifted = not isnan(s_shift)
    cdef double shift_val = 0.0
    if shifted:
        shift_val = 1.0 / (t - s_shift)
    cdef double total = 0.0
    cdef double cell, s, v
    cdef Py_ssize_t i, a
    for i in range(M):
        if coeffs[i] == 0.0:
            continue
        cell = 0.0
        for a in range(q):
            s = lefts[i] + (nodes[a] + 1.0) * (0.5 * h)
            v = 1.0 / (t - s)
            if shifted:
                v -= shift_val
            cell += weights[a] * v
        total += coeffs[i] * cell
    return 0.5 * h * total
