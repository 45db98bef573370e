# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled core of the SMO dual solver.

Maximal-violating-pair working-set selection on the C-SVM dual; one
clipped coordinate exchange per iteration. Mirrors _smo_py.solve; fix
bugs in both places.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def solve(double[:, ::1] K, double[::1] y, double cost, double tol, long max_iter):
    cdef Py_ssize_t n = K.shape[0]
    alpha_arr = np.zeros(n, dtype=np.float64)
    g_arr = np.ones(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] g = g_arr
    cdef Py_ssize_t it = 0, t, i, j
    cdef double ci, cj, crit, beta, hi, lo, gap, a, lam, step
    cdef double beta_i, beta_j, hi_i, lo_j, kij_i, kij_j

    gap = np.inf
    while it < max_iter:
        i = -1
        j = -1
        ci = -np.inf
        cj = np.inf
        beta_i = 0.0
        beta_j = 0.0
        hi_i = 0.0
        lo_j = 0.0
        for t in range(n):
            beta = y[t] * alpha[t]
            crit = y[t] * g[t]
            if y[t] > 0.0:
                hi = cost
                lo = 0.0
            else:
                hi = 0.0
                lo = -cost
            if beta < hi - 1e-12 and crit > ci:
                ci = crit
                i = t
                beta_i = beta
                hi_i = hi
            if beta > lo + 1e-12 and crit < cj:
                cj = crit
                j = t
                beta_j = beta
                lo_j = lo
        if i < 0 or j < 0:
            gap = 0.0
            break
        gap = ci - cj
        if gap <= tol:
            break
        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if a <= 1e-12:
            a = 1e-12
        lam = hi_i - beta_i
        step = beta_j - lo_j
        if step < lam:
            lam = step
        step = gap / a
        if step < lam:
            lam = step
        for t in range(n):
            g[t] -= lam * y[t] * (K[i, t] - K[j, t])
        alpha[i] += y[i] * lam
        alpha[j] -= y[j] * lam
        it += 1
    return alpha_arr, g_arr, int(it), float(gap)
