"""Pure numpy fallback for the SMO dual solver.

Same pair-selection and update rule as the compiled core in _smo.pyx:
maximal-violating-pair working set on the gradient of the dual, one
clipped coordinate exchange per iteration. Kept in lockstep with the
.pyx source; fix bugs in both places.
"""

import numpy as np


def solve(K, y, cost, tol, max_iter):
    n = K.shape[0]
    alpha = np.zeros(n)
    g = np.ones(n)
    beta_hi = np.where(y > 0, cost, 0.0)
    beta_lo = np.where(y > 0, 0.0, -cost)
    gap = np.inf
    it = 0
    while it < max_iter:
        beta = y * alpha
        crit = y * g
        ci = np.where(beta < beta_hi - 1e-12, crit, -np.inf)
        cj = np.where(beta > beta_lo + 1e-12, crit, np.inf)
        i = int(np.argmax(ci))
        j = int(np.argmin(cj))
        if not (np.isfinite(ci[i]) and np.isfinite(cj[j])):
            gap = 0.0
            break
        gap = ci[i] - cj[j]
        if gap <= tol:
            break
        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if a <= 1e-12:
            a = 1e-12
        lam = min(beta_hi[i] - beta[i], beta[j] - beta_lo[j], gap / a)
        g -= lam * y * (K[i] - K[j])
        alpha[i] += y[i] * lam
        alpha[j] -= y[j] * lam
        it += 1
    return alpha, g, it, float(gap)
