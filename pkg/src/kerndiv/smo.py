"""SMO solver for the soft-margin kernel SVM dual.

maximize  sum(alpha) - 1/2 (alpha*y)' K (alpha*y)
s.t.      0 <= alpha_i <= cost,  sum(alpha_i y_i) = 0

Selects the compiled core (kerndiv._smo) at import, falling back to the
pure numpy implementation when the extension is unavailable or when the
KERNDIV_FORCE_PYTHON environment variable is set. Both backends run the
identical algorithm; see benchmarks/bench_smo.py for the speed gap.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import _smo_py
from .errors import ConvergenceError

_py_solve = _smo_py.solve

if os.environ.get("KERNDIV_FORCE_PYTHON"):
    _compiled_solve = None
else:
    try:
        from . import _smo

        _compiled_solve = _smo.solve
    except ImportError:
        _compiled_solve = None

HAVE_COMPILED = _compiled_solve is not None
BACKEND = "compiled" if HAVE_COMPILED else "python"
_solve = _compiled_solve if HAVE_COMPILED else _py_solve

DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class SmoSolution:
    """Raw dual solution: nonnegative alphas, bias, and solver diagnostics."""

    alpha: np.ndarray
    bias: float
    iterations: int
    gap: float


def default_max_iter(n):
    return max(20000, 300 * n)


def solve_dual(K, y, cost=1.0, tol=DEFAULT_TOL, max_iter=None) -> SmoSolution:
    """Solve the dual for a precomputed PSD kernel matrix and +/-1 labels."""
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = K.shape[0]
    if K.shape != (n, n):
        raise ValueError(f"kernel matrix must be square, got {K.shape}")
    if y.shape != (n,):
        raise ValueError(f"labels must have shape ({n},), got {y.shape}")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("both classes must be nonempty")
    if cost <= 0:
        raise ValueError(f"cost must be positive, got {cost}")
    if max_iter is None:
        max_iter = default_max_iter(n)

    alpha, g, iterations, gap = _solve(K, y, float(cost), float(tol), int(max_iter))
    if gap > tol:
        raise ConvergenceError(
            f"SMO did not converge: gap {gap:.3e} > tol {tol:.1e} "
            f"after {iterations} iterations (n={n}, cost={cost})"
        )
    bias = _bias_from_gradient(alpha, g, y, cost)
    return SmoSolution(alpha=alpha, bias=bias, iterations=iterations, gap=gap)


def _bias_from_gradient(alpha, g, y, cost):
    """Offset b of the decision function f(x) = sum_t alpha_t y_t k(x_t, x) + b.

    For a free support vector, y_i f(x_i) = 1 pins b = y_i g_i; otherwise
    take the midpoint of the feasible interval from the KKT conditions.
    """
    crit = y * g
    free = (alpha > 1e-9) & (alpha < cost - 1e-9)
    if free.any():
        return float(crit[free].mean())
    beta = y * alpha
    up = beta < np.where(y > 0, cost, 0.0) - 1e-12
    lo = beta > np.where(y > 0, 0.0, -cost) + 1e-12
    hi_side = crit[up].max() if up.any() else 0.0
    lo_side = crit[lo].min() if lo.any() else 0.0
    return float(0.5 * (hi_side + lo_side))


def decision_function(K_test, alpha, y, bias):
    """Evaluate f over rows of K_test[t, j] = k(x_test_t, x_train_j)."""
    return K_test @ (alpha * y) + bias
