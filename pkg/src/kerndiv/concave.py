"""Concave score-generating functions on [0, 1].

Six closed forms plus a polynomial family Poly-n built by integrating
C''(eta) = -(eta(1-eta))^n twice in exact rational arithmetic. Every
function satisfies C(0) = C(1) = 0, C(1/2) = 1/2, symmetry about 1/2,
and strict concavity; validate_concave checks all of that on a grid.

Calibration constants are the full-precision solutions of C(1/2) = 1/2
for each family (their 4-5 digit roundings circulate elsewhere; the
rounded values miss the midpoint condition by ~1e-5, which matters at
the tolerances enforced here).
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

# log:    C = s * -(eta ln eta + (1-eta) ln(1-eta)),  s = 1/(2 ln 2)
# logcos: C = ln(cos(a(eta-1/2))/cos(a/2))/a,         a/2 solves cos(t) = e^(-t)
# cosh:   C = cosh(a/2) - cosh(a(1/2-eta)),           a = 2 arccosh(3/2)
# sec:    C = sec(a/2) - sec(a(1/2-eta)),             a = 2 arccos(2/3)
LOG_SCALE = 0.7213475204444817
LOGCOS_A = 2.5853914387467968
COSH_A = 1.9248473002384138
SEC_A = 1.6821373411358605

_LOGCOS_HALF = float(np.log(np.cos(LOGCOS_A * (0.0 - 0.5))))
_COSH_HALF = float(np.cosh(COSH_A * (0.5 - 0.0)))
_SEC_HALF = float(1.0 / np.cos(SEC_A * (0.5 - 0.0)))

POLY_MAX_DEGREE = 16

CLOSED_FORM_KINDS = ("ls", "log", "exp", "logcos", "cosh", "sec")


def _xlogx(x):
    safe = np.where(x > 0.0, x, 1.0)
    return np.where(x > 0.0, x * np.log(safe), 0.0)


def _eval_ls(eta):
    return -2.0 * eta * (eta - 1.0)


def _eval_log(eta):
    return -LOG_SCALE * (_xlogx(eta) + _xlogx(1.0 - eta))


def _eval_exp(eta):
    return np.sqrt(eta * (1.0 - eta))


def _eval_logcos(eta):
    return (np.log(np.cos(LOGCOS_A * (eta - 0.5))) - _LOGCOS_HALF) / LOGCOS_A


def _eval_cosh(eta):
    return _COSH_HALF - np.cosh(COSH_A * (0.5 - eta))


def _eval_sec(eta):
    return _SEC_HALF - 1.0 / np.cos(SEC_A * (0.5 - eta))


_CLOSED_FORMS = {
    "ls": _eval_ls,
    "log": _eval_log,
    "exp": _eval_exp,
    "logcos": _eval_logcos,
    "cosh": _eval_cosh,
    "sec": _eval_sec,
}


@dataclass(frozen=True)
class ConcaveFn:
    """A concave scoring function; call it on scalars or arrays in [0, 1].

    For the polynomial family, `coeffs` holds the monomial coefficients
    over eta^1 .. eta^(2n+2) (exported for audit) while evaluation uses
    the equivalent polynomial in z = eta(1-eta), which is numerically
    stable and symmetric by construction.
    """

    kind: str
    degree: int | None = None
    coeffs: tuple | None = None
    k1: float | None = None
    k2: float | None = None
    _zcoeffs: tuple | None = None

    @property
    def name(self):
        return f"poly:{self.degree}" if self.kind == "poly" else self.kind

    def __call__(self, eta):
        arr = np.asarray(eta, dtype=np.float64)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("eta must lie in [0, 1]")
        if self.kind == "poly":
            z = arr * (1.0 - arr)
            acc = np.zeros_like(arr)
            for c in reversed(self._zcoeffs):
                acc = acc * z + c
            out = acc * z
        else:
            out = _CLOSED_FORMS[self.kind](arr)
        if np.isscalar(eta) or np.ndim(eta) == 0:
            return float(out)
        return out

    def describe(self):
        """JSON-ready parameter dict; Poly includes exact rational constants."""
        if self.kind == "poly":
            k1, k2, _ = poly_exact(self.degree)
            return {
                "kind": "poly",
                "degree": self.degree,
                "coefficients": list(self.coeffs),
                "k1": self.k1,
                "k2": self.k2,
                "k1_exact": str(k1),
                "k2_exact": str(k2),
            }
        constants = {
            "log": ("scale", LOG_SCALE),
            "logcos": ("a", LOGCOS_A),
            "cosh": ("a", COSH_A),
            "sec": ("a", SEC_A),
        }
        info = {"kind": self.kind}
        if self.kind in constants:
            name, value = constants[self.kind]
            info["calibration_constant"] = {name: value}
        return info


def closed_form(kind: str) -> ConcaveFn:
    """Return one of the six closed-form functions by name."""
    kind = str(kind).lower()
    if kind not in _CLOSED_FORMS:
        raise ValueError(f"unknown closed form {kind!r}; choose from {CLOSED_FORM_KINDS}")
    return ConcaveFn(kind=kind)


@lru_cache(maxsize=None)
def poly_exact(n: int):
    """Exact rational constants and scaled monomial coefficients for Poly-n.

    Construction: C''(eta) = -(eta(1-eta))^n expanded binomially, then
    integrated twice term by term; K1 makes C'(1/2) = 0 and K2 scales so
    C(1/2) = 1/2. Returns (K1, K2, coefficients for eta^1..eta^(2n+2)).
    """
    if not isinstance(n, int) or n < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {n!r}")
    if n > POLY_MAX_DEGREE:
        raise ValueError(f"degree {n} above cap {POLY_MAX_DEGREE}")
    # Q(eta) = int C'' has coefficient -comb(n,k)(-1)^k/(n+k+1) at eta^(n+k+1)
    k1 = sum(
        Fraction(comb(n, k) * (-1) ** k, (n + k + 1) * 2 ** (n + k + 1)) for k in range(n + 1)
    )
    base = {1: k1}
    for k in range(n + 1):
        power = n + k + 2
        term = Fraction(-(comb(n, k) * (-1) ** k), (n + k + 1) * (n + k + 2))
        base[power] = base.get(power, Fraction(0)) + term
    half_value = sum(c * Fraction(1, 2**p) for p, c in base.items())
    k2 = Fraction(1, 2) / half_value
    coeffs = tuple(k2 * base.get(p, Fraction(0)) for p in range(1, 2 * n + 3))
    return k1, k2, coeffs


def _to_z_basis(coeffs):
    """Rewrite a symmetric polynomial sum a_p eta^p as sum d_m z^m, z = eta(1-eta)."""
    deg = len(coeffs)
    w = [Fraction(0)] * (deg + 1)
    for p, a in enumerate(coeffs, start=1):
        if a == 0:
            continue
        for i in range(p + 1):
            w[i] += a * comb(p, i) * Fraction(1, 2 ** (p - i))
    assert all(w[i] == 0 for i in range(1, deg + 1, 2)), "polynomial is not symmetric"
    m = deg // 2
    z = [Fraction(0)] * (m + 1)
    for q in range(m + 1):
        cq = w[2 * q]
        if cq == 0:
            continue
        for j in range(q + 1):
            z[j] += cq * comb(q, j) * Fraction(1, 4 ** (q - j)) * (-1) ** j
    assert z[0] == 0, "symmetric rewrite must vanish at eta = 0"
    return tuple(z[1:])


@lru_cache(maxsize=None)
def poly(n: int) -> ConcaveFn:
    """Build Poly-n; exact rational arithmetic, one float conversion at the end."""
    k1, k2, coeffs = poly_exact(n)
    zcoeffs = _to_z_basis(coeffs)
    return ConcaveFn(
        kind="poly",
        degree=n,
        coeffs=tuple(float(c) for c in coeffs),
        k1=float(k1),
        k2=float(k2),
        _zcoeffs=tuple(float(c) for c in zcoeffs),
    )


def eval_concave(c: ConcaveFn, eta):
    """Evaluate C(eta); errors if eta is outside [0, 1]."""
    return c(eta)


def parse_concave(text: str) -> ConcaveFn:
    """Parse a CLI-style name: one of the closed forms, or 'poly:N'."""
    text = str(text).strip().lower()
    if text in _CLOSED_FORMS:
        return closed_form(text)
    if text.startswith("poly:"):
        try:
            n = int(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad polynomial degree in {text!r}; expected poly:N") from None
        return poly(n)
    options = ", ".join(CLOSED_FORM_KINDS) + ", poly:N"
    raise ValueError(f"unknown concave function {text!r}; options: {options}")


VALIDATION_GRID_POINTS = 1001


def validate_concave(c) -> dict:
    """Grid-check the admissibility conditions; returns booleans + residuals.

    Failures are reported, not raised. Concavity allows a 1e-12 slack
    because second differences of high-degree polynomials sit below
    float cancellation noise near the endpoints.
    """
    grid = np.linspace(0.0, 1.0, VALIDATION_GRID_POINTS)
    values = np.asarray(c(grid), dtype=np.float64)
    mirrored = np.asarray(c(1.0 - grid), dtype=np.float64)
    second_diff = values[:-2] - 2.0 * values[1:-1] + values[2:]
    bound = np.minimum(grid, 1.0 - grid)
    residuals = {
        "endpoints_zero": float(max(abs(values[0]), abs(values[-1]))),
        "midpoint_half": float(abs(values[500] - 0.5)),
        "symmetry": float(np.max(np.abs(values - mirrored))),
        "concavity": float(np.max(second_diff)),
        "dominates_min": float(max(0.0, -np.min(values - bound))),
    }
    checks = {
        "endpoints_zero": residuals["endpoints_zero"] <= 1e-12,
        "midpoint_half": residuals["midpoint_half"] <= 1e-9,
        "symmetry": residuals["symmetry"] <= 1e-9,
        "concavity": residuals["concavity"] <= 1e-12,
        "dominates_min": residuals["dominates_min"] <= 1e-9,
    }
    return {"checks": checks, "residuals": residuals, "passed": all(checks.values())}
