import json
from fractions import Fraction

import numpy as np
import pytest

from kerndiv import concave
from kerndiv.concave import (
    CLOSED_FORM_KINDS,
    ConcaveFn,
    closed_form,
    eval_concave,
    parse_concave,
    poly,
    poly_exact,
    validate_concave,
)

GRID = np.linspace(0.0, 1.0, 1001)


def all_shipped():
    fns = [closed_form(k) for k in CLOSED_FORM_KINDS]
    fns += [poly(n) for n in (0, 1, 2, 4, 8)]
    return fns


class TestClosedForms:
    def test_ls_frozen_value(self):
        # -2 * (1/4) * (1/4 - 1) = 3/8
        assert eval_concave(closed_form("ls"), 0.25) == pytest.approx(3.0 / 8.0, abs=1e-15)

    def test_exp_at_half(self):
        assert eval_concave(closed_form("exp"), 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_all_kinds_zero_at_endpoints(self):
        for fn in all_shipped():
            assert abs(fn(0.0)) <= 1e-12, fn.name
            assert abs(fn(1.0)) <= 1e-12, fn.name

    def test_all_kinds_half_at_half(self):
        for fn in all_shipped():
            assert fn(0.5) == pytest.approx(0.5, abs=1e-9), fn.name

    def test_symmetry_on_grid(self):
        for fn in all_shipped():
            np.testing.assert_allclose(fn(GRID), fn(1.0 - GRID), atol=1e-9, err_msg=fn.name)

    def test_concave_second_differences(self):
        for fn in all_shipped():
            v = fn(GRID)
            sd = v[:-2] - 2.0 * v[1:-1] + v[2:]
            assert sd.max() <= 1e-12, fn.name

    def test_dominates_min_bound(self):
        bound = np.minimum(GRID, 1.0 - GRID)
        for fn in all_shipped():
            assert np.min(fn(GRID) - bound) >= -1e-9, fn.name

    def test_calibration_constants_satisfy_defining_equations(self):
        # each constant is the exact solution of C(1/2) = 1/2 for its family
        assert np.cos(concave.LOGCOS_A / 2) == pytest.approx(np.exp(-concave.LOGCOS_A / 2), abs=1e-15)
        assert np.cosh(concave.COSH_A / 2) == pytest.approx(1.5, abs=1e-15)
        assert np.cos(concave.SEC_A / 2) == pytest.approx(2.0 / 3.0, abs=1e-15)
        assert concave.LOG_SCALE == pytest.approx(1.0 / (2.0 * np.log(2.0)), abs=1e-16)

    def test_domain_errors(self):
        fn = closed_form("ls")
        with pytest.raises(ValueError):
            fn(-0.01)
        with pytest.raises(ValueError):
            fn(1.01)
        with pytest.raises(ValueError):
            fn(np.array([0.5, 1.5]))

    def test_scalar_and_array_eval_agree(self):
        for fn in all_shipped():
            vals = fn(GRID[1:-1])
            spot = np.array([fn(float(e)) for e in GRID[1:-1][::97]])
            np.testing.assert_array_equal(vals[::97], spot)

    def test_max_gap_ordering(self):
        # regression of the transcription: LS < Cosh < Sec < Log < LogCos < Exp
        bound = np.minimum(GRID, 1.0 - GRID)
        gaps = [np.max(closed_form(k)(GRID) - bound) for k in ("ls", "cosh", "sec", "log", "logcos", "exp")]
        assert all(a < b for a, b in zip(gaps, gaps[1:])), gaps


class TestPolyGenerator:
    def test_poly0_is_ls_coefficientwise(self):
        fn = poly(0)
        assert fn.coeffs == (2.0, -2.0)
        np.testing.assert_allclose(fn(GRID), closed_form("ls")(GRID), atol=1e-14)

    def test_poly2_exact_constants(self):
        k1, k2, coeffs = poly_exact(2)
        assert k1 == Fraction(1, 60)
        assert k2 == Fraction(960, 11)

    def test_poly2_monomial_coefficients(self):
        # K2 * (eta/60 - eta^4/12 + eta^5/10 - eta^6/30)
        fn = poly(2)
        k2 = Fraction(960, 11)
        expected = {1: k2 / 60, 4: -k2 / 12, 5: k2 / 10, 6: -k2 / 30}
        assert len(fn.coeffs) == 6
        for power, value in enumerate(fn.coeffs, start=1):
            assert value == pytest.approx(float(expected.get(power, 0)), abs=1e-12), power

    def test_poly4_constants_near_printed_values(self):
        fn = poly(4)
        assert fn.k1 == pytest.approx(7.9365e-4, rel=5e-4)
        assert fn.k2 == pytest.approx(1671.3, rel=5e-4)

    def test_poly4_exact_constants(self):
        k1, k2, _ = poly_exact(4)
        assert k1 == Fraction(1, 1260)
        assert k2 == Fraction(322560, 193)

    def test_monotone_tightening_and_lower_bound(self):
        bound = np.minimum(GRID, 1.0 - GRID)
        prev = poly(0)(GRID)
        for n in range(1, 10):
            cur = poly(n)(GRID)
            assert np.all(prev >= cur - 1e-9), n
            assert np.all(cur >= bound - 1e-9), n
            prev = cur

    def test_flat_derivative_at_half(self):
        h = 1e-5
        for n in (0, 2, 4, 8):
            fn = poly(n)
            d = (fn(0.5 + h) - fn(0.5 - h)) / (2 * h)
            assert abs(d) <= 1e-10, n

    def test_cap(self):
        with pytest.raises(ValueError):
            poly(17)
        with pytest.raises(ValueError):
            poly(-1)

    def test_high_degree_still_valid(self):
        report = validate_concave(poly(16))
        assert report["passed"], report

    def test_eval_matches_exact_rational(self):
        # float evaluation against exact Fraction arithmetic on a coarse grid
        n = 8
        k1, k2, coeffs = poly_exact(n)
        fn = poly(n)
        for eta in (Fraction(1, 10), Fraction(1, 3), Fraction(1, 2), Fraction(9, 10)):
            exact = sum(c * eta**p for p, c in enumerate(coeffs, start=1))
            assert fn(float(eta)) == pytest.approx(float(exact), abs=1e-13)

    def test_json_export_round_trip(self):
        fn = poly(4)
        blob = json.dumps(fn.describe())
        back = json.loads(blob)
        assert back["kind"] == "poly"
        assert back["degree"] == 4
        assert len(back["coefficients"]) == 10
        assert back["k1_exact"] == "1/1260"
        assert back["k2_exact"] == "322560/193"
        np.testing.assert_array_equal(np.array(back["coefficients"]), np.array(fn.coeffs))


class TestValidateConcave:
    def test_shipped_functions_pass(self):
        for fn in all_shipped():
            report = validate_concave(fn)
            assert report["passed"], (fn.name, report)

    def test_broken_function_fails_symmetry_and_endpoint(self):
        report = validate_concave(lambda eta: np.asarray(eta, dtype=float))
        assert not report["checks"]["symmetry"]
        assert not report["checks"]["endpoints_zero"]
        assert not report["passed"]

    def test_reports_residuals(self):
        report = validate_concave(closed_form("exp"))
        assert set(report["residuals"]) == set(report["checks"])
        assert all(np.isfinite(v) for v in report["residuals"].values())


class TestParse:
    @pytest.mark.parametrize("name", ["ls", "log", "exp", "logcos", "cosh", "sec"])
    def test_closed_names(self, name):
        assert parse_concave(name).kind == name

    def test_poly_names(self):
        fn = parse_concave("poly:4")
        assert fn.kind == "poly" and fn.degree == 4

    def test_bad_name_lists_options(self):
        with pytest.raises(ValueError, match="poly:N"):
            parse_concave("quadratic")
        with pytest.raises(ValueError):
            parse_concave("poly:x")

    def test_name_round_trip(self):
        for spec in ("ls", "exp", "poly:2"):
            assert parse_concave(spec).name == spec
