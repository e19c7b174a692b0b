import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from moltiming.numerics import (
    Bracket,
    MaxIterations,
    NonFinite,
    NoSignChange,
    Tolerance,
    erfc,
    erfc_inv,
    find_root,
    integrate_semi_infinite,
    minimize_scalar,
)


def erfc_oracle(x: float) -> float:
    # independent route: quadrature of the defining integral
    val, _ = integrate.quad(lambda u: math.exp(-u * u), x, np.inf)
    return 2.0 / math.sqrt(math.pi) * val


class TestErfc:
    def test_zero(self):
        assert erfc(0.0) == 1.0

    def test_large_argument_clamps(self):
        assert erfc(10.0) < 1e-44
        assert erfc(30.0) == 0.0  # below the clamp threshold

    def test_against_integral_oracle(self):
        for x in [-2.0, -0.5, 0.3, 1.5811, 3.0, 5.0]:
            assert erfc(x) == pytest.approx(erfc_oracle(x), rel=1e-12)

    def test_value_near_0025(self):
        assert erfc(1.5811) == pytest.approx(0.02535, abs=5e-6)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            erfc(float("nan"))

    @given(st.floats(-10, 10), st.floats(-10, 10))
    def test_strictly_decreasing(self, a, b):
        if a < b:
            assert erfc(a) >= erfc(b)
            # strictness saturates in double precision near erfc ~ 0 or ~ 2
            if b - a > 1e-9 and -5.0 <= a and b <= 5.0:
                assert erfc(a) > erfc(b)

    @given(st.floats(-10, 10))
    def test_reflection_identity(self, x):
        assert erfc(x) + erfc(-x) == pytest.approx(2.0, abs=1e-14)


class TestErfcInv:
    def test_identity_at_one(self):
        assert erfc_inv(1.0) == 0.0

    def test_half_against_bisection_oracle(self):
        lo, hi = 0.0, 5.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if erfc(mid) > 0.5:
                lo = mid
            else:
                hi = mid
        assert erfc_inv(0.5) == pytest.approx(0.5 * (lo + hi), abs=1e-12)
        assert erfc_inv(0.5) == pytest.approx(0.4769, abs=1e-4)

    def test_round_trip(self):
        assert erfc_inv(erfc(2.0)) == pytest.approx(2.0, abs=1e-10)

    @pytest.mark.parametrize("p", [0.0, -0.5, 2.0, 2.5])
    def test_domain_errors(self, p):
        with pytest.raises(ValueError):
            erfc_inv(p)


class TestFindRoot:
    def test_linear(self):
        assert find_root(lambda x: x - 1.0, Bracket(0.0, 2.0)) == pytest.approx(1.0, abs=1e-12)

    def test_sqrt2(self):
        r = find_root(lambda x: x * x - 2.0, Bracket(1.0, 2.0), Tolerance(abs_x=1e-13))
        assert r == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_single_arrival_threshold_equation(self):
        # c = 2, delta = 1: root of y(y-1)log(y/(y-1)) = 2/3 on [1, 1 + 2/3]
        f = lambda y: y * (y - 1.0) * math.log(y / (y - 1.0)) - 2.0 / 3.0
        r = find_root(f, Bracket(1.0 + 1e-12, 1.0 + 2.0 / 3.0))
        assert r == pytest.approx(1.372, abs=1e-3)

    def test_no_sign_change(self):
        with pytest.raises(NoSignChange):
            find_root(lambda x: x * x + 1.0, Bracket(-1.0, 1.0))

    def test_root_at_endpoint(self):
        assert find_root(lambda x: x, Bracket(0.0, 1.0)) == 0.0

    def test_max_iterations(self):
        with pytest.raises(MaxIterations):
            find_root(
                lambda x: x**3 - 0.343, Bracket(0.0, 1.0), Tolerance(abs_x=1e-15, max_iter=2)
            )

    def test_threshold_equation_sign_structure(self):
        # the equation's left side starts below c*delta/3 and ends above it,
        # and its derivative (2y - delta) log(y/(y-delta)) - delta stays
        # positive across the bracket
        for c in (0.5, 1.0, 2.0, 5.0):
            for delta in (0.3, 1.0, 4.0):
                lhs = lambda y: y * (y - delta) * math.log(y / (y - delta))
                assert lhs(delta * (1 + 1e-9)) < c * delta / 3.0
                assert lhs(delta + c / 3.0) > c * delta / 3.0
                for y in np.linspace(delta * (1 + 1e-6), delta + c / 3.0, 50):
                    deriv = (2 * y - delta) * math.log(y / (y - delta)) - delta
                    assert deriv > 0


class TestMinimizeScalar:
    def test_quadratic(self):
        x, fx = minimize_scalar(lambda s: (s - 0.3) ** 2, Bracket(0.0, 1.0))
        assert x == pytest.approx(0.3, abs=1e-9)
        assert fx == pytest.approx(0.0, abs=1e-16)

    def test_boundary_minimum(self):
        x, fx = minimize_scalar(lambda s: -s, Bracket(0.0, 1.0))
        assert x == pytest.approx(1.0, abs=1e-9)
        assert fx == pytest.approx(-1.0, abs=1e-9)

    def test_chernoff_objective_reference_point(self):
        # minimized log of the overlap integral between the two shifted delay
        # densities at c = 0.5, delta = 0.1
        c, delta = 0.5, 0.1

        def objective(s):
            def integrand(y):
                u = y - delta
                lg0 = 0.5 * math.log(c / (2 * math.pi)) - 1.5 * math.log(y) - c / (2 * y)
                lgd = 0.5 * math.log(c / (2 * math.pi)) - 1.5 * math.log(u) - c / (2 * u)
                return math.exp(s * lg0 + (1 - s) * lgd)

            return math.log(integrate_semi_infinite(integrand, delta, Tolerance(rel_f=1e-9)))

        _, fx = minimize_scalar(objective, Bracket(0.0, 1.0), Tolerance(abs_x=1e-6))
        assert -fx == pytest.approx(0.044106, abs=5e-4)

    def test_max_iterations(self):
        with pytest.raises(MaxIterations):
            minimize_scalar(lambda s: s * s, Bracket(0.0, 1.0), Tolerance(abs_x=1e-12, max_iter=2))


class TestIntegrateSemiInfinite:
    def test_exponential(self):
        assert integrate_semi_infinite(lambda y: math.exp(-y), 0.0) == pytest.approx(1.0, abs=1e-8)

    def test_levy_density_normalizes(self):
        c = 2.0

        def pdf(y):
            return math.sqrt(c / (2 * math.pi * y**3)) * math.exp(-c / (2 * y)) if y > 0 else 0.0

        assert integrate_semi_infinite(pdf, 0.0) == pytest.approx(1.0, abs=1e-6)

    def test_levy_tail_from_median_is_half(self):
        from scipy.special import erfcinv

        c = 2.0
        median = c / (2.0 * float(erfcinv(0.5)) ** 2)

        def pdf(y):
            return math.sqrt(c / (2 * math.pi * y**3)) * math.exp(-c / (2 * y))

        assert integrate_semi_infinite(pdf, median) == pytest.approx(0.5, abs=1e-6)

    def test_non_finite_detected(self):
        with pytest.raises(NonFinite):
            integrate_semi_infinite(lambda y: float("nan"), 0.0)

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    def test_density_from_location_is_one(self, c):
        def pdf(y):
            return math.sqrt(c / (2 * math.pi * y**3)) * math.exp(-c / (2 * y)) if y > 0 else 0.0

        assert integrate_semi_infinite(pdf, 0.0) == pytest.approx(1.0, abs=1e-6)


class TestBracketTolerance:
    def test_bracket_rejects_inverted(self):
        with pytest.raises(ValueError):
            Bracket(2.0, 1.0)

    def test_tolerance_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Tolerance(abs_x=0.0)
        with pytest.raises(ValueError):
            Tolerance(max_iter=0)
