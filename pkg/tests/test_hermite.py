"""Hermite polynomial construction against independent symbolic oracles."""

import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from chaoslab.exact import EC, ExactComplex
from chaoslab.hermite import (BiPoly, HermiteIndex, complex_hermite, evaluate,
                              expand_monomial, hermite_coeffs, hermite_of_linear,
                              ou_apply, ou_apply_numeric, ou_eigenvalue,
                              real_hermite)


def sympy_hermite_coeffs(n):
    """Independent oracle: differentiate exp(-x^2/2) symbolically n times."""
    x = sympy.Symbol("x")
    expr = (-1) ** n * sympy.exp(x ** 2 / 2) * sympy.diff(sympy.exp(-x ** 2 / 2), x, n)
    poly = sympy.Poly(sympy.expand(expr), x)
    out = [0] * (n + 1)
    for (k,), c in poly.terms():
        out[k] = int(c)
    return tuple(out)


def closed_form_j(m, n, rho=Fraction(2)):
    """Independent cross-check: alternating-sum closed form of J_{m,n}."""
    rho = Fraction(rho)
    terms = {}
    for i in range(min(m, n) + 1):
        c = Fraction((-1) ** i) * rho ** i * math.factorial(i) \
            * math.comb(m, i) * math.comb(n, i)
        terms[(m - i, n - i)] = c
    return BiPoly(terms)


class TestRealHermite:
    def test_first_examples(self):
        assert hermite_coeffs(0) == (1,)
        assert hermite_coeffs(1) == (0, 1)
        # H_3 = x^3 - 3x, from three symbolic differentiations
        assert hermite_coeffs(3) == sympy_hermite_coeffs(3) == (0, -3, 0, 1)

    @pytest.mark.parametrize("n", range(13))
    def test_against_sympy(self, n):
        assert hermite_coeffs(n) == sympy_hermite_coeffs(n)

    @pytest.mark.parametrize("n", range(9))
    def test_leading_coefficient_and_parity(self, n):
        coeffs = hermite_coeffs(n)
        assert coeffs[n] == 1
        # H_n(-x) = (-1)^n H_n(x): coefficients vanish off the parity of n
        assert all(c == 0 for k, c in enumerate(coeffs) if (k - n) % 2)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_three_term_recurrence_is_derived(self, n):
        # x H_n - n H_{n-1} = H_{n+1}, checked against the derivative definition
        cur, prev, nxt = hermite_coeffs(n), hermite_coeffs(n - 1), hermite_coeffs(n + 1)
        want = [0] * (n + 2)
        for k, c in enumerate(cur):
            want[k + 1] += c
        for k, c in enumerate(prev):
            want[k] -= n * c
        assert tuple(want) == nxt

    def test_real_hermite_bipoly_roundtrip(self):
        p = real_hermite(4)
        assert p.to_xy() == {(4, 0): EC(1), (2, 0): EC(-6), (0, 0): EC(3)}
        assert BiPoly.from_xy(p.to_xy()) == p


class TestComplexHermite:
    def test_base_cases(self):
        assert complex_hermite(0, 0) == BiPoly.constant(1)
        assert complex_hermite(1, 0) == BiPoly.z()
        assert complex_hermite(1, 1) == BiPoly({(1, 1): 1, (0, 0): -2})
        assert complex_hermite(1, 1, rho=Fraction(3)) == BiPoly({(1, 1): 1, (0, 0): -3})

    def test_hermite_index_validation(self):
        idx = HermiteIndex(2, 1)
        assert complex_hermite(idx) == complex_hermite(2, 1)
        with pytest.raises(ValueError):
            HermiteIndex(-1, 0)
        with pytest.raises(ValueError):
            HermiteIndex(0, 0, rho=0)

    @pytest.mark.parametrize("rho", [Fraction(1), Fraction(2), Fraction(1, 2)])
    def test_closed_form_cross_check(self, rho):
        for m in range(7):
            for n in range(7 - m):
                assert complex_hermite(m, n, rho=rho) == closed_form_j(m, n, rho)

    @pytest.mark.parametrize("rho", [Fraction(1), Fraction(2)])
    def test_conjugation_symmetry(self, rho):
        for m in range(7):
            for n in range(7 - m):
                assert complex_hermite(m, n, rho=rho).conj() == \
                    complex_hermite(n, m, rho=rho)

    def test_evaluation_examples(self):
        assert evaluate(complex_hermite(0, 0), 2.3 - 0.7j) == 1
        assert evaluate(complex_hermite(1, 0), 3 + 4j) == 3 + 4j
        assert evaluate(complex_hermite(1, 1), 1 + 1j) == 0

    def test_vectorized_evaluation(self):
        z = np.array([1 + 1j, 0.5 - 0.25j, -2j])
        p = complex_hermite(2, 1)
        vec = p(z)
        assert vec.shape == (3,)
        for i, zi in enumerate(z):
            assert vec[i] == pytest.approx(p(complex(zi)))


class TestOrnsteinUhlenbeck:
    def test_kills_constants(self):
        assert ou_apply(complex_hermite(0, 0), (Fraction(3, 5), Fraction(4, 5))).is_zero()

    def test_radial_case(self):
        # at theta = 0 the generator sends J_{1,1} to -2 J_{1,1}
        j11 = complex_hermite(1, 1)
        assert ou_apply(j11, (Fraction(1), Fraction(0))) == EC(-2) * j11

    def test_degree_one_phase(self):
        cos_t, sin_t = Fraction(4, 5), Fraction(3, 5)
        out = ou_apply(complex_hermite(1, 0), (cos_t, sin_t))
        assert out == ExactComplex(-cos_t, -sin_t) * BiPoly.z()

    def test_exact_eigenrelation(self):
        for cos_t, sin_t in [(Fraction(1), Fraction(0)), (Fraction(4, 5), Fraction(3, 5)),
                             (Fraction(3, 5), Fraction(-4, 5))]:
            for m in range(7):
                for n in range(7 - m):
                    p = complex_hermite(m, n)
                    assert ou_apply(p, (cos_t, sin_t)) == \
                        ou_eigenvalue(m, n, cos_t, sin_t) * p

    def test_numeric_eigenrelation(self):
        rng = np.random.default_rng(5)
        for theta in rng.uniform(-1.5, 1.5, size=10):
            p = complex_hermite(2, 1)
            lam = ou_eigenvalue(2, 1, math.cos(theta), math.sin(theta))
            got = ou_apply_numeric(p, float(theta))
            want = {k: lam * c.to_complex() for k, c in p.terms().items()}
            for key in set(got) | set(want):
                assert abs(got.get(key, 0) - want.get(key, 0)) <= 1e-12

    def test_rejects_bad_angles(self):
        p = complex_hermite(1, 1)
        with pytest.raises(ValueError):
            ou_apply(p, (Fraction(-3, 5), Fraction(4, 5)))  # cos <= 0
        with pytest.raises(ValueError):
            ou_apply(p, (Fraction(1, 2), Fraction(1, 2)))  # not on the circle
        with pytest.raises(ValueError):
            ou_apply_numeric(p, 2.0)
        with pytest.raises(ValueError):
            ou_apply_numeric(p, 0.3, rho=-1)


class TestMonomialExpansion:
    def test_examples(self):
        assert expand_monomial(1, 0) == {(1, 0): 1}
        assert expand_monomial(1, 1) == {(1, 1): 1, (0, 0): 2}
        assert expand_monomial(2, 1) == {(2, 1): 1, (1, 0): 4}

    def test_roundtrip(self):
        for r in range(6):
            for s in range(6):
                total = BiPoly()
                for (m, n), c in expand_monomial(r, s).items():
                    total = total + c * complex_hermite(m, n)
                assert total == BiPoly({(r, s): 1})

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            expand_monomial(-1, 0)


small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@given(st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3)),
    st.builds(ExactComplex, small_fracs, small_fracs),
    max_size=6))
@settings(max_examples=40, deadline=None)
def test_xy_form_is_an_exact_bijection(terms):
    p = BiPoly(terms)
    assert BiPoly.from_xy(p.to_xy()) == p


def test_linear_composition_matches_pointwise():
    p = hermite_of_linear(4, Fraction(3, 5), Fraction(4, 5))
    for z in (0.3 + 1.1j, -2 + 0.5j):
        x, y = z.real, z.imag
        direct = sum(c * (0.6 * x + 0.8 * y) ** k
                     for k, c in enumerate(hermite_coeffs(4)))
        assert p(z).real == pytest.approx(direct)
        assert p(z).imag == pytest.approx(0, abs=1e-12)
