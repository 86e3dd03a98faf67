from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hadflow import cyclotomic


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 8, 9, 10, 12, 15, 30, 36, 105])
def test_cyclotomic_poly_matches_sympy(n):
    x = sympy.Symbol("x")
    ref = sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()[::-1]
    assert list(cyclotomic.cyclotomic_poly(n)) == [int(c) for c in ref]


def test_classic_vanishing_sums():
    assert cyclotomic.roots_sum_to_zero([Fraction(k, 5) for k in range(5)])
    assert cyclotomic.roots_sum_to_zero([Fraction(0), Fraction(1, 2)])
    # 1 + w + w^2 (cube roots) plus a vanishing pair
    assert cyclotomic.roots_sum_to_zero([Fraction(0), Fraction(1, 3), Fraction(2, 3),
                                         Fraction(1, 4), Fraction(3, 4)])
    assert not cyclotomic.roots_sum_to_zero([Fraction(0), Fraction(1, 3)])
    assert not cyclotomic.roots_sum_to_zero([Fraction(0)])
    assert cyclotomic.roots_sum_to_zero([])


def test_conductor_guard():
    with pytest.raises(cyclotomic.ConductorTooLarge):
        cyclotomic.root_sum_residue([Fraction(1, 1_000_003)])


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 24).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.integers(0, n - 1), max_size=12))))
def test_residue_zero_iff_sympy_says_sum_vanishes(case):
    n, ks = case
    x = sympy.Symbol("x")
    poly = sum((x ** k for k in ks), sympy.Integer(0))
    rem = sympy.rem(sympy.Poly(poly, x, domain="ZZ"), sympy.Poly(sympy.cyclotomic_poly(n, x), x))
    expected = rem.is_zero
    assert cyclotomic.roots_sum_to_zero([Fraction(k, n) for k in ks], n) == expected
