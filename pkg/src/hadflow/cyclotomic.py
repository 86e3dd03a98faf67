"""Exact arithmetic in Z[zeta_N] for deciding whether a sum of roots of unity vanishes.

An element ``sum_e c_e zeta_N**e`` is the integer polynomial ``sum_e c_e x**e``
read modulo the N-th cyclotomic polynomial; it is zero exactly when the
remainder is the zero polynomial.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterable

MAX_CONDUCTOR = 10**6


class ConductorTooLarge(ValueError):
    pass


def _divisors(n: int) -> list[int]:
    small, large = [], []
    k = 1
    while k * k <= n:
        if n % k == 0:
            small.append(k)
            if k * k != n:
                large.append(n // k)
        k += 1
    return small + large[::-1]


def _divide_exact(num: list[int], den: list[int]) -> list[int]:
    """Quotient of integer polynomials (coefficient lists, low degree first); ``den`` monic."""
    num = list(num)
    dn = len(den) - 1
    q = [0] * (len(num) - dn)
    for k in range(len(num) - 1, dn - 1, -1):
        c = num[k]
        if c:
            q[k - dn] = c
            for i in range(dn + 1):
                num[k - dn + i] -= c * den[i]
    if any(num[:dn]):
        raise ArithmeticError("polynomial division was not exact")
    return q


@lru_cache(maxsize=256)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of the n-th cyclotomic polynomial, lowest degree first."""
    if n < 1:
        raise ValueError("n must be positive")
    # x**n - 1 = prod_{k | n} Phi_k(x)
    poly = [-1] + [0] * (n - 1) + [1]
    for k in _divisors(n)[:-1]:
        poly = _divide_exact(poly, list(cyclotomic_poly(k)))
    return tuple(poly)


def reduce_mod_cyclotomic(coeffs: list[int], n: int) -> tuple[int, ...]:
    """Remainder of ``sum coeffs[e] x**e`` modulo ``Phi_n`` (length ``deg Phi_n``)."""
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    rem = list(coeffs) + [0] * max(0, deg - len(coeffs))
    for k in range(len(rem) - 1, deg - 1, -1):
        c = rem[k]
        if c:
            for i in range(deg + 1):
                rem[k - deg + i] -= c * phi[i]
    return tuple(rem[:deg])


def conductor(phases: Iterable[Fraction]) -> int:
    n = 1
    for q in phases:
        n = lcm(n, Fraction(q).denominator)
    return n


def root_sum_residue(phases: Iterable[Fraction], n: int | None = None) -> tuple[int, ...]:
    """Reduced coefficient vector of ``sum_k exp(2 pi i q_k)`` in ``Z[zeta_n]``."""
    phases = [Fraction(q) for q in phases]
    if n is None:
        n = conductor(phases)
    if n > MAX_CONDUCTOR:
        raise ConductorTooLarge(
            f"conductor {n} exceeds {MAX_CONDUCTOR}; phases have denominators too large to verify"
        )
    coeffs = [0] * n
    for q in phases:
        scaled = q * n
        if scaled.denominator != 1:
            raise ValueError(f"phase {q} is not a multiple of 1/{n}")
        coeffs[int(scaled) % n] += 1
    return reduce_mod_cyclotomic(coeffs, n)


def roots_sum_to_zero(phases: Iterable[Fraction], n: int | None = None) -> bool:
    return not any(root_sum_residue(phases, n))
