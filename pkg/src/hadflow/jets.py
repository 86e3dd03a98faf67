"""Truncated multivariate power series ("jets") with array-valued coefficients.

A jet in ``n`` variables truncated at total degree ``K`` is an array whose
last axis indexes the monomials ``t^m`` with ``|m| <= K`` in graded order.
Coefficients may be float/complex or mpmath object arrays; every operation
here only uses ``+``, ``*`` and indexing, so both work unchanged.
"""
from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np


def monomials(nvars: int, order: int) -> list[tuple[int, ...]]:
    """Exponent tuples with total degree ``<= order``, sorted by degree."""
    out = []
    for k in range(order + 1):
        for comb in itertools.combinations_with_replacement(range(nvars), k):
            m = [0] * nvars
            for i in comb:
                m[i] += 1
            out.append(tuple(m))
    return out


class JetAlgebra:
    def __init__(self, nvars: int, order: int):
        if nvars < 1:
            raise ValueError("need at least one variable")
        if order < 0:
            raise ValueError("order must be non-negative")
        self.nvars = nvars
        self.order = order
        self.monomials = monomials(nvars, order)
        self.index = {m: i for i, m in enumerate(self.monomials)}
        self.size = len(self.monomials)
        self.degree = np.array([sum(m) for m in self.monomials], dtype=int)

    @cached_property
    def _pairs(self):
        # product table sorted by output slot, for reduceat
        left, right, slot = [], [], []
        for i, a in enumerate(self.monomials):
            for j, b in enumerate(self.monomials):
                if sum(a) + sum(b) <= self.order:
                    left.append(i)
                    right.append(j)
                    slot.append(self.index[tuple(x + y for x, y in zip(a, b))])
        order = np.argsort(slot, kind="stable")
        left = np.array(left)[order]
        right = np.array(right)[order]
        slot = np.array(slot)[order]
        starts = np.searchsorted(slot, np.arange(self.size))
        return left, right, starts

    def of_degree(self, k: int) -> np.ndarray:
        return np.nonzero(self.degree == k)[0]

    def unit(self, i: int) -> int:
        """Slot of the linear monomial ``t_i``."""
        return self.index[tuple(int(j == i) for j in range(self.nvars))]

    def constant(self, value, dtype=None) -> np.ndarray:
        value = np.asarray(value, dtype=dtype)
        out = np.zeros(value.shape + (self.size,), dtype=value.dtype)
        if value.dtype == object:
            out[...] = 0
        out[..., 0] = value
        return out

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Entrywise product of jet arrays (broadcasting over leading axes)."""
        left, right, starts = self._pairs
        prod = x[..., left] * y[..., right]
        return np.add.reduceat(prod, starts, axis=-1)

    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Matrix product of jet matrices ``(n, m, M) @ (m, p, M)``."""
        left, right, starts = self._pairs
        out = np.zeros((A.shape[0], B.shape[1], self.size),
                       dtype=np.result_type(A.dtype, B.dtype))
        for s in range(self.size):
            stop = starts[s + 1] if s + 1 < self.size else len(left)
            acc = 0
            for a, b in zip(left[starts[s]:stop], right[starts[s]:stop]):
                acc = acc + A[:, :, a] @ B[:, :, b]
            out[:, :, s] = acc
        return out

    def exp_nilpotent(self, x: np.ndarray) -> np.ndarray:
        """``exp(x)`` for jets with zero constant term."""
        result = np.zeros_like(x)
        if x.dtype == object:
            result[...] = 0
        result[..., 0] = 1
        term = result.copy()
        for n in range(1, self.order + 1):
            term = self.mul(term, x) / n
            result = result + term
        return result

    def expj(self, x: np.ndarray, base_expj) -> np.ndarray:
        """``exp(1j * x)`` given ``base_expj = exp(1j * x[..., 0])``."""
        nil = 1j * x
        nil[..., 0] = 0
        return base_expj[..., None] * self.exp_nilpotent(nil)

    def derivative(self, x: np.ndarray, i: int) -> np.ndarray:
        """Partial derivative in ``t_i``; the top-degree part is lost."""
        out = np.zeros_like(x)
        if x.dtype == object:
            out[...] = 0
        for s, m in enumerate(self.monomials):
            if m[i] > 0:
                lower = list(m)
                lower[i] -= 1
                out[..., self.index[tuple(lower)]] = out[..., self.index[tuple(lower)]] + m[i] * x[..., s]
        return out

    def evaluate(self, x: np.ndarray, t) -> np.ndarray:
        """Sum the series at the point ``t``."""
        t = list(t)
        if len(t) != self.nvars:
            raise ValueError(f"expected {self.nvars} parameter values, got {len(t)}")
        powers = []
        for m in self.monomials:
            v = 1
            for ti, e in zip(t, m):
                if e:
                    v = v * ti ** e
            powers.append(v)
        powers = np.array(powers, dtype=object if x.dtype == object else None)
        return (x * powers).sum(axis=-1)

    def truncate(self, x: np.ndarray, k: int) -> np.ndarray:
        """Drop every term of degree above ``k``."""
        out = x.copy()
        out[..., self.degree > k] = 0
        return out
