"""From kernel vectors to verified affine Hadamard families.

A small-integer basis of the Jacobian kernel suggests candidate families
``base * EXP(i * sum_k a_k V_k)``; each candidate is then settled by exact
cyclotomic verification.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm

import numpy as np
import scipy.linalg
import sympy
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix

from .exact import ExactAffineMatrix, ExactPhase, Verdict, verify_affine_family
from .phase_core import MACHINE, PhaseVector, core_size, jacobian, order_from_size
from .precision import Precision
from .spectral import spectrum

log = logging.getLogger(__name__)

DEFAULT_HEIGHT = 8
DEFAULT_BUDGET = 100_000


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class IntegerKernelBasis:
    """Kernel basis as rows; ``integer`` is False when the numeric fallback was used."""

    vectors: np.ndarray
    residuals: np.ndarray
    integer: bool
    height_exceeded: bool
    height_bound: int

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class FamilyCandidate:
    base: ExactAffineMatrix
    directions: tuple[np.ndarray, ...]
    params: tuple[str, ...]
    matrix: ExactAffineMatrix

    @property
    def arity(self) -> int:
        return len(self.directions)


@dataclass(frozen=True)
class VerifiedSubset:
    indices: tuple[int, ...]
    params: tuple[str, ...]
    verdict: Verdict

    def to_json(self) -> dict:
        return {
            "subset": [i + 1 for i in self.indices],
            "params": list(self.params),
            "verdict": self.verdict.to_json(),
        }


def _rational_rows(rows: np.ndarray, tol: float, max_den: int) -> list[list[Fraction]] | None:
    out = []
    for row in rows:
        fr = [Fraction(float(x)).limit_denominator(max_den) for x in row]
        if max(abs(float(f) - float(x)) for f, x in zip(fr, row)) > tol:
            return None
        out.append(fr)
    return out


def _integer_rows(rows: list[list[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        den = lcm(*(f.denominator for f in row))
        ints = [int(f * den) for f in row]
        g = np.gcd.reduce([abs(v) for v in ints if v] or [1])
        out.append([v // int(g) for v in ints])
    return out


def _saturated_lattice(rows: list[list[int]], n: int) -> list[list[int]]:
    """LLL-reduced basis of all integer vectors in the rational span of ``rows``."""
    c = len(rows)
    complement = sympy.Matrix(rows).nullspace()
    comp = _integer_rows([[Fraction(int(x.p), int(x.q)) for x in v] for v in complement])
    if not comp:
        basis = np.eye(n, dtype=object)
    else:
        # [I | W C^T]: short vectors have zero second block, i.e. C v = 0
        weight = 10 ** 6 * n
        C = np.array(comp, dtype=object)
        basis = np.concatenate([np.eye(n, dtype=object), weight * C.T], axis=1)
    dm = DomainMatrix([[ZZ(int(v)) for v in row] for row in basis], basis.shape, ZZ)
    reduced = dm.lll().to_Matrix()
    kernel = [[int(reduced[i, j]) for j in range(n)] for i in range(reduced.rows)
              if all(reduced[i, j] == 0 for j in range(n, reduced.cols))]
    if len(kernel) != c:
        raise ArithmeticError(f"lattice reduction found {len(kernel)} kernel vectors, expected {c}")
    return kernel


def integer_kernel_basis(J, height_bound: int = DEFAULT_HEIGHT, prec: Precision = MACHINE,
                         tol=None, max_denominator: int = 10 ** 4) -> IntegerKernelBasis:
    """Small-integer basis of ``ker J``; falls back to the numeric basis with ``integer=False``."""
    data = spectrum(J, tol, prec)
    c = data.center_dim
    n = data.eigenvectors.shape[0]
    Jf = prec.to_float(J)
    if c == 0:
        empty = np.zeros((0, n), dtype=int)
        return IntegerKernelBasis(empty, np.zeros(0), True, False, height_bound)
    K = prec.to_float(data.center_basis).T  # c x n, orthonormal rows
    _, _, piv = scipy.linalg.qr(K, pivoting=True)
    pivots = np.sort(piv[:c])
    rref = np.linalg.solve(K[:, pivots], K)
    approx_tol = 1e-9 if prec.is_machine else 1e-12
    rational = _rational_rows(rref, approx_tol, max_denominator)
    numeric = IntegerKernelBasis(K, np.linalg.norm(K @ Jf.T, axis=1), False, False, height_bound)
    if rational is None:
        log.warning("kernel is not spanned by rational vectors of small height; using numeric basis")
        return numeric
    vectors = np.array(_saturated_lattice(_integer_rows(rational), n), dtype=int)
    # canonical sign: first nonzero entry positive
    for row in vectors:
        nz = np.flatnonzero(row)
        if nz.size and row[nz[0]] < 0:
            row *= -1
    norm_j = np.linalg.norm(Jf, 2)
    residuals = np.linalg.norm(vectors @ Jf.T, axis=1)
    limit = 1e-6 * norm_j * np.linalg.norm(vectors, axis=1)
    if np.any(residuals >= limit) or np.linalg.matrix_rank(vectors.astype(float)) != c:
        log.warning("integer candidates failed the residual check; using numeric basis")
        return numeric
    exceeded = bool(np.abs(vectors).max() > height_bound)
    if exceeded:
        log.warning("integer kernel basis has entries above the height bound %d", height_bound)
    return IntegerKernelBasis(vectors, residuals, True, exceeded, height_bound)


def _core_vector(v, d: int) -> list[int]:
    arr = np.asarray(v)
    if arr.shape == (d, d):
        if np.any(arr[0, :] != 0) or np.any(arr[:, 0] != 0):
            raise ValueError("direction matrix must vanish on the first row and column")
        arr = arr[1:, 1:]
    arr = arr.reshape(-1)
    if arr.shape[0] != core_size(d):
        raise ValueError(f"direction must have {core_size(d)} core entries, got {arr.shape[0]}")
    out = []
    for x in arr:
        if isinstance(x, (float, np.floating)) and not float(x).is_integer():
            raise ValueError(f"direction entries must be integers, got {x}")
        if isinstance(x, Fraction) and x.denominator != 1:
            raise ValueError(f"direction entries must be integers, got {x}")
        out.append(int(x))
    return out


def lift_to_family(base: ExactAffineMatrix, vectors, params=None) -> FamilyCandidate:
    """``base`` with core phase ``(r, c)`` shifted by ``sum_k params[k] * V_k[r, c]``."""
    d = base.d
    vectors = list(vectors)
    if params is None:
        params = tuple(f"a{k + 1}" for k in range(len(vectors)))
    params = tuple(params)
    if len(params) != len(vectors):
        raise ValueError(f"{len(vectors)} directions but {len(params)} parameter names")
    clash = set(params) & set(base.params)
    if clash:
        raise ValueError(f"parameter names {sorted(clash)} already used by the base")
    cores = [_core_vector(v, d) for v in vectors]
    m = d - 1
    rows = [base.entries[0]]
    for r in range(m):
        row = [base.entries[r + 1][0]]
        for c in range(m):
            shift = ExactPhase(0, tuple((p, cv[r * m + c]) for p, cv in zip(params, cores)))
            row.append(base.entries[r + 1][c + 1] + shift)
        rows.append(tuple(row))
    matrix = ExactAffineMatrix(d, tuple(rows), base.params + params)
    return FamilyCandidate(base, tuple(np.array(cv, dtype=int) for cv in cores), params, matrix)


def _prefilter(matrix: ExactAffineMatrix, rng: np.random.Generator, trials: int, threshold: float) -> bool:
    d = matrix.d
    off = ~np.eye(d, dtype=bool)
    for _ in range(trials):
        point = {p: float(x) for p, x in zip(matrix.params, rng.uniform(0, 2 * np.pi, len(matrix.params)))}
        H = matrix.evaluate(point)
        G = H @ H.conj().T
        if float((np.abs(G[off]) ** 2).sum()) >= threshold:
            return False
    return True


def search_subsets(base: ExactAffineMatrix, basis, max_arity: int, min_arity: int = 1,
                   budget: int | None = DEFAULT_BUDGET, seed: int = 0,
                   prefilter_trials: int = 3, prefilter_threshold: float = 1e-10) -> list[VerifiedSubset]:
    """Subsets of ``basis`` whose joint lift is an exact affine family, in lexicographic order.

    Subsets of size ``min_arity .. max_arity`` are tried.  A numeric
    prefilter discards candidates whose potential is visibly nonzero before
    the exact check runs.
    """
    vectors = basis.vectors if isinstance(basis, IntegerKernelBasis) else np.asarray(basis)
    if isinstance(basis, IntegerKernelBasis) and not basis.integer:
        raise ValueError("family search needs an integer basis")
    if base.params:
        raise ValueError("base must be a fixed matrix without parameters")
    k = len(vectors)
    if not 1 <= min_arity <= max_arity <= k:
        raise ValueError(f"need 1 <= min_arity <= max_arity <= {k}")
    total = sum(comb(k, r) for r in range(min_arity, max_arity + 1))
    if budget is not None and total > budget:
        raise BudgetExceeded(f"{total} subsets exceed the budget of {budget}")
    rng = np.random.default_rng(seed)
    names = [f"V{i + 1}" for i in range(k)]
    found = []
    for r in range(min_arity, max_arity + 1):
        for subset in itertools.combinations(range(k), r):
            cand = lift_to_family(base, [vectors[i] for i in subset], [names[i] for i in subset])
            if not _prefilter(cand.matrix, rng, prefilter_trials, prefilter_threshold):
                continue
            verdict = verify_affine_family(cand.matrix, stop_early=True)
            if verdict.hadamard:
                found.append(VerifiedSubset(subset, cand.params, verdict))
    log.info("tested %d subsets, %d verified", total, len(found))
    return sorted(found, key=lambda s: s.indices)


def kernel_from_point(p: PhaseVector, prec: Precision = MACHINE, **kwargs) -> IntegerKernelBasis:
    order_from_size(p.theta.shape[0])
    return integer_kernel_basis(jacobian(p, prec), prec=prec, **kwargs)
