"""Order-by-order center-manifold expansion at a Hadamard point.

The manifold is written as an embedding over the center subspace::

    X(t) = base + sum_i t_i v_i + w(t),      w(t) = sum_{2 <= |m| <= K} w_m t^m

with every ``w_m`` orthogonal to the kernel.  Invariance under the flow
means ``Phi(X(t)) = sum_i alpha_i(t) dX/dt_i`` for rates ``alpha_i``.  At
order ``k`` the degree-``k`` part of ``Phi(X)`` only involves ``w`` up to
order ``k - 1`` (beyond its linear term, which is ``J w_k``), so each order
is one projection plus one solve on the stable subspace.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jets import JetAlgebra
from .phase_core import MACHINE, PhaseVector, gradient, jacobian
from .precision import Precision, conj, im
from .spectral import spectrum


class BasisError(ValueError):
    pass


@dataclass(frozen=True)
class FirstNonzero:
    order: int
    monomial: tuple[int, ...]
    rate: int
    coefficient: object


@dataclass(frozen=True)
class FlowVerdict:
    first_nonzero: FirstNonzero | None
    max_abs_alpha_per_order: list
    tol: float

    @property
    def flow_detected(self) -> bool:
        return self.first_nonzero is not None


@dataclass(eq=False)
class CMExpansion:
    base: PhaseVector
    basis: np.ndarray
    order: int
    w_coeffs: dict
    alpha_coeffs: dict
    prec: Precision = MACHINE
    algebra: JetAlgebra = field(repr=False, default=None)
    embedding_jet: np.ndarray = field(repr=False, default=None)
    alpha_jet: np.ndarray = field(repr=False, default=None)

    @property
    def center_dim(self) -> int:
        return self.basis.shape[1]

    def alpha(self, i: int, monomial) -> object:
        """Coefficient of ``t^monomial`` in ``alpha_i`` (zero if not stored)."""
        return self.alpha_coeffs.get((i, tuple(monomial)), 0)


def field_jet(alg: JetAlgebra, X: np.ndarray, d: int, prec: Precision) -> np.ndarray:
    """Jet of ``Phi`` composed with the phase jet ``X`` of shape ``((d-1)**2, M)``."""
    m = d - 1
    core = X.reshape(m, m, alg.size)
    if prec.is_machine:
        E = np.zeros((d, d, alg.size), dtype=complex)
        base = np.exp(1j * core[..., 0].astype(float))
    else:
        E = prec.zeros((d, d, alg.size), complex_=True)
        base = prec.expj(core[..., 0])
    E[0, :, 0] = 1
    E[:, 0, 0] = 1
    E[1:, 1:, :] = alg.expj(core, base)
    Ec = conj(E)
    G = alg.matmul(E, Ec.transpose(1, 0, 2))
    S = alg.mul(Ec, alg.matmul(G, E))
    return (-4 * im(S[1:, 1:, :])).reshape(m * m, alg.size)


def _as_basis(basis, n: int, prec: Precision) -> np.ndarray:
    B = np.asarray(basis)
    if B.ndim == 1:
        B = B[:, None]
    if B.shape[0] != n and B.shape[1] == n:
        B = B.T
    if B.shape[0] != n:
        raise BasisError(f"basis vectors must have length {n}, got shape {B.shape}")
    return prec.real_array(B) if not prec.is_machine else B.astype(float)


def expand(base: PhaseVector, basis, K: int, prec: Precision = MACHINE, tol=None) -> CMExpansion:
    """Expand the center manifold at ``base`` over ``span(basis)`` through order ``K``.

    ``basis`` holds the center vectors as columns (rows are accepted when the
    shape is unambiguous); they need not be orthonormal.  Rates are read off
    with the dual basis, so they refer to the raw vectors as given.
    """
    if K < 2:
        raise ValueError(f"expansion order must be >= 2, got {K}")
    n = base.theta.shape[0]
    B = _as_basis(basis, n, prec)
    c = B.shape[1]
    if not prec.is_machine:
        base = PhaseVector(base.d, prec.real_array(base.theta))

    J = jacobian(base, prec)
    data = spectrum(J, tol, prec)
    if data.center_dim != c:
        raise BasisError(f"kernel has dimension {data.center_dim} but {c} basis vectors were given")
    if data.unstable_dim:
        raise BasisError("base point has unstable directions; not a Hadamard point")
    scale = max(1, max(abs(v) for v in data.eigenvalues))
    JB = J @ B
    for i in range(c):
        r = max(abs(v) for v in JB[:, i])
        size = max(abs(v) for v in B[:, i])
        if r > data.tol * size * 10 or size == 0:
            raise BasisError(f"basis vector {i} is not in the kernel (|J v| = {float(r):.3g})")

    gram = B.T @ B
    sv = prec.svdvals(gram)
    if sv[-1] <= sv[0] * (1e-10 if prec.is_machine else prec.eps ** 0.5):
        raise BasisError("basis vectors are linearly dependent")
    stable = [k for k in range(n) if abs(data.eigenvalues[k]) >= data.tol]
    U = data.eigenvectors[:, stable]
    lam = data.eigenvalues[stable]
    if min(abs(v) for v in lam) < data.tol * 10:
        raise BasisError(f"Jacobian nearly singular on the complement (min |lambda| = {float(min(abs(v) for v in lam)):.3g}, scale {float(scale):.3g})")
    inv_lam = np.array([1 / v for v in lam], dtype=lam.dtype)
    stable_inverse = (U * inv_lam[None, :]) @ U.T

    alg = JetAlgebra(c, K)
    M = alg.size
    X = prec.zeros((n, M))
    X[:, 0] = base.theta
    for i in range(c):
        X[:, alg.unit(i)] = B[:, i]
    alpha = prec.zeros((c, M))

    for k in range(2, K + 1):
        F = field_jet(alg, X, base.d, prec)
        drift = prec.zeros((n, M))
        for i in range(c):
            drift = drift + alg.mul(alpha[i][None, :], alg.derivative(X, i))
        sel = alg.of_degree(k)
        rhs = F[:, sel] - drift[:, sel]
        coeffs = prec.solve(gram, B.T @ rhs)
        alpha[:, sel] = coeffs
        X[:, sel] = -(stable_inverse @ (rhs - B @ coeffs))

    w_coeffs = {alg.monomials[s]: X[:, s].copy() for s in range(M) if alg.degree[s] >= 2}
    alpha_coeffs = {(i, alg.monomials[s]): alpha[i, s]
                    for i in range(c) for s in range(M) if alg.degree[s] >= 2}
    return CMExpansion(base, B, K, w_coeffs, alpha_coeffs, prec, alg, X, alpha)


def detect_flow(e: CMExpansion, tol=1e-8) -> FlowVerdict:
    """Lowest-order rate coefficient exceeding ``tol`` (ties broken by monomial, then rate)."""
    alg = e.algebra
    per_order = []
    first = None
    for k in range(2, e.order + 1):
        sel = alg.of_degree(k)
        block = e.alpha_jet[:, sel]
        per_order.append(max(abs(v) for v in block.ravel()))
        if first is None:
            for s in sel:
                for i in range(e.center_dim):
                    v = e.alpha_jet[i, s]
                    if abs(v) > tol:
                        first = FirstNonzero(k, alg.monomials[s], i, v)
                        break
                if first is not None:
                    break
    return FlowVerdict(first, per_order, tol)


def evaluate_embedding(e: CMExpansion, t) -> PhaseVector:
    """``X(t)`` summed through the expansion order."""
    t = _params(e, t)
    return PhaseVector(e.base.d, e.algebra.evaluate(e.embedding_jet, t))


def rates(e: CMExpansion, t) -> np.ndarray:
    """``alpha_i(t)`` for each basis direction."""
    return e.algebra.evaluate(e.alpha_jet, _params(e, t))


def tangency_residual(e: CMExpansion, t):
    """Euclidean norm of ``Phi(X(t)) - sum_i alpha_i(t) dX/dt_i(t)``."""
    t = _params(e, t)
    alg = e.algebra
    X = e.embedding_jet
    point = PhaseVector(e.base.d, alg.evaluate(X, t))
    lhs = gradient(point, e.prec)
    a = alg.evaluate(e.alpha_jet, t)
    rhs = 0
    for i in range(e.center_dim):
        rhs = rhs + a[i] * alg.evaluate(alg.derivative(X, i), t)
    return e.prec.norm(lhs - rhs)


def _params(e: CMExpansion, t):
    t = list(t)
    if len(t) != e.center_dim:
        raise ValueError(f"expected {e.center_dim} parameters, got {len(t)}")
    if e.prec.is_machine:
        return [float(x) for x in t]
    return [e.prec.scalar(x) for x in t]
