"""Dephased matrices on the phase torus and the gradient flow whose fixed
points are the complex Hadamard matrices.

A dephased ``d x d`` matrix is fixed by the phases of its lower-right
``(d-1) x (d-1)`` core, stored row-major::

    H[r, c] = exp(1j * theta[(r - 1) * (d - 1) + (c - 1)])    r, c >= 1

(0-based ``r, c``; row 0 and column 0 are all ones).  The potential is the
total squared off-diagonal mass of the Gram matrix ``G = H H^*`` and the flow
is its negative gradient.  Writing ``S = conj(H) * (G H)`` (entrywise),

    dV/dtheta_pq = 4 Im S_pq,      Phi = -grad V,

and the Hessian has the closed form used by :func:`jacobian`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .precision import Precision, conj, im, re

MACHINE = Precision.machine()


def core_size(d: int) -> int:
    return (d - 1) ** 2


def order_from_size(n: int) -> int:
    d = math.isqrt(n) + 1
    if (d - 1) ** 2 != n:
        raise ValueError(f"{n} is not a perfect square; not a core phase vector")
    return d


@dataclass(frozen=True, eq=False)
class PhaseVector:
    """Core phases of a dephased ``d x d`` matrix."""

    d: int
    theta: np.ndarray

    def __post_init__(self):
        if int(self.d) < 2:
            raise ValueError(f"matrix order must be >= 2, got {self.d}")
        theta = np.asarray(self.theta)
        if theta.dtype != object:
            theta = theta.astype(float)
        theta = theta.reshape(-1)
        if theta.shape[0] != core_size(self.d):
            raise ValueError(
                f"order {self.d} needs {core_size(self.d)} core phases, got {theta.shape[0]}"
            )
        theta.setflags(write=False)
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_core(cls, core) -> PhaseVector:
        core = np.asarray(core)
        return cls(core.shape[0] + 1, core.reshape(-1))

    def core(self) -> np.ndarray:
        return self.theta.reshape(self.d - 1, self.d - 1)

    def normalized(self, prec: Precision = MACHINE) -> PhaseVector:
        """Angles reduced into ``[0, 2*pi)``."""
        two_pi = 2 * prec.pi
        theta = prec.real_array(self.theta)
        if theta.dtype == object:
            ctx = prec.ctx
            reduced = np.array([ctx.fmod(ctx.fmod(t, two_pi) + two_pi, two_pi) for t in theta],
                               dtype=object)
        else:
            reduced = np.mod(theta, two_pi)
            reduced[reduced >= two_pi] = 0.0
        return PhaseVector(self.d, reduced)

    def __eq__(self, other):
        if not isinstance(other, PhaseVector):
            return NotImplemented
        return self.d == other.d and bool(np.all(self.theta == other.theta))

    def __hash__(self):
        return hash((self.d, tuple(str(t) for t in self.theta)))

    def to_json(self, digits: int | None = None) -> dict:
        if self.theta.dtype == object:
            import mpmath

            n = digits or 50
            theta = [mpmath.nstr(t, n, strip_zeros=False) for t in self.theta]
        else:
            theta = [repr(float(t)) for t in self.theta]
        return {"d": self.d, "theta": theta}

    @classmethod
    def from_json(cls, obj: dict, prec: Precision = MACHINE) -> PhaseVector:
        return cls(int(obj["d"]), prec.real_array([prec.scalar(str(t)) for t in obj["theta"]]))


def build_matrix(p: PhaseVector, prec: Precision = MACHINE) -> np.ndarray:
    d = p.d
    H = prec.zeros((d, d), complex_=True)
    H[0, :] = 1
    H[:, 0] = 1
    if prec.is_machine:
        H[1:, 1:] = np.exp(1j * p.core().astype(float))
    else:
        H[0, :] = prec.ctx.mpc(1)
        H[:, 0] = prec.ctx.mpc(1)
        H[1:, 1:] = prec.expj(prec.real_array(p.core()))
    return H


def _gram(H):
    return H @ conj(H).T


def potential(p: PhaseVector, prec: Precision = MACHINE):
    """Sum of squared moduli of the off-diagonal entries of ``H H^*``."""
    G = _gram(build_matrix(p, prec))
    off = ~np.eye(p.d, dtype=bool)
    total = re(G[off] * conj(G[off])).sum()
    return float(total) if prec.is_machine else total


def gradient(p: PhaseVector, prec: Precision = MACHINE) -> np.ndarray:
    """The flow field ``Phi = -grad V`` at ``p``."""
    H = build_matrix(p, prec)
    S = conj(H) * (_gram(H) @ H)
    return (-4 * im(S[1:, 1:])).reshape(-1)


def gradient_batch(points: np.ndarray, d: int) -> np.ndarray:
    """Machine-precision ``Phi`` for a stack of core phase vectors, shape ``(n, (d-1)**2)``."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    H = np.ones((n, d, d), dtype=complex)
    H[:, 1:, 1:] = np.exp(1j * points.reshape(n, d - 1, d - 1))
    Hc = H.conj()
    G = H @ Hc.transpose(0, 2, 1)
    S = Hc * (G @ H)
    return (-4 * S.imag[:, 1:, 1:]).reshape(n, -1)


def potential_batch(points: np.ndarray, d: int) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    H = np.ones((n, d, d), dtype=complex)
    H[:, 1:, 1:] = np.exp(1j * points.reshape(n, d - 1, d - 1))
    G = H @ H.conj().transpose(0, 2, 1)
    off = ~np.eye(d, dtype=bool)
    return (np.abs(G[:, off]) ** 2).sum(axis=1)


def jacobian(p: PhaseVector, prec: Precision = MACHINE) -> np.ndarray:
    """``D Phi`` at ``p``; symmetric since it is minus the Hessian of ``V``.

    With ``K = H^* H`` the Hessian entry for core positions ``(p, q)`` and
    ``(r, s)`` is ``4 Re`` of::

        - conj(H_pq) H_ps conj(H_rs) H_rq
        + [r == p] conj(H_pq) H_ps K_sq
        + [s == q] conj(H_pq) G_pr H_rq
        - [(r, s) == (p, q)] S_pq
    """
    H = build_matrix(p, prec)
    Hc = conj(H)
    G = _gram(H)
    K = Hc.T @ H
    S = Hc * (G @ H)
    h, hc = H[1:, 1:], Hc[1:, 1:]
    g, k, s = G[1:, 1:], K[1:, 1:], S[1:, 1:]
    m = p.d - 1

    # hess[p, q, r, s] over core indices
    hess = -(hc[:, :, None, None] * h[:, None, None, :]) * (hc[None, None, :, :] * h.T[None, :, :, None])
    row_term = (hc[:, :, None] * h[:, None, :]) * k.T[None, :, :]
    col_term = (hc[:, :, None] * g[:, None, :]) * h.T[None, :, :]
    for a in range(m):
        hess[a, :, a, :] += row_term[a]
        hess[:, a, :, a] += col_term[:, a, :]
    for a in range(m):
        for b in range(m):
            hess[a, b, a, b] -= s[a, b]
    jac = -4 * re(hess).reshape(m * m, m * m)
    # exact symmetry: the two triangles agree analytically
    return (jac + jac.T) / 2


def core_permutation(d: int, row_perm: Sequence[int], col_perm: Sequence[int]) -> np.ndarray:
    """Index map ``idx`` with ``theta'[k] = theta[idx[k]]`` for ``H' = P_r H P_c``.

    Permutations are 0-based sequences of length ``d`` with ``perm[0] == 0``;
    ``H'[i, j] = H[row_perm[i], col_perm[j]]``.
    """
    for name, perm in (("row", row_perm), ("column", col_perm)):
        if sorted(perm) != list(range(d)):
            raise ValueError(f"{name} permutation {list(perm)} is not a permutation of 0..{d - 1}")
        if perm[0] != 0:
            raise ValueError(f"{name} permutation moves index 0; dephased form would be lost")
    m = d - 1
    return np.array(
        [(row_perm[i] - 1) * m + (col_perm[j] - 1) for i in range(1, d) for j in range(1, d)],
        dtype=int,
    )


def permute_core(p: PhaseVector, row_perm: Sequence[int], col_perm: Sequence[int]) -> PhaseVector:
    idx = core_permutation(p.d, row_perm, col_perm)
    return PhaseVector(p.d, p.theta[idx])
