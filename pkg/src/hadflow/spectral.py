"""Eigenanalysis of the flow Jacobian and the defect computed two ways.

At a Hadamard point the Jacobian is minus the Hessian of the potential,
hence symmetric negative semidefinite.  Its kernel (the center subspace)
has the same dimension as the solution space of the linearised unitarity
conditions, which is the defect.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .exact import ExactAffineMatrix
from .phase_core import MACHINE, PhaseVector, build_matrix, jacobian, potential
from .precision import Precision, conj, im, re

Method = Literal["flow-kernel", "linear-system", "both"]


class NotHadamard(ValueError):
    pass


class DefectMismatch(RuntimeError):
    def __init__(self, flow: int, linear: int, tol):
        super().__init__(
            f"defect disagreement: flow kernel gives {flow}, linear system gives {linear} "
            f"(tol={tol}); the zero threshold is probably misconfigured"
        )
        self.flow = flow
        self.linear = linear


@dataclass(frozen=True, eq=False)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    center_dim: int
    center_basis: np.ndarray
    tol: object

    @property
    def stable_dim(self) -> int:
        return int(sum(1 for lam in self.eigenvalues if lam < -self.tol))

    @property
    def unstable_dim(self) -> int:
        return int(sum(1 for lam in self.eigenvalues if lam > self.tol))


@dataclass(frozen=True)
class DefectReport:
    defect: int
    method: Method
    agreement: bool = True
    flow_defect: int | None = None
    linear_defect: int | None = None

    def to_json(self) -> dict:
        out = {"defect": self.defect, "method": self.method, "agreement": self.agreement}
        if self.method == "both":
            out["flow_defect"] = self.flow_defect
            out["linear_defect"] = self.linear_defect
        return out


def default_tol(scale, prec: Precision):
    """Zero threshold: ``1e-9 * scale`` at machine precision, ``10**(-digits/2) * scale`` otherwise."""
    if prec.is_machine:
        return 1e-9 * float(scale)
    return prec.ctx.mpf(10) ** (-(prec.digits // 2)) * scale


def hadamard_tol(d: int, prec: Precision):
    if prec.is_machine:
        return 1e-10
    return prec.ctx.mpf(10) ** (-(prec.digits - 10))


def spectrum(J, tol=None, prec: Precision = MACHINE) -> SpectralData:
    """Full symmetric eigendecomposition with center/stable classification."""
    J = np.asarray(J)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {J.shape}")
    n = J.shape[0]
    if not prec.is_machine:
        J = prec.real_array(J)
    scale = max((abs(v) for v in J.ravel()), default=0)
    asym = max((abs(v) for v in (J - J.T).ravel()), default=0)
    if asym > (1e-12 if prec.is_machine else prec.eps * 1e3) * max(scale, 1):
        raise ValueError(f"matrix is not symmetric (max asymmetry {float(asym):.3g})")
    lam, vecs = prec.eigh(J)
    radius = max((abs(v) for v in lam), default=0)
    if tol is None:
        tol = default_tol(max(radius, 1), prec)
    center = [i for i in range(n) if abs(lam[i]) < tol]
    return SpectralData(lam, vecs, len(center), vecs[:, center], tol)


def _check_hadamard_point(p: PhaseVector, prec: Precision) -> None:
    v = potential(p, prec)
    if v >= hadamard_tol(p.d, prec):
        raise NotHadamard(f"potential {float(v):.3g} at this point; it is not a Hadamard matrix")


def defect_flow(p: PhaseVector, tol=None, prec: Precision = MACHINE) -> DefectReport:
    """Dimension of the center subspace of the flow at a Hadamard point."""
    _check_hadamard_point(p, prec)
    data = spectrum(jacobian(p, prec), tol, prec)
    return DefectReport(data.center_dim, "flow-kernel", flow_defect=data.center_dim)


def linear_system(H, prec: Precision = MACHINE) -> np.ndarray:
    """Real coefficient matrix of the linearised dephased unitarity conditions.

    Unknowns are the ``d*d`` entries of the phase perturbation ``R``
    (row-major).  Rows: ``R[i, 0] = 0`` for all ``i``, ``R[0, j] = 0`` for
    ``j >= 1``, then the real and imaginary parts of
    ``sum_k H_ik conj(H_jk) (R_ik - R_jk) = 0`` for each ``i < j``.
    """
    H = np.asarray(H)
    d = H.shape[0]
    n_rows = (2 * d - 1) + d * (d - 1)
    A = prec.zeros((n_rows, d * d))
    row = 0
    for i in range(d):
        A[row, i * d] = 1
        row += 1
    for j in range(1, d):
        A[row, j] = 1
        row += 1
    Hc = conj(H)
    for i in range(d):
        for j in range(i + 1, d):
            w = H[i, :] * Hc[j, :]
            wr, wi = re(w), im(w)
            for k in range(d):
                A[row, i * d + k] += wr[k]
                A[row, j * d + k] -= wr[k]
                A[row + 1, i * d + k] += wi[k]
                A[row + 1, j * d + k] -= wi[k]
            row += 2
    return A


def _numeric_matrix(H, prec: Precision, assignment=None) -> np.ndarray:
    if isinstance(H, ExactAffineMatrix):
        return H.evaluate(assignment, prec)
    if isinstance(H, PhaseVector):
        return build_matrix(H, prec)
    H = np.asarray(H)
    return H if H.dtype == object or prec.is_machine else prec.complex_array(H)


def defect_linear_system(H, tol=None, prec: Precision = MACHINE, assignment=None) -> DefectReport:
    """Nullity of the linearised unitarity system, by singular-value thresholding."""
    Hn = _numeric_matrix(H, prec, assignment)
    d = Hn.shape[0]
    G = Hn @ conj(Hn).T
    dev = max(abs(G[i, j] - (d if i == j else 0)) for i in range(d) for j in range(d))
    lim = 1e-6 if prec.is_machine else prec.ctx.mpf(10) ** (-(prec.digits // 2))
    if dev > lim:
        raise NotHadamard(f"max |H H^* - dI| = {float(dev):.3g}; not a Hadamard matrix")
    sv = prec.svdvals(linear_system(Hn, prec))
    top = sv[0] if len(sv) else 0
    if tol is None:
        tol = default_tol(max(top, 1), prec)
    rank = sum(1 for s in sv if s > tol)
    nullity = d * d - rank
    return DefectReport(nullity, "linear-system", linear_defect=nullity)


def cross_check_defect(p: PhaseVector, tol=None, prec: Precision = MACHINE) -> DefectReport:
    """Both defect computations; raises :class:`DefectMismatch` when they differ."""
    flow = defect_flow(p, tol, prec).defect
    linear = defect_linear_system(p, tol, prec).defect
    if flow != linear:
        raise DefectMismatch(flow, linear, tol)
    return DefectReport(flow, "both", True, flow, linear)
