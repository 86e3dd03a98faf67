"""Matrices whose entries are roots of unity times exponentials of integer
linear forms in named real parameters, with exact Hadamard verification.

An entry ``exp(2 pi i q) * exp(i * sum_k m_k a_k)`` is an :class:`ExactPhase`
with rational ``q`` (reduced mod 1) and integer coefficients ``m_k``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Mapping, Sequence

import numpy as np

from . import cyclotomic
from .phase_core import MACHINE, PhaseVector, core_permutation
from .precision import Precision

FrequencyTable = dict[tuple[int, ...], list[Fraction]]


def _fraction(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class ExactPhase:
    """Phase ``2 pi q + sum(coeff * param)``; ``q`` kept in ``[0, 1)``."""

    q: Fraction = Fraction(0)
    lin: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        q = _fraction(self.q) % 1
        items = dict(self.lin)
        lin = []
        for name, coeff in sorted(items.items()):
            c = Fraction(coeff)
            if c.denominator != 1:
                raise ValueError(f"non-integer coefficient {coeff} for parameter {name!r}")
            if c:
                lin.append((str(name), int(c)))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "lin", tuple(lin))

    @classmethod
    def of(cls, q=0, **lin: int) -> ExactPhase:
        return cls(_fraction(q), tuple(lin.items()))

    @property
    def coeffs(self) -> dict[str, int]:
        return dict(self.lin)

    @property
    def is_constant(self) -> bool:
        return not self.lin

    def __add__(self, other: ExactPhase) -> ExactPhase:
        lin = self.coeffs
        for name, c in other.lin:
            lin[name] = lin.get(name, 0) + c
        return ExactPhase(self.q + other.q, tuple(lin.items()))

    def __neg__(self) -> ExactPhase:
        return ExactPhase(-self.q, tuple((n, -c) for n, c in self.lin))

    def __sub__(self, other: ExactPhase) -> ExactPhase:
        return self + (-other)

    def value(self, assignment: Mapping[str, object], prec: Precision = MACHINE):
        """Real phase angle in radians (not reduced)."""
        two_pi = 2 * prec.pi
        if prec.is_machine:
            angle = two_pi * float(self.q)
        else:
            ctx = prec.ctx
            angle = two_pi * ctx.mpf(self.q.numerator) / self.q.denominator
        for name, c in self.lin:
            angle = angle + c * prec.scalar(assignment[name])
        return angle

    def to_json(self) -> dict:
        return {"q": f"{self.q.numerator}/{self.q.denominator}", "lin": dict(self.lin)}

    @classmethod
    def from_json(cls, obj) -> ExactPhase:
        if isinstance(obj, (str, int)):
            return cls(_fraction(obj))
        return cls(_fraction(obj.get("q", 0)), tuple(obj.get("lin", {}).items()))

    def __str__(self) -> str:
        parts = [f"2pi*{self.q}"] if self.q else []
        parts += [f"{c:+d}{n}" for n, c in self.lin]
        return " ".join(parts) or "0"


ONE = ExactPhase()


class ParameterError(KeyError):
    pass


@dataclass(frozen=True)
class ExactAffineMatrix:
    """Dephased matrix of exact phases, affine in the named parameters."""

    d: int
    entries: tuple[tuple[ExactPhase, ...], ...]
    params: tuple[str, ...] = ()

    def __post_init__(self):
        entries = tuple(tuple(e if isinstance(e, ExactPhase) else ExactPhase.from_json(e)
                              for e in row) for row in self.entries)
        d = int(self.d)
        if len(entries) != d or any(len(row) != d for row in entries):
            raise ValueError(f"entries must form a {d}x{d} grid")
        for k in range(d):
            if entries[0][k] != ONE or entries[k][0] != ONE:
                raise ValueError("matrix is not dephased: first row and column must be 1")
        used = sorted({n for row in entries for e in row for n, _ in e.lin})
        params = tuple(self.params) if self.params else tuple(used)
        missing = set(used) - set(params)
        if missing:
            raise ValueError(f"entries use undeclared parameters {sorted(missing)}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "params", params)

    @classmethod
    def from_core(cls, core: Sequence[Sequence[ExactPhase]], params: Sequence[str] = ()) -> ExactAffineMatrix:
        d = len(core) + 1
        rows = [tuple([ONE] * d)]
        for row in core:
            rows.append((ONE, *row))
        return cls(d, tuple(rows), tuple(params))

    @classmethod
    def from_rational_coefficients(cls, d: int, entries, params: Sequence[str] = ()) -> ExactAffineMatrix:
        """Build from entries whose parameter coefficients may be rational.

        Each parameter ``a`` whose coefficients have common denominator ``L``
        is replaced by ``a' = a / L`` so all coefficients become integers.
        """
        raw = [[(_fraction(e.get("q", 0)), {n: Fraction(c) for n, c in e.get("lin", {}).items()})
                for e in row] for row in entries]
        scale: dict[str, int] = {}
        for row in raw:
            for _, lin in row:
                for n, c in lin.items():
                    scale[n] = lcm(scale.get(n, 1), c.denominator)
        rows = [tuple(ExactPhase(q, tuple((n, c * scale[n]) for n, c in lin.items())) for q, lin in row)
                for row in raw]
        return cls(d, tuple(rows), tuple(params))

    def core(self) -> list[list[ExactPhase]]:
        return [list(row[1:]) for row in self.entries[1:]]

    @property
    def is_constant(self) -> bool:
        return all(e.is_constant for row in self.entries for e in row)

    def __getitem__(self, rc: tuple[int, int]) -> ExactPhase:
        r, c = rc
        return self.entries[r][c]

    def conductor(self) -> int:
        return cyclotomic.conductor(e.q for row in self.entries for e in row)

    def evaluate(self, assignment: Mapping[str, object] | None = None,
                 prec: Precision = MACHINE) -> np.ndarray:
        return _build(self, assignment or {}, prec)

    def specialize(self, assignment: Mapping[str, object]) -> ExactAffineMatrix:
        """Fix some parameters at rational multiples of 2 pi (given as fractions of a turn)."""
        rows = []
        for row in self.entries:
            new = []
            for e in row:
                q = e.q
                lin = []
                for n, c in e.lin:
                    if n in assignment:
                        q += c * _fraction(assignment[n])
                    else:
                        lin.append((n, c))
                new.append(ExactPhase(q, tuple(lin)))
            rows.append(tuple(new))
        params = tuple(p for p in self.params if p not in assignment)
        return ExactAffineMatrix(self.d, tuple(rows), params)

    def permute(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> ExactAffineMatrix:
        core_permutation(self.d, row_perm, col_perm)  # validates
        rows = tuple(tuple(self.entries[row_perm[i]][col_perm[j]] for j in range(self.d))
                     for i in range(self.d))
        return ExactAffineMatrix(self.d, rows, self.params)

    def transpose(self) -> ExactAffineMatrix:
        rows = tuple(tuple(self.entries[j][i] for j in range(self.d)) for i in range(self.d))
        return ExactAffineMatrix(self.d, rows, self.params)

    def rename(self, mapping: Mapping[str, str]) -> ExactAffineMatrix:
        rows = tuple(tuple(ExactPhase(e.q, tuple((mapping.get(n, n), c) for n, c in e.lin)) for e in row)
                     for row in self.entries)
        return ExactAffineMatrix(self.d, rows, tuple(mapping.get(p, p) for p in self.params))

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "params": list(self.params),
            "entries": [[e.to_json() for e in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, obj: dict) -> ExactAffineMatrix:
        entries = obj["entries"]
        has_rational = any(
            Fraction(c).denominator != 1
            for row in entries for e in row if isinstance(e, dict)
            for c in (_fraction(v) for v in e.get("lin", {}).values())
        )
        if has_rational:
            return cls.from_rational_coefficients(int(obj["d"]), entries, obj.get("params", ()))
        return cls(int(obj["d"]), tuple(tuple(ExactPhase.from_json(e) for e in row) for row in entries),
                   tuple(obj.get("params", ())))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _build(M: ExactAffineMatrix, assignment: Mapping[str, object], prec: Precision) -> np.ndarray:
    missing = [p for p in M.params if p not in assignment]
    if missing:
        raise ParameterError(f"no value assigned to parameters {missing}")
    angles = prec.real_array([[e.value(assignment, prec) for e in row] for row in M.entries])
    H = prec.expj(angles)
    if not prec.is_machine:
        one = prec.ctx.mpc(1)
        H[0, :] = one
        H[:, 0] = one
    else:
        H[0, :] = 1
        H[:, 0] = 1
    return H


def gram_terms(M: ExactAffineMatrix, i: int, j: int) -> FrequencyTable:
    """Expand ``[H H^*]_{ij} = sum_k H_ik conj(H_jk)`` grouped by parameter frequency.

    Keys are integer vectors over ``M.params`` (in that order); values are the
    sorted base phases (fractions of a turn) of the terms at that frequency.
    Rows are 0-based.
    """
    if i == j:
        raise ValueError("gram_terms needs two distinct rows")
    table: FrequencyTable = {}
    for k in range(M.d):
        term = M.entries[i][k] - M.entries[j][k]
        coeffs = term.coeffs
        freq = tuple(coeffs.get(p, 0) for p in M.params)
        table.setdefault(freq, []).append(term.q)
    return {f: sorted(v) for f, v in sorted(table.items())}


@dataclass(frozen=True)
class CertificateItem:
    i: int
    j: int
    frequency: tuple[int, ...]
    residue: tuple[int, ...]

    @property
    def vanishes(self) -> bool:
        return not any(self.residue)

    def to_json(self) -> dict:
        return {"i": self.i, "j": self.j, "frequency": list(self.frequency), "residue": list(self.residue)}


@dataclass(frozen=True)
class Verdict:
    hadamard: bool
    conductor: int
    certificate: tuple[CertificateItem, ...] = field(repr=False)

    def failures(self) -> list[CertificateItem]:
        return [c for c in self.certificate if not c.vanishes]

    def to_json(self) -> dict:
        return {
            "hadamard": self.hadamard,
            "conductor": self.conductor,
            "certificate": [c.to_json() for c in self.certificate],
        }


def verify_affine_family(M: ExactAffineMatrix, stop_early: bool = False) -> Verdict:
    """Decide exactly whether ``M`` is Hadamard for every value of its parameters.

    Parameters are treated as algebraically independent, so each frequency
    class of every Gram entry must vanish on its own.  Only ``i < j`` is
    checked; ``[H H^*]_{ji}`` is the conjugate of ``[H H^*]_{ij}``.
    """
    n = M.conductor()
    if n > cyclotomic.MAX_CONDUCTOR:
        raise cyclotomic.ConductorTooLarge(
            f"conductor {n} exceeds {cyclotomic.MAX_CONDUCTOR}; refusing exact verification"
        )
    items = []
    ok = True
    for i in range(M.d):
        for j in range(i + 1, M.d):
            for freq, phases in gram_terms(M, i, j).items():
                item = CertificateItem(i, j, freq, cyclotomic.root_sum_residue(phases, n))
                items.append(item)
                if not item.vanishes:
                    ok = False
                    if stop_early:
                        return Verdict(False, n, tuple(items))
    return Verdict(ok, n, tuple(items))


def to_phase_vector(M: ExactAffineMatrix, assignment: Mapping[str, object] | None = None,
                    prec: Precision = MACHINE) -> PhaseVector:
    """Numeric core phases of ``M`` at ``assignment``, reduced into ``[0, 2 pi)``."""
    assignment = assignment or {}
    missing = [p for p in M.params if p not in assignment]
    if missing:
        raise ParameterError(f"no value assigned to parameters {missing}")
    theta = prec.real_array([e.value(assignment, prec) for row in M.core() for e in row])
    return PhaseVector(M.d, theta).normalized(prec)


def direction_vector(M: ExactAffineMatrix, param: str) -> np.ndarray:
    """Integer tangent vector on the core: coefficient of ``param`` in every core phase."""
    return np.array([e.coeffs.get(param, 0) for row in M.core() for e in row], dtype=int)


def same_family(A: ExactAffineMatrix, B: ExactAffineMatrix, allow_sign: bool = True) -> bool:
    """Entrywise equality with parameters matched by position, up to sign if allowed."""
    if A.d != B.d or len(A.params) != len(B.params):
        return False
    signs = [1] * len(A.params)
    if allow_sign:
        for k, (pa, pb) in enumerate(zip(A.params, B.params)):
            for ra, rb in zip(A.entries, B.entries):
                found = False
                for ea, eb in zip(ra, rb):
                    ca, cb = ea.coeffs.get(pa, 0), eb.coeffs.get(pb, 0)
                    if ca and cb:
                        signs[k] = 1 if ca == cb else -1
                        found = True
                        break
                if found:
                    break
    mapping = {pb: pa for pa, pb in zip(A.params, B.params)}
    for ra, rb in zip(A.entries, B.entries):
        for ea, eb in zip(ra, rb):
            if ea.q != eb.q:
                return False
            cb = {mapping[n]: c for n, c in eb.lin}
            for k, p in enumerate(A.params):
                if ea.coeffs.get(p, 0) != signs[k] * cb.get(p, 0):
                    return False
    return True


def load_matrix_json(path) -> ExactAffineMatrix:
    with open(path) as fh:
        return ExactAffineMatrix.from_json(json.load(fh))
