"""Working precision and the handful of numeric kernels that depend on it.

Machine precision uses plain numpy float64/complex128 arrays.  Arbitrary
precision uses numpy object arrays holding mpmath numbers from a private
``MPContext`` per digit count, so callers at different precisions never
share mutable mpmath state.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

DEFAULT_DIGITS = 50
MIN_DIGITS = 30


@lru_cache(maxsize=None)
def _context(digits: int) -> mpmath.ctx_mp.MPContext:
    ctx = mpmath.MPContext()
    ctx.dps = digits
    return ctx


def _elementwise(fn):
    ufunc = np.frompyfunc(fn, 1, 1)

    def apply(x):
        out = ufunc(x)
        return out if isinstance(out, np.ndarray) else np.asarray(out, dtype=object)

    return apply


_re_obj = _elementwise(lambda z: z.real)
_im_obj = _elementwise(lambda z: z.imag)
_conj_obj = _elementwise(lambda z: z.conjugate())


def re(x):
    x = np.asarray(x)
    return _re_obj(x) if x.dtype == object else x.real


def im(x):
    x = np.asarray(x)
    return _im_obj(x) if x.dtype == object else x.imag


def conj(x):
    x = np.asarray(x)
    return _conj_obj(x) if x.dtype == object else np.conj(x)


@dataclass(frozen=True)
class Precision:
    """Either machine precision (``digits is None``) or ``digits`` decimal digits."""

    digits: int | None = None

    def __post_init__(self):
        if self.digits is not None and self.digits < MIN_DIGITS:
            raise ValueError(
                f"arbitrary precision needs at least {MIN_DIGITS} digits, got {self.digits}"
            )

    @classmethod
    def machine(cls) -> Precision:
        return cls(None)

    @classmethod
    def arbitrary(cls, digits: int = DEFAULT_DIGITS) -> Precision:
        return cls(int(digits))

    @property
    def is_machine(self) -> bool:
        return self.digits is None

    @property
    def ctx(self):
        if self.digits is None:
            raise AttributeError("machine precision has no mpmath context")
        return _context(self.digits)

    @property
    def eps(self) -> float:
        """Unit roundoff, as a Python float."""
        if self.digits is None:
            return float(np.finfo(float).eps)
        return 10.0 ** (-self.digits)

    def __str__(self) -> str:
        return "machine" if self.digits is None else f"{self.digits} digits"

    # -- scalars and arrays -------------------------------------------------

    @property
    def pi(self):
        return np.pi if self.digits is None else self.ctx.pi

    def scalar(self, x):
        """Convert ``x`` (number or decimal string) to the working scalar type."""
        if self.digits is None:
            return complex(x) if isinstance(x, complex) else float(x)
        ctx = self.ctx
        if isinstance(x, complex) or type(x).__name__ == "mpc":
            return ctx.mpc(x)
        return ctx.mpf(x)

    def real_array(self, values) -> np.ndarray:
        if self.digits is None:
            return np.asarray(values, dtype=float)
        arr = np.asarray(values, dtype=object)
        mpf = self.ctx.mpf
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = mpf(v)
        return out

    def complex_array(self, values) -> np.ndarray:
        if self.digits is None:
            return np.asarray(values, dtype=complex)
        arr = np.asarray(values, dtype=object)
        mpc = self.ctx.mpc
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = mpc(v)
        return out

    def zeros(self, shape, complex_: bool = False) -> np.ndarray:
        if self.digits is None:
            return np.zeros(shape, dtype=complex if complex_ else float)
        zero = self.ctx.mpc(0) if complex_ else self.ctx.mpf(0)
        out = np.empty(shape, dtype=object)
        out.fill(zero)
        return out

    def expj(self, theta) -> np.ndarray:
        """Elementwise ``exp(i * theta)`` for real ``theta``."""
        theta = np.asarray(theta)
        if self.digits is None:
            return np.exp(1j * theta.astype(float))
        ctx = self.ctx
        out = np.empty(theta.shape, dtype=object)
        for idx, v in np.ndenumerate(theta):
            out[idx] = ctx.expj(v)
        return out

    def to_float(self, x) -> np.ndarray:
        arr = np.asarray(x)
        if arr.dtype == object:
            return np.vectorize(float, otypes=[float])(arr) if arr.size else arr.astype(float)
        return arr.astype(float)

    def norm(self, x):
        x = np.asarray(x)
        if x.dtype != object:
            return float(np.linalg.norm(x))
        total = self.ctx.mpf(0)
        for v in x.ravel():
            total += abs(v) ** 2
        return self.ctx.sqrt(total)

    # -- dense linear algebra ----------------------------------------------

    def _to_mp_matrix(self, a: np.ndarray):
        ctx = self.ctx
        return ctx.matrix([[v for v in row] for row in a])

    def _from_mp_matrix(self, m) -> np.ndarray:
        out = np.empty((m.rows, m.cols), dtype=object)
        for i in range(m.rows):
            for j in range(m.cols):
                out[i, j] = m[i, j]
        return out

    def eigh(self, a) -> tuple[np.ndarray, np.ndarray]:
        """Symmetric eigendecomposition, eigenvalues ascending."""
        a = np.asarray(a)
        if self.digits is None:
            return np.linalg.eigh(a.astype(float))
        n = a.shape[0]
        if n == 0:
            return np.empty(0, dtype=object), np.empty((0, 0), dtype=object)
        evals, evecs = self.ctx.eigsy(self._to_mp_matrix(self.real_array(a)))
        lam = np.array([evals[i] for i in range(n)], dtype=object)
        vecs = self._from_mp_matrix(evecs)
        order = sorted(range(n), key=lambda i: lam[i])
        return lam[order], vecs[:, order]

    def svdvals(self, a) -> np.ndarray:
        """Singular values, descending."""
        a = np.asarray(a)
        if self.digits is None:
            return np.linalg.svd(a.astype(float), compute_uv=False)
        if min(a.shape) == 0:
            return np.empty(0, dtype=object)
        s = self.ctx.svd_r(self._to_mp_matrix(self.real_array(a)), compute_uv=False)
        vals = sorted((s[i] for i in range(len(s))), reverse=True)
        return np.array(vals, dtype=object)

    def solve(self, a, b) -> np.ndarray:
        a = np.asarray(a)
        b = np.asarray(b)
        if self.digits is None:
            return np.linalg.solve(a.astype(float), b.astype(float))
        vec = b.ndim == 1
        bm = self.real_array(b[:, None] if vec else b)
        ctx = self.ctx
        lhs = self._to_mp_matrix(self.real_array(a))
        out = np.empty(bm.shape, dtype=object)
        for j in range(bm.shape[1]):
            x = ctx.lu_solve(lhs, ctx.matrix(list(bm[:, j])))
            for i in range(bm.shape[0]):
                out[i, j] = x[i]
        return out[:, 0] if vec else out
