"""Exact arithmetic over the field Q(sqrt(2)) and complex matrices above it.

Used where only field operations are needed (projectors from spans,
transpose/conjugation identities, trace-orthogonality). Eigendecompositions
are out of scope for this backend: eigenvalues generally leave the field.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

_SQRT2 = 2.0 ** 0.5


class QSqrt2:
    """Field element a + b*sqrt(2) with rational a, b."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0) -> None:
        self.a = Fraction(a)
        self.b = Fraction(b)

    def __repr__(self) -> str:
        return f"QSqrt2({self.a}, {self.b})"

    def __eq__(self, other) -> bool:
        other = _coerce_real(other)
        if other is NotImplemented:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __add__(self, other):
        other = _coerce_real(other)
        if other is NotImplemented:
            return NotImplemented
        return QSqrt2(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt2(-self.a, -self.b)

    def __sub__(self, other):
        other = _coerce_real(other)
        if other is NotImplemented:
            return NotImplemented
        return QSqrt2(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce_real(other)
        if other is NotImplemented:
            return NotImplemented
        return QSqrt2(self.a * other.a + 2 * self.b * other.b,
                      self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def inverse(self) -> "QSqrt2":
        # 1/(a + b rt2) = (a - b rt2)/(a^2 - 2 b^2); the norm vanishes only at 0
        norm = self.a * self.a - 2 * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(2))")
        return QSqrt2(self.a / norm, -self.b / norm)

    def __truediv__(self, other):
        other = _coerce_real(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce_real(other) * self.inverse()

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * _SQRT2


def _coerce_real(x):
    if isinstance(x, QSqrt2):
        return x
    if isinstance(x, (int, Fraction)):
        return QSqrt2(x, 0)
    return NotImplemented


class ExactComplex:
    """Complex number with real and imaginary parts in Q(sqrt(2))."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0) -> None:
        self.re = re if isinstance(re, QSqrt2) else QSqrt2(re)
        self.im = im if isinstance(im, QSqrt2) else QSqrt2(im)

    def __repr__(self) -> str:
        return f"ExactComplex({self.re!r}, {self.im!r})"

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ExactComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ExactComplex(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ExactComplex(self.re * other.re - self.im * other.im,
                            self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def inverse(self) -> "ExactComplex":
        norm = self.re * self.re + self.im * self.im
        inv = norm.inverse()
        return ExactComplex(self.re * inv, -(self.im * inv))

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))


def _coerce(x):
    if isinstance(x, ExactComplex):
        return x
    if isinstance(x, (int, Fraction, QSqrt2)):
        return ExactComplex(x)
    return NotImplemented


ZERO = ExactComplex(0)
ONE = ExactComplex(1)
SQRT2 = ExactComplex(QSqrt2(0, 1))


def exact(re_a=0, re_b=0, im_a=0, im_b=0) -> ExactComplex:
    """Shorthand for (re_a + re_b*sqrt2) + i*(im_a + im_b*sqrt2)."""
    return ExactComplex(QSqrt2(re_a, re_b), QSqrt2(im_a, im_b))


# ---------------------------------------------------------------------------
# matrices: numpy object arrays of ExactComplex
# ---------------------------------------------------------------------------

def exact_zeros(rows: int, cols: int) -> np.ndarray:
    m = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        for j in range(cols):
            m[i, j] = ZERO
    return m


def exact_eye(n: int) -> np.ndarray:
    m = exact_zeros(n, n)
    for i in range(n):
        m[i, i] = ONE
    return m


def exact_vector(length: int, terms: Sequence[tuple[int, ExactComplex]]) -> np.ndarray:
    v = np.empty(length, dtype=object)
    for i in range(length):
        v[i] = ZERO
    for idx, coeff in terms:
        v[idx] = v[idx] + coeff
    return v


def exact_dagger(m: np.ndarray) -> np.ndarray:
    out = np.empty(m.T.shape, dtype=object)
    for i in range(out.shape[0]):
        for j in range(out.shape[1]):
            out[i, j] = m[j, i].conjugate()
    return out


def exact_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    out = exact_zeros(a.shape[0], b.shape[1])
    for i in range(a.shape[0]):
        for k in range(a.shape[1]):
            aik = a[i, k]
            if aik.is_zero():
                continue
            for j in range(b.shape[1]):
                out[i, j] = out[i, j] + aik * b[k, j]
    return out


def exact_inverse(m: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse of a square matrix over Q(sqrt(2))[i]."""
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("exact_inverse expects a square matrix")
    work = np.concatenate([m.copy(), exact_eye(n)], axis=1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if not work[r, col].is_zero()), None)
        if pivot is None:
            raise ZeroDivisionError("matrix is singular over Q(sqrt(2))")
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
        inv = work[col, col].inverse()
        for j in range(2 * n):
            work[col, j] = work[col, j] * inv
        for r in range(n):
            if r == col or work[r, col].is_zero():
                continue
            factor = work[r, col]
            for j in range(2 * n):
                work[r, j] = work[r, j] - factor * work[col, j]
    return work[:, n:]


def exact_projector(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Projector onto the span of exact vectors, via Gram-matrix inversion.

    Avoids normalization (square roots leave the field): P = V (V^dag V)^-1 V^dag.
    """
    v = np.stack(vectors).T  # columns are the spanning vectors
    vd = exact_dagger(v)
    gram = exact_matmul(vd, v)
    return exact_matmul(exact_matmul(v, exact_inverse(gram)), vd)


def exact_to_complex(m: np.ndarray) -> np.ndarray:
    out = np.empty(m.shape, dtype=complex)
    for idx in np.ndindex(m.shape):
        out[idx] = complex(m[idx])
    return out


def exact_all_zero(m: np.ndarray) -> bool:
    return all(m[idx].is_zero() for idx in np.ndindex(m.shape))
