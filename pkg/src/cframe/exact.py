"""Exact complex-rational scalars and field-generic dense matrix helpers.

Rational-mode matrices are numpy ``object`` arrays whose entries are
:class:`QComplex`.  The helpers here (``tree_sum``, ``gauss_jordan_inverse``,
``exact_rank``, ``exact_is_psd``) work on those arrays without ever touching
floating point.
"""

from __future__ import annotations

import numbers
from fractions import Fraction

import numpy as np

_EXACT_REAL = (int, Fraction)


def to_fraction(x) -> Fraction:
    """Convert ``x`` to a Fraction.

    Floats go through their shortest decimal representation, so ``0.1``
    becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not np.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, numbers.Real):
        return to_fraction(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


class QComplex:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else to_fraction(re)
        self.im = im if isinstance(im, Fraction) else to_fraction(im)

    @classmethod
    def coerce(cls, x) -> "QComplex":
        if isinstance(x, QComplex):
            return x
        if isinstance(x, complex):
            return cls(to_fraction(x.real), to_fraction(x.imag))
        if isinstance(x, np.generic):
            x = x.item()
            return cls.coerce(x)
        return cls(to_fraction(x))

    @classmethod
    def from_binary(cls, z) -> "QComplex":
        """Exact binary value of a float or complex (no decimal rounding)."""
        z = complex(z)
        return cls(Fraction(z.real), Fraction(z.imag))

    def _other(self, other):
        if isinstance(other, QComplex):
            return other
        if isinstance(other, _EXACT_REAL) and not isinstance(other, bool):
            return QComplex(other)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return QComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return QComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return QComplex(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return QComplex(self.re * o.re)
        return QComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("QComplex division by zero")
        return QComplex(
            (self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d
        )

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return QComplex(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self):
        return QComplex(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self):
        if not self.im:
            return abs(self.re)
        return abs(complex(self))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        if not self.im:
            return f"QComplex({self.re})"
        return f"QComplex({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


ZERO = QComplex(0)
ONE = QComplex(1)


def exact_array(values, shape=None) -> np.ndarray:
    """Object array of QComplex built from nested numbers."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = QComplex.coerce(x)
    if shape is not None:
        out = out.reshape(shape)
    return out


def exact_zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(ZERO)
    return out


def exact_eye(n: int) -> np.ndarray:
    out = exact_zeros((n, n))
    for i in range(n):
        out[i, i] = ONE
    return out


def to_complex(arr: np.ndarray) -> np.ndarray:
    """Float copy of an exact (or already float) array."""
    if arr.dtype != object:
        return np.asarray(arr, dtype=complex)
    out = np.empty(arr.shape, dtype=complex)
    for idx, x in np.ndenumerate(arr):
        out[idx] = complex(x)
    return out


def is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object


def tree_sum(values: np.ndarray) -> np.ndarray:
    """Sum along axis 0 by pairwise reduction in index order.

    The reduction tree depends only on the length, which keeps float results
    reproducible however the summands were produced.
    """
    values = np.asarray(values)
    if values.shape[0] == 0:
        raise ValueError("tree_sum of an empty sequence")
    while values.shape[0] > 1:
        half = values.shape[0] // 2
        paired = values[0 : 2 * half : 2] + values[1 : 2 * half : 2]
        if values.shape[0] % 2:
            paired = np.concatenate([paired, values[-1:]], axis=0)
        values = paired
    return values[0]


def _rref(m: np.ndarray):
    """Row-reduce an exact matrix in place; returns the pivot columns."""
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if m[i, c]), None)
        if p is None:
            continue
        if p != r:
            m[[r, p]] = m[[p, r]]
        inv = ONE / m[r, c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i, c]:
                f = m[i, c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return pivots


def exact_rank(m: np.ndarray) -> int:
    return len(_rref(np.array(m, dtype=object, copy=True)))


def gauss_jordan_inverse(m: np.ndarray) -> np.ndarray | None:
    """Exact inverse of a square QComplex matrix, or None when singular."""
    n = m.shape[0]
    aug = np.concatenate([np.array(m, dtype=object, copy=True), exact_eye(n)], axis=1)
    pivots = _rref(aug)
    if pivots != list(range(n)):
        return None
    return aug[:, n:]


def exact_is_psd(m: np.ndarray) -> bool:
    """Decide positive semidefiniteness of a Hermitian exact matrix.

    Symmetric elimination: a zero pivot forces a zero row, a negative pivot
    refutes, a positive pivot is eliminated by its Schur complement.
    """
    a = np.array(m, dtype=object, copy=True)
    n = a.shape[0]
    for i in range(n):
        for j in range(i, n):
            if a[i, j] != a[j, i].conjugate():
                return False
    while a.shape[0]:
        d = a[0, 0]
        if d.re < 0:
            return False
        rest = a[1:, 1:]
        col = a[1:, 0]
        if d.re == 0:
            if any(col):
                return False
            a = rest
            continue
        inv = ONE / d
        a = rest - np.outer(col, [x.conjugate() * inv for x in col])
    return True
