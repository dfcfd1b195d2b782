"""Finite-dimensional matrix C*-algebras: M_k(C) and its diagonal subalgebra.

Every element carries an :class:`AlgebraDescriptor` fixing the algebra kind,
the matrix size and the scalar mode.  In ``"float"`` mode entries are
``complex128``; in ``"rational"`` mode they are :class:`~cframe.exact.QComplex`
and all arithmetic, adjoints, positivity tests and inverses are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .errors import DimensionError, DomainError, SingularityError
from .linalg import jacobi_eigh, singular_values

KINDS = ("full", "diagonal")
MODES = ("float", "rational")


@dataclass(frozen=True)
class AlgebraDescriptor:
    kind: str = "full"
    dim: int = 1
    scalar_mode: str = "float"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"algebra kind must be one of {KINDS}, got {self.kind!r}")
        if self.scalar_mode not in MODES:
            raise ValueError(f"scalar mode must be one of {MODES}, got {self.scalar_mode!r}")
        if not isinstance(self.dim, int) or isinstance(self.dim, bool) or self.dim < 1:
            raise ValueError(f"algebra dimension must be a positive integer, got {self.dim!r}")

    @property
    def exact(self) -> bool:
        return self.scalar_mode == "rational"

    def with_mode(self, mode: str) -> "AlgebraDescriptor":
        return AlgebraDescriptor(self.kind, self.dim, mode)


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical slack used by float-mode decisions.

    Exact (rational) decisions ignore these and compare against zero.
    """

    positivity_tol: float = 1e-9
    equality_tol: float = 1e-9
    invertibility_tol: float = 1e-10
    eig_tol: float = 1e-12
    max_sweeps: int = 100

    def __post_init__(self):
        for name in ("positivity_tol", "equality_tol", "invertibility_tol", "eig_tol"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be nonnegative, got {value!r}")


DEFAULT_TOLERANCES = ToleranceConfig()


class Spectrum(tuple):
    """Ascending eigenvalues; ``exact`` is False when a rational input had to
    be solved in floating point."""

    exact: bool

    def __new__(cls, values, exact=False):
        obj = super().__new__(cls, values)
        obj.exact = exact
        return obj


def _coerce_entries(descriptor: AlgebraDescriptor, entries) -> np.ndarray:
    k = descriptor.dim
    if descriptor.exact:
        arr = np.asarray(entries, dtype=object)
        if arr.shape != (k, k):
            raise DimensionError(f"expected a {k}x{k} matrix, got shape {arr.shape}")
        out = np.empty((k, k), dtype=object)
        for idx, x in np.ndenumerate(arr):
            if isinstance(x, (float, complex, np.floating, np.complexfloating)):
                raise TypeError("rational-mode entries must be exact (int, Fraction, str)")
            out[idx] = exact.QComplex.coerce(x)
    else:
        arr = np.asarray(entries)
        if arr.dtype == object:
            arr = exact.to_complex(arr)
        out = np.array(arr, dtype=complex)
        if out.shape != (k, k):
            raise DimensionError(f"expected a {k}x{k} matrix, got shape {out.shape}")
    if descriptor.kind == "diagonal":
        off = out[~np.eye(k, dtype=bool)]
        if any(x != 0 for x in off):
            raise DomainError("diagonal algebra element has nonzero off-diagonal entries")
    return out


class AlgebraElement:
    """An immutable k×k matrix in a declared C*-algebra."""

    __slots__ = ("descriptor", "entries")

    def __init__(self, descriptor: AlgebraDescriptor, entries):
        entries = _coerce_entries(descriptor, entries)
        entries.flags.writeable = False
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    @classmethod
    def _raw(cls, descriptor, entries):
        # Trusted constructor: entries already have the right dtype and shape.
        obj = object.__new__(cls)
        entries.flags.writeable = False
        object.__setattr__(obj, "descriptor", descriptor)
        object.__setattr__(obj, "entries", entries)
        return obj

    @classmethod
    def identity(cls, descriptor):
        k = descriptor.dim
        if descriptor.exact:
            return cls._raw(descriptor, exact.exact_eye(k))
        return cls._raw(descriptor, np.eye(k, dtype=complex))

    @classmethod
    def zero(cls, descriptor):
        k = descriptor.dim
        if descriptor.exact:
            return cls._raw(descriptor, exact.exact_zeros((k, k)))
        return cls._raw(descriptor, np.zeros((k, k), dtype=complex))

    @classmethod
    def diag(cls, descriptor, values):
        k = descriptor.dim
        values = list(values)
        if len(values) != k:
            raise DimensionError(f"expected {k} diagonal values, got {len(values)}")
        m = np.zeros((k, k), dtype=object)
        for i, x in enumerate(values):
            m[i, i] = x
        return cls(descriptor, m)

    @property
    def dim(self) -> int:
        return self.descriptor.dim

    def is_zero(self) -> bool:
        return not any(x != 0 for x in self.entries.flat)

    def to_mode(self, mode: str) -> "AlgebraElement":
        """Convert between scalar modes; float→rational is exact in binary."""
        if mode == self.descriptor.scalar_mode:
            return self
        desc = self.descriptor.with_mode(mode)
        if mode == "float":
            return AlgebraElement._raw(desc, exact.to_complex(self.entries))
        out = np.empty(self.entries.shape, dtype=object)
        for idx, x in np.ndenumerate(self.entries):
            out[idx] = exact.QComplex.from_binary(x)
        return AlgebraElement._raw(desc, out)

    def to_complex(self) -> np.ndarray:
        return exact.to_complex(self.entries)

    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.descriptor != self.descriptor:
            raise DimensionError(
                f"algebra mismatch: {self.descriptor} vs {other.descriptor}"
            )
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return AlgebraElement._raw(self.descriptor, self.entries + other.entries)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return AlgebraElement._raw(self.descriptor, self.entries - other.entries)

    def __neg__(self):
        return AlgebraElement._raw(self.descriptor, -self.entries)

    def __mul__(self, scalar):
        s = _coerce_scalar(self.descriptor, scalar)
        return AlgebraElement._raw(self.descriptor, self.entries * s)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return multiply(self, other)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.descriptor == other.descriptor and bool(
            np.all(self.entries == other.entries)
        )

    __hash__ = None

    def __repr__(self):
        return f"AlgebraElement({self.descriptor.kind}, {self.descriptor.scalar_mode}, {self.entries.tolist()})"


def _coerce_scalar(descriptor, scalar):
    if descriptor.exact:
        if isinstance(scalar, (float, complex, np.floating, np.complexfloating)):
            raise TypeError("rational-mode elements only scale by exact scalars")
        return exact.QComplex.coerce(scalar)
    return complex(scalar)


def max_abs_difference(a: AlgebraElement, b: AlgebraElement) -> float:
    """Largest entrywise modulus of a − b, as a float."""
    return float(np.abs(exact.to_complex((a - b).entries)).max())


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    if a.descriptor != b.descriptor:
        raise DimensionError(f"algebra mismatch: {a.descriptor} vs {b.descriptor}")
    if a.descriptor.kind == "diagonal":
        # Entrywise product of diagonals keeps off-diagonals exactly zero.
        d = np.diagonal(a.entries) * np.diagonal(b.entries)
        out = np.zeros_like(a.entries) if not a.descriptor.exact else exact.exact_zeros(a.entries.shape)
        np.fill_diagonal(out, d)
        return AlgebraElement._raw(a.descriptor, out)
    return AlgebraElement._raw(a.descriptor, a.entries @ b.entries)


def adjoint(a: AlgebraElement) -> AlgebraElement:
    return AlgebraElement._raw(a.descriptor, np.conj(a.entries).T.copy())


def is_hermitian(a: AlgebraElement, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    diff = a.entries - np.conj(a.entries).T
    if a.descriptor.exact:
        return not any(diff.flat)
    return float(np.abs(diff).max()) <= cfg.equality_tol


def _require_hermitian(a, cfg):
    if not is_hermitian(a, cfg):
        raise DomainError("eigenvalues requested for a non-Hermitian element")


def hermitian_eigenvalues(a: AlgebraElement, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Spectrum:
    """Ascending spectrum of a Hermitian element.

    Diagonal kinds return the sorted diagonal (as Fractions in rational
    mode).  Full kinds run the Jacobi solver; rational input is then solved
    in float and the result is flagged ``exact=False``.
    """
    _require_hermitian(a, cfg)
    if a.descriptor.kind == "diagonal":
        d = np.diagonal(a.entries)
        if a.descriptor.exact:
            return Spectrum(sorted(x.re for x in d), exact=True)
        return Spectrum(sorted(float(x.real) for x in d), exact=False)
    w, _ = jacobi_eigh(a.to_complex(), cfg.eig_tol, cfg.max_sweeps)
    return Spectrum([float(x) for x in w], exact=False)


def hermitian_eigh(a: AlgebraElement, cfg: ToleranceConfig = DEFAULT_TOLERANCES):
    """Float eigenvalues (ascending) and orthonormal eigenvector columns."""
    _require_hermitian(a, cfg)
    return jacobi_eigh(a.to_complex(), cfg.eig_tol, cfg.max_sweeps)


def operator_norm(a: AlgebraElement, cfg: ToleranceConfig = DEFAULT_TOLERANCES):
    """Largest singular value.

    Exact (a Fraction) for rational diagonal elements with real entries.
    """
    if a.descriptor.kind == "diagonal":
        d = np.diagonal(a.entries)
        if a.descriptor.exact and all(not x.im for x in d):
            return max(abs(x.re) for x in d)
        return float(max(abs(complex(x)) for x in d))
    m = a.to_complex()
    w, _ = jacobi_eigh(m.conj().T @ m, cfg.eig_tol, cfg.max_sweeps)
    return math.sqrt(max(float(w[-1]), 0.0))


def is_positive(a: AlgebraElement, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """Hermitian with nonnegative spectrum; non-Hermitian input is not positive."""
    if not is_hermitian(a, cfg):
        return False
    if a.descriptor.exact:
        if a.descriptor.kind == "diagonal":
            return all(x.re >= 0 for x in np.diagonal(a.entries))
        return exact.exact_is_psd(a.entries)
    return hermitian_eigenvalues(a, cfg)[0] >= -cfg.positivity_tol


def order_leq(a: AlgebraElement, b: AlgebraElement, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """C*-order a ≤ b, i.e. b − a is positive."""
    if a.descriptor != b.descriptor:
        raise DimensionError(f"algebra mismatch: {a.descriptor} vs {b.descriptor}")
    return is_positive(b - a, cfg)


def invert(a: AlgebraElement, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> AlgebraElement:
    desc = a.descriptor
    if desc.exact:
        if desc.kind == "diagonal":
            d = np.diagonal(a.entries)
            if any(not x for x in d):
                raise SingularityError("singular diagonal element", 0.0)
            out = exact.exact_zeros(a.entries.shape)
            np.fill_diagonal(out, [exact.ONE / x for x in d])
            return AlgebraElement._raw(desc, out)
        inv = exact.gauss_jordan_inverse(a.entries)
        if inv is None:
            raise SingularityError("singular element (exact determinant zero)", 0.0)
        return AlgebraElement._raw(desc, inv)

    smin = float(singular_values(a.entries)[-1])
    if smin <= cfg.invertibility_tol:
        raise SingularityError(
            f"element is singular: smallest singular value {smin:.3e}", smin
        )
    if desc.kind == "diagonal":
        out = np.zeros_like(a.entries)
        np.fill_diagonal(out, 1.0 / np.diagonal(a.entries))
        return AlgebraElement._raw(desc, out)
    return AlgebraElement._raw(desc, np.linalg.inv(a.entries))


def algebra(kind: str = "full", dim: int = 1, scalar_mode: str = "float") -> AlgebraDescriptor:
    return AlgebraDescriptor(kind, dim, scalar_mode)


def element(descriptor: AlgebraDescriptor, entries) -> AlgebraElement:
    return AlgebraElement(descriptor, entries)


def scalar_to_fraction(x):
    """Real part of an exact scalar as a Fraction; floats pass through."""
    if isinstance(x, exact.QComplex):
        return x.re
    if isinstance(x, Fraction):
        return x
    return float(np.real(x))
