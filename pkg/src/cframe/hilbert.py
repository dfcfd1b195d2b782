"""The Hilbert module A^n and adjointable A-linear operators on it.

Elements are n-tuples of algebra elements with inner product
``<f, g> = sum_i f_i g_i^*`` (A-linear in the first slot).  Operators act by
right multiplication with an n×n matrix over A::

    (K f)_j = sum_i f_i M_ij

so an element f, laid out as the k×(nk) row-block ``[f_1 | ... | f_n]``,
maps to ``row(f) @ flatten(K)``.  Consequently ``compose(K, L)``, whose
flattening is ``flatten(K) @ flatten(L)``, is the operator "apply K, then L".
In operator notation the product ``K S K*`` is therefore
``compose(adjoint(K), S, K)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .cstar import (
    DEFAULT_TOLERANCES,
    AlgebraDescriptor,
    AlgebraElement,
    ToleranceConfig,
    operator_norm,
)
from .errors import DimensionError, DomainError, SingularityError
from .linalg import jacobi_eigh, singular_values


@dataclass(frozen=True)
class ModuleDescriptor:
    algebra: AlgebraDescriptor
    rank: int = 1

    def __post_init__(self):
        if not isinstance(self.rank, int) or isinstance(self.rank, bool) or self.rank < 1:
            raise ValueError(f"module rank must be a positive integer, got {self.rank!r}")

    @property
    def k(self) -> int:
        return self.algebra.dim

    @property
    def n(self) -> int:
        return self.rank

    @property
    def exact(self) -> bool:
        return self.algebra.exact

    def with_mode(self, mode: str) -> "ModuleDescriptor":
        return ModuleDescriptor(self.algebra.with_mode(mode), self.rank)


def _empty(desc: AlgebraDescriptor, shape):
    if desc.exact:
        return exact.exact_zeros(shape)
    return np.zeros(shape, dtype=complex)


def _check_kind(desc: AlgebraDescriptor, data: np.ndarray):
    if desc.kind != "diagonal":
        return
    k = desc.dim
    mask = ~np.eye(k, dtype=bool)
    if any(x != 0 for x in data[..., mask].flat):
        raise DomainError("diagonal algebra entries have nonzero off-diagonal parts")


def _coerce_data(desc: AlgebraDescriptor, data, shape) -> np.ndarray:
    if desc.exact:
        arr = np.asarray(data, dtype=object)
        if arr.shape != shape:
            raise DimensionError(f"expected shape {shape}, got {arr.shape}")
        out = np.empty(shape, dtype=object)
        for idx, x in np.ndenumerate(arr):
            if isinstance(x, (float, complex, np.floating, np.complexfloating)):
                raise TypeError("rational-mode entries must be exact (int, Fraction, str)")
            out[idx] = exact.QComplex.coerce(x)
    else:
        arr = np.asarray(data)
        if arr.dtype == object:
            arr = exact.to_complex(arr)
        out = np.array(arr, dtype=complex)
        if out.shape != shape:
            raise DimensionError(f"expected shape {shape}, got {out.shape}")
    _check_kind(desc, out)
    return out


def to_mode_array(arr: np.ndarray, mode: str) -> np.ndarray:
    if mode == "float":
        return exact.to_complex(arr)
    if arr.dtype == object:
        return arr
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = exact.QComplex.from_binary(x)
    return out


class ModuleElement:
    """An immutable element (f_1, ..., f_n) of A^n, stored as an (n, k, k) array."""

    __slots__ = ("descriptor", "data")

    def __init__(self, descriptor: ModuleDescriptor, data):
        shape = (descriptor.n, descriptor.k, descriptor.k)
        data = _coerce_data(descriptor.algebra, data, shape)
        data.flags.writeable = False
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("ModuleElement is immutable")

    @classmethod
    def _raw(cls, descriptor, data):
        obj = object.__new__(cls)
        data.flags.writeable = False
        object.__setattr__(obj, "descriptor", descriptor)
        object.__setattr__(obj, "data", data)
        return obj

    @classmethod
    def from_components(cls, descriptor: ModuleDescriptor, components):
        components = list(components)
        if len(components) != descriptor.n:
            raise DimensionError(f"expected {descriptor.n} components, got {len(components)}")
        for c in components:
            if c.descriptor != descriptor.algebra:
                raise DimensionError("component algebra does not match the module")
        if descriptor.exact:
            data = np.empty((descriptor.n, descriptor.k, descriptor.k), dtype=object)
            for i, c in enumerate(components):
                data[i] = c.entries
        else:
            data = np.stack([c.entries for c in components]).astype(complex)
        return cls._raw(descriptor, data)

    @classmethod
    def zero(cls, descriptor: ModuleDescriptor):
        return cls._raw(descriptor, _empty(descriptor.algebra, (descriptor.n, descriptor.k, descriptor.k)))

    @classmethod
    def basis(cls, descriptor: ModuleDescriptor, index: int = 0):
        """Identity in component ``index``, zero elsewhere."""
        data = _empty(descriptor.algebra, (descriptor.n, descriptor.k, descriptor.k))
        data[index] = AlgebraElement.identity(descriptor.algebra).entries
        return cls._raw(descriptor, data)

    @property
    def components(self) -> tuple:
        return tuple(AlgebraElement._raw(self.descriptor.algebra, self.data[i].copy()) for i in range(self.descriptor.n))

    def row_block(self) -> np.ndarray:
        """The k×(nk) matrix [f_1 | ... | f_n]."""
        n, k = self.descriptor.n, self.descriptor.k
        return self.data.transpose(1, 0, 2).reshape(k, n * k)

    @classmethod
    def from_row_block(cls, descriptor: ModuleDescriptor, row: np.ndarray):
        n, k = descriptor.n, descriptor.k
        return cls._raw(descriptor, np.ascontiguousarray(row.reshape(k, n, k).transpose(1, 0, 2)))

    def to_mode(self, mode: str) -> "ModuleElement":
        if mode == self.descriptor.algebra.scalar_mode:
            return self
        return ModuleElement._raw(self.descriptor.with_mode(mode), to_mode_array(self.data, mode))

    def _check(self, other):
        if not isinstance(other, ModuleElement):
            return NotImplemented
        if other.descriptor != self.descriptor:
            raise DimensionError(f"module mismatch: {self.descriptor} vs {other.descriptor}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return ModuleElement._raw(self.descriptor, self.data + other.data)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return ModuleElement._raw(self.descriptor, self.data - other.data)

    def __neg__(self):
        return ModuleElement._raw(self.descriptor, -self.data)

    def __mul__(self, scalar):
        if self.descriptor.exact:
            if isinstance(scalar, (float, complex, np.floating, np.complexfloating)):
                raise TypeError("rational-mode elements only scale by exact scalars")
            s = exact.QComplex.coerce(scalar)
        else:
            s = complex(scalar)
        return ModuleElement._raw(self.descriptor, self.data * s)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ModuleElement):
            return NotImplemented
        return self.descriptor == other.descriptor and bool(np.all(self.data == other.data))

    __hash__ = None

    def __repr__(self):
        return f"ModuleElement(n={self.descriptor.n}, k={self.descriptor.k}, {self.data.tolist()})"


def left_multiply(a: AlgebraElement, f: ModuleElement) -> ModuleElement:
    """The module action (a f)_i = a f_i."""
    if a.descriptor != f.descriptor.algebra:
        raise DimensionError("algebra element does not act on this module")
    return ModuleElement._raw(f.descriptor, a.entries @ f.data)


def inner_product(f: ModuleElement, g: ModuleElement) -> AlgebraElement:
    """<f, g> = sum_i f_i g_i^*."""
    if f.descriptor != g.descriptor:
        raise DimensionError(f"module mismatch: {f.descriptor} vs {g.descriptor}")
    terms = f.data @ np.conj(g.data).transpose(0, 2, 1)
    return AlgebraElement._raw(f.descriptor.algebra, exact.tree_sum(terms))


def module_norm(f: ModuleElement) -> float:
    """||f|| = ||<f, f>||^(1/2)."""
    return math.sqrt(float(operator_norm(inner_product(f, f))))


class ModuleOperator:
    """Right multiplication by an n×n matrix over A, stored as (n, n, k, k) blocks."""

    __slots__ = ("descriptor", "blocks")

    def __init__(self, descriptor: ModuleDescriptor, blocks):
        n, k = descriptor.n, descriptor.k
        blocks = _coerce_data(descriptor.algebra, blocks, (n, n, k, k))
        blocks.flags.writeable = False
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):
        raise AttributeError("ModuleOperator is immutable")

    @classmethod
    def _raw(cls, descriptor, blocks):
        obj = object.__new__(cls)
        blocks.flags.writeable = False
        object.__setattr__(obj, "descriptor", descriptor)
        object.__setattr__(obj, "blocks", blocks)
        return obj

    @classmethod
    def from_flat(cls, descriptor: ModuleDescriptor, matrix) -> "ModuleOperator":
        """Inverse of :func:`flatten`; checks diagonal-kind structure."""
        n, k = descriptor.n, descriptor.k
        m = np.asarray(matrix)
        if m.shape != (n * k, n * k):
            raise DimensionError(f"expected a {n * k}x{n * k} matrix, got {m.shape}")
        blocks = m.reshape(n, k, n, k).transpose(0, 2, 1, 3)
        return cls(descriptor, blocks)

    @classmethod
    def identity(cls, descriptor: ModuleDescriptor):
        n, k = descriptor.n, descriptor.k
        blocks = _empty(descriptor.algebra, (n, n, k, k))
        eye = AlgebraElement.identity(descriptor.algebra).entries
        for i in range(n):
            blocks[i, i] = eye
        return cls._raw(descriptor, blocks)

    @classmethod
    def zero(cls, descriptor: ModuleDescriptor):
        n, k = descriptor.n, descriptor.k
        return cls._raw(descriptor, _empty(descriptor.algebra, (n, n, k, k)))

    def block(self, i: int, j: int) -> AlgebraElement:
        return AlgebraElement._raw(self.descriptor.algebra, self.blocks[i, j].copy())

    def to_mode(self, mode: str) -> "ModuleOperator":
        if mode == self.descriptor.algebra.scalar_mode:
            return self
        return ModuleOperator._raw(self.descriptor.with_mode(mode), to_mode_array(self.blocks, mode))

    def _check(self, other):
        if not isinstance(other, ModuleOperator):
            return NotImplemented
        if other.descriptor != self.descriptor:
            raise DimensionError(f"module mismatch: {self.descriptor} vs {other.descriptor}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return ModuleOperator._raw(self.descriptor, self.blocks + other.blocks)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return ModuleOperator._raw(self.descriptor, self.blocks - other.blocks)

    def __mul__(self, scalar):
        if self.descriptor.exact:
            if isinstance(scalar, (float, complex, np.floating, np.complexfloating)):
                raise TypeError("rational-mode operators only scale by exact scalars")
            s = exact.QComplex.coerce(scalar)
        else:
            s = complex(scalar)
        return ModuleOperator._raw(self.descriptor, self.blocks * s)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ModuleOperator):
            return NotImplemented
        return self.descriptor == other.descriptor and bool(np.all(self.blocks == other.blocks))

    __hash__ = None

    def __repr__(self):
        return f"ModuleOperator(n={self.descriptor.n}, k={self.descriptor.k}, {self.blocks.tolist()})"


def flatten(K: ModuleOperator) -> np.ndarray:
    """The (nk)×(nk) complex matrix whose block (i, j) is M_ij."""
    n, k = K.descriptor.n, K.descriptor.k
    return K.blocks.transpose(0, 2, 1, 3).reshape(n * k, n * k)


def apply_operator(K: ModuleOperator, f: ModuleElement) -> ModuleElement:
    if K.descriptor != f.descriptor:
        raise DimensionError(f"module mismatch: {K.descriptor} vs {f.descriptor}")
    return ModuleElement.from_row_block(f.descriptor, f.row_block() @ flatten(K))


def operator_adjoint(K: ModuleOperator) -> ModuleOperator:
    """Blocks (K*)_ij = adjoint(M_ji)."""
    return ModuleOperator._raw(K.descriptor, np.ascontiguousarray(np.conj(K.blocks).transpose(1, 0, 3, 2)))


def compose(*ops: ModuleOperator) -> ModuleOperator:
    """Apply ``ops[0]`` first, then ``ops[1]``, ...; flattens to the matrix product."""
    if not ops:
        raise ValueError("compose needs at least one operator")
    desc = ops[0].descriptor
    m = flatten(ops[0])
    for op in ops[1:]:
        if op.descriptor != desc:
            raise DimensionError(f"module mismatch: {desc} vs {op.descriptor}")
        m = m @ flatten(op)
    return ModuleOperator.from_flat(desc, m)


def max_abs_entry(K: ModuleOperator) -> float:
    return float(np.abs(exact.to_complex(K.blocks)).max()) if K.blocks.size else 0.0


def slot_matrices(K: ModuleOperator) -> np.ndarray:
    """For diagonal kinds: the k independent n×n matrices (M_ij)_ss."""
    idx = np.arange(K.descriptor.k)
    return np.ascontiguousarray(K.blocks[:, :, idx, idx].transpose(2, 0, 1))


def from_slot_matrices(descriptor: ModuleDescriptor, slots: np.ndarray) -> ModuleOperator:
    n, k = descriptor.n, descriptor.k
    blocks = _empty(descriptor.algebra, (n, n, k, k))
    for s in range(k):
        blocks[:, :, s, s] = slots[s]
    return ModuleOperator._raw(descriptor, blocks)


def spectral_blocks(K: ModuleOperator) -> list[np.ndarray]:
    """Independent square pieces of flatten(K): the slot matrices for
    diagonal kinds, the whole flattening otherwise."""
    if K.descriptor.algebra.kind == "diagonal":
        return list(slot_matrices(K))
    return [flatten(K)]


def is_self_adjoint(K: ModuleOperator, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    diff = K.blocks - np.conj(K.blocks).transpose(1, 0, 3, 2)
    if K.descriptor.exact:
        return not any(diff.flat)
    return float(np.abs(diff).max()) <= cfg.equality_tol


@dataclass(frozen=True)
class OperatorSpectrum:
    is_self_adjoint: bool
    is_positive: bool
    eigenvalues: tuple | None
    operator_norm: float | Fraction
    smallest_eigenvalue: float | Fraction | None
    smallest_singular_value: float | Fraction
    is_invertible: bool
    exact: bool


def flat_eigh(K: ModuleOperator, cfg: ToleranceConfig = DEFAULT_TOLERANCES):
    """Float eigen-decomposition of each spectral block (see :func:`spectral_blocks`)."""
    return [jacobi_eigh(exact.to_complex(b), cfg.eig_tol, cfg.max_sweeps) for b in spectral_blocks(K)]


def _exact_slot_eigenvalues(K: ModuleOperator):
    # n = 1 diagonal kind: the spectrum is the (real) diagonal, read off exactly.
    if not (K.descriptor.exact and K.descriptor.algebra.kind == "diagonal" and K.descriptor.n == 1):
        return None
    d = [K.blocks[0, 0, s, s] for s in range(K.descriptor.k)]
    if any(x.im for x in d):
        return None
    return sorted(x.re for x in d)


def flat_eigenvalues(K: ModuleOperator, cfg: ToleranceConfig = DEFAULT_TOLERANCES):
    """Ascending eigenvalues of flatten(K) for self-adjoint K; exact when possible."""
    ex = _exact_slot_eigenvalues(K)
    if ex is not None:
        return ex, True
    values = []
    for w, _ in flat_eigh(K, cfg):
        values.extend(float(x) for x in w)
    return sorted(values), False


def flat_singular_values(K: ModuleOperator) -> np.ndarray:
    return np.sort(np.concatenate([singular_values(exact.to_complex(b)) for b in spectral_blocks(K)]))[::-1]


def operator_spectral(K: ModuleOperator, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> OperatorSpectrum:
    sa = is_self_adjoint(K, cfg)
    exact_mode = K.descriptor.exact
    eigenvalues = None
    smallest = None
    eig_exact = False
    if sa:
        ev, eig_exact = flat_eigenvalues(K, cfg)
        eigenvalues = tuple(ev)
        smallest = ev[0]
    sv = flat_singular_values(K)
    if eig_exact:
        norm = max(abs(x) for x in eigenvalues)
        smin_sv = min(abs(x) for x in eigenvalues)
    else:
        norm = float(sv[0])
        smin_sv = float(sv[-1])

    if exact_mode:
        positive = sa and all(exact.exact_is_psd(b) for b in spectral_blocks(K))
        invertible = all(exact.exact_rank(b) == b.shape[0] for b in spectral_blocks(K))
    else:
        positive = sa and smallest >= -cfg.positivity_tol
        invertible = smin_sv > cfg.invertibility_tol
    return OperatorSpectrum(
        is_self_adjoint=sa,
        is_positive=positive,
        eigenvalues=eigenvalues,
        operator_norm=norm,
        smallest_eigenvalue=smallest,
        smallest_singular_value=smin_sv,
        is_invertible=invertible,
        exact=eig_exact,
    )


def operator_invert(K: ModuleOperator, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ModuleOperator:
    """Inverse in M_n(A); diagonal kinds are inverted slot by slot."""
    desc = K.descriptor
    pieces = spectral_blocks(K)
    inverses = []
    for b in pieces:
        if desc.exact:
            inv = exact.gauss_jordan_inverse(b)
            if inv is None:
                raise SingularityError("operator is singular (exact rank deficiency)", 0.0)
        else:
            smin = float(singular_values(b)[-1])
            if smin <= cfg.invertibility_tol:
                raise SingularityError(f"operator is singular: smallest singular value {smin:.3e}", smin)
            inv = np.linalg.inv(b)
        inverses.append(inv)
    if desc.algebra.kind == "diagonal":
        return from_slot_matrices(desc, np.stack(inverses) if not desc.exact else _stack_obj(inverses))
    return ModuleOperator.from_flat(desc, inverses[0])


def _stack_obj(arrays):
    out = np.empty((len(arrays),) + arrays[0].shape, dtype=object)
    for i, a in enumerate(arrays):
        out[i] = a
    return out
