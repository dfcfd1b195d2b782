"""Seeded random generators for algebra elements, operators and frames."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import exact
from .cstar import AlgebraDescriptor, AlgebraElement
from .hilbert import ModuleDescriptor, ModuleElement, ModuleOperator
from .measure import AtomicMeasure, IntervalMeasure, PolynomialFrame, SampledFrame


def _gaussian(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _small_rational(rng, shape):
    num = rng.integers(-6, 7, size=shape + (2,))
    den = rng.integers(1, 5, size=shape + (2,))
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        out[idx] = exact.QComplex(Fraction(int(num[idx][0]), int(den[idx][0])), Fraction(int(num[idx][1]), int(den[idx][1])))
    return out


def _enforce_kind(desc: AlgebraDescriptor, arr: np.ndarray) -> np.ndarray:
    if desc.kind == "diagonal":
        mask = ~np.eye(desc.dim, dtype=bool)
        arr = arr.copy()
        arr[..., mask] = exact.ZERO if arr.dtype == object else 0.0
    return arr


def random_entries(rng, desc: AlgebraDescriptor, lead_shape=(), scale=1.0) -> np.ndarray:
    shape = tuple(lead_shape) + (desc.dim, desc.dim)
    arr = _small_rational(rng, shape) if desc.exact else _gaussian(rng, shape, scale)
    return _enforce_kind(desc, arr)


def random_algebra_element(rng, desc: AlgebraDescriptor, scale=1.0) -> AlgebraElement:
    return AlgebraElement._raw(desc, random_entries(rng, desc, (), scale))


def random_module_element(rng, desc: ModuleDescriptor, scale=1.0) -> ModuleElement:
    return ModuleElement._raw(desc, random_entries(rng, desc.algebra, (desc.n,), scale))


def random_operator(rng, desc: ModuleDescriptor, well_conditioned=False) -> ModuleOperator:
    """Random operator; ``well_conditioned`` adds a dominant identity part."""
    blocks = random_entries(rng, desc.algebra, (desc.n, desc.n))
    op = ModuleOperator._raw(desc, blocks)
    if well_conditioned:
        size = desc.n * desc.k
        shift = 2 * size if desc.exact else 2.0 * np.sqrt(size)
        op = ModuleOperator.identity(desc) * shift + op
    return op


def random_interval(rng) -> IntervalMeasure:
    a = Fraction(int(rng.integers(-2, 2)), int(rng.integers(1, 3)))
    b = a + Fraction(int(rng.integers(1, 4)), int(rng.integers(1, 3)))
    weights = [(1,), (1, 0, 1), (2, 1)]
    w = weights[int(rng.integers(len(weights)))]
    if w == (2, 1) and a < -1:
        w = (1,)
    return IntervalMeasure(a, b, w)


def random_polynomial_frame(rng, desc: ModuleDescriptor, degree: int, measure=None) -> PolynomialFrame:
    measure = measure or random_interval(rng)
    stack = [random_entries(rng, desc.algebra, (desc.n,)) for _ in range(degree + 1)]
    coeffs = np.stack(stack, axis=-1) if not desc.exact else _stack_last(stack)
    return PolynomialFrame(desc, measure, coeffs)


def _stack_last(arrays):
    out = np.empty(arrays[0].shape + (len(arrays),), dtype=object)
    for i, a in enumerate(arrays):
        out[..., i] = a
    return out


def random_atomic_measure(rng, atoms: int) -> AtomicMeasure:
    weights = [Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 4))) for _ in range(atoms)]
    return AtomicMeasure(tuple(range(atoms)), tuple(weights))


def random_atomic_frame(rng, desc: ModuleDescriptor, atoms: int) -> SampledFrame:
    measure = random_atomic_measure(rng, atoms)
    values = random_entries(rng, desc.algebra, (atoms, desc.n))
    return SampledFrame(desc, measure, measure.points, measure.weights, values)
