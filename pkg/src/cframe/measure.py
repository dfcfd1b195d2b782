"""Measure spaces, frame maps, Bochner integration and discretized L^2(Omega, A).

Two measure shapes are supported: a compact interval [a, b] with a
polynomial density (rational coefficients), and a finite family of
weighted atoms.  Interval integrals are computed either exactly, from
monomial moments, or with composite 5-point Gauss-Legendre quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Union

import numpy as np

from . import exact
from .cstar import AlgebraDescriptor, AlgebraElement
from .errors import DimensionError, DomainError, GridMismatchError, ModeError, ParameterError
from .hilbert import ModuleDescriptor, ModuleElement, to_mode_array

GL_POINTS = 5
DEFAULT_PANELS = 32
WEIGHT_CHECK_SAMPLES = 1000


def poly_eval(coeffs, x):
    """Horner evaluation of ascending coefficients along the last axis."""
    coeffs = np.asarray(coeffs)
    out = coeffs[..., -1]
    for i in range(coeffs.shape[-1] - 2, -1, -1):
        out = out * x + coeffs[..., i]
    return out


@dataclass(frozen=True)
class IntervalMeasure:
    """Lebesgue measure on [a, b] with density ``weight`` (ascending coefficients)."""

    a: Fraction
    b: Fraction
    weight: tuple = (Fraction(1),)

    def __post_init__(self):
        a, b = exact.to_fraction(self.a), exact.to_fraction(self.b)
        weight = tuple(exact.to_fraction(c) for c in self.weight) or (Fraction(0),)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "weight", weight)
        if not a < b:
            raise DomainError(f"interval needs a < b, got [{a}, {b}]")
        step = (b - a) / (WEIGHT_CHECK_SAMPLES + 1)
        for i in range(WEIGHT_CHECK_SAMPLES + 2):
            if self.density(a + i * step) < 0:
                raise DomainError(f"weight polynomial is negative at {a + i * step}")

    def density(self, x):
        return poly_eval(np.array(self.weight, dtype=object), x)

    def monomial_moments(self, max_degree: int) -> list[Fraction]:
        """Exact integrals of x^m w(x) over [a, b] for m = 0..max_degree."""
        out = []
        for m in range(max_degree + 1):
            total = Fraction(0)
            for t, c in enumerate(self.weight):
                if c:
                    e = m + t + 1
                    total += c * (self.b**e - self.a**e) / e
            out.append(total)
        return out

    def quadrature(self, panels: int = DEFAULT_PANELS):
        """Composite Gauss-Legendre nodes (ascending) and density-folded weights."""
        if not isinstance(panels, int) or panels < 2:
            raise ParameterError(f"grid_size must be an integer >= 2, got {panels!r}")
        x, w = np.polynomial.legendre.leggauss(GL_POINTS)
        a, b = float(self.a), float(self.b)
        h = (b - a) / panels
        left = a + h * np.arange(panels)
        nodes = (left[:, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
        weights = np.tile(0.5 * h * w, panels)
        dens = poly_eval(np.array([float(c) for c in self.weight]), nodes)
        return nodes, weights * dens


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many labelled atoms with positive rational weights."""

    points: tuple
    weights: tuple

    def __post_init__(self):
        points = tuple(self.points)
        weights = tuple(exact.to_fraction(w) for w in self.weights)
        if len(points) != len(weights):
            raise DimensionError("atom labels and weights differ in length")
        if any(w <= 0 for w in weights):
            raise DomainError("atom weights must be positive")
        if len(set(points)) != len(points):
            raise DomainError("atom labels must be distinct")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.points)

    def without(self, index: int) -> "AtomicMeasure":
        keep = [i for i in range(len(self.points)) if i != index]
        return AtomicMeasure(tuple(self.points[i] for i in keep), tuple(self.weights[i] for i in keep))


MeasureSpace = Union[IntervalMeasure, AtomicMeasure]


def _grid_weights(weights, exact_mode: bool) -> np.ndarray:
    if exact_mode:
        return np.array([exact.QComplex(w) for w in weights], dtype=object)
    return np.array([float(w) for w in weights])


@dataclass(frozen=True, eq=False)
class AlgebraPolynomial:
    """A polynomial map omega -> A with (k, k, degree+1) ascending coefficients."""

    descriptor: AlgebraDescriptor
    coeffs: np.ndarray

    def __post_init__(self):
        k = self.descriptor.dim
        c = np.asarray(self.coeffs, dtype=object if self.descriptor.exact else complex)
        if c.ndim != 3 or c.shape[:2] != (k, k) or c.shape[2] < 1:
            raise DimensionError(f"expected coefficients of shape ({k}, {k}, d+1), got {c.shape}")
        if self.descriptor.exact:
            c = exact.exact_array(c)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, omega) -> AlgebraElement:
        return AlgebraElement(self.descriptor, poly_eval(self.coeffs, _point(omega, self.descriptor.exact)))


def _point(omega, exact_mode):
    if exact_mode:
        return exact.QComplex(exact.to_fraction(omega))
    return float(omega)


@dataclass(frozen=True, eq=False)
class PolynomialFrame:
    """F(omega) with component i, entry (p, q) a polynomial in omega.

    ``coeffs`` has shape (n, k, k, degree+1), ascending in degree.
    """

    module: ModuleDescriptor
    measure: MeasureSpace
    coeffs: np.ndarray

    def __post_init__(self):
        n, k = self.module.n, self.module.k
        c = np.asarray(self.coeffs)
        if c.ndim != 4 or c.shape[:3] != (n, k, k) or c.shape[3] < 1:
            raise DimensionError(f"expected coefficients of shape ({n}, {k}, {k}, d+1), got {c.shape}")
        if self.module.exact:
            for x in c.flat:
                if isinstance(x, (float, complex, np.floating, np.complexfloating)):
                    raise TypeError("rational-mode coefficients must be exact")
            c = exact.exact_array(c)
        else:
            c = exact.to_complex(c) if c.dtype == object else np.array(c, dtype=complex)
        if self.module.algebra.kind == "diagonal":
            mask = ~np.eye(k, dtype=bool)
            if any(x != 0 for x in c[:, mask, :].flat):
                raise DomainError("diagonal algebra: off-diagonal entry polynomials must vanish")
        if isinstance(self.measure, AtomicMeasure):
            for p in self.measure.points:
                if isinstance(p, str):
                    raise DomainError("polynomial frames need numeric atom labels")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[3] - 1

    def __call__(self, omega) -> ModuleElement:
        return ModuleElement._raw(self.module, poly_eval(self.coeffs, _point(omega, self.module.exact)))

    def values_at(self, points) -> np.ndarray:
        """Stacked (m, n, k, k) values at the given points."""
        exact_mode = self.module.exact
        if not len(points):
            return _zeros_like_values(self.module, 0)
        return np.stack([poly_eval(self.coeffs, _point(p, exact_mode)) for p in points])

    def with_measure(self, measure) -> "PolynomialFrame":
        return PolynomialFrame(self.module, measure, self.coeffs)


@dataclass(frozen=True, eq=False)
class SampledFrame:
    """F given by its values on a weighted grid: ``values`` has shape (m, n, k, k)."""

    module: ModuleDescriptor
    measure: MeasureSpace
    points: tuple
    weights: tuple
    values: np.ndarray

    def __post_init__(self):
        n, k = self.module.n, self.module.k
        points = tuple(self.points)
        m = len(points)
        if self.module.exact:
            weights = tuple(exact.to_fraction(w) for w in self.weights)
            vals = exact.exact_array(np.asarray(self.values, dtype=object)) if m else _zeros_like_values(self.module, 0)
        else:
            weights = tuple(float(w) for w in self.weights)
            vals = np.asarray(self.values)
            vals = exact.to_complex(vals) if vals.dtype == object else np.array(vals, dtype=complex)
            if not m:
                vals = _zeros_like_values(self.module, 0)
        if len(weights) != m:
            raise DimensionError("grid points and weights differ in length")
        if vals.shape != (m, n, k, k):
            raise DimensionError(f"expected values of shape ({m}, {n}, {k}, {k}), got {vals.shape}")
        if any(w <= 0 for w in weights):
            raise DomainError("grid weights must be positive")
        if self.module.algebra.kind == "diagonal":
            mask = ~np.eye(k, dtype=bool)
            if any(x != 0 for x in vals[..., mask].flat):
                raise DomainError("diagonal algebra: off-diagonal sample entries must vanish")
        if isinstance(self.measure, AtomicMeasure):
            if points != self.measure.points:
                raise GridMismatchError("sampled frame on an atomic measure must use the atoms as its grid")
            if [float(w) for w in weights] != [float(w) for w in self.measure.weights]:
                raise GridMismatchError("grid weights must equal the atom weights")
        vals.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "values", vals)

    def __call__(self, omega) -> ModuleElement:
        try:
            i = self.points.index(omega)
        except ValueError:
            raise DomainError(f"{omega!r} is not a grid point of this sampled frame") from None
        return ModuleElement._raw(self.module, self.values[i])


FrameMap = Union[PolynomialFrame, SampledFrame]


def _zeros_like_values(module: ModuleDescriptor, m: int):
    shape = (m, module.n, module.k, module.k)
    return exact.exact_zeros(shape) if module.exact else np.zeros(shape, dtype=complex)


@dataclass(frozen=True, eq=False)
class L2Element:
    """A discretized element of L^2(Omega, A): one algebra value per grid point."""

    descriptor: AlgebraDescriptor
    points: tuple
    weights: tuple
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        k = self.descriptor.dim
        vals = np.asarray(self.values)
        if self.descriptor.exact:
            vals = exact.exact_array(np.asarray(vals, dtype=object)) if len(self.points) else exact.exact_zeros((0, k, k))
        else:
            vals = exact.to_complex(vals) if vals.dtype == object else np.array(vals, dtype=complex)
        if vals.shape != (len(self.points), k, k):
            raise DimensionError(f"expected values of shape ({len(self.points)}, {k}, {k}), got {vals.shape}")
        vals.flags.writeable = False
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "values", vals)

    def value(self, i: int) -> AlgebraElement:
        return AlgebraElement._raw(self.descriptor, self.values[i].copy())

    def l2_norm_squared(self) -> float:
        return float(abs(complex(np.max(np.abs(exact.to_complex(l2_inner(self, self).entries))))))


def _same_grid(p, q):
    if p.points != q.points or p.weights != q.weights:
        raise GridMismatchError("L2 elements live on different grids")


def l2_inner(phi: L2Element, psi: L2Element) -> AlgebraElement:
    """<phi, psi> = sum_w weight(w) phi(w) psi(w)^*."""
    if phi.descriptor != psi.descriptor:
        raise DimensionError("L2 elements over different algebras")
    _same_grid(phi, psi)
    if not phi.points:
        return AlgebraElement.zero(phi.descriptor)
    w = _grid_weights(phi.weights, phi.descriptor.exact)
    terms = w[:, None, None] * (phi.values @ np.conj(psi.values).transpose(0, 2, 1))
    return AlgebraElement._raw(phi.descriptor, exact.tree_sum(terms))


def bochner_integrate(
    integrand: Callable,
    measure: MeasureSpace,
    grid_size: int = DEFAULT_PANELS,
    mode: str = "numeric",
) -> AlgebraElement:
    """Integrate an A-valued map against ``measure``.

    ``mode="exact"`` requires a rational :class:`AlgebraPolynomial` over an
    interval; atomic measures are always summed exactly in the integrand's
    own scalar mode.
    """
    if mode not in ("numeric", "exact"):
        raise ParameterError(f"mode must be 'numeric' or 'exact', got {mode!r}")
    if isinstance(measure, AtomicMeasure):
        values = [integrand(p) for p in measure.points]
        if not values:
            raise ParameterError("cannot infer the algebra of an integral over no atoms")
        desc = values[0].descriptor
        if mode == "exact" and not desc.exact:
            raise ModeError("exact integration needs rational-mode values")
        w = _grid_weights(measure.weights, desc.exact)
        stacked = np.stack([v.entries for v in values]) if not desc.exact else _stack_obj([v.entries for v in values])
        return AlgebraElement._raw(desc, exact.tree_sum(w[:, None, None] * stacked))

    if mode == "exact":
        if not isinstance(integrand, AlgebraPolynomial) or not integrand.descriptor.exact:
            raise ModeError("exact integration needs a rational AlgebraPolynomial integrand")
        mu = measure.monomial_moments(integrand.coeffs.shape[2] - 1)
        mu = np.array([exact.QComplex(x) for x in mu], dtype=object)
        return AlgebraElement._raw(integrand.descriptor, integrand.coeffs @ mu)

    nodes, weights = measure.quadrature(grid_size)
    if isinstance(integrand, AlgebraPolynomial) and integrand.descriptor.exact:
        integrand = AlgebraPolynomial(integrand.descriptor.with_mode("float"), exact.to_complex(integrand.coeffs))
    values = []
    for x in nodes:
        v = integrand(x)
        values.append(v.to_mode("float").entries if v.descriptor.exact else v.entries)
    desc = integrand.descriptor.with_mode("float") if isinstance(integrand, AlgebraPolynomial) else _float_desc(v)
    return AlgebraElement._raw(desc, exact.tree_sum(weights[:, None, None] * np.stack(values)))


def _float_desc(v: AlgebraElement) -> AlgebraDescriptor:
    return v.descriptor.with_mode("float")


def _stack_obj(arrays):
    out = np.empty((len(arrays),) + arrays[0].shape, dtype=object)
    for i, a in enumerate(arrays):
        out[i] = a
    return out


def discretize(F: FrameMap, grid_size: int = DEFAULT_PANELS) -> FrameMap:
    """Sample an interval frame at composite Gauss-Legendre nodes.

    Atomic-measure frames and already-sampled frames are returned as is.
    Sampling at irrational nodes always yields a float-mode frame.
    """
    if not isinstance(grid_size, int) or grid_size < 2:
        raise ParameterError(f"grid_size must be an integer >= 2, got {grid_size!r}")
    if isinstance(F, SampledFrame) or isinstance(F.measure, AtomicMeasure):
        return F
    nodes, weights = F.measure.quadrature(grid_size)
    float_F = F if not F.module.exact else PolynomialFrame(
        F.module.with_mode("float"), F.measure, exact.to_complex(F.coeffs)
    )
    values = float_F.values_at(nodes)
    return SampledFrame(float_F.module, F.measure, tuple(nodes.tolist()), tuple(weights.tolist()), values)


def frame_samples(F: FrameMap):
    """(points, weights array, values (m, n, k, k)) for a sampled or atomic frame."""
    if isinstance(F, SampledFrame):
        return F.points, _grid_weights(F.weights, F.module.exact), F.values
    if isinstance(F.measure, AtomicMeasure):
        pts = F.measure.points
        return pts, _grid_weights(F.measure.weights, F.module.exact), F.values_at(pts)
    raise ModeError("interval-measure polynomial frame: discretize it first")


def row_blocks(values: np.ndarray) -> np.ndarray:
    """(m, n, k, k) values -> (m, k, n*k) row blocks [F_1 | ... | F_n]."""
    m, n, k, _ = values.shape
    return values.transpose(0, 2, 1, 3).reshape(m, k, n * k)


def _weighted_gram(weights, left: np.ndarray, right: np.ndarray, module: ModuleDescriptor) -> np.ndarray:
    # sum_r w_r L_r^* R_r over row blocks; empty grids give the zero matrix.
    nk = module.n * module.k
    if left.shape[0] == 0:
        return exact.exact_zeros((nk, nk)) if module.exact else np.zeros((nk, nk), dtype=complex)
    lb, rb = row_blocks(left), row_blocks(right)
    terms = weights[:, None, None] * (np.conj(lb).transpose(0, 2, 1) @ rb)
    return exact.tree_sum(terms)


def _poly_gram(measure: IntervalMeasure, G: PolynomialFrame, F: PolynomialFrame) -> np.ndarray:
    # Exact: sum_{p,q} P_p^* Q_q mu_{p+q} with P, Q the coefficient row blocks.
    mu = measure.monomial_moments(G.degree + F.degree)
    gb = row_blocks(np.ascontiguousarray(np.moveaxis(G.coeffs, 3, 0)))
    fb = row_blocks(np.ascontiguousarray(np.moveaxis(F.coeffs, 3, 0)))
    nk = F.module.n * F.module.k
    out = exact.exact_zeros((nk, nk))
    for p in range(G.degree + 1):
        gp = np.conj(gb[p]).T
        for q in range(F.degree + 1):
            if mu[p + q]:
                out = out + (gp @ fb[q]) * exact.QComplex(mu[p + q])
    return out


def gram_flat(G: FrameMap, F: FrameMap, grid_size: int = DEFAULT_PANELS) -> np.ndarray:
    """Flattened integral of G_i(w)^* F_j(w): the (cross-)moment matrix.

    Exact for rational polynomial frames and for rational atomic data;
    composite Gauss-Legendre otherwise.
    """
    if G.module != F.module:
        raise DimensionError(f"module mismatch: {G.module} vs {F.module}")
    if G.measure != F.measure:
        raise DimensionError("frames are defined over different measures")
    if (
        isinstance(F, PolynomialFrame)
        and isinstance(G, PolynomialFrame)
        and isinstance(F.measure, IntervalMeasure)
        and F.module.exact
    ):
        return _poly_gram(F.measure, G, F)
    if isinstance(F.measure, IntervalMeasure):
        G, F = discretize(G, grid_size), discretize(F, grid_size)
        if G.points != F.points or G.weights != F.weights:
            raise GridMismatchError("sampled frames use different grids")
    pts, w, fv = frame_samples(F)
    gpts, _, gv = frame_samples(G)
    if gpts != pts:
        raise GridMismatchError("sampled frames use different grids")
    return _weighted_gram(w, gv, fv, F.module)


@dataclass(frozen=True)
class RefinementReport:
    grid_size: int
    moment_delta: float


def refinement_check(F: FrameMap, grid_size: int = DEFAULT_PANELS) -> RefinementReport:
    """Max entrywise change of the moment matrix between grid_size and 2*grid_size panels."""
    if isinstance(F, SampledFrame):
        raise ModeError("refinement is undefined for a frame given by fixed samples")
    if not isinstance(F.measure, IntervalMeasure):
        raise ModeError("refinement applies to interval measures only")
    Ff = F if not F.module.exact else PolynomialFrame(F.module.with_mode("float"), F.measure, exact.to_complex(F.coeffs))
    coarse = gram_flat(Ff, Ff, grid_size)
    fine = gram_flat(Ff, Ff, 2 * grid_size)
    return RefinementReport(grid_size, float(np.abs(coarse - fine).max()))


def frame_to_mode(F: FrameMap, mode: str) -> FrameMap:
    if F.module.algebra.scalar_mode == mode:
        return F
    module = F.module.with_mode(mode)
    if isinstance(F, PolynomialFrame):
        return PolynomialFrame(module, F.measure, to_mode_array(F.coeffs, mode))
    return SampledFrame(module, F.measure, F.points, F.weights, to_mode_array(F.values, mode))
