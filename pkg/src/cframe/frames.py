"""Frame analysis: moment matrix, optimal bounds, classification, synthesis
and analysis operators, operator-identity verification and transforms.

The frame operator of F acts by right multiplication with the moment
matrix M_ij = integral of F_i(w)^* F_j(w).  Its flattening is the Gram
matrix of the analysis map, so the optimal C*-order frame bounds are the
extremal eigenvalues of flatten(M).  For both supported algebra kinds this
is sharp: :func:`bound_witness` builds an element that violates any larger
lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import exact
from .cstar import DEFAULT_TOLERANCES, AlgebraElement, ToleranceConfig, order_leq
from .cstar import operator_norm as algebra_norm
from .errors import (
    DimensionError,
    GridMismatchError,
    ModeError,
    NotAFrameError,
    NumericError,
    ParameterError,
)
from .hilbert import (
    ModuleElement,
    ModuleOperator,
    apply_operator,
    flat_eigh,
    flat_eigenvalues,
    flat_singular_values,
    flatten,
    inner_product,
    module_norm,
    operator_invert,
    operator_spectral,
    spectral_blocks,
)
from .linalg import null_space, singular_values
from .measure import (
    DEFAULT_PANELS,
    AtomicMeasure,
    FrameMap,
    IntervalMeasure,
    L2Element,
    PolynomialFrame,
    SampledFrame,
    discretize,
    frame_samples,
    frame_to_mode,
    gram_flat,
    refinement_check,
)
from .randoms import random_module_element, random_operator

UNCONVERGED_DELTA = 1e-7


class Bounds(NamedTuple):
    lower: float | Fraction
    upper: float | Fraction

    @property
    def exact(self) -> bool:
        return isinstance(self.lower, Fraction) and isinstance(self.upper, Fraction)


@dataclass(frozen=True, eq=False)
class FrameReport:
    lower_bound: float | Fraction
    upper_bound: float | Fraction
    is_frame: bool
    is_tight: bool
    is_bessel: bool
    moment: ModuleOperator
    quadrature_delta: float | None
    witness_low: ModuleElement | None = None
    witness_candidate: float | Fraction | None = None

    @property
    def exact(self) -> bool:
        return isinstance(self.lower_bound, Fraction) and isinstance(self.upper_bound, Fraction)

    @property
    def converged(self) -> bool:
        return self.quadrature_delta is None or self.quadrature_delta <= UNCONVERGED_DELTA


def moment_matrix(F: FrameMap, grid_size: int = DEFAULT_PANELS) -> ModuleOperator:
    """M_ij = integral of F_i^* F_j; exact for rational polynomial or atomic data."""
    return ModuleOperator.from_flat(F.module, gram_flat(F, F, grid_size))


def frame_operator(F: FrameMap, grid_size: int = DEFAULT_PANELS) -> ModuleOperator:
    """S_F, acting as f -> integral of <f, F(w)> F(w)."""
    return moment_matrix(F, grid_size)


def _is_positive_bound(value, cfg: ToleranceConfig) -> bool:
    if isinstance(value, Fraction):
        return value > 0
    return value > cfg.positivity_tol


def _bounds_from_moment(S: ModuleOperator, cfg: ToleranceConfig) -> Bounds:
    ev, _ = flat_eigenvalues(S, cfg)
    return Bounds(ev[0], ev[-1])


def _check_bound_identities(S: ModuleOperator, b: Bounds, cfg: ToleranceConfig):
    """Residuals of lower = 1/||S^-1|| and upper = ||S||; None if S is singular."""
    spec = operator_spectral(S, cfg)
    upper_res = abs(float(spec.operator_norm) - float(b.upper)) / max(1.0, abs(float(b.upper)))
    if not spec.is_invertible:
        return None, upper_res
    inv = operator_spectral(operator_invert(S, cfg), cfg)
    lower_res = abs(1.0 / float(inv.operator_norm) - float(b.lower)) / max(1.0, abs(float(b.lower)))
    if spec.exact and inv.exact:
        lower_res = 0.0 if 1 / inv.operator_norm == b.lower else lower_res
        upper_res = 0.0 if spec.operator_norm == b.upper else upper_res
    return lower_res, upper_res


def optimal_bounds(
    F: FrameMap, cfg: ToleranceConfig = DEFAULT_TOLERANCES, grid_size: int = DEFAULT_PANELS
) -> Bounds:
    """Tightest C*-order frame bounds: extremal eigenvalues of flatten(S).

    Cross-checked against 1/||S^-1|| and ||S|| when S is invertible.
    """
    S = moment_matrix(F, grid_size)
    b = _bounds_from_moment(S, cfg)
    lower_res, upper_res = _check_bound_identities(S, b, cfg)
    if upper_res > 1e-9 or (lower_res is not None and lower_res > 1e-9):
        raise NumericError(
            f"bound identities violated (lower residual {lower_res}, upper residual {upper_res})"
        )
    return b


def _quadrature_delta(F: FrameMap, grid_size: int):
    if isinstance(F, SampledFrame):
        return 0.0 if isinstance(F.measure, AtomicMeasure) else None
    if isinstance(F.measure, AtomicMeasure) or F.module.exact:
        return 0.0
    return refinement_check(F, grid_size).moment_delta


def classify(
    F: FrameMap, cfg: ToleranceConfig = DEFAULT_TOLERANCES, grid_size: int = DEFAULT_PANELS
) -> FrameReport:
    S = moment_matrix(F, grid_size)
    lower, upper = _bounds_from_moment(S, cfg)
    is_frame = _is_positive_bound(lower, cfg)
    if isinstance(lower, Fraction) and isinstance(upper, Fraction):
        tight = lower == upper
    else:
        tight = abs(float(upper) - float(lower)) <= cfg.equality_tol * max(1.0, abs(float(upper)))
    if is_frame:
        candidate = _optimality_candidate(lower, upper)
    else:
        candidate = _nonframe_candidate(lower, cfg)
    witness = _witness_from_moment(S, lower, candidate, cfg)
    return FrameReport(
        lower_bound=lower,
        upper_bound=upper,
        is_frame=is_frame,
        is_tight=is_frame and tight,
        is_bessel=True,
        moment=S,
        quadrature_delta=_quadrature_delta(F, grid_size),
        witness_low=witness,
        witness_candidate=candidate if witness is not None else None,
    )


def _optimality_candidate(lower, upper):
    if isinstance(lower, Fraction) and isinstance(upper, Fraction):
        return lower + (upper - lower) / 1000 + Fraction(1, 10**6)
    return float(lower) + 1e-3 * (float(upper) - float(lower)) + 1e-6


def _nonframe_candidate(lower, cfg):
    if isinstance(lower, Fraction):
        return lower + Fraction(1, 10**6)
    return float(lower) + max(10 * cfg.positivity_tol, 1e-6)


def _as_exact_scalar(x):
    if isinstance(x, Fraction):
        return x
    return exact.to_fraction(float(x))


def _witness_from_moment(S: ModuleOperator, lower, candidate, cfg: ToleranceConfig):
    desc = S.descriptor
    if isinstance(lower, Fraction):
        c = _as_exact_scalar(candidate)
        if not c > lower:
            return None
    else:
        if not float(candidate) > float(lower) + cfg.positivity_tol:
            return None
        c = _as_exact_scalar(candidate) if desc.exact else float(candidate)
    n, k = desc.n, desc.k

    exact_ev = desc.exact and desc.algebra.kind == "diagonal" and desc.n == 1
    if exact_ev:
        d = [S.blocks[0, 0, s, s] for s in range(k)]
        if not any(x.im for x in d):
            s = min(range(k), key=lambda i: d[i].re)
            data = exact.exact_zeros((1, k, k))
            data[0, s, s] = exact.ONE
            f = ModuleElement._raw(desc, data)
            return _confirm_witness(S, f, c, cfg)

    if desc.algebra.kind == "diagonal":
        best = None
        for s, (w, v) in enumerate(flat_eigh(S, cfg)):
            if best is None or w[0] < best[0]:
                best = (w[0], s, v[:, 0])
        _, s, x = best
        data = np.zeros((n, k, k), dtype=complex)
        data[:, s, s] = np.conj(x)
    else:
        (w, v), = flat_eigh(S, cfg)
        row = np.zeros((k, n * k), dtype=complex)
        row[0] = np.conj(v[:, 0])
        data = np.ascontiguousarray(row.reshape(k, n, k).transpose(1, 0, 2))
    f = ModuleElement._raw(desc.with_mode("float"), data).to_mode(desc.algebra.scalar_mode)
    return _confirm_witness(S, f, c, cfg)


def _confirm_witness(S, f, c, cfg):
    Sff = inner_product(apply_operator(S, f), f)
    if order_leq(inner_product(f, f) * c, Sff, cfg):
        raise NumericError("constructed bound witness does not violate the candidate bound")
    return f


def bound_witness(
    F: FrameMap,
    candidate_lower,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    grid_size: int = DEFAULT_PANELS,
) -> ModuleElement | None:
    """An f with candidate_lower <f,f> not <= <Sf,f>, or None if the candidate
    does not exceed the optimal lower bound by more than positivity_tol."""
    S = moment_matrix(F, grid_size)
    lower, _ = _bounds_from_moment(S, cfg)
    return _witness_from_moment(S, lower, candidate_lower, cfg)


def _sampled(F: FrameMap):
    if isinstance(F, PolynomialFrame) and isinstance(F.measure, IntervalMeasure):
        raise ModeError("interval-measure polynomial frame: discretize it first")
    return frame_samples(F)


def analysis_apply(F: FrameMap, f: ModuleElement) -> L2Element:
    """(T* f)(w) = <f, F(w)> on F's grid."""
    if f.descriptor != F.module:
        raise DimensionError(f"module mismatch: {f.descriptor} vs {F.module}")
    points, weights, values = _sampled(F)
    desc = F.module.algebra
    if not len(points):
        return L2Element(desc, (), (), np.zeros((0, desc.dim, desc.dim)))
    prod = f.data[None] @ np.conj(values).transpose(0, 1, 3, 2)
    out = exact.tree_sum(np.moveaxis(prod, 1, 0))
    return L2Element(desc, points, _weights_tuple(F), out)


def _weights_tuple(F: FrameMap):
    if isinstance(F, SampledFrame):
        return F.weights
    return F.measure.weights if F.module.exact else tuple(float(w) for w in F.measure.weights)


def synthesis_apply(F: FrameMap, phi: L2Element) -> ModuleElement:
    """T phi = integral of phi(w) F(w), componentwise."""
    points, weights, values = _sampled(F)
    if phi.descriptor != F.module.algebra:
        raise DimensionError("L2 element and frame use different algebras")
    if tuple(phi.points) != tuple(points) or [float(w) for w in phi.weights] != [float(w) for w in _weights_tuple(F)]:
        raise GridMismatchError("L2 element is not sampled on the frame's grid")
    if not len(points):
        return ModuleElement.zero(F.module)
    terms = weights[:, None, None, None] * (phi.values[:, None] @ values)
    return ModuleElement._raw(F.module, exact.tree_sum(terms))


def analysis_blocks(F: FrameMap, weighted: bool = True) -> list[np.ndarray]:
    """Flattened analysis maps, one per independent block.

    Full kinds give one (nk)×(mk) matrix Z with f_row ↦ f_row Z; diagonal
    kinds give k matrices of shape n×m (one per diagonal slot).  With
    ``weighted`` the columns carry sqrt(weight), so Z Z^* = flatten(S).
    """
    points, weights, values = _sampled(F)
    n, k = F.module.n, F.module.k
    m = len(points)
    exact_mode = values.dtype == object
    if weighted:
        scale = np.sqrt(np.array([float(complex(w).real) for w in weights])) if m else np.zeros(0)
        values = exact.to_complex(values) * scale[:, None, None, None] if m else np.zeros((0, n, k, k))
    elif not exact_mode:
        values = np.asarray(values, dtype=complex)
    if F.module.algebra.kind == "diagonal":
        idx = np.arange(k)
        slots = values[:, :, idx, idx]  # (m, n, k)
        return [np.conj(slots[:, :, s]).T for s in range(k)]
    rb = values.transpose(0, 2, 1, 3).reshape(m, k, n * k)
    z = np.conj(rb).transpose(0, 2, 1)  # (m, nk, k)
    return [np.concatenate(list(z), axis=1) if m else np.zeros((n * k, 0), dtype=complex)]


@dataclass(frozen=True)
class Check:
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


def verify_operator_identities(
    F: FrameMap,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    grid_size: int = DEFAULT_PANELS,
    samples: int = 3,
    seed: int = 0,
) -> dict[str, Check]:
    """Check the frame-operator identities on F, reporting residuals.

    Runs in float mode; interval measures are discretized at ``grid_size``.
    Failures are reported, never raised.
    """
    rng = np.random.default_rng(seed)
    Ff = frame_to_mode(F, "float")
    desc = Ff.module
    S = moment_matrix(Ff, grid_size)
    spec = operator_spectral(S, cfg)
    lower, upper = _bounds_from_moment(S, cfg)
    is_frame = _is_positive_bound(lower, cfg)
    Fd = discretize(Ff, grid_size)
    checks: dict[str, Check] = {}

    herm = float(np.abs(flatten(S) - flatten(S).conj().T).max())
    checks["self_adjoint"] = Check(herm <= cfg.equality_tol, herm, cfg.equality_tol)
    neg = max(0.0, -float(spec.smallest_eigenvalue)) if spec.smallest_eigenvalue is not None else math.inf
    checks["positive"] = Check(spec.is_positive, neg, cfg.positivity_tol)

    z_blocks = analysis_blocks(Fd)
    tt = max(
        float(np.abs(z @ z.conj().T - b).max()) if z.size else float(np.abs(b).max())
        for z, b in zip(z_blocks, [exact.to_complex(x) for x in spectral_blocks(S)])
    )
    for _ in range(samples):
        f = random_module_element(rng, desc)
        via_t = synthesis_apply(Fd, analysis_apply(Fd, f))
        tt = max(tt, float(np.abs(via_t.data - apply_operator(S, f).data).max()))
    scale = max(1.0, float(upper))
    checks["S_equals_TTstar"] = Check(tt <= 1e-9 * scale, tt, 1e-9 * scale)

    sv = flat_singular_values(S)
    norm_excess = max(0.0, float(sv[0]) - float(upper))
    checks["norm_le_upper"] = Check(norm_excess <= 1e-8 * scale, norm_excess, 1e-8 * scale)

    checks["invertible_iff_frame"] = Check(
        spec.is_invertible == is_frame, 0.0 if spec.is_invertible == is_frame else 1.0, 0.0,
        f"invertible={spec.is_invertible} frame={is_frame}",
    )

    lower_res, upper_res = _check_bound_identities(S, Bounds(lower, upper), cfg)
    res = max(upper_res, lower_res or 0.0)
    checks["bounds_match_norms"] = Check(res <= 1e-9, res, 1e-9)

    # sigma(Z)^2 = lambda(S): compare ranks at the matching threshold.
    rank_tol = math.sqrt(cfg.positivity_tol) * math.sqrt(scale)
    synth = [z.conj().T for z in z_blocks]
    ranks = [int(np.count_nonzero(singular_values(t) > rank_tol)) if t.size else 0 for t in synth]
    rows = [z.shape[0] for z in z_blocks]
    surjective = all(r == nrow for r, nrow in zip(ranks, rows))
    checks["synthesis_onto_iff_frame"] = Check(
        surjective == is_frame, 0.0 if surjective == is_frame else 1.0, rank_tol,
        f"ranks={ranks} dims={rows}",
    )
    # Analysis f_row -> f_row Z: its kernel is null(Z^*).  Closed range shows
    # up as rank + nullity = dim with the kernel annihilated to rounding.
    injective = True
    closed = 0.0
    for t, nrow in zip(synth, rows):
        kernel = null_space(t, rank_tol) if t.size else np.eye(nrow, dtype=complex)
        rank = int(np.count_nonzero(singular_values(t) > rank_tol)) if t.size else 0
        injective &= kernel.shape[1] == 0
        if rank + kernel.shape[1] != nrow:
            closed = math.inf
        if kernel.size and t.size:
            closed = max(closed, float(np.abs(t @ kernel).max()) - rank_tol)
    closed = max(closed, 0.0)
    checks["analysis_injective_closed_range_iff_frame"] = Check(
        injective == is_frame and closed <= 1e-8, closed, 1e-8, f"injective={injective}"
    )

    worst = 0.0
    ok = True
    for _ in range(samples):
        f = random_module_element(rng, desc)
        ff = inner_product(f, f)
        sff = inner_product(apply_operator(S, f), f)
        ok &= order_leq(ff * float(lower), sff, cfg) and order_leq(sff, ff * float(upper), cfg)
        worst = max(worst, _order_slack(ff * float(lower), sff), _order_slack(sff, ff * float(upper)))
    checks["order_bounds"] = Check(ok, worst, cfg.positivity_tol)
    return checks


def _order_slack(a: AlgebraElement, b: AlgebraElement) -> float:
    """How far b - a is from positive (0 when positive)."""
    diff = (b - a).to_complex()
    diff = 0.5 * (diff + diff.conj().T)
    return max(0.0, -float(np.linalg.eigvalsh(diff)[0]))


def transform_frame(K: ModuleOperator, F: FrameMap) -> FrameMap:
    """Pointwise image w -> K(F(w)); keeps the polynomial/sampled variant."""
    if K.descriptor != F.module:
        raise DimensionError(f"module mismatch: {K.descriptor} vs {F.module}")
    flat = flatten(K)
    n, k = F.module.n, F.module.k
    if isinstance(F, PolynomialFrame):
        c = np.moveaxis(F.coeffs, 3, 0)  # (d+1, n, k, k)
        rows = c.transpose(0, 2, 1, 3).reshape(c.shape[0], k, n * k) @ flat
        new = rows.reshape(c.shape[0], k, n, k).transpose(0, 2, 1, 3)
        return PolynomialFrame(F.module, F.measure, np.moveaxis(new, 0, 3))
    vals = F.values
    if not len(F.points):
        return F
    rows = vals.transpose(0, 2, 1, 3).reshape(vals.shape[0], k, n * k) @ flat
    new = rows.reshape(vals.shape[0], k, n, k).transpose(0, 2, 1, 3)
    return SampledFrame(F.module, F.measure, F.points, F.weights, new)


class NormCriterion(NamedTuple):
    a_norm: float
    b_norm: float
    consistent: bool


def norm_criterion(
    F: FrameMap,
    trials: int,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    seed: int = 0,
    grid_size: int = DEFAULT_PANELS,
) -> NormCriterion:
    """Sampled scalar-norm frame constants min/max of ||<Sf,f>|| over unit f.

    C*-order bounds imply the same norm bounds, so the sampled constants
    must sit inside [lower, upper].
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    Ff = frame_to_mode(F, "float")
    S = moment_matrix(Ff, grid_size)
    lower, upper = (float(x) for x in _bounds_from_moment(S, cfg))
    ratios = []
    for _ in range(trials):
        f = random_module_element(rng, Ff.module)
        nf = module_norm(f)
        if nf == 0:
            continue
        f = f * (1.0 / nf)
        ratios.append(float(algebra_norm(inner_product(apply_operator(S, f), f), cfg)))
    a_norm, b_norm = min(ratios), max(ratios)
    tol = cfg.positivity_tol * max(1.0, upper)
    is_frame = lower > cfg.positivity_tol
    consistent = (not is_frame or a_norm >= lower - tol) and (lower - tol <= a_norm <= b_norm <= upper + tol)
    return NormCriterion(a_norm, b_norm, consistent)


def restrict_to_atoms(F: FrameMap, drop: int) -> FrameMap:
    """F on the atomic measure with atom ``drop`` removed."""
    if not isinstance(F.measure, AtomicMeasure):
        raise ModeError("atom removal needs an atomic measure")
    measure = F.measure.without(drop)
    if isinstance(F, PolynomialFrame):
        return F.with_measure(measure)
    keep = [i for i in range(len(F.points)) if i != drop]
    values = F.values[keep] if keep else F.values[:0]
    return SampledFrame(F.module, measure, measure.points, tuple(F.weights[i] for i in keep), values)


@dataclass(frozen=True)
class ExactnessReport:
    is_exact: bool
    removable_atoms: list = field(default_factory=list)


def exactness_check(F: FrameMap, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ExactnessReport:
    """Exact frames lose the frame property whenever a single atom is removed.

    Removing more atoms can only shrink the moment matrix in the positive
    order, so single removals decide exactness for atomic measures.
    """
    if not isinstance(F.measure, AtomicMeasure):
        raise ModeError("exactness is only decidable for atomic measures")
    if not classify(F, cfg).is_frame:
        raise NotAFrameError("exactness_check needs a frame", 0.0)
    removable = []
    for i, label in enumerate(F.measure.points):
        if classify(restrict_to_atoms(F, i), cfg).is_frame:
            removable.append(label)
    return ExactnessReport(not removable, removable)


def random_invertible_operator(rng, F: FrameMap) -> ModuleOperator:
    return random_operator(rng, F.module, well_conditioned=True)
