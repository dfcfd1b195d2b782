"""Dual frames: canonical duals, dual-pair verification, Riesz-type detection
on atomic measures and second-dual constructions.

G is a dual of F when f = integral of <f, G(w)> F(w) for every f.  By
A-linearity this is the finite identity C = I for the cross-moment matrix
C_ij = integral of G_i(w)^* F_j(w).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .cstar import DEFAULT_TOLERANCES, AlgebraElement, ToleranceConfig
from .errors import ModeError, NotAFrameError
from .frames import analysis_apply, analysis_blocks, classify, synthesis_apply, transform_frame
from .hilbert import (
    ModuleElement,
    ModuleOperator,
    apply_operator,
    left_multiply,
    module_norm,
    operator_adjoint,
    operator_invert,
)
from .linalg import singular_values
from .measure import (
    DEFAULT_PANELS,
    AtomicMeasure,
    FrameMap,
    L2Element,
    SampledFrame,
    frame_samples,
    gram_flat,
    l2_inner,
)


@dataclass(frozen=True, eq=False)
class DualReport:
    is_dual_pair: bool
    cross_moment: ModuleOperator
    identity_residual: float
    exact: bool = False
    riesz_type: bool | None = None
    second_dual: FrameMap | None = None
    second_dual_verified: bool | None = None
    second_dual_distance: float | None = None
    max_perturbation: float | None = None


def cross_moment_matrix(F: FrameMap, G: FrameMap, grid_size: int = DEFAULT_PANELS) -> ModuleOperator:
    """C_ij = integral of G_i^* F_j; right multiplication by C is f -> integral <f, G> F."""
    return ModuleOperator.from_flat(F.module, gram_flat(G, F, grid_size))


def identity_residual(C: ModuleOperator):
    """Max entrywise |C - I|, exact (a Fraction) when C is rational with zero residual."""
    diff = C - ModuleOperator.identity(C.descriptor)
    if C.descriptor.exact and not any(diff.blocks.flat):
        return Fraction(0)
    return float(np.abs(exact.to_complex(diff.blocks)).max())


def is_dual_pair(
    F: FrameMap, G: FrameMap, cfg: ToleranceConfig = DEFAULT_TOLERANCES, grid_size: int = DEFAULT_PANELS
) -> DualReport:
    C = cross_moment_matrix(F, G, grid_size)
    res = identity_residual(C)
    ok = res == 0 if isinstance(res, Fraction) else res <= cfg.equality_tol
    return DualReport(bool(ok), C, res, exact=isinstance(res, Fraction))


def canonical_dual(
    F: FrameMap, cfg: ToleranceConfig = DEFAULT_TOLERANCES, grid_size: int = DEFAULT_PANELS
) -> FrameMap:
    """S^{-1} F, applied pointwise; rational polynomial input stays exact."""
    report = classify(F, cfg, grid_size)
    if not report.is_frame:
        raise NotAFrameError(
            f"canonical dual needs a frame (lower bound {report.lower_bound})",
            float(report.lower_bound),
        )
    return transform_frame(operator_invert(report.moment, cfg), F)


def as_sampled(F: FrameMap) -> SampledFrame:
    """Sampled variant of a frame over an atomic measure."""
    if isinstance(F, SampledFrame):
        return F
    if not isinstance(F.measure, AtomicMeasure):
        raise ModeError("only atomic-measure frames can be sampled without quadrature")
    pts, _, values = frame_samples(F)
    return SampledFrame(F.module, F.measure, pts, F.measure.weights, values)


def _require_atomic(F: FrameMap, what: str):
    if not isinstance(F.measure, AtomicMeasure):
        raise ModeError(f"{what} is only decided for atomic measures")


def _l2_basis(F: SampledFrame):
    """Matrix units at each atom (diagonal units only for diagonal kinds)."""
    desc = F.module.algebra
    k, m = desc.dim, len(F.points)
    pairs = [(s, s) for s in range(k)] if desc.kind == "diagonal" else [(p, q) for p in range(k) for q in range(k)]
    for r in range(m):
        for p, q in pairs:
            vals = exact.exact_zeros((m, k, k)) if desc.exact else np.zeros((m, k, k), dtype=complex)
            vals[r, p, q] = exact.ONE if desc.exact else 1.0
            yield L2Element(desc, F.points, F.weights, vals)


def _kernel_component(F: SampledFrame, S_inv: ModuleOperator, phi: L2Element) -> L2Element:
    # phi minus its projection T* S^{-1} T phi onto the range of the analysis operator.
    proj = analysis_apply(F, apply_operator(S_inv, synthesis_apply(F, phi)))
    return L2Element(phi.descriptor, phi.points, phi.weights, phi.values - proj.values)


def _perturbation(F: SampledFrame, h: L2Element) -> np.ndarray:
    """Values of w -> V(h(w)^* h) with V(phi) = <phi, h> e_1, i.e. h(w)^* <h,h> e_1."""
    hh = _l2_gram(h)
    u = left_multiply(hh, ModuleElement.basis(F.module, 0))
    adj = np.conj(h.values).transpose(0, 2, 1)
    return adj[:, None] @ u.data[None]


def _l2_gram(h: L2Element) -> AlgebraElement:
    return l2_inner(h, h)


def _size(values: np.ndarray) -> float:
    return float(np.abs(exact.to_complex(values)).max()) if values.size else 0.0


def perturbation_attempts(F: FrameMap, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> list[float]:
    """Size of the second-dual perturbation built from every L2 basis element.

    All sizes vanish exactly when the analysis operator is onto.
    """
    _require_atomic(F, "second-dual construction")
    Fs = as_sampled(F)
    report = classify(Fs, cfg)
    if not report.is_frame:
        raise NotAFrameError("second-dual construction needs a frame", float(report.lower_bound))
    S_inv = operator_invert(report.moment, cfg)
    return [_size(_perturbation(Fs, _kernel_component(Fs, S_inv, phi))) for phi in _l2_basis(Fs)]


def _analysis_onto(F: SampledFrame, cfg: ToleranceConfig) -> bool:
    if F.module.exact:
        blocks = analysis_blocks(F, weighted=False)
        return all(exact.exact_rank(b) == b.shape[1] for b in blocks)
    blocks = analysis_blocks(F, weighted=True)
    return all(
        int(np.count_nonzero(singular_values(b) > cfg.invertibility_tol)) == b.shape[1] for b in blocks
    )


def riesz_type_check(F: FrameMap, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> DualReport:
    """Riesz-type (unique dual) iff the analysis operator is onto L^2(Omega, A).

    When it is not onto, a second dual G + VK is built from a kernel element
    h of the synthesis operator and verified to be a distinct dual.
    """
    _require_atomic(F, "Riesz type")
    Fs = as_sampled(F)
    report = classify(Fs, cfg)
    if not report.is_frame:
        raise NotAFrameError("Riesz-type check needs a frame", float(report.lower_bound))
    S_inv = operator_invert(report.moment, cfg)
    G = transform_frame(S_inv, Fs)
    base = is_dual_pair(Fs, G, cfg)
    onto = _analysis_onto(Fs, cfg)

    best = None
    for phi in _l2_basis(Fs):
        h = _kernel_component(Fs, S_inv, phi)
        size = _size(h.values)
        if best is None or size > best[0]:
            best = (size, h)
    max_size = best[0] if best else 0.0
    if onto:
        return DualReport(
            base.is_dual_pair, base.cross_moment, base.identity_residual, base.exact,
            riesz_type=True, max_perturbation=max_size,
        )

    h = best[1]
    if not Fs.module.exact:
        norm = np.sqrt(float(max(abs(x) for x in _eigs_abs(_l2_gram(h)))))
        h = L2Element(h.descriptor, h.points, h.weights, h.values / norm)
    pert = _perturbation(Fs, h)
    G2 = SampledFrame(Fs.module, Fs.measure, Fs.points, Fs.weights, G.values + pert)
    second = is_dual_pair(Fs, G2, cfg)
    distance = _size(G2.values - G.values)
    distinct = distance > cfg.equality_tol
    return DualReport(
        base.is_dual_pair, base.cross_moment, base.identity_residual, base.exact,
        riesz_type=False, second_dual=G2,
        second_dual_verified=second.is_dual_pair and distinct,
        second_dual_distance=distance, max_perturbation=max_size,
    )


def _eigs_abs(a: AlgebraElement):
    m = a.to_complex()
    return np.linalg.svd(m, compute_uv=False)


@dataclass(frozen=True, eq=False)
class NonvanishingReport:
    all_nonzero: bool
    zero_atoms: list = field(default_factory=list)
    second_dual: FrameMap | None = None
    second_dual_verified: bool | None = None


def nonvanishing_check(F: FrameMap, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> NonvanishingReport:
    """Find atoms where F vanishes; each yields a second dual, so F is not Riesz-type.

    The second dual equals the canonical dual except at one zero atom, where
    the identity is added to the first component.
    """
    _require_atomic(F, "the nonvanishing check")
    Fs = as_sampled(F)
    report = classify(Fs, cfg)
    if not report.is_frame:
        raise NotAFrameError("nonvanishing check needs a frame", float(report.lower_bound))
    zero = []
    for r, label in enumerate(Fs.points):
        value = ModuleElement._raw(Fs.module, Fs.values[r])
        if Fs.module.exact:
            if not any(value.data.flat):
                zero.append(r)
        elif module_norm(value) <= cfg.equality_tol:
            zero.append(r)
    if not zero:
        return NonvanishingReport(True, [])
    G = transform_frame(operator_invert(report.moment, cfg), Fs)
    values = np.array(G.values, copy=True)
    values[zero[0]] = values[zero[0]] + ModuleElement.basis(Fs.module, 0).data
    G1 = SampledFrame(Fs.module, Fs.measure, Fs.points, Fs.weights, values)
    verified = is_dual_pair(Fs, G1, cfg).is_dual_pair and _size(G1.values - G.values) > cfg.equality_tol
    return NonvanishingReport(False, [Fs.points[r] for r in zero], G1, verified)


def reconstruction_residual(F: FrameMap, G: FrameMap, f: ModuleElement, grid_size: int = DEFAULT_PANELS) -> float:
    """module_norm of (integral of <f, G(w)> F(w)) - f."""
    C = cross_moment_matrix(F, G, grid_size)
    return module_norm(apply_operator(C, f) - f)


def dual_symmetry_residual(F: FrameMap, G: FrameMap, grid_size: int = DEFAULT_PANELS) -> float:
    """Max entrywise |C(G, F) - adjoint(C(F, G))|."""
    a = cross_moment_matrix(F, G, grid_size)
    b = cross_moment_matrix(G, F, grid_size)
    return float(np.abs(exact.to_complex((b - operator_adjoint(a)).blocks)).max())
