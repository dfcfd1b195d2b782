"""Seeded randomized property suites over the theory's identities.

Every case draws an algebra (k in 1..3, both kinds), a module rank n in
1..3 and either a polynomial frame of degree at most 4 on an interval or a
frame over at most 6 atoms.  Each property is tallied across cases with its
worst residual, so a summary shows both pass counts and margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .cstar import (
    DEFAULT_TOLERANCES,
    AlgebraDescriptor,
    AlgebraElement,
    ToleranceConfig,
    adjoint,
    hermitian_eigh,
    invert,
    is_positive,
    max_abs_difference,
    multiply,
    operator_norm,
    order_leq,
)
from .duality import (
    canonical_dual,
    cross_moment_matrix,
    is_dual_pair,
    nonvanishing_check,
    perturbation_attempts,
    reconstruction_residual,
    riesz_type_check,
)
from .errors import ParameterError
from .frames import (
    Bounds,
    bound_witness,
    classify,
    exactness_check,
    frame_operator,
    norm_criterion,
    optimal_bounds,
    transform_frame,
    verify_operator_identities,
)
from .hilbert import (
    ModuleDescriptor,
    ModuleElement,
    ModuleOperator,
    apply_operator,
    compose,
    flatten,
    inner_product,
    left_multiply,
    module_norm,
    operator_adjoint,
    operator_invert,
)
from .linalg import jacobi_eigh, null_space, singular_values
from .measure import (
    AtomicMeasure,
    IntervalMeasure,
    L2Element,
    PolynomialFrame,
    SampledFrame,
    bochner_integrate,
    frame_to_mode,
    gram_flat,
    l2_inner,
)
from .randoms import (
    random_algebra_element,
    random_atomic_frame,
    random_entries,
    random_module_element,
    random_operator,
    random_polynomial_frame,
)

SUITES = ("axioms", "operators", "duals", "all")
ORDER_SAMPLES = 100


@dataclass
class PropertyTally:
    name: str
    passed: int = 0
    failed: int = 0
    worst_residual: float = 0.0
    tolerance: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    @property
    def total(self) -> int:
        return self.passed + self.failed


@dataclass
class SuiteReport:
    suite: str
    seed: int
    cases: int
    properties: dict

    @property
    def all_passed(self) -> bool:
        return all(p.ok for p in self.properties.values())

    def lines(self) -> list[str]:
        out = []
        for p in self.properties.values():
            status = "ok" if p.ok else "FAIL"
            out.append(
                f"{p.name}: {p.passed}/{p.total} {status} worst_residual={p.worst_residual!r} tolerance={p.tolerance!r}"
            )
        return out


class _Recorder:
    def __init__(self):
        self.props: dict[str, PropertyTally] = {}
        self.case = ""

    def __call__(self, name, passed, residual=0.0, tolerance=0.0, detail=""):
        t = self.props.setdefault(name, PropertyTally(name))
        residual = float(residual)
        t.tolerance = max(t.tolerance, float(tolerance))
        if math.isfinite(residual):
            t.worst_residual = max(t.worst_residual, residual)
        if passed:
            t.passed += 1
        else:
            t.failed += 1
            if len(t.failures) < 5:
                t.failures.append(f"{self.case}: residual={residual!r} {detail}".strip())


@dataclass(frozen=True, eq=False)
class Case:
    label: str
    frame: object
    rng_seed: int


def _diff(a, b) -> float:
    return float(np.abs(exact.to_complex(np.asarray(a)) - exact.to_complex(np.asarray(b))).max())


def _random_descriptor(rng, exact_ok: bool) -> ModuleDescriptor:
    k = int(rng.integers(1, 4))
    n = int(rng.integers(1, 4))
    kind = ("full", "diagonal")[int(rng.integers(2))]
    mode = "rational" if exact_ok and n * k <= 4 else "float"
    return ModuleDescriptor(AlgebraDescriptor(kind, k, mode), n)


def draw_case(rng, index: int) -> Case:
    """One random frame; roughly one case in eight is deliberately not a frame."""
    desc = _random_descriptor(rng, exact_ok=index % 4 == 3)
    n = desc.n
    degenerate = n > 1 and index % 8 == 5
    if index % 2 == 0:
        degree = int(rng.integers(0, n - 1)) if degenerate else int(rng.integers(n - 1, 5))
        F = random_polynomial_frame(rng, desc, degree)
        shape = f"poly(deg={degree})"
    else:
        atoms = int(rng.integers(1, n)) if degenerate else int(rng.integers(n, 7))
        F = random_atomic_frame(rng, desc, atoms)
        shape = f"atoms({atoms})"
    a = desc.algebra
    return Case(f"#{index} {a.kind} k={a.dim} n={n} {a.scalar_mode} {shape}", F, int(rng.integers(2**31)))


def constructed_cases() -> list[Case]:
    """The fixed atomic constructions: single atom, two identical atoms, a zero atom."""
    out = []
    for mode in ("rational", "float"):
        desc = ModuleDescriptor(AlgebraDescriptor("diagonal", 2, mode), 1)
        eye = exact.exact_eye(2) if desc.exact else np.eye(2, dtype=complex)
        zero = eye * 0
        one = AtomicMeasure((0,), (1,))
        two = AtomicMeasure((0, 1), (1, 1))
        out.append(Case(f"single-atom {mode}", SampledFrame(desc, one, (0,), (1,), np.array([[eye]])), 1))
        out.append(Case(f"two-identical-atoms {mode}", SampledFrame(desc, two, (0, 1), (1, 1), np.array([[eye], [eye]])), 2))
        out.append(Case(f"zero-atom {mode}", SampledFrame(desc, two, (0, 1), (1, 1), np.array([[eye], [zero]])), 3))
    return out


# -- axioms -----------------------------------------------------------------

def _hermitian(rng, desc: AlgebraDescriptor) -> AlgebraElement:
    a = random_algebra_element(rng, desc)
    return a + adjoint(a)


def _psd(rng, desc: AlgebraDescriptor) -> AlgebraElement:
    a = random_algebra_element(rng, desc)
    return multiply(adjoint(a), a)


def check_algebra(rec: _Recorder, rng, desc: AlgebraDescriptor, cfg: ToleranceConfig):
    a, b = random_algebra_element(rng, desc), random_algebra_element(rng, desc)
    sum_res = max_abs_difference(adjoint(a + b), adjoint(a) + adjoint(b))
    prod_res = max_abs_difference(adjoint(multiply(a, b)), multiply(adjoint(b), adjoint(a)))
    if desc.exact:
        ok = adjoint(a + b) == adjoint(a) + adjoint(b) and adjoint(multiply(a, b)) == multiply(adjoint(b), adjoint(a))
    else:
        ok = max(sum_res, prod_res) <= cfg.equality_tol
    rec("involution", ok, max(sum_res, prod_res), cfg.equality_tol)

    af = a.to_mode("float")
    nrm = operator_norm(af, cfg)
    if nrm > 10:
        af = af * (10.0 / nrm)
        nrm = operator_norm(af, cfg)
    cstar = abs(operator_norm(multiply(adjoint(af), af), cfg) - nrm**2)
    rec("c_star_identity", cstar <= 1e-9, cstar, 1e-9)

    h = _hermitian(rng, desc.with_mode("float"))
    w, v = hermitian_eigh(h, cfg)
    res = float(np.abs(h.entries @ v - v * w[None, :]).max())
    rec("spectral_soundness", res <= 1e-8, res, 1e-8)

    # Antisymmetry: exact order with zero tolerances.
    zero_cfg = ToleranceConfig(0.0, 0.0, 0.0, cfg.eig_tol, cfg.max_sweeps)
    ra = desc.with_mode("rational")
    x = _hermitian(rng, ra)
    for y in (x, x + _psd(rng, ra), x - _psd(rng, ra)):
        both = order_leq(x, y, zero_cfg) and order_leq(y, x, zero_cfg)
        rec("order_antisymmetry", (not both) or x == y)

    if desc.kind == "diagonal":
        off = ~np.eye(desc.dim, dtype=bool)
        outs = [multiply(a, b), adjoint(a), a + b]
        try:
            outs.append(invert(a, cfg))
        except ValueError:
            pass
        clean = all(not any(o.entries[off].flat) for o in outs)
        rec("diagonal_closure", clean)


def check_module(rec: _Recorder, rng, desc: ModuleDescriptor, cfg: ToleranceConfig):
    alg = desc.algebra
    f, g = random_module_element(rng, desc), random_module_element(rng, desc)
    a = random_algebra_element(rng, alg)
    ff = inner_product(f, f)
    rec("ip_positivity", is_positive(ff, cfg))
    zero = ModuleElement.zero(desc)
    z_norm = float(operator_norm(inner_product(zero, zero), cfg))
    f_nz = float(operator_norm(ff, cfg)) > cfg.equality_tol or not any(f.data.flat)
    rec("ip_definiteness", z_norm <= cfg.equality_tol and f_nz, z_norm, cfg.equality_tol)
    sym = max_abs_difference(inner_product(g, f), adjoint(inner_product(f, g)))
    rec("ip_conjugate_symmetry", sym == 0 if desc.exact else sym <= cfg.equality_tol, sym, cfg.equality_tol)
    lin = max_abs_difference(inner_product(left_multiply(a, f) + g, f), multiply(a, ff) + inner_product(g, f))
    rec("ip_a_linearity", lin == 0 if desc.exact else lin <= cfg.equality_tol * max(1.0, float(operator_norm(ff))), lin, cfg.equality_tol)

    lhs = float(operator_norm(inner_product(f, g), cfg)) ** 2
    rhs = float(operator_norm(ff, cfg)) * float(operator_norm(inner_product(g, g), cfg))
    rec("cauchy_schwarz", lhs <= rhs + 1e-8 * max(1.0, rhs), max(0.0, lhs - rhs), 1e-8)

    fdesc = desc.with_mode("float")
    K = random_operator(rng, fdesc)
    if rng.integers(3) == 0:
        blocks = np.array(K.blocks)
        blocks[:, 0, :, 0] = 0
        K = ModuleOperator(fdesc, blocks)
    flat = flatten(K)
    c = float(singular_values(flat)[0]) ** 2
    h = random_module_element(rng, fdesc)
    Kh = apply_operator(K, h)
    hh = inner_product(h, h)
    slack = ToleranceConfig(cfg.positivity_tol * max(1.0, c * float(operator_norm(hh))), cfg.equality_tol)
    rec("bounded_inner_product_bound", order_leq(inner_product(Kh, Kh), hh * c, slack))

    tol = 1e-8
    w, _ = jacobi_eigh(flat.conj().T @ flat)
    smin = math.sqrt(max(float(w[0]), 0.0))
    rank_adj = int(np.linalg.matrix_rank(operator_adjoint_flat(K), tol=tol))
    nk = desc.n * desc.k
    rec("bounded_below_iff_surjective", (smin > tol) == (rank_adj == nk), 0.0, tol, f"smin={smin!r} rank={rank_adj}")

    kernel = null_space(flat, tol)
    rank = int(np.count_nonzero(singular_values(flat) > tol))
    u, s, _ = np.linalg.svd(flat.conj().T)
    range_adj = u[:, : int(np.count_nonzero(s > tol))]
    orth = float(np.abs(range_adj.conj().T @ kernel).max()) if kernel.size and range_adj.size else 0.0
    rec("closed_range_decomposition", rank + kernel.shape[1] == nk and orth <= 1e-8, orth, 1e-8)


def operator_adjoint_flat(K: ModuleOperator) -> np.ndarray:
    return exact.to_complex(flatten(operator_adjoint(K)))


def check_measure(rec: _Recorder, rng, desc: ModuleDescriptor, cfg: ToleranceConfig):
    rdesc = desc.with_mode("rational")
    degree = int(rng.integers(0, 10))
    F = random_polynomial_frame(rng, rdesc, degree)
    num = gram_flat(frame_to_mode(F, "float"), frame_to_mode(F, "float"))
    ex = exact.to_complex(gram_flat(F, F))
    res = float(np.abs(num - ex).max())
    scale = max(1.0, float(np.abs(ex).max()))
    rec("quadrature_exact_agreement", res <= 1e-12 * scale, res / scale, 1e-12)

    alg = desc.algebra.with_mode("float")
    measure = F.measure
    A, B = random_entries(rng, alg, (3,)), random_entries(rng, alg, (3,))
    alpha = complex(rng.standard_normal(), rng.standard_normal())

    def phi(x):
        return AlgebraElement._raw(alg, A[0] + x * A[1] + x * x * A[2])

    def psi(x):
        return AlgebraElement._raw(alg, B[0] + x * B[1] + x**3 * B[2])

    i_phi = bochner_integrate(phi, measure)
    i_psi = bochner_integrate(psi, measure)
    i_comb = bochner_integrate(lambda x: phi(x) * alpha + psi(x), measure)
    lin = max_abs_difference(i_comb, i_phi * alpha + i_psi)
    rec("integral_linearity", lin <= 1e-12 * max(1.0, float(np.abs(i_comb.entries).max())), lin, 1e-12)
    adj = bochner_integrate(lambda x: adjoint(phi(x)), measure)
    res = max_abs_difference(adj, adjoint(i_phi))
    rec("adjoint_commutes_with_integral", res <= 1e-12 * max(1.0, float(np.abs(adj.entries).max())), res, 1e-12)

    pts = tuple(range(4))
    w = tuple(float(x) for x in rng.uniform(0.1, 2.0, size=4))
    vals = random_entries(rng, alg, (4,))
    el = L2Element(alg, pts, w, vals)
    rec("l2_inner_positivity", is_positive(l2_inner(el, el), cfg))


# -- operators ----------------------------------------------------------------

def check_frame_operators(rec: _Recorder, case: Case, cfg: ToleranceConfig):
    F = case.frame
    rng = np.random.default_rng(case.rng_seed)
    report = classify(F, cfg)
    lower, upper = report.lower_bound, report.upper_bound
    desc = F.module

    for name, chk in verify_operator_identities(F, cfg, seed=case.rng_seed).items():
        rec(name, chk.passed, chk.residual, chk.tolerance, chk.detail)

    S = report.moment
    ok, worst = True, 0.0
    fl = float(lower)
    for _ in range(ORDER_SAMPLES):
        f = random_module_element(rng, desc.with_mode("float"))
        Sf = apply_operator(S.to_mode("float"), f)
        ff, sff = inner_product(f, f), inner_product(Sf, f)
        scale = max(1.0, float(upper)) * float(operator_norm(ff))
        c = ToleranceConfig(cfg.positivity_tol * scale, cfg.equality_tol * scale)
        this = order_leq(ff * fl, sff, c) and order_leq(sff, ff * float(upper), c)
        ok &= this
    rec("order_bound_soundness", ok, worst, cfg.positivity_tol)

    if report.is_frame:
        cand = _optimal_candidate(lower, upper)
        w = bound_witness(F, cand, cfg)
        violated = w is not None and not order_leq(
            inner_product(w, w) * _scalar_for(desc, cand),
            inner_product(apply_operator(S, w), w),
            cfg,
        )
        rec("bound_optimality_witness", violated, 0.0, 0.0, f"candidate={cand}")
    below = _below_candidate(lower)
    rec("bound_no_witness_below", bound_witness(F, below, cfg) is None, 0.0, 0.0)

    K = random_operator(rng, desc, well_conditioned=True)
    KF = transform_frame(K, F)
    lhs = frame_operator(KF)
    rhs = compose(operator_adjoint(K), S, K)
    scale = max(1.0, float(np.abs(exact.to_complex(rhs.blocks)).max()))
    res = _diff(lhs.blocks, rhs.blocks)
    rec("transform_consistency", res <= 1e-9 * scale, res / scale, 1e-9)

    delta = report.quadrature_delta
    if isinstance(F, PolynomialFrame) and isinstance(F.measure, IntervalMeasure):
        certified = delta is not None and (delta <= 1e-7) == report.converged
        rec("quadrature_certification", certified and report.converged, delta or 0.0, 1e-7)

    nc = norm_criterion(F, 20, cfg, seed=case.rng_seed)
    rec("norm_criterion_consistent", nc.consistent, 0.0, cfg.positivity_tol, f"{nc}")

    if isinstance(F.measure, AtomicMeasure) and report.is_frame:
        rep = exactness_check(F, cfg)
        oracle = _removable_oracle(F, cfg)
        rec("exactness_matches_oracle", rep.removable_atoms == oracle and rep.is_exact == (not oracle))


def _optimal_candidate(lower, upper):
    if isinstance(lower, Fraction) and isinstance(upper, Fraction):
        return lower + (upper - lower) / 1000 + Fraction(1, 10**6)
    return float(lower) + 1e-3 * (float(upper) - float(lower)) + 1e-6


def _below_candidate(lower):
    if isinstance(lower, Fraction):
        return lower - Fraction(1, 10**6)
    return float(lower) - 1e-6


def _scalar_for(desc, c):
    if desc.exact:
        return c if isinstance(c, Fraction) else exact.to_fraction(c)
    return float(c)


def _removable_oracle(F, cfg: ToleranceConfig) -> list:
    # Direct numpy route: drop each atom's term from the weighted Gram sum.
    Ff = frame_to_mode(F, "float")
    pts = Ff.measure.points
    w = [float(x) for x in Ff.measure.weights]
    vals = Ff.values if isinstance(Ff, SampledFrame) else Ff.values_at(pts)
    n, k = Ff.module.n, Ff.module.k
    rows = [vals[r].transpose(1, 0, 2).reshape(k, n * k) for r in range(len(pts))]
    out = []
    for drop in range(len(pts)):
        M = sum((w[r] * rows[r].conj().T @ rows[r] for r in range(len(pts)) if r != drop), np.zeros((n * k, n * k)))
        if float(np.linalg.eigvalsh(M)[0]) > cfg.positivity_tol:
            out.append(pts[drop])
    return out


# -- duals ----------------------------------------------------------------------

def check_duals(rec: _Recorder, case: Case, cfg: ToleranceConfig):
    F = case.frame
    report = classify(F, cfg)
    if not report.is_frame:
        return
    rng = np.random.default_rng(case.rng_seed + 1)
    G = canonical_dual(F, cfg)
    d = is_dual_pair(F, G, cfg)
    rec("canonical_dual_is_dual", d.is_dual_pair and float(d.identity_residual) <= 1e-9, d.identity_residual, 1e-9)
    back = is_dual_pair(G, F, cfg)
    rec("dual_symmetry", back.is_dual_pair == d.is_dual_pair, float(back.identity_residual), cfg.equality_tol)
    sym = _diff(cross_moment_matrix(G, F).blocks, operator_adjoint(cross_moment_matrix(F, G)).blocks)
    rec("cross_moment_adjoint_symmetry", sym <= 1e-9, sym, 1e-9)

    gb = optimal_bounds(G, cfg)
    expect = Bounds(1 / report.upper_bound, 1 / report.lower_bound)
    res = max(
        abs(float(gb.lower) - float(expect.lower)) / max(1.0, float(expect.lower)),
        abs(float(gb.upper) - float(expect.upper)) / max(1.0, float(expect.upper)),
    )
    if gb.exact and expect.exact:
        rec("canonical_dual_bounds", gb == expect, res, 0.0)
    else:
        rec("canonical_dual_bounds", res <= 1e-9, res, 1e-9)
    S_inv = operator_invert(report.moment, cfg)
    SG = frame_operator(G)
    scale = max(1.0, float(np.abs(exact.to_complex(S_inv.blocks)).max()))
    res = _diff(SG.blocks, S_inv.blocks) / scale
    rec("canonical_dual_frame_operator", res <= 1e-9, res, 1e-9)

    worst = 0.0
    for _ in range(3):
        f = random_module_element(rng, F.module)
        r = reconstruction_residual(F, G, f) / max(1.0, module_norm(f))
        worst = max(worst, r)
    rec("reconstruction", worst <= 1e-9, worst, 1e-9)

    if isinstance(F.measure, AtomicMeasure):
        riesz = riesz_type_check(F, cfg)
        if riesz.riesz_type:
            sizes = perturbation_attempts(F, cfg)
            top = max(sizes) if sizes else 0.0
            zero = top == 0 if F.module.exact else top <= cfg.equality_tol
            rec("riesz_soundness", zero, top, cfg.equality_tol, "riesz-type")
        else:
            rec("riesz_soundness", bool(riesz.second_dual_verified), 0.0, cfg.equality_tol,
                f"second dual at distance {riesz.second_dual_distance!r}")
        rec("riesz_rank_bound", riesz.riesz_type is False or len(F.measure) <= F.module.n)
        nv = nonvanishing_check(F, cfg)
        if not nv.all_nonzero:
            rec("zero_atom_second_dual", bool(nv.second_dual_verified) and not riesz.riesz_type)


# -- driver ---------------------------------------------------------------------

def run_suite(
    suite: str = "all", seed: int = 0, cases: int = 100, cfg: ToleranceConfig = DEFAULT_TOLERANCES
) -> SuiteReport:
    if suite not in SUITES:
        raise ParameterError(f"unknown suite {suite!r}; expected one of {SUITES}")
    if not isinstance(cases, int) or cases < 1:
        raise ParameterError(f"cases must be a positive integer, got {cases!r}")
    rng = np.random.default_rng(seed)
    rec = _Recorder()
    want = {"axioms", "operators", "duals"} if suite == "all" else {suite}
    drawn = [draw_case(rng, i) for i in range(cases)]
    if want & {"operators", "duals"}:
        drawn.extend(constructed_cases())
    for case in drawn:
        rec.case = case.label
        if "axioms" in want and not case.label.startswith(("single", "two", "zero")):
            check_algebra(rec, rng, case.frame.module.algebra, cfg)
            check_module(rec, rng, case.frame.module, cfg)
            check_measure(rec, rng, case.frame.module, cfg)
        if "operators" in want:
            check_frame_operators(rec, case, cfg)
        if "duals" in want:
            check_duals(rec, case, cfg)
    return SuiteReport(suite, seed, cases, rec.props)
