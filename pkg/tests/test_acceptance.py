"""Acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line that the terminal summary prints.
"""

import json
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np

from cframe import (
    AlgebraDescriptor,
    IntervalMeasure,
    ModuleDescriptor,
    apply_operator,
    canonical_dual,
    classify,
    flatten,
    frame_operator,
    inner_product,
    is_dual_pair,
    nonvanishing_check,
    operator_invert,
    optimal_bounds,
    order_leq,
    riesz_type_check,
)
from cframe import exact
from cframe.config import preset
from cframe.duality import perturbation_attempts
from cframe.frames import bound_witness
from cframe.measure import frame_to_mode, gram_flat
from cframe.randoms import random_polynomial_frame
from cframe.suite import constructed_cases, draw_case


def cli(*args, timeout=120):
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "cframe", *args], capture_output=True, text=True, timeout=timeout
    )
    return proc, time.perf_counter() - start


def test_criterion_1_example_bounds(acceptance):
    proc, elapsed = cli("analyze", "--example", "paper-2.8", "--exact")
    rep = json.loads(proc.stdout)
    b = rep["bounds"]
    ok = proc.returncode == 0 and b["lower"] == "1/3" and b["upper"] == "4/3" and b["exact"] and elapsed < 1.0
    acceptance(1, "example frame bounds exactly 1/3 and 4/3", ok, f"lower={b['lower']} upper={b['upper']} {elapsed:.2f}s")
    assert ok


def test_criterion_2_example_dual_pair(acceptance):
    proc, elapsed = cli("verify-pair", "--example", "paper-3.4", "--exact")
    rep = json.loads(proc.stdout)
    g = rep["second_frame"]["bounds"]
    identity = rep["cross_moment"] == [["1", "0"], ["0", "1"]]
    ok = (
        proc.returncode == 0
        and rep["verdict"] == "dual-pair"
        and identity
        and rep["cross_moment_residual"] == "0"
        and rep["exact"]
        and (g["lower"], g["upper"]) == ("3/4", "31/9")
        and elapsed < 1.0
    )
    acceptance(2, "example pair is dual with identity cross moment, G bounds 3/4 and 31/9", ok,
               f"verdict={rep['verdict']} G=({g['lower']}, {g['upper']}) {elapsed:.2f}s")
    assert ok


def test_criterion_3_canonical_dual_bounds(acceptance):
    details = []
    ok = True
    for mode in ("float", "rational"):
        F = preset("paper-2.8", mode).frame
        G = canonical_dual(F)
        lo, hi = optimal_bounds(G)
        if mode == "rational":
            ok &= (lo, hi) == (Fraction(3, 4), Fraction(3)) and isinstance(lo, Fraction)
        else:
            ok &= abs(lo - 0.75) <= 1e-12 and abs(hi - 3) <= 1e-12
        s_inv = exact.to_complex(flatten(operator_invert(frame_operator(F))))
        res = float(np.abs(exact.to_complex(flatten(frame_operator(G))) - s_inv).max())
        ok &= res <= 1e-9
        details.append(f"{mode}: ({lo}, {hi}) S_G-S^-1={res:.1e}")
    acceptance(3, "canonical dual bounds (3/4, 3), frame operator S^-1", ok, "; ".join(details))
    assert ok


REQUIRED = (
    "ip_positivity", "ip_definiteness", "ip_conjugate_symmetry", "ip_a_linearity", "cauchy_schwarz",
    "self_adjoint", "positive", "invertible_iff_frame", "norm_le_upper", "S_equals_TTstar",
    "bounds_match_norms", "transform_consistency", "canonical_dual_is_dual", "reconstruction",
    "norm_criterion_consistent",
)


def test_criterion_4_property_suite(acceptance, tmp_path):
    out = tmp_path / "suite.json"
    proc, elapsed = cli("check", "--suite", "all", "--seed", "42", "--cases", "100", "--out", str(out), timeout=300)
    summary = json.loads(out.read_text()) if out.exists() else {"properties": {}, "all_passed": False}
    props = summary["properties"]
    missing = [p for p in REQUIRED if p not in props]
    failing = [name for name, p in props.items() if not p["passed"] == p["total"]]
    ok = proc.returncode == 0 and summary["all_passed"] and not missing and not failing and elapsed < 60
    acceptance(4, "property suite seed 42, 100 cases, all pass", ok,
               f"{len(props)} properties, missing={missing} failing={failing} {elapsed:.1f}s")
    assert ok, proc.stdout[-2000:]


def suite_frames():
    rng = np.random.default_rng(42)
    cases = [draw_case(rng, i) for i in range(100)]
    return cases + constructed_cases()


def test_criterion_5_bound_optimality(acceptance):
    total = good = 0
    bad = []
    for case in suite_frames():
        F = case.frame
        r = classify(F)
        lower, upper = r.lower_bound, r.upper_bound
        if isinstance(lower, Fraction) and isinstance(upper, Fraction):
            above = lower + (upper - lower) / 1000 + Fraction(1, 10**6)
            below = lower - Fraction(1, 10**6)
        else:
            above = float(lower) + 1e-3 * (float(upper) - float(lower)) + 1e-6
            below = float(lower) - 1e-6
        w = bound_witness(F, above)
        scale = exact.to_fraction(above) if F.module.exact else above
        violated = w is not None and not order_leq(
            inner_product(w, w) * scale, inner_product(apply_operator(r.moment, w), w)
        )
        none_below = bound_witness(F, below) is None
        total += 1
        if violated and none_below:
            good += 1
        else:
            bad.append(case.label)
    ok = good == total
    acceptance(5, "bound witnesses above the optimal lower bound, none below", ok, f"{good}/{total} frames")
    assert ok, bad


def test_criterion_6_riesz_dichotomy(acceptance):
    ok = True
    notes = []
    for case in constructed_cases():
        F = case.frame
        if case.label.startswith("single-atom"):
            rep = riesz_type_check(F)
            sizes = perturbation_attempts(F)
            zero = all(s == 0 for s in sizes)
            this = rep.riesz_type is True and zero and len(sizes) > 0
        elif case.label.startswith("two-identical-atoms"):
            rep = riesz_type_check(F)
            G = canonical_dual(F)
            this = (
                rep.riesz_type is False
                and rep.second_dual_verified
                and is_dual_pair(F, rep.second_dual).is_dual_pair
                and rep.second_dual_distance > 1e-9
                and float(np.abs(exact.to_complex(rep.second_dual.values - G.values)).max()) > 1e-9
            )
        else:
            nv = nonvanishing_check(F)
            this = (
                not nv.all_nonzero
                and nv.second_dual_verified
                and is_dual_pair(F, nv.second_dual).is_dual_pair
                and riesz_type_check(F).riesz_type is False
            )
        ok &= bool(this)
        notes.append(f"{case.label}={'ok' if this else 'FAIL'}")
    acceptance(6, "Riesz-type dichotomy on the atomic constructions", ok, ", ".join(notes))
    assert ok


UNIT_MEASURES = (
    IntervalMeasure(0, 1),
    IntervalMeasure(-1, 1),
    IntervalMeasure(0, 1, (1, 1)),
    IntervalMeasure(Fraction(-1, 2), Fraction(1, 2), (1, 0, 1)),
)


def test_criterion_7_quadrature_oracle(acceptance):
    rng = np.random.default_rng(7)
    worst = 0.0
    for i in range(50):
        kind = ("full", "diagonal")[i % 2]
        k, n = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        desc = ModuleDescriptor(AlgebraDescriptor(kind, k, "rational"), n)
        F = random_polynomial_frame(rng, desc, int(rng.integers(0, 10)), UNIT_MEASURES[i % len(UNIT_MEASURES)])
        exact_m = exact.to_complex(gram_flat(F, F))
        Ff = frame_to_mode(F, "float")
        numeric = gram_flat(Ff, Ff, 32)
        worst = max(worst, float(np.abs(numeric - exact_m).max()))
    ok = worst <= 1e-12
    acceptance(7, "numeric moments at 32 panels match exact rational moments", ok, f"worst entry error {worst:.2e}")
    assert ok
