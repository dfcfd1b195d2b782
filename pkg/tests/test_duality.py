"""Canonical duals, dual-pair verification, Riesz-type detection and zero atoms."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cframe import (
    AlgebraDescriptor,
    AtomicMeasure,
    IntervalMeasure,
    ModuleDescriptor,
    ModuleOperator,
    PolynomialFrame,
    SampledFrame,
    canonical_dual,
    classify,
    cross_moment_matrix,
    flatten,
    frame_operator,
    is_dual_pair,
    nonvanishing_check,
    operator_adjoint,
    operator_invert,
    optimal_bounds,
    riesz_type_check,
)
from cframe import exact
from cframe.duality import dual_symmetry_residual, perturbation_attempts, reconstruction_residual
from cframe.errors import ModeError, NotAFrameError
from cframe.randoms import random_atomic_frame, random_module_element, random_polynomial_frame

seeds = st.integers(0, 2**32 - 1)
kinds = st.sampled_from(["full", "diagonal"])
modes = st.sampled_from(["float", "rational"])
small = st.integers(1, 3)
UNIT = IntervalMeasure(0, 1)


def diag_frame(first, second, mode="rational", measure=UNIT):
    desc = ModuleDescriptor(AlgebraDescriptor("diagonal", 2, mode), 1)
    d = max(len(first), len(second))
    c = np.zeros((1, 2, 2, d), dtype=object)
    c[0, 0, 0, : len(first)] = [Fraction(x) for x in first]
    c[0, 1, 1, : len(second)] = [Fraction(x) for x in second]
    if mode == "float":
        c = c.astype(float).astype(complex)
    return PolynomialFrame(desc, measure, c)


F_LIN = diag_frame([0, 2], [-1, 1])
G_PAIR = diag_frame([0, Fraction(3, 2)], [Fraction(-7, 3), 1])


def atoms_frame(values, mode="rational", kind="diagonal"):
    desc = ModuleDescriptor(AlgebraDescriptor(kind, 2, mode), 1)
    mu = AtomicMeasure(tuple(range(len(values))), (1,) * len(values))
    arr = np.array([[v] for v in values], dtype=object if mode == "rational" else complex)
    return SampledFrame(desc, mu, mu.points, mu.weights, arr)


EYE = np.eye(2, dtype=int)
ZERO = np.zeros((2, 2), dtype=int)


class TestCrossMoment:
    def test_example_pair_is_identity(self):
        C = cross_moment_matrix(F_LIN, G_PAIR)
        assert C == ModuleOperator.identity(C.descriptor)

    def test_self_pair_is_moment(self):
        C = cross_moment_matrix(F_LIN, F_LIN)
        assert flatten(C)[0, 0].re == Fraction(4, 3) and flatten(C)[1, 1].re == Fraction(1, 3)
        assert not is_dual_pair(F_LIN, F_LIN).is_dual_pair

    @given(seeds, kinds, small, small)
    def test_adjoint_symmetry_exact(self, seed, kind, k, n):
        rng = np.random.default_rng(seed)
        desc = ModuleDescriptor(AlgebraDescriptor(kind, k, "rational"), n)
        F = random_polynomial_frame(rng, desc, 2, UNIT)
        G = random_polynomial_frame(rng, desc, 2, UNIT)
        assert cross_moment_matrix(G, F) == operator_adjoint(cross_moment_matrix(F, G))

    def test_measure_mismatch(self):
        other = diag_frame([0, 2], [-1, 1], measure=IntervalMeasure(0, 2))
        with pytest.raises(ValueError):
            cross_moment_matrix(F_LIN, other)


class TestCanonicalDual:
    def test_example_entries(self):
        G = canonical_dual(F_LIN)
        assert np.all(G.coeffs == diag_frame([0, Fraction(3, 2)], [-3, 3]).coeffs)
        assert is_dual_pair(F_LIN, G).identity_residual == 0

    def test_example_bounds(self):
        assert optimal_bounds(canonical_dual(F_LIN)) == (Fraction(3, 4), 3)
        Gf = canonical_dual(diag_frame([0, 2], [-1, 1], "float"))
        lo, hi = optimal_bounds(Gf)
        assert abs(lo - 0.75) <= 1e-12 and abs(hi - 3) <= 1e-12

    def test_tight_frame_scales(self):
        F = diag_frame([2], [2])
        G = canonical_dual(F)
        assert np.all(G.coeffs == diag_frame([Fraction(1, 2)], [Fraction(1, 2)]).coeffs)

    def test_not_a_frame(self):
        with pytest.raises(NotAFrameError):
            canonical_dual(diag_frame([0], [1]))

    @given(seeds, kinds, modes, small, small)
    def test_random_frames(self, seed, kind, mode, k, n):
        rng = np.random.default_rng(seed)
        if mode == "rational" and n * k > 4:
            mode = "float"
        desc = ModuleDescriptor(AlgebraDescriptor(kind, k, mode), n)
        F = random_polynomial_frame(rng, desc, n + 1)
        report = classify(F)
        G = canonical_dual(F)
        pair = is_dual_pair(F, G)
        assert pair.is_dual_pair and float(pair.identity_residual) <= 1e-9
        assert is_dual_pair(G, F).is_dual_pair
        assert dual_symmetry_residual(F, G) <= 1e-9
        lo, hi = optimal_bounds(G)
        assert abs(float(lo) - 1 / float(report.upper_bound)) <= 1e-9 * max(1.0, float(lo))
        assert abs(float(hi) - 1 / float(report.lower_bound)) <= 1e-9 * max(1.0, float(hi))
        s_inv = exact.to_complex(flatten(operator_invert(report.moment)))
        diff = np.abs(exact.to_complex(flatten(frame_operator(G))) - s_inv).max()
        assert diff <= 1e-9 * max(1.0, np.abs(s_inv).max())
        f = random_module_element(rng, desc)
        assert reconstruction_residual(F, G, f) <= 1e-9 * max(1.0, float(np.abs(exact.to_complex(f.data)).max()))


class TestDualPair:
    def test_example_exact(self):
        rep = is_dual_pair(F_LIN, G_PAIR)
        assert rep.is_dual_pair and rep.exact and rep.identity_residual == 0
        assert is_dual_pair(G_PAIR, F_LIN).is_dual_pair

    def test_perturbation_breaks_pair(self):
        G = diag_frame([Fraction(1, 10), Fraction(3, 2)], [Fraction(-7, 3), 1], "float")
        F = diag_frame([0, 2], [-1, 1], "float")
        rep = is_dual_pair(F, G)
        assert not rep.is_dual_pair and rep.identity_residual > 1e-2


class TestRiesz:
    def test_single_atom_is_riesz(self):
        for mode in ("rational", "float"):
            F = atoms_frame([EYE], mode)
            rep = riesz_type_check(F)
            assert rep.riesz_type and rep.second_dual is None
            assert all(s == 0 for s in perturbation_attempts(F))

    def test_two_identical_atoms(self):
        for mode in ("rational", "float"):
            F = atoms_frame([EYE, EYE], mode)
            rep = riesz_type_check(F)
            assert rep.riesz_type is False and rep.second_dual_verified
            G = canonical_dual(F)
            assert is_dual_pair(F, rep.second_dual).is_dual_pair
            assert np.abs(exact.to_complex(rep.second_dual.values - G.values)).max() > 1e-9

    @given(seeds, kinds, small, small)
    def test_more_atoms_than_rank_is_not_riesz(self, seed, kind, k, n):
        rng = np.random.default_rng(seed)
        desc = ModuleDescriptor(AlgebraDescriptor(kind, k), n)
        F = random_atomic_frame(rng, desc, n + 1 + int(rng.integers(3)))
        rep = riesz_type_check(F)
        assert rep.riesz_type is False and rep.second_dual_verified

    @given(seeds, kinds, small, small)
    def test_square_generic_is_riesz(self, seed, kind, k, n):
        rng = np.random.default_rng(seed)
        F = random_atomic_frame(rng, ModuleDescriptor(AlgebraDescriptor(kind, k), n), n)
        rep = riesz_type_check(F)
        assert rep.riesz_type
        assert max(perturbation_attempts(F)) <= 1e-9

    def test_interval_measure_refused(self):
        with pytest.raises(ModeError):
            riesz_type_check(F_LIN)


class TestNonvanishing:
    def test_example_on_two_atoms(self):
        mu = AtomicMeasure((Fraction(1, 4), Fraction(3, 4)), (Fraction(1, 2), Fraction(1, 2)))
        F = PolynomialFrame(F_LIN.module, mu, F_LIN.coeffs)
        rep = nonvanishing_check(F)
        assert rep.all_nonzero and rep.zero_atoms == []

    def test_single_atom_identity(self):
        assert nonvanishing_check(atoms_frame([EYE])).all_nonzero

    def test_zero_atom_gives_second_dual(self):
        for mode in ("rational", "float"):
            for kind in ("diagonal", "full"):
                F = atoms_frame([EYE, ZERO], mode, kind)
                rep = nonvanishing_check(F)
                assert not rep.all_nonzero and rep.zero_atoms == [1]
                assert rep.second_dual_verified
                assert is_dual_pair(F, rep.second_dual).is_dual_pair
                assert riesz_type_check(F).riesz_type is False

    def test_not_a_frame(self):
        with pytest.raises(NotAFrameError):
            nonvanishing_check(atoms_frame([ZERO]))

