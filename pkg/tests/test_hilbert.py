"""The module A^n: inner products, norms and operators in right-multiplication form."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cframe import (
    AlgebraDescriptor,
    AlgebraElement,
    ModuleDescriptor,
    ModuleElement,
    ModuleOperator,
    ToleranceConfig,
    adjoint,
    apply_operator,
    compose,
    flatten,
    inner_product,
    is_positive,
    module_norm,
    multiply,
    operator_adjoint,
    operator_invert,
    operator_norm,
    operator_spectral,
    order_leq,
)
from cframe.errors import DimensionError, SingularityError
from cframe.hilbert import left_multiply
from cframe.linalg import singular_values
from cframe.randoms import random_algebra_element, random_module_element, random_operator

seeds = st.integers(0, 2**32 - 1)
kinds = st.sampled_from(["full", "diagonal"])
modes = st.sampled_from(["float", "rational"])
sizes = st.integers(1, 3)


def module(kind="full", k=2, mode="float", n=1):
    return ModuleDescriptor(AlgebraDescriptor(kind, k, mode), n)


def loop_inner(f, g):
    # Scalar-loop oracle for sum_i f_i g_i^*.
    n, k = f.shape[0], f.shape[1]
    out = np.zeros((k, k), dtype=complex)
    for i in range(n):
        for p in range(k):
            for q in range(k):
                for t in range(k):
                    out[p, q] += f[i, p, t] * np.conj(g[i, q, t])
    return out


def power_norm(m, iters=3000):
    h = m.conj().T @ m
    v = np.ones(h.shape[0], dtype=complex) + 0.1j * np.arange(h.shape[0])
    for _ in range(iters):
        v = h @ v
        v = v / np.linalg.norm(v)
    return float(np.sqrt((v.conj() @ h @ v).real))


DIAG_Q1 = module("diagonal", 2, "rational", 1)
LIN_MOMENT = ModuleOperator(DIAG_Q1, [[[[Fraction(4, 3), 0], [0, Fraction(1, 3)]]]])


class TestInnerProduct:
    def test_diagonal_example(self):
        desc = module("diagonal", 2, "float", 1)
        f = ModuleElement(desc, [np.diag([1 + 2j, 3])])
        g = ModuleElement(desc, [np.diag([2j, -1 + 1j])])
        expect = np.diag([(1 + 2j) * np.conj(2j), 3 * np.conj(-1 + 1j)])
        assert np.array_equal(inner_product(f, g).entries, expect)

    def test_zero(self):
        desc = module("full", 3, "rational", 2)
        z = ModuleElement.zero(desc)
        assert inner_product(z, z).is_zero()

    @given(seeds, kinds, sizes, sizes)
    def test_matches_scalar_loop(self, seed, kind, k, n):
        desc = module(kind, k, "float", n)
        rng = np.random.default_rng(seed)
        f, g = random_module_element(rng, desc), random_module_element(rng, desc)
        assert np.abs(inner_product(f, g).entries - loop_inner(f.data, g.data)).max() <= 1e-12 * 10

    @given(seeds, kinds, modes, sizes, sizes)
    def test_axioms(self, seed, kind, mode, k, n):
        desc = module(kind, k, mode, n)
        rng = np.random.default_rng(seed)
        f, g = random_module_element(rng, desc), random_module_element(rng, desc)
        a = random_algebra_element(rng, desc.algebra)
        assert is_positive(inner_product(f, f))
        lhs = inner_product(left_multiply(a, f) + g, f)
        rhs = multiply(a, inner_product(f, f)) + inner_product(g, f)
        if desc.exact:
            assert inner_product(g, f) == adjoint(inner_product(f, g))
            assert lhs == rhs
        else:
            assert np.abs((inner_product(g, f) - adjoint(inner_product(f, g))).entries).max() <= 1e-12
            assert np.abs((lhs - rhs).entries).max() <= 1e-10

    @given(seeds, kinds, sizes, sizes)
    def test_cauchy_schwarz(self, seed, kind, k, n):
        desc = module(kind, k, "float", n)
        rng = np.random.default_rng(seed)
        f, g = random_module_element(rng, desc), random_module_element(rng, desc)
        lhs = operator_norm(inner_product(f, g)) ** 2
        rhs = operator_norm(inner_product(f, f)) * operator_norm(inner_product(g, g))
        assert lhs <= rhs + 1e-8 * max(1.0, rhs)

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            inner_product(ModuleElement.zero(module(n=1)), ModuleElement.zero(module(n=2)))


class TestNorm:
    def test_examples(self):
        assert module_norm(ModuleElement.basis(module("full", 2))) == 1
        f = ModuleElement(module("diagonal", 2), [np.diag([3, 0])])
        assert module_norm(f) == pytest.approx(3, abs=1e-15)

    @given(seeds, sizes, sizes, st.complex_numbers(min_magnitude=0.01, max_magnitude=100))
    def test_homogeneity(self, seed, k, n, lam):
        f = random_module_element(np.random.default_rng(seed), module("full", k, "float", n))
        assert abs(module_norm(f * lam) - abs(lam) * module_norm(f)) <= 1e-12 * abs(lam) * module_norm(f)


class TestOperators:
    def test_identity_application(self):
        desc = module("full", 2, "rational", 2)
        f = random_module_element(np.random.default_rng(0), desc)
        assert apply_operator(ModuleOperator.identity(desc), f) == f

    def test_right_multiplication(self):
        desc = module("full", 2, "float", 1)
        m = np.array([[1, 2j], [0, 3]])
        a = np.array([[1, 1], [2, -1j]])
        out = apply_operator(ModuleOperator(desc, [[m]]), ModuleElement(desc, [a]))
        assert np.array_equal(out.data[0], a @ m)

    @given(seeds, kinds, sizes, sizes)
    def test_adjoint_identity(self, seed, kind, k, n):
        desc = module(kind, k, "float", n)
        rng = np.random.default_rng(seed)
        K = random_operator(rng, desc)
        f, g = random_module_element(rng, desc), random_module_element(rng, desc)
        lhs = inner_product(apply_operator(K, f), g)
        rhs = inner_product(f, apply_operator(operator_adjoint(K), g))
        assert np.abs((lhs - rhs).entries).max() <= 1e-10

    def test_adjoint_examples(self):
        desc = module("full", 2, "float", 1)
        eye = ModuleOperator.identity(desc)
        assert operator_adjoint(eye) == eye
        m = np.array([[1, 2j], [3, 4]])
        assert np.array_equal(operator_adjoint(ModuleOperator(desc, [[m]])).blocks[0, 0], m.conj().T)

    @given(seeds, kinds, sizes, sizes)
    def test_adjoint_exact_involution_and_flatten(self, seed, kind, k, n):
        desc = module(kind, k, "rational", n)
        K = random_operator(np.random.default_rng(seed), desc)
        assert operator_adjoint(operator_adjoint(K)) == K
        assert np.all(flatten(operator_adjoint(K)) == np.conj(flatten(K)).T)

    def test_flatten_identity(self):
        assert np.array_equal(flatten(ModuleOperator.identity(module("full", 2, "float", 3))), np.eye(6))

    @given(seeds, kinds, sizes, sizes)
    def test_compose_matches_matrix_product(self, seed, kind, k, n):
        desc = module(kind, k, "float", n)
        rng = np.random.default_rng(seed)
        K, L = random_operator(rng, desc), random_operator(rng, desc)
        f = random_module_element(rng, desc)
        assert np.abs(flatten(compose(K, L)) - flatten(K) @ flatten(L)).max() <= 1e-12 * 10
        # compose(K, L) applies K first.
        two_step = apply_operator(L, apply_operator(K, f))
        assert np.abs(apply_operator(compose(K, L), f).data - two_step.data).max() <= 1e-10

    @given(seeds, kinds, sizes, sizes)
    def test_bounded_inner_product_bound(self, seed, kind, k, n):
        desc = module(kind, k, "float", n)
        rng = np.random.default_rng(seed)
        K = random_operator(rng, desc)
        f = random_module_element(rng, desc)
        c = float(singular_values(flatten(K))[0]) ** 2
        Kf = apply_operator(K, f)
        ff = inner_product(f, f)
        slack = ToleranceConfig(positivity_tol=1e-9 * max(1.0, c * operator_norm(ff)))
        assert order_leq(inner_product(Kf, Kf), ff * c, slack)


class TestSpectral:
    def test_moment_of_two_point_eight(self):
        spec = operator_spectral(LIN_MOMENT)
        assert spec.is_self_adjoint and spec.is_positive and spec.is_invertible
        assert spec.eigenvalues == (Fraction(1, 3), Fraction(4, 3))
        assert spec.operator_norm == Fraction(4, 3)

    def test_zero(self):
        spec = operator_spectral(ModuleOperator.zero(module("full", 2, "float", 2)))
        assert spec.is_positive and not spec.is_invertible

    @given(seeds, kinds, sizes, sizes)
    def test_norm_matches_power_iteration(self, seed, kind, k, n):
        K = random_operator(np.random.default_rng(seed), module(kind, k, "float", n))
        oracle = power_norm(flatten(K))
        assert abs(operator_spectral(K).operator_norm - oracle) <= 1e-8 * oracle


class TestInvert:
    def test_example(self):
        inv = operator_invert(LIN_MOMENT)
        assert inv == ModuleOperator(DIAG_Q1, [[[[Fraction(3, 4), 0], [0, 3]]]])

    def test_identity(self):
        eye = ModuleOperator.identity(module("full", 2, "rational", 2))
        assert operator_invert(eye) == eye

    @given(seeds, kinds, modes, sizes, sizes)
    def test_residual(self, seed, kind, mode, k, n):
        desc = module(kind, k, mode, n)
        K = random_operator(np.random.default_rng(seed), desc, well_conditioned=True)
        prod = compose(K, operator_invert(K))
        if desc.exact:
            assert prod == ModuleOperator.identity(desc)
        else:
            assert np.abs(flatten(prod) - np.eye(n * k)).max() <= 1e-9

    def test_singular(self):
        with pytest.raises(SingularityError):
            operator_invert(ModuleOperator.zero(module("full", 2, "float", 2)))
        with pytest.raises(SingularityError):
            operator_invert(ModuleOperator.zero(DIAG_Q1))


@given(seeds, kinds, sizes, sizes)
def test_bounded_below_iff_adjoint_full_rank(seed, kind, k, n):
    desc = module(kind, k, "float", n)
    rng = np.random.default_rng(seed)
    K = random_operator(rng, desc)
    if rng.integers(2):
        blocks = np.array(K.blocks)
        blocks[:, 0] = 0
        K = ModuleOperator(desc, blocks)
    tol = 1e-8
    smin = singular_values(flatten(K))[-1]
    adj_rank = int(np.count_nonzero(singular_values(flatten(operator_adjoint(K))) > tol))
    assert (smin > tol) == (adj_rank == n * k)


def test_left_multiply_rejects_foreign_algebra():
    a = AlgebraElement.identity(AlgebraDescriptor("full", 3))
    with pytest.raises(DimensionError):
        left_multiply(a, ModuleElement.zero(module("full", 2)))
