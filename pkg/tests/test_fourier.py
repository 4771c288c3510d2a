"""Fourier machinery: transforms vs direct-definition oracles, restrictions
vs symbolic oracles, admission tests vs exact values."""

import math

import numpy as np
import pytest

from localmq import (
    Distribution,
    FourierSpectrum,
    OracleSession,
    PLUS_MINUS,
    ProductBasis,
    SparsePolynomial,
    UNIFORM_PM,
    ZERO_ONE,
    exact_transform,
    l2_test,
    nonzero_test,
    restriction_value_01,
    restriction_value_pm,
    tree_to_polynomial,
)
from localmq.distributions import random_smooth_table, verify_smoothness
from localmq.fourier import MONOMIAL_01, char_values, default_test_samples
from localmq.generators import random_product_means, random_sparse_poly, random_subset, random_tree
from localmq.oracles import AUDIT_COUNTS
from localmq.verify import VerifierOracle
from localmq._bits import all_masks, bits_of, popcount


class TestExactTransform:
    def test_single_variable(self):
        f = SparsePolynomial(3, {0b1: 1.0}, PLUS_MINUS)
        spec = exact_transform(f, UNIFORM_PM)
        assert spec.coeffs == pytest.approx({0b1: 1.0})

    def test_constant_in_every_basis(self):
        from localmq.targets import DecisionTree, Leaf

        one = DecisionTree(4, Leaf(1), PLUS_MINUS)
        for basis in (UNIFORM_PM, MONOMIAL_01, ProductBasis((0.1, -0.2, 0.3, 0.0))):
            assert exact_transform(one, basis).coeffs == pytest.approx({0: 1.0})

    def test_two_bit_and(self):
        from .test_targets import AND_TREE

        spec = exact_transform(AND_TREE, UNIFORM_PM)
        assert spec.coeffs == pytest.approx({0: -0.5, 1: 0.5, 2: 0.5, 3: 0.5})

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_direct_definition(self, seed):
        # two independent routes: butterfly transforms vs per-subset sums
        rng = np.random.default_rng(seed)
        tree = random_tree(7, 6, rng, max_depth=4)
        ver = VerifierOracle()
        for basis in (
            UNIFORM_PM,
            ProductBasis(tuple(random_product_means(7, rng))),
        ):
            fast = exact_transform(tree, basis)
            slow = ver.direct_transform(tree, basis)
            keys = set(fast.coeffs) | set(slow.coeffs)
            for s in keys:
                assert fast.coeff(s) == pytest.approx(slow.coeff(s), abs=1e-10)

    def test_monomial_basis_inverts_evaluation(self):
        rng = np.random.default_rng(9)
        f = random_sparse_poly(8, 6, rng, max_degree=4, domain=ZERO_ONE)
        spec = exact_transform(f, MONOMIAL_01)
        assert spec.coeffs == pytest.approx(f.terms)

    def test_parseval_uniform(self):
        rng = np.random.default_rng(5)
        tree = random_tree(10, 10, rng)
        spec = exact_transform(tree, UNIFORM_PM)
        assert abs(spec.l2() - 1.0) <= 1e-9

    def test_product_orthonormality(self):
        # E_mu[chi_S1 chi_S2] = delta by exact enumeration
        rng = np.random.default_rng(6)
        n = 8
        means = random_product_means(n, rng)
        basis = ProductBasis(tuple(means))
        dist = Distribution.product(means, PLUS_MINUS)
        masks = all_masks(n)
        w = dist.probs_array()
        for _ in range(25):
            s1 = random_subset(n, 4, rng)
            s2 = random_subset(n, 4, rng)
            prod = char_values(basis, s1, masks, n) * char_values(basis, s2, masks, n)
            inner = math.fsum((w * prod).tolist())
            assert inner == pytest.approx(1.0 if s1 == s2 else 0.0, abs=1e-9)

    def test_norm_accessors(self):
        spec = FourierSpectrum(3, UNIFORM_PM, {0: 0.5, 0b11: -0.25})
        assert spec.l0() == 2
        assert spec.l1() == pytest.approx(0.75)
        assert spec.l2() == pytest.approx(0.3125)
        assert spec.linf() == pytest.approx(0.5)

    def test_spectrum_json_roundtrip(self):
        rng = np.random.default_rng(14)
        tree = random_tree(8, 6, rng, max_depth=3)
        for basis in (UNIFORM_PM, ProductBasis(tuple(random_product_means(8, rng)))):
            spec = exact_transform(tree, basis)
            again = FourierSpectrum.from_json(spec.to_json())
            assert again.coeffs == pytest.approx(spec.coeffs)
            obj = spec.to_json()
            assert all(set(e) == {"set", "c"} for e in obj["coeffs"])


def poly_session(poly, dist, r, seed=0):
    return OracleSession(poly, dist, r=r, seed=seed, audit_mode=AUDIT_COUNTS)


class TestRestriction01:
    def test_empty_set_is_value(self):
        rng = np.random.default_rng(0)
        f = random_sparse_poly(8, 5, rng, max_degree=4)
        s = poly_session(f, Distribution.uniform(8, ZERO_ONE), r=0)
        p, label = s.draw_example()
        assert restriction_value_01(s, 0, 0) == label
        assert s.mq_count == 1

    def test_product_term_restriction(self):
        f = SparsePolynomial(6, {0b11: 1.0}, ZERO_ONE)
        s = poly_session(f, Distribution.uniform(6, ZERO_ONE), r=1)
        for k in range(10):
            idx, masks, _ = s.draw_batch(1)
            got = restriction_value_01(s, 0b1, int(idx[0]))
            want = float((int(masks[0]) >> 1) & 1)  # f_{x0} = x1
            assert got == pytest.approx(want)

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_symbolic_oracle(self, seed):
        rng = np.random.default_rng(seed)
        f = random_sparse_poly(12, 6, rng, max_degree=5)
        dist = random_smooth_table(12, 1.5, rng, domain=ZERO_ONE)
        s = poly_session(f, dist, r=4, seed=seed)
        for _ in range(30):
            subset = random_subset(12, 4, rng, min_size=1)
            symbolic = f.restrict(subset)  # independent algebraic route
            idx, masks, _ = s.draw_batch(1)
            got = restriction_value_01(s, subset, int(idx[0]))
            assert got == pytest.approx(symbolic.value_at(int(masks[0])), abs=1e-9)

    def test_query_budget_is_2_to_s(self):
        rng = np.random.default_rng(1)
        f = random_sparse_poly(10, 4, rng, max_degree=3)
        s = poly_session(f, Distribution.uniform(10, ZERO_ONE), r=3)
        idx, _, _ = s.draw_batch(1)
        before = s.mq_count
        restriction_value_01(s, 0b10101, int(idx[0]))  # needs r >= 3
        assert s.mq_count - before == 8
        assert s.max_locality_used <= 3


class TestRestrictionPm:
    def test_parity_restriction_exact(self):
        f = SparsePolynomial(6, {0b11: 1.0}, PLUS_MINUS)
        s = poly_session(f, Distribution.uniform(6, PLUS_MINUS), r=1)
        for _ in range(10):
            idx, masks, _ = s.draw_batch(1)
            got = restriction_value_pm(s, 0b1, int(idx[0]))
            want = 2.0 * ((int(masks[0]) >> 1) & 1) - 1.0  # x1
            assert got == pytest.approx(want)

    def test_empty_set_is_value(self):
        rng = np.random.default_rng(2)
        tree = random_tree(8, 6, rng)
        s = poly_session(tree, Distribution.uniform(8, PLUS_MINUS), r=0)
        p, label = s.draw_example()
        assert restriction_value_pm(s, 0, 0) == label

    @pytest.mark.parametrize("seed", range(3))
    def test_product_basis_matches_symbolic(self, seed):
        rng = np.random.default_rng(seed)
        tree = random_tree(14, 12, rng, max_depth=4)
        means = random_product_means(14, rng)
        basis = ProductBasis(tuple(means))
        symbolic = tree_to_polynomial(tree, basis)  # path-expansion route
        dist = Distribution.product(means, PLUS_MINUS)
        s = poly_session(tree, dist, r=4, seed=seed)
        for _ in range(30):
            subset = random_subset(14, 4, rng, min_size=1)
            idx, masks, _ = s.draw_batch(1)
            got = restriction_value_pm(s, subset, int(idx[0]), basis)
            want = symbolic.restrict(subset).value_at(int(masks[0]))
            assert got == pytest.approx(want, abs=1e-9)

    def test_restriction_coefficient_identity(self):
        # the coefficient of chi_{T \ S} in the restriction equals the
        # original coefficient of chi_T, for every S inside T
        rng = np.random.default_rng(12)
        tree = random_tree(10, 8, rng, max_depth=4)
        spec = exact_transform(tree, UNIFORM_PM)
        for big, coeff in spec.coeffs.items():
            for _ in range(3):
                subset = big & random_subset(10, 10, rng)
                assert spec.restrict(subset).coeff(big & ~subset) == pytest.approx(
                    sum(
                        c
                        for t, c in spec.coeffs.items()
                        if t & subset == subset and t & ~subset == big & ~subset
                    )
                )

    def test_restriction_estimate_budget(self):
        from localmq.fourier import estimate_restriction

        rng = np.random.default_rng(13)
        tree = random_tree(8, 6, rng, max_depth=3)
        s = poly_session(tree, Distribution.uniform(8, PLUS_MINUS), r=2)
        est = estimate_restriction(s, 0b11, m=25)
        assert est.sample_size == 25 and est.values.shape == (25,)
        assert s.mq_count == 25 * 4  # 2**|S| queries per anchored example
        assert len(est.anchors) == 25

    def test_uniform_matches_spectrum_sum(self):
        rng = np.random.default_rng(8)
        tree = random_tree(10, 8, rng, max_depth=4)
        spec = exact_transform(tree, UNIFORM_PM)
        s = poly_session(tree, Distribution.uniform(10, PLUS_MINUS), r=3, seed=5)
        for _ in range(20):
            subset = random_subset(10, 3, rng, min_size=1)
            idx, masks, _ = s.draw_batch(1)
            got = restriction_value_pm(s, subset, int(idx[0]))
            want = spec.restrict(subset).value_at(int(masks[0]))
            assert got == pytest.approx(want, abs=1e-9)


class TestL2Test:
    def test_parity_present(self):
        f = SparsePolynomial(6, {0b11: 1.0}, PLUS_MINUS)
        s = poly_session(f, Distribution.uniform(6, PLUS_MINUS), r=2)
        res = l2_test(s, 0b1, theta=0.5, m=50)
        assert res.passed and res.estimate == pytest.approx(1.0)

    def test_parity_absent(self):
        f = SparsePolynomial(6, {0b11: 1.0}, PLUS_MINUS)
        s = poly_session(f, Distribution.uniform(6, PLUS_MINUS), r=2)
        res = l2_test(s, 0b100, theta=0.5, m=50)
        assert not res.passed and res.estimate == pytest.approx(0.0)

    def test_estimates_near_exact_superset_mass(self):
        rng = np.random.default_rng(3)
        tree = random_tree(14, 16, rng, max_depth=4)
        spec = exact_transform(tree, UNIFORM_PM)
        ver = VerifierOracle()
        s = poly_session(tree, Distribution.uniform(14, PLUS_MINUS), r=4, seed=1)
        worst = 0.0
        for _ in range(50):
            subset = random_subset(14, 4, rng, min_size=1)
            res = l2_test(s, subset, theta=0.1, m=12_000)
            exact = ver.exact_cond_l2(spec, subset)
            worst = max(worst, abs(res.estimate - exact))
        assert worst < 0.02


class TestNonzeroTest:
    def test_constant_restriction(self):
        f = SparsePolynomial(6, {0b11: 1.0}, ZERO_ONE)
        s = poly_session(f, Distribution.uniform(6, ZERO_ONE), r=2)
        res = nonzero_test(s, 0b11, theta=1.0, zero_tol=1e-10, m=40)
        assert res.passed and res.estimate == 1.0

    def test_nonzero_constant_term_bound(self):
        # exact Pr[f != 0] >= (1/(1+alpha))^log2(t) when the constant term
        # survives; the sampled estimate sits near the exact value
        rng = np.random.default_rng(4)
        f = random_sparse_poly(10, 6, rng, max_degree=4, include_constant=True)
        dist = random_smooth_table(10, 1.5, rng, domain=ZERO_ONE)
        alpha = verify_smoothness(dist)
        ver = VerifierOracle()
        exact = ver.exact_nonzero_prob(f, dist, tol=1e-12)
        bound = (1.0 / (1.0 + alpha)) ** math.log2(f.sparsity)
        assert exact >= bound - 1e-12
        s = poly_session(f, dist, r=0, seed=2)
        res = nonzero_test(s, 0, theta=bound, zero_tol=1e-10, m=4000)
        assert res.passed
        assert abs(res.estimate - exact) < 0.05

    def test_sampled_estimate_vs_symbolic_enumeration(self):
        rng = np.random.default_rng(7)
        f = random_sparse_poly(12, 6, rng, max_degree=5)
        dist = random_smooth_table(12, 1.5, rng, domain=ZERO_ONE)
        ver = VerifierOracle()
        s = poly_session(f, dist, r=3, seed=3)
        for _ in range(10):
            subset = random_subset(12, 3, rng, min_size=1)
            exact = ver.exact_nonzero_prob(f.restrict(subset), dist, tol=1e-10)
            res = nonzero_test(s, subset, theta=0.5, zero_tol=1e-10, m=6000)
            assert abs(res.estimate - exact) < 0.02


class TestDefaultSamples:
    def test_hoeffding_formula(self):
        # independent recomputation of the two-sided bound
        theta_gap, delta = 0.1, 0.05
        expected = math.ceil(math.log(2 / delta) / (2 * (theta_gap / 2) ** 2))
        assert default_test_samples(theta_gap, delta) == expected

    def test_range_rescaling(self):
        assert default_test_samples(0.1, 0.05, value_range=2.0) == default_test_samples(
            0.05, 0.05
        )

    def test_rejects_bad_inputs(self):
        from localmq import ContractViolation

        with pytest.raises(ContractViolation):
            default_test_samples(0.0, 0.05)
