import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blackwell.errors import DimensionMismatch, DuplicateLabel, ExperimentError, RowSumMismatch, SizeOverflow, ZeroEntry
from blackwell.experiment import (
    AtomicDistribution,
    compositions,
    convolution_power,
    convolve,
    discretize_example1,
    experiment_from_llr,
    garble,
    is_generic_pair,
    is_trivial,
    llr_distribution,
    make_experiment,
    merge_atoms,
    mixture,
    posterior_distribution,
    power,
    power_llr,
    product,
    random_experiment,
    random_garbling,
    threshold_garbling,
)


def pmf(size):
    return st.lists(st.floats(0.05, 1.0), min_size=size, max_size=size).map(lambda v: np.array(v) / sum(v))


@st.composite
def experiments(draw, max_outcomes=4):
    m = draw(st.integers(2, max_outcomes))
    return make_experiment(None, draw(pmf(m)), draw(pmf(m)))


class TestConstruction:
    def test_labels_default(self):
        P = make_experiment(None, [0.5, 0.5], [0.25, 0.75])
        assert P.outcomes == ("x1", "x2")
        assert P.size == 2

    def test_fraction_inputs_round_once(self):
        P = make_experiment(None, [Fraction(1, 3), Fraction(2, 3)], [Fraction(2, 3), Fraction(1, 3)])
        assert P.p0[0] == 1 / 3 and P.p0[1] == 2 / 3

    @pytest.mark.parametrize(
        "p0,p1,exc",
        [
            ([0.0, 1.0], [0.5, 0.5], ZeroEntry),
            ([0.5, 0.6], [0.5, 0.5], RowSumMismatch),
            ([0.5, 0.5], [1.0], DimensionMismatch),
            ([-0.1, 1.1], [0.5, 0.5], ZeroEntry),
        ],
    )
    def test_invalid_rows(self, p0, p1, exc):
        with pytest.raises(exc):
            make_experiment(None, p0, p1)

    def test_duplicate_labels(self):
        with pytest.raises(DuplicateLabel):
            make_experiment(["a", "a"], [0.5, 0.5], [0.5, 0.5])

    def test_arrays_are_read_only(self):
        P = make_experiment(None, [0.5, 0.5], [0.25, 0.75])
        with pytest.raises(ValueError):
            P.p0[0] = 0.1

    def test_tiny_rounding_kept_bit_exact(self):
        row = [0.1, 0.2, 0.7]
        P = make_experiment(None, row, row[::-1])
        assert P.p0.tolist() == row


class TestAtoms:
    def test_merge_groups_close_values(self):
        v, lp = merge_atoms([1.0, 1.0 + 1e-12, 2.0], [0.25, 0.25, 0.5])
        np.testing.assert_allclose(v, [1.0, 2.0])
        np.testing.assert_allclose(np.exp(lp), [0.5, 0.5])

    def test_merge_in_log_space_keeps_underflowing_mass(self):
        X = AtomicDistribution.from_atoms([0.0, 1.0], log_probs=[-2000.0, 0.0])
        assert X.probs[0] == 0.0
        assert X.log_probs[0] == -2000.0

    def test_validation(self):
        with pytest.raises(ExperimentError):
            AtomicDistribution(np.array([1.0, 0.0]), np.array([0.5, 0.5]))
        with pytest.raises(ExperimentError):
            AtomicDistribution(np.array([0.0]), np.array([0.0]))

    def test_moments_and_tails(self):
        X = AtomicDistribution(np.array([-1.0, 0.0, 2.0]), np.array([0.25, 0.25, 0.5]))
        assert X.mean == pytest.approx(0.75)
        assert X.variance == pytest.approx(0.25 * 1.75**2 + 0.25 * 0.75**2 + 0.5 * 1.25**2)
        assert X.bound == 2.0
        assert X.tail(0.0) == pytest.approx(0.5)
        assert X.tail(0.0, strict=False) == pytest.approx(0.75)
        assert X.cdf(-2.0) == 0.0 and X.cdf(5.0) == pytest.approx(1.0)
        np.testing.assert_allclose(X.negate().values, [-2.0, 0.0, 1.0])

    def test_compositions(self):
        for n, k in [(0, 3), (4, 1), (5, 3), (6, 4)]:
            c = compositions(n, k)
            assert c.shape == (math.comb(n + k - 1, k - 1), k)
            assert np.all(c.sum(axis=1) == n) and np.all(c >= 0)
            assert len({tuple(r) for r in c}) == c.shape[0]


class TestLLR:
    @given(experiments())
    def test_change_of_measure(self, P):
        assert abs(llr_distribution(P, 1).change_of_measure_residual()) < 1e-12
        assert abs(llr_distribution(P, 0).change_of_measure_residual()) < 1e-12

    @given(experiments())
    def test_state_zero_is_reflection(self, P):
        X1, X0 = llr_distribution(P, 1), llr_distribution(P, 0)
        np.testing.assert_allclose(X0.values, -X1.values[::-1], atol=1e-12)
        # the two laws are linked by exponential tilting
        np.testing.assert_allclose(X0.probs[::-1], X1.probs * np.exp(-X1.values), rtol=1e-9)

    def test_kl_is_mean(self):
        P = make_experiment(None, [0.2, 0.8], [0.6, 0.4])
        kl = 0.6 * math.log(3) + 0.4 * math.log(0.5)
        assert llr_distribution(P, 1).mean == pytest.approx(kl)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_power_matches_explicit_product(self, n):
        rng = np.random.default_rng(n)
        P = random_experiment(rng, 3)
        explicit = llr_distribution(power(P, n), 1)
        fast = power_llr(P, n, 1)
        np.testing.assert_allclose(fast.values, explicit.values, atol=1e-9)
        np.testing.assert_allclose(fast.probs, explicit.probs, rtol=1e-9)

    @given(experiments(3), st.integers(2, 6))
    def test_convolution_moments(self, P, n):
        X = llr_distribution(P, 1)
        S = convolution_power(X, n)
        assert S.total_mass == pytest.approx(1.0)
        assert S.mean == pytest.approx(n * X.mean, abs=1e-9)
        assert S.variance == pytest.approx(n * X.variance, rel=1e-7, abs=1e-9)

    def test_convolve_matches_brute_force(self):
        X = AtomicDistribution(np.array([0.0, 1.0]), np.array([0.3, 0.7]))
        Y = AtomicDistribution(np.array([-1.0, 2.0]), np.array([0.4, 0.6]))
        Z = convolve(X, Y)
        brute = {}
        for (a, p), (b, q) in itertools.product(zip(X.values, X.probs), zip(Y.values, Y.probs)):
            brute[a + b] = brute.get(a + b, 0) + p * q
        np.testing.assert_allclose(Z.values, sorted(brute))
        np.testing.assert_allclose(Z.probs, [brute[k] for k in sorted(brute)])

    def test_enumeration_cap(self):
        X = AtomicDistribution(np.arange(5.0), np.full(5, 0.2))
        with pytest.raises(SizeOverflow):
            convolution_power(X, 200, cap=1000)

    def test_large_power_keeps_identity(self):
        P = make_experiment(None, [0.7, 0.3], [0.2, 0.8])
        S = power_llr(P, 5000)
        assert np.any(S.probs == 0.0)
        assert abs(S.change_of_measure_residual()) < 1e-9

    def test_experiment_from_llr_round_trip(self):
        P = make_experiment(None, [0.2, 0.3, 0.5], [0.5, 0.3, 0.2])
        F = llr_distribution(P, 1)
        G = llr_distribution(experiment_from_llr(F), 1)
        np.testing.assert_allclose(G.values, F.values, atol=1e-12)
        np.testing.assert_allclose(G.probs, F.probs, rtol=1e-12)


class TestCombinators:
    def test_product_sizes(self):
        P = make_experiment(None, [0.5, 0.5], [0.25, 0.75])
        Q = make_experiment(None, [0.2, 0.3, 0.5], [0.5, 0.3, 0.2])
        R = product(P, Q)
        assert R.size == 6
        assert R.p0.sum() == pytest.approx(1.0)
        with pytest.raises(SizeOverflow):
            product(P, Q, cap=5)

    def test_garble_rows(self, rng):
        P = random_experiment(rng, 4)
        sigma = random_garbling(rng, 4, 3)
        Q = garble(P, sigma)
        assert Q.p0.sum() == pytest.approx(1.0) and Q.p1.sum() == pytest.approx(1.0)
        with pytest.raises(DimensionMismatch):
            garble(P, np.eye(3))
        with pytest.raises(RowSumMismatch):
            garble(P, np.full((4, 2), 0.4))

    def test_mixture(self):
        P = make_experiment(None, [0.5, 0.5], [0.25, 0.75])
        Q = make_experiment(None, [0.9, 0.1], [0.1, 0.9])
        M = mixture(P, Q, 0.25)
        assert M.size == 4 and M.p1.sum() == pytest.approx(1.0)
        assert mixture(P, Q, 1.0).size == 2

    def test_posterior_mean_is_prior(self, rng):
        for _ in range(20):
            P = random_experiment(rng, 5)
            assert posterior_distribution(P).mean == pytest.approx(0.5)

    def test_trivial_and_generic(self):
        T = make_experiment(None, [0.3, 0.7], [0.3, 0.7])
        P = make_experiment(None, [0.2, 0.8], [0.8, 0.2])
        assert is_trivial(T) and not is_trivial(P)
        assert not is_generic_pair(P, P)
        assert is_generic_pair(P, make_experiment(None, [0.4, 0.6], [0.6, 0.4]))


class TestDiscretization:
    def test_bin_masses_exact(self):
        E = discretize_example1(4)
        np.testing.assert_array_equal(E.p0, np.full(4, 0.25))
        expected = [Fraction(1, 8) + Fraction(2 * k + 1, 32) for k in range(4)]
        np.testing.assert_array_equal(E.p1, [float(x) for x in expected])

    def test_two_bins_is_binary_experiment(self):
        E = discretize_example1(2)
        np.testing.assert_array_equal(E.p1, [0.375, 0.625])

    def test_threshold_garbling(self):
        sigma = threshold_garbling(4)
        np.testing.assert_array_equal(sigma, [[1, 0], [1, 0], [0, 1], [0, 1]])
