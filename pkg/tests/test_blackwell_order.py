import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blackwell.blackwell_order import (
    PiecewiseLinearUtility,
    Verdict,
    _align,
    blackwell_compare,
    blackwell_dominates,
    compare_llr,
    curve_leq,
    expected_indirect_utility,
    fosd_perfected,
    matching_utility,
    mps_check,
    perfected_cdf,
    same_llr_law,
    threshold_utility,
    verify_garbling,
)
from blackwell.errors import InvalidLLR, MeanMismatch, NonConvexUtility, OracleDisagreement
from blackwell.experiment import (
    AtomicDistribution,
    PosteriorDistribution,
    garble,
    llr_distribution,
    make_experiment,
    power_llr,
    posterior_distribution,
    random_experiment,
    random_garbling,
)
from blackwell.fixtures import symmetric
from blackwell.renyi import default_grid, renyi_values


@st.composite
def experiments(draw, lo=2, hi=5):
    m = draw(st.integers(lo, hi))
    rows = [np.array(draw(st.lists(st.floats(0.02, 1.0), min_size=m, max_size=m))) for _ in range(2)]
    return make_experiment(None, *(r / r.sum() for r in rows))


@st.composite
def garbled_pairs(draw):
    P = draw(experiments())
    k = draw(st.integers(1, 4))
    sigma = np.array(draw(st.lists(st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k), min_size=P.size, max_size=P.size)))
    sigma = sigma + 1e-3
    return P, garble(P, sigma / sigma.sum(axis=1, keepdims=True))


def random_convex_utility(rng, kinks=4):
    b = np.sort(np.concatenate(([0.0, 1.0], rng.uniform(0.01, 0.99, kinks))))
    slopes = np.sort(rng.normal(size=b.size - 1))
    c = rng.normal()
    v = np.concatenate(([c], c + np.cumsum(slopes * np.diff(b))))
    return PiecewiseLinearUtility(b, v)


def brute_perfected(F1, a):
    """``Pr(X - E <= a)`` from the definition: ``Pr(E >= u - a)`` is ``exp(a - u)`` above ``a``."""
    return float(np.sum(F1.probs * np.where(F1.values <= a, 1.0, np.exp(np.minimum(a - F1.values, 0.0)))))


class TestPerfectedCurve:
    @given(experiments())
    def test_matches_definition(self, P):
        F1 = llr_distribution(P, 1)
        curve = perfected_cdf(F1)
        for a in np.linspace(F1.min - 3, F1.max + 1, 25):
            assert curve(a) == pytest.approx(brute_perfected(F1, a), abs=1e-12)
            assert curve.upper(a) == pytest.approx(1 - brute_perfected(F1, a), abs=1e-12)

    @given(experiments())
    def test_continuous_monotone_and_bounded(self, P):
        curve = perfected_cdf(llr_distribution(P, 1))
        assert curve.continuity_defect() < 1e-12
        a = np.linspace(-20, 20, 400)
        y = curve(a)
        assert np.all(np.diff(y) >= -1e-15)
        assert np.all((0 <= y) & (y <= 1 + 1e-12))
        assert curve(1e3) == pytest.approx(1.0)

    def test_rejects_non_llr_law(self):
        with pytest.raises(InvalidLLR):
            perfected_cdf(AtomicDistribution(np.array([0.0, 1.0]), np.array([0.5, 0.5])))

    def test_tail_precision_at_large_power(self):
        curve = perfected_cdf(power_llr(symmetric(0.8), 2000))
        assert 0 < curve(-1500.0) < 1e-300 or np.isfinite(curve.log_lower(-1500.0))
        assert np.isfinite(curve.log_lower(-1500.0))

    def test_curve_leq_witness(self):
        Fp = perfected_cdf(llr_distribution(symmetric(0.7), 1))
        Fq = perfected_cdf(llr_distribution(symmetric(0.9), 1))
        res = curve_leq(Fp, Fq)
        assert not res.holds and res.witness is not None and res.excess > 0
        assert curve_leq(Fq, Fp).holds


class TestOrder:
    def test_alignment_only_absorbs_rounding(self):
        F = AtomicDistribution.from_atoms([-1e4, 0.0, 1e4], [0.2, 0.3, 0.5])
        near = AtomicDistribution.from_atoms([-1e4 + 1e-13, 3.0], [0.4, 0.6])
        far = AtomicDistribution.from_atoms([-1e4 + 1e-6, 3.0], [0.4, 0.6])
        assert _align(F, near).values[0] == -1e4
        assert _align(F, far) is far

    @given(garbled_pairs())
    def test_garbling_is_dominated(self, pair):
        P, Q = pair
        assert blackwell_dominates(P, Q).p_weakly_dominates
        assert blackwell_dominates(P, Q, "mps").p_weakly_dominates

    @given(experiments(), experiments())
    def test_oracles_agree(self, P, Q):
        assert blackwell_dominates(P, Q) is blackwell_dominates(P, Q, "mps")

    @given(experiments(), experiments())
    def test_antisymmetric_verdicts(self, P, Q):
        flip = {Verdict.DOMINATES: Verdict.DOMINATED_BY, Verdict.DOMINATED_BY: Verdict.DOMINATES}
        v, w = blackwell_dominates(P, Q), blackwell_dominates(Q, P)
        assert w is flip.get(v, v)

    def test_self_and_trivial(self):
        P = symmetric(0.7)
        assert blackwell_dominates(P, P) is Verdict.EQUIVALENT
        assert blackwell_dominates(P, symmetric(0.5)) is Verdict.DOMINATES
        res = blackwell_compare(P, symmetric(0.5))
        assert res.strict and res.witness_pq is None and res.witness_qp is not None

    def test_relabelled_outcomes_are_equivalent(self):
        P = make_experiment(None, [0.2, 0.3, 0.5], [0.5, 0.3, 0.2])
        Q = make_experiment(None, [0.5, 0.2, 0.3], [0.2, 0.5, 0.3])
        assert blackwell_dominates(P, Q) is Verdict.EQUIVALENT

    def test_splitting_outcomes_changes_nothing(self):
        P = make_experiment(None, [0.2, 0.8], [0.6, 0.4])
        Q = make_experiment(None, [0.1, 0.1, 0.8], [0.3, 0.3, 0.4])
        assert blackwell_dominates(P, Q) is Verdict.EQUIVALENT

    def test_incomparable_witnesses(self):
        P = make_experiment(None, [0.1, 0.5, 0.4], [0.4, 0.5, 0.1])
        Q = symmetric(0.695)
        res = blackwell_compare(P, Q)
        assert res.verdict is Verdict.INCOMPARABLE
        assert res.witness_pq is not None and res.witness_qp is not None

    def test_cross_validate(self, rng):
        for _ in range(50):
            P, Q = random_experiment(rng, 3), random_experiment(rng, 3)
            assert blackwell_compare(P, Q, "cross-validate").verdict is blackwell_dominates(P, Q)

    def test_cross_validate_raises_on_disagreement(self, monkeypatch):
        import blackwell.blackwell_order as bo

        monkeypatch.setattr(bo, "mps_check", lambda a, b, tol=1e-9: False)
        with pytest.raises(OracleDisagreement):
            blackwell_compare(symmetric(0.7), symmetric(0.6), "cross-validate")

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            blackwell_compare(symmetric(0.7), symmetric(0.6), "fast")

    def test_llr_laws_accepted(self):
        F, G = llr_distribution(symmetric(0.8), 1), llr_distribution(symmetric(0.6), 1)
        assert fosd_perfected(F, G) and not fosd_perfected(G, F)
        assert compare_llr(F, G).verdict is Verdict.DOMINATES
        assert same_llr_law(F, F) and not same_llr_law(F, G)


class TestUtilities:
    def test_dominance_means_higher_payoff(self, rng):
        for _ in range(40):
            P = random_experiment(rng, 4)
            Q = garble(P, random_garbling(rng, 4, 3))
            for _ in range(5):
                v = random_convex_utility(rng)
                assert expected_indirect_utility(P, v) >= expected_indirect_utility(Q, v) - 1e-12

    def test_incomparable_pair_has_separating_utility(self):
        P = make_experiment(None, [0.1, 0.5, 0.4], [0.4, 0.5, 0.1])
        Q = symmetric(0.695)
        best_p = max(expected_indirect_utility(P, threshold_utility(t)) - expected_indirect_utility(Q, threshold_utility(t))
                     for t in np.linspace(0.01, 0.99, 99))
        best_q = max(expected_indirect_utility(Q, threshold_utility(t)) - expected_indirect_utility(P, threshold_utility(t))
                     for t in np.linspace(0.01, 0.99, 99))
        assert best_p > 0 and best_q > 0

    def test_matching_utility(self):
        v = matching_utility()
        np.testing.assert_allclose(v([0.0, 0.25, 0.5, 0.9]), [1.0, 0.75, 0.5, 0.9])
        assert expected_indirect_utility(symmetric(0.7), v) == pytest.approx(0.7)

    def test_threshold_utility(self):
        v = threshold_utility(0.8)
        np.testing.assert_allclose(v([0.5, 0.8, 0.9, 1.0]), [0.0, 0.0, 0.1, 0.2], atol=1e-15)

    def test_nonconvex_rejected(self):
        with pytest.raises(NonConvexUtility):
            PiecewiseLinearUtility.from_kinks([(0, 0), (0.5, 1), (1, 0)])
        with pytest.raises(NonConvexUtility):
            PiecewiseLinearUtility(np.array([0.0]), np.array([1.0]))


class TestMPS:
    def test_mean_mismatch(self):
        pi = PosteriorDistribution(np.array([0.0]), np.array([1.0]), np.array([1.0]))
        tau = posterior_distribution(symmetric(0.7))
        skew = PosteriorDistribution(np.array([math.log(3)]), np.array([1.0]), np.array([1.0]))
        assert mps_check(tau, pi)
        with pytest.raises(MeanMismatch):
            mps_check(skew, pi)

    def test_spread(self):
        assert mps_check(posterior_distribution(symmetric(0.9)), posterior_distribution(symmetric(0.6)))
        assert not mps_check(posterior_distribution(symmetric(0.6)), posterior_distribution(symmetric(0.9)))


class TestGarblingCheck:
    def test_verify(self, rng):
        P = random_experiment(rng, 4)
        sigma = random_garbling(rng, 4, 2)
        Q = garble(P, sigma)
        assert verify_garbling(P, Q, sigma)
        assert not verify_garbling(P, Q, random_garbling(rng, 4, 2))
        assert not verify_garbling(P, Q, random_garbling(rng, 4, 3))

    def test_blackwell_implies_renyi(self, rng):
        grid = default_grid(grid_points=64)
        for _ in range(30):
            P, Q = random_experiment(rng, 3), random_experiment(rng, 3)
            if blackwell_dominates(P, Q) is Verdict.DOMINATES:
                for theta in (0, 1):
                    assert np.all(renyi_values(P, theta, grid) >= renyi_values(Q, theta, grid) - 1e-12)
