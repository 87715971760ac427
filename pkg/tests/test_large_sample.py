import numpy as np
import pytest

from blackwell.blackwell_order import Verdict, blackwell_dominates
from blackwell.errors import OracleDisagreement, PreconditionFailed
from blackwell.experiment import llr_distribution, make_experiment, mixture, power, product
from blackwell.fixtures import azrieli, eventualfail, example1, symmetric
from blackwell.large_sample import (
    NonGenericPair,
    PredictDominates,
    PredictNotDominates,
    catalyst,
    catalyst_llr,
    dominance_vector,
    large_sample_verdict,
    mix_laws,
    ratio_search,
)
from blackwell.renyi import DominatesOnGrid

I, D = Verdict.INCOMPARABLE, Verdict.DOMINATES


class TestDominanceVector:
    def test_frozen_vector(self):
        report = dominance_vector(*azrieli(0.305, 0.1), cap=12, with_theory=False)
        assert report.vector == [I, D, I] + [D] * 9
        assert report.minimal_n == 4
        assert str(report).startswith("vector[1..12]=.D.DDDDDDDDD")

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_agrees_with_explicit_products(self, n):
        P, Q = azrieli(0.305, 0.1)
        report = dominance_vector(P, Q, cap=n, with_theory=False)
        assert report.vector[-1] is blackwell_dominates(power(P, n), power(Q, n))

    def test_theory_bound_attached(self):
        report = dominance_vector(symmetric(0.8), symmetric(0.65), cap=3)
        assert report.theory_n0 == 62974
        assert report.generic and isinstance(report.renyi_verdict, DominatesOnGrid)
        assert report.vector == [D, D, D] and report.minimal_n == 1

    def test_no_suffix(self):
        report = dominance_vector(symmetric(0.65), symmetric(0.8), cap=4, with_theory=False)
        assert report.minimal_n is None


class TestVerdict:
    def test_predicts_dominance(self):
        v = large_sample_verdict(symmetric(0.8), symmetric(0.65))
        assert isinstance(v, PredictDominates) and v.n0 == 62974

    def test_predicts_failure(self):
        v = large_sample_verdict(symmetric(0.65), symmetric(0.8))
        assert isinstance(v, PredictNotDominates)

    def test_non_generic(self):
        assert isinstance(large_sample_verdict(*eventualfail(1e-4)), NonGenericPair)

    def test_closed_form_experiment(self):
        v = large_sample_verdict(*example1(0.63, None))
        assert isinstance(v, PredictDominates) and v.n0 is None


class TestCatalyst:
    def test_reduced_form_matches_explicit_mixture(self):
        P, Q = azrieli(0.305, 0.1)
        # explicit (1/2)(Q (x) Q) + (1/2)(P (x) Q), the n = 2 mixture of products
        explicit = mixture(power(Q, 2), product(P, Q), 0.5)
        R = catalyst(P, Q, 2)
        assert blackwell_dominates(R, explicit) is Verdict.EQUIVALENT

    def test_dominance_after_catalysis(self):
        P, Q = azrieli(0.305, 0.1)
        R = catalyst(P, Q, 2)
        assert blackwell_dominates(product(P, R), product(Q, R)) is Verdict.DOMINATES

    def test_precondition(self):
        P, Q = azrieli(0.305, 0.1)
        with pytest.raises(PreconditionFailed):
            catalyst(P, Q, 3)
        with pytest.raises(PreconditionFailed):
            catalyst(P, Q, 0)

    def test_postcondition_is_checked(self, monkeypatch):
        import blackwell.large_sample as ls

        P, Q = azrieli(0.305, 0.1)
        real = ls.compare_llr
        calls = []

        def flaky(F, G, *a, **k):
            calls.append(1)
            res = real(F, G, *a, **k)
            if len(calls) == 2:
                return type(res)(Verdict.INCOMPARABLE, False, 0.0, 0.0)
            return res

        monkeypatch.setattr(ls, "compare_llr", flaky)
        with pytest.raises(OracleDisagreement):
            catalyst(P, Q, 2)

    def test_mixture_law_is_llr_law(self):
        F = llr_distribution(symmetric(0.7), 1)
        G = llr_distribution(symmetric(0.9), 1)
        M = mix_laws([F, G], [0.25, 0.75])
        assert abs(M.change_of_measure_residual()) < 1e-12
        C = catalyst_llr(F, G, 3)
        assert abs(C.change_of_measure_residual()) < 1e-12


class TestRatio:
    def test_square_against_base(self):
        P = symmetric(0.7)
        res = ratio_search(power(P, 2), P, 4)
        assert res.pairs == [(n, 2 * n) for n in range(1, 5)]
        assert res.best == pytest.approx(2.0)

    def test_below_grid_ratio(self):
        res = ratio_search(symmetric(0.8), symmetric(0.65), 5)
        assert res.best <= res.grid_ratio + 1e-9
        assert res.gap >= -1e-9
        assert all(m >= n for n, m in res.pairs)

    def test_weak_experiment(self):
        P = make_experiment(None, [0.45, 0.55], [0.55, 0.45])
        res = ratio_search(symmetric(0.9), P, 2)
        m = res.pairs[0][1]
        assert m > 5
        assert blackwell_dominates(symmetric(0.9), power(P, m)).p_weakly_dominates
        assert not blackwell_dominates(symmetric(0.9), power(P, m + 1)).p_weakly_dominates
        assert np.isfinite(res.grid_ratio)
