"""Blackwell comparison of repeated experiments.

Everything here works on state-1 LLR laws: the law of ``P^{(x)n}`` is the
n-fold convolution of that of ``P``, and the perfected-LLR test decides
dominance from it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blackwell_order import Verdict, compare_llr
from .errors import ExperimentError, OracleDisagreement, PreconditionFailed
from .experiment import (
    ENUMERATION_CAP,
    AtomicDistribution,
    FiniteExperiment,
    convolution_power,
    convolve,
    experiment_from_llr,
    is_generic_pair,
    llr_distribution,
    power_llr,
)
from .large_deviations import sample_bound
from .renyi import DominatesOnGrid, FailsAt, RenyiVerdict, dominance_ratio, renyi_order_check

DEFAULT_CAP = 64


@dataclass(frozen=True, eq=False)
class DominanceReport:
    vector: list[Verdict]
    minimal_n: int | None
    theory_n0: int | None
    renyi_verdict: RenyiVerdict | None
    generic: bool

    @property
    def cap(self) -> int:
        return len(self.vector)

    def __str__(self) -> str:
        codes = "".join({"Dominates": "D", "DominatedBy": "d", "Equivalent": "=", "Incomparable": "."}[v.value] for v in self.vector)
        return (
            f"vector[1..{self.cap}]={codes} minimal_n={self.minimal_n} (up to cap) "
            f"theory_n0={self.theory_n0} renyi={self.renyi_verdict} generic={self.generic}"
        )


def _minimal_suffix(vector: list[Verdict]) -> int | None:
    n = None
    for i in range(len(vector), 0, -1):
        if not vector[i - 1].p_weakly_dominates:
            break
        n = i
    return n


def dominance_vector(P: FiniteExperiment, Q: FiniteExperiment, cap: int = DEFAULT_CAP,
                     with_theory: bool = True, enumeration_cap: int = ENUMERATION_CAP) -> DominanceReport:
    """Verdict for ``P^n`` against ``Q^n`` at every ``n`` up to ``cap``; dominance is not assumed monotone in ``n``."""
    vector = [
        compare_llr(power_llr(P, n, 1, enumeration_cap), power_llr(Q, n, 1, enumeration_cap)).verdict
        for n in range(1, cap + 1)
    ]
    generic = is_generic_pair(P, Q)
    verdict = renyi_order_check(P, Q)
    n0 = None
    if with_theory and generic and isinstance(verdict, DominatesOnGrid):
        try:
            n0 = sample_bound(P, Q, check_order=False).n0
        except ExperimentError:
            n0 = None
    return DominanceReport(vector, _minimal_suffix(vector), n0, verdict, generic)


@dataclass(frozen=True)
class PredictDominates:
    n0: int | None
    eta: float | None = None

    def __str__(self) -> str:
        return f"PredictDominates(n0={self.n0})"


@dataclass(frozen=True)
class PredictNotDominates:
    witness: FailsAt

    def __str__(self) -> str:
        return f"PredictNotDominates({self.witness})"


@dataclass(frozen=True)
class NonGenericPair:
    def __str__(self) -> str:
        return "NonGeneric"


LargeSampleVerdict = PredictDominates | PredictNotDominates | NonGenericPair


def large_sample_verdict(P, Q) -> LargeSampleVerdict:
    """Genericity gate, then the Rényi order; non-generic pairs get no prediction."""
    if not is_generic_pair(P, Q):
        return NonGenericPair()
    verdict = renyi_order_check(P, Q)
    if isinstance(verdict, FailsAt):
        return PredictNotDominates(verdict)
    if not isinstance(verdict, DominatesOnGrid):
        return PredictNotDominates(FailsAt(verdict.theta or 0, verdict.t or math.nan, 0.0))
    if isinstance(P, FiniteExperiment) and isinstance(Q, FiniteExperiment):
        try:
            s = sample_bound(P, Q, check_order=False)
            return PredictDominates(s.n0, s.eta)
        except ExperimentError:
            pass
    return PredictDominates(None)


def mix_laws(laws: list[AtomicDistribution], weights) -> AtomicDistribution:
    """Law of the LLR of a mixture experiment whose component is revealed."""
    values = np.concatenate([L.values for L in laws])
    log_probs = np.concatenate([math.log(w) + L.log_probs for L, w in zip(laws, weights)])
    return AtomicDistribution.from_atoms(values, log_probs=log_probs)


_POINT_MASS = AtomicDistribution(np.array([0.0]), np.array([1.0]))


def catalyst_llr(F1: AtomicDistribution, G1: AtomicDistribution, n: int) -> AtomicDistribution:
    """State-1 LLR law of ``(1/n) sum_{j<n} P^j (x) Q^{n-j}``."""

    def pw(X, k):
        return _POINT_MASS if k == 0 else convolution_power(X, k)

    parts = [convolve(pw(F1, j), pw(G1, n - j)) for j in range(n)]
    return mix_laws(parts, [1.0 / n] * n)


def catalyst(P: FiniteExperiment, Q: FiniteExperiment, n: int) -> FiniteExperiment:
    """Experiment ``R`` with ``P (x) R`` dominating ``Q (x) R``, given ``P^n`` dominates ``Q^n``.

    ``R`` is returned in LLR-reduced form: one outcome per LLR value, which is
    Blackwell-equivalent to the explicit mixture of products.
    """
    if n < 1:
        raise PreconditionFailed("n must be >= 1")
    F1, G1 = llr_distribution(P, 1), llr_distribution(Q, 1)
    if not compare_llr(power_llr(P, n), power_llr(Q, n)).verdict.p_weakly_dominates:
        raise PreconditionFailed(f"P^{n} does not dominate Q^{n}")
    R1 = catalyst_llr(F1, G1, n)
    check = compare_llr(convolve(F1, R1), convolve(G1, R1))
    if not check.verdict.p_weakly_dominates:
        raise OracleDisagreement(f"catalyst postcondition failed: {check.verdict}")
    return experiment_from_llr(R1, prefix="r")


@dataclass(frozen=True)
class RatioSearch:
    pairs: list[tuple[int, int]]
    best: float
    grid_ratio: float

    @property
    def gap(self) -> float:
        return self.grid_ratio - self.best


def ratio_search(P: FiniteExperiment, Q: FiniteExperiment, n_max: int, enumeration_cap: int = ENUMERATION_CAP) -> RatioSearch:
    """Largest ``m`` with ``P^n`` dominating ``Q^m`` for each ``n <= n_max``.

    ``Q^m`` dominates ``Q^{m-1}``, so the feasible ``m`` form an initial
    segment and an upward scan stops at the first failure.  The grid dominance
    ratio bounds the scan from above.
    """
    grid_ratio = float(dominance_ratio(P, Q))
    pairs = []
    for n in range(1, n_max + 1):
        Fn = power_llr(P, n, 1, enumeration_cap)
        limit = int(math.floor(n * grid_ratio + 1e-9)) + 1
        m = 0
        while m < limit and compare_llr(Fn, power_llr(Q, m + 1, 1, enumeration_cap)).verdict.p_weakly_dominates:
            m += 1
        pairs.append((n, m))
    best = max(m / n for n, m in pairs)
    return RatioSearch(pairs, best, grid_ratio)
