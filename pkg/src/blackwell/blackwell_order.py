"""Exact Blackwell comparison of finite experiments.

Two independent deciders are provided.  The primary one compares perfected
LLR distributions: ``P`` dominates ``Q`` iff ``Ft_P(a) <= Ft_Q(a)`` for every
``a``, where ``Ft(a) = F1(a) + e^a * sum_{u > a} e^{-u} p(u)``.  The second
one checks that the posterior distribution of ``P`` is a mean-preserving
spread of that of ``Q``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidLLR, MeanMismatch, NonConvexUtility, OracleDisagreement
from .experiment import (
    MERGE_TOL,
    AtomicDistribution,
    FiniteExperiment,
    PosteriorDistribution,
    garble,
    llr_distribution,
    make_garbling,
    posterior_distribution,
)

CURVE_RTOL = 1e-9
MPS_TOL = 1e-9
LLR_IDENTITY_TOL = 1e-6
ALIGN_ULPS = 64.0


class Verdict(enum.Enum):
    DOMINATES = "Dominates"
    DOMINATED_BY = "DominatedBy"
    EQUIVALENT = "Equivalent"
    INCOMPARABLE = "Incomparable"

    def __str__(self) -> str:
        return self.value

    @property
    def p_weakly_dominates(self) -> bool:
        return self in (Verdict.DOMINATES, Verdict.EQUIVALENT)


def _log1mexp(x: np.ndarray) -> np.ndarray:
    """``log(1 - e^x)`` for ``x <= 0``; ``-inf`` at and above zero."""
    x = np.minimum(x, 0.0)
    with np.errstate(divide="ignore"):
        return np.where(x > -math.log(2), np.log(-np.expm1(x)), np.log1p(-np.exp(x)))


@dataclass(frozen=True, eq=False)
class PiecewiseExpCurve:
    """``value(a) = alpha_i + exp(a + log_beta_i)`` on the i-th interval.

    Interval ``i`` holds the points with exactly ``i`` breakpoints ``<= a``.
    All three coefficient arrays are kept as logarithms: ``log_alpha`` is the
    mass at or below the interval, ``log_tail`` the mass above it, so both
    tails of the curve keep relative precision far below the smallest double.
    """

    breakpoints: np.ndarray
    log_alpha: np.ndarray
    log_beta: np.ndarray
    log_tail: np.ndarray

    @property
    def alpha(self) -> np.ndarray:
        return np.exp(self.log_alpha)

    @property
    def beta(self) -> np.ndarray:
        return np.exp(self.log_beta)

    def _segment(self, a) -> np.ndarray:
        return np.searchsorted(self.breakpoints, a, side="right")

    def log_lower(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.float64)
        i = self._segment(a)
        return np.logaddexp(self.log_alpha[i], a + self.log_beta[i])

    def log_upper(self, a) -> np.ndarray:
        """``log(1 - value(a))``."""
        a = np.asarray(a, dtype=np.float64)
        i = self._segment(a)
        with np.errstate(invalid="ignore"):
            out = self.log_tail[i] + _log1mexp(a + self.log_beta[i] - self.log_tail[i])
        return np.where(np.isneginf(self.log_tail[i]), -np.inf, out)

    def __call__(self, a) -> np.ndarray:
        return np.exp(self.log_lower(a))

    def upper(self, a) -> np.ndarray:
        """``1 - value(a)``."""
        return np.exp(self.log_upper(a))

    def continuity_defect(self) -> float:
        a = self.breakpoints
        left = self.alpha[:-1] + np.exp(a + self.log_beta[:-1])
        right = self.alpha[1:] + np.exp(a + self.log_beta[1:])
        return float(np.max(np.abs(left - right))) if a.size else 0.0


def perfected_cdf(F1: AtomicDistribution, check: bool = True) -> PiecewiseExpCurve:
    """Cdf of ``X - E`` with ``X ~ F1`` and ``E`` an independent unit exponential."""
    if check and abs(F1.change_of_measure_residual()) > LLR_IDENTITY_TOL:
        raise InvalidLLR(f"sum e^-u dF1 deviates from 1 by {F1.change_of_measure_residual():.3e}")
    u, lp = F1.values, F1.log_probs
    log_alpha = np.concatenate(([-np.inf], np.logaddexp.accumulate(lp)))
    # reverse running log-sum-exp over atoms strictly above each segment
    log_beta = np.concatenate((np.logaddexp.accumulate((lp - u)[::-1])[::-1], [-np.inf]))
    log_tail = np.concatenate((np.logaddexp.accumulate(lp[::-1])[::-1], [-np.inf]))
    return PiecewiseExpCurve(u, log_alpha, log_beta, log_tail)


@dataclass(frozen=True)
class CurveComparison:
    holds: bool
    witness: float | None
    excess: float


def curve_leq(Fp: PiecewiseExpCurve, Fq: PiecewiseExpCurve, rtol: float = CURVE_RTOL) -> CurveComparison:
    """Is ``Fp(a) <= Fq(a)`` for all ``a``?

    The difference is ``alpha' + beta' e^a`` between consecutive breakpoints of
    either curve, hence monotone there, so breakpoints (and the common limits
    0 and 1) decide.  At each point the smaller tail, lower or upper, is
    compared on the log scale with relative tolerance ``rtol``.
    """
    pts = np.union1d(Fp.breakpoints, Fq.breakpoints)
    lp, lq = Fp.log_lower(pts), Fq.log_lower(pts)
    up, uq = Fp.log_upper(pts), Fq.log_upper(pts)
    low_side = np.maximum(lp, lq) <= np.maximum(up, uq)
    # big should not exceed small by more than the relative tolerance
    big = np.where(low_side, lp, uq)
    small = np.where(low_side, lq, up)
    with np.errstate(invalid="ignore", over="ignore"):
        gap = big - small
        rel = np.where(gap > 0, -np.expm1(-gap), np.where(np.isneginf(big), -1.0, np.expm1(gap)))
    rel = np.where(np.isnan(rel), 0.0, rel)
    bad = rel > rtol
    if not bad.any():
        return CurveComparison(True, None, float(rel.max()))
    i = int(np.argmax(np.where(bad, rel, -np.inf)))
    return CurveComparison(False, float(pts[i]), float(rel[i]))


def _llr(P) -> AtomicDistribution:
    return P if isinstance(P, AtomicDistribution) else llr_distribution(P, 1)


def fosd_perfected(P, Q, rtol: float = CURVE_RTOL) -> bool:
    """``P`` weakly Blackwell-dominates ``Q``; accepts experiments or state-1 LLR laws."""
    return curve_leq(perfected_cdf(_llr(P)), perfected_cdf(_llr(Q)), rtol).holds


def _lambda(pi: PosteriorDistribution, points: np.ndarray) -> np.ndarray:
    """``Lambda(p) = sum_{q <= p} (p - q) pi(q)``, piecewise linear in ``p``."""
    q, w = pi.beliefs, pi.probs
    cw = np.concatenate(([0.0], np.cumsum(w)))
    cqw = np.concatenate(([0.0], np.cumsum(q * w)))
    i = np.searchsorted(q, points, side="right")
    return points * cw[i] - cqw[i]


def mps_check(pi: PosteriorDistribution, tau: PosteriorDistribution, tol: float = MPS_TOL) -> bool:
    """Is ``pi`` a mean-preserving spread of ``tau``?"""
    if abs(pi.mean - tau.mean) > tol:
        raise MeanMismatch(f"posterior means differ: {pi.mean!r} vs {tau.mean!r}")
    pts = np.union1d(pi.beliefs, tau.beliefs)
    return bool(np.all(_lambda(pi, pts) >= _lambda(tau, pts) - tol))


@dataclass(frozen=True)
class BlackwellResult:
    verdict: Verdict
    strict: bool
    witness_pq: float | None
    witness_qp: float | None

    def __str__(self) -> str:
        return str(self.verdict)


def same_llr_law(F: AtomicDistribution, G: AtomicDistribution, tol: float = MERGE_TOL) -> bool:
    if len(F) != len(G):
        return False
    return bool(np.allclose(F.values, G.values, rtol=tol, atol=tol) and np.allclose(F.probs, G.probs, rtol=tol, atol=1e-15))


def _align(F: AtomicDistribution, G: AtomicDistribution, ulps: float = ALIGN_ULPS) -> AtomicDistribution:
    """Move atoms of ``G`` onto atoms of ``F`` that agree up to rounding.

    Equal LLR values computed along different paths can differ in the last
    bits; left apart, the upper tail between them would read as a violation.
    Summation error scales with the largest magnitude in the support, so the
    snap radius is a few ulps of that rather than of each value.
    """
    idx = np.clip(np.searchsorted(F.values, G.values), 1, len(F) - 1) if len(F) > 1 else np.zeros(len(G), dtype=int)
    lo = np.maximum(idx - 1, 0)
    near = np.where(np.abs(F.values[lo] - G.values) <= np.abs(F.values[idx] - G.values), lo, idx)
    scale = max(1.0, float(np.abs(F.values).max()), float(np.abs(G.values).max()))
    close = np.abs(F.values[near] - G.values) <= ulps * np.finfo(np.float64).eps * scale
    if not close.any():
        return G
    return AtomicDistribution.from_atoms(np.where(close, F.values[near], G.values), log_probs=G.log_probs, tol=0.0)


def compare_llr(F1: AtomicDistribution, G1: AtomicDistribution, rtol: float = CURVE_RTOL) -> BlackwellResult:
    G1 = _align(F1, G1)
    Fp, Fq = perfected_cdf(F1), perfected_cdf(G1)
    fwd = curve_leq(Fp, Fq, rtol)
    bwd = curve_leq(Fq, Fp, rtol)
    if fwd.holds and bwd.holds:
        verdict = Verdict.EQUIVALENT
    elif fwd.holds:
        verdict = Verdict.DOMINATES
    elif bwd.holds:
        verdict = Verdict.DOMINATED_BY
    else:
        verdict = Verdict.INCOMPARABLE
    # ties within tolerance count as equivalence, so strictness is just a one-sided verdict
    strict = verdict in (Verdict.DOMINATES, Verdict.DOMINATED_BY)
    return BlackwellResult(verdict, strict, fwd.witness, bwd.witness)


def blackwell_compare(P: FiniteExperiment, Q: FiniteExperiment, mode: str = "perfected") -> BlackwellResult:
    if mode not in ("perfected", "mps", "cross-validate"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "mps":
        pi, tau = posterior_distribution(P), posterior_distribution(Q)
        fwd, bwd = mps_check(pi, tau), mps_check(tau, pi)
        verdict = {
            (True, True): Verdict.EQUIVALENT,
            (True, False): Verdict.DOMINATES,
            (False, True): Verdict.DOMINATED_BY,
            (False, False): Verdict.INCOMPARABLE,
        }[(fwd, bwd)]
        return BlackwellResult(verdict, verdict in (Verdict.DOMINATES, Verdict.DOMINATED_BY), None, None)
    result = compare_llr(llr_distribution(P, 1), llr_distribution(Q, 1))
    if mode == "cross-validate":
        other = blackwell_compare(P, Q, "mps")
        if other.verdict is not result.verdict:
            raise OracleDisagreement(f"perfected-LLR says {result.verdict}, MPS says {other.verdict}")
    return result


def blackwell_dominates(P: FiniteExperiment, Q: FiniteExperiment, mode: str = "perfected") -> Verdict:
    return blackwell_compare(P, Q, mode).verdict


def verify_garbling(P: FiniteExperiment, Q: FiniteExperiment, sigma, tol: float = 1e-9) -> bool:
    """Does ``sigma`` map ``P`` onto ``Q`` up to a relabeling of ``Q``'s outcomes?"""
    sigma = make_garbling(sigma)
    if sigma.shape[0] != P.size:
        raise DimensionMismatch(f"garbling has {sigma.shape[0]} rows, experiment has {P.size} outcomes")
    G = garble(P, sigma)
    if G.size != Q.size:
        return False
    a = np.lexsort((G.p1, G.p0))
    b = np.lexsort((Q.p1, Q.p0))
    return bool(np.allclose(G.p0[a], Q.p0[b], rtol=0, atol=tol) and np.allclose(G.p1[a], Q.p1[b], rtol=0, atol=tol))


@dataclass(frozen=True, eq=False)
class PiecewiseLinearUtility:
    """Convex indirect utility of the belief ``p``, interpolating ``kinks`` and extrapolating linearly."""

    beliefs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.beliefs, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if b.ndim != 1 or b.shape != v.shape or b.size < 2:
            raise NonConvexUtility("need at least two kinks")
        if np.any(np.diff(b) <= 0):
            raise NonConvexUtility("kink beliefs must be strictly ascending")
        slopes = np.diff(v) / np.diff(b)
        if np.any(np.diff(slopes) < -1e-12 * (1 + np.abs(slopes[1:]))):
            raise NonConvexUtility("slopes must be nondecreasing")
        object.__setattr__(self, "beliefs", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_kinks(cls, kinks) -> "PiecewiseLinearUtility":
        kinks = sorted((float(p), float(v)) for p, v in kinks)
        return cls(np.array([k[0] for k in kinks]), np.array([k[1] for k in kinks]))

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64)
        b, v = self.beliefs, self.values
        i = np.clip(np.searchsorted(b, p, side="right") - 1, 0, b.size - 2)
        slope = (v[i + 1] - v[i]) / (b[i + 1] - b[i])
        return v[i] + slope * (p - b[i])


def matching_utility() -> PiecewiseLinearUtility:
    """Guess the state, payoff 1 when right: ``v(p) = max(p, 1 - p)``."""
    return PiecewiseLinearUtility.from_kinks([(0.0, 1.0), (0.5, 0.5), (1.0, 1.0)])


def threshold_utility(pbar: float) -> PiecewiseLinearUtility:
    """``v(p) = (p - pbar)^+``."""
    return PiecewiseLinearUtility.from_kinks([(0.0, 0.0), (pbar, 0.0), (1.0, 1.0 - pbar)])


def expected_indirect_utility(P, v: PiecewiseLinearUtility) -> float:
    """``sum v(p) pi(p)`` under the uniform prior; ``P`` may be an experiment or a posterior law."""
    pi = P if isinstance(P, PosteriorDistribution) else posterior_distribution(P)
    return math.fsum(v(pi.beliefs) * pi.probs)
