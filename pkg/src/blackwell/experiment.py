"""Finite binary experiments and the distributions derived from them.

An experiment is a pair of strictly positive pmfs ``p0``, ``p1`` over a common
finite outcome set.  Everything the comparison machinery needs is expressed
through the log-likelihood ratio (LLR) distribution of an experiment, so this
module also owns :class:`AtomicDistribution` and the exact n-fold convolution
used for repeated experiments.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import expit, gammaln

from .errors import (
    DimensionMismatch,
    DuplicateLabel,
    ExperimentError,
    RowSumMismatch,
    SizeOverflow,
    ZeroEntry,
)

MERGE_TOL = 1e-9
ROW_TOL = 1e-12
PRODUCT_CAP = 10**6
ENUMERATION_CAP = 10**7


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def merge_atoms(values, probs=None, tol: float = MERGE_TOL, log_probs=None):
    """Sort atoms and merge neighbours closer than ``tol * max(1, |v|)``.

    Returns ``(values, log_probs)``.  Merged atoms sit at the
    probability-weighted mean of their members.  Weights may be given on the
    log scale, which keeps atoms whose probability underflows a double.
    Zero-probability atoms are dropped.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if log_probs is None:
        with np.errstate(divide="ignore"):
            log_probs = np.log(np.asarray(probs, dtype=np.float64).ravel())
    lp = np.asarray(log_probs, dtype=np.float64).ravel()
    keep = lp > -np.inf
    values, lp = values[keep], lp[keep]
    if values.size == 0:
        return values, lp
    order = np.argsort(values, kind="stable")
    values, lp = values[order], lp[order]
    gaps = np.diff(values)
    scale = np.maximum(1.0, np.abs(values[1:]))
    starts = np.concatenate(([0], np.nonzero(gaps > tol * scale)[0] + 1))
    sizes = np.diff(np.append(starts, values.size))
    top = np.repeat(np.maximum.reduceat(lp, starts), sizes)
    w = np.exp(lp - top)
    mass = np.add.reduceat(w, starts)
    merged = np.add.reduceat(w * values, starts) / mass
    log_mass = np.log(mass) + top[starts]
    # a group of identical values must keep that value exactly
    single = sizes == 1
    merged[single] = values[starts[single]]
    log_mass[single] = lp[starts[single]]
    return merged, log_mass


@dataclass(frozen=True, eq=False)
class AtomicDistribution:
    """Finitely supported distribution on the real line, atoms ascending.

    ``log_probs`` is authoritative; ``probs`` is its exponential and may
    underflow to zero for far-tail atoms of large convolution powers.
    """

    values: np.ndarray
    probs: np.ndarray | None = None
    log_probs: np.ndarray | None = None

    def __post_init__(self):
        if self.log_probs is None:
            if self.probs is None:
                raise ExperimentError("need probs or log_probs")
            probs = np.asarray(self.probs, dtype=np.float64)
            if np.any(probs <= 0):
                raise ExperimentError("atom probabilities must be positive")
            object.__setattr__(self, "log_probs", np.log(probs))
        object.__setattr__(self, "values", _readonly(self.values))
        object.__setattr__(self, "log_probs", _readonly(self.log_probs))
        if self.probs is None:
            object.__setattr__(self, "probs", np.exp(self.log_probs))
        object.__setattr__(self, "probs", _readonly(self.probs))
        if self.values.shape != self.log_probs.shape or self.values.ndim != 1:
            raise DimensionMismatch("values and probs must be 1-D of equal length")
        if self.values.size == 0:
            raise ExperimentError("empty distribution")
        if not np.all(np.isfinite(self.log_probs)):
            raise ExperimentError("atom probabilities must be positive")
        if np.any(np.diff(self.values) <= 0):
            raise ExperimentError("atom values must be strictly ascending")

    @classmethod
    def from_atoms(cls, values, probs=None, tol: float = MERGE_TOL, log_probs=None) -> "AtomicDistribution":
        v, lp = merge_atoms(values, probs, tol, log_probs)
        return cls(v, log_probs=lp)

    def __len__(self) -> int:
        return self.values.size

    @property
    def min(self) -> float:
        return float(self.values[0])

    @property
    def max(self) -> float:
        return float(self.values[-1])

    @property
    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))

    @property
    def variance(self) -> float:
        return float(np.dot((self.values - self.mean) ** 2, self.probs))

    @property
    def bound(self) -> float:
        """Smallest ``b`` with the support inside ``[-b, b]``."""
        return float(max(abs(self.values[0]), abs(self.values[-1])))

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.probs))

    def cdf(self, a) -> np.ndarray:
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(self.values, a, side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    def tail(self, a, strict: bool = True):
        """``Pr(X > a)`` (or ``>=`` when ``strict`` is false)."""
        side = "right" if strict else "left"
        rev = np.cumsum(self.probs[::-1])[::-1]
        idx = np.searchsorted(self.values, a, side=side)
        return np.where(idx < self.values.size, rev[np.minimum(idx, self.values.size - 1)], 0.0)

    def negate(self) -> "AtomicDistribution":
        return AtomicDistribution(-self.values[::-1], log_probs=self.log_probs[::-1])

    def change_of_measure_residual(self) -> float:
        """``sum exp(-u) p(u) - 1``; zero for a state-1 LLR distribution."""
        return float(np.expm1(np.logaddexp.reduce(self.log_probs - self.values)))


@dataclass(frozen=True, eq=False)
class FiniteExperiment:
    """Two strictly positive pmfs over a common labelled outcome set."""

    outcomes: tuple
    p0: np.ndarray
    p1: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(str(o) for o in self.outcomes))
        object.__setattr__(self, "p0", _readonly(self.p0))
        object.__setattr__(self, "p1", _readonly(self.p1))

    @property
    def size(self) -> int:
        return len(self.outcomes)

    def probs(self, theta: int) -> np.ndarray:
        return self.p1 if theta == 1 else self.p0

    def __repr__(self) -> str:
        return f"FiniteExperiment(m={self.size}, p0={self.p0.tolist()}, p1={self.p1.tolist()})"


@dataclass(frozen=True, eq=False)
class PosteriorDistribution:
    """Distribution of the posterior belief in state 1 under a uniform prior.

    ``llr`` holds ``log(p1/p0)`` per atom; beliefs are ``expit(llr)``.  Atoms
    are merged on the LLR scale, where they stay distinguishable even when the
    beliefs round to 1 in double precision.
    """

    llr: np.ndarray
    prob0: np.ndarray
    prob1: np.ndarray

    @property
    def beliefs(self) -> np.ndarray:
        return expit(self.llr)

    @property
    def probs(self) -> np.ndarray:
        return 0.5 * (self.prob0 + self.prob1)

    @property
    def mean(self) -> float:
        return float(np.dot(self.beliefs, self.probs))

    def __len__(self) -> int:
        return self.llr.size


def _check_row(row: np.ndarray, name: str) -> np.ndarray:
    if np.any(~np.isfinite(row)) or np.any(row <= 0):
        raise ZeroEntry(f"{name} has a non-positive entry; outcomes must be possible in both states")
    if np.any(row > 1):
        raise ExperimentError(f"{name} has an entry above 1")
    total = math.fsum(row)
    if abs(total - 1.0) > ROW_TOL:
        raise RowSumMismatch(f"{name} sums to {total!r}")
    # values already summing to 1 up to float rounding are kept bit-exact
    if abs(total - 1.0) > 4 * np.finfo(float).eps:
        row = row / total
    return row


def make_experiment(outcomes: Sequence | None, p0, p1) -> FiniteExperiment:
    p0 = np.asarray([float(x) for x in p0], dtype=np.float64)
    p1 = np.asarray([float(x) for x in p1], dtype=np.float64)
    if p0.shape != p1.shape or p0.ndim != 1 or p0.size == 0:
        raise DimensionMismatch("p0 and p1 must be non-empty and of equal length")
    if outcomes is None:
        outcomes = [f"x{i + 1}" for i in range(p0.size)]
    outcomes = [str(o) for o in outcomes]
    if len(outcomes) != p0.size:
        raise DimensionMismatch("one label per outcome required")
    if len(set(outcomes)) != len(outcomes):
        raise DuplicateLabel("outcome labels must be unique")
    return FiniteExperiment(tuple(outcomes), _check_row(p0, "p0"), _check_row(p1, "p1"))


def product(P: FiniteExperiment, Q: FiniteExperiment, cap: int = PRODUCT_CAP) -> FiniteExperiment:
    if P.size * Q.size > cap:
        raise SizeOverflow(f"product has {P.size * Q.size} outcomes, cap is {cap}")
    labels = [f"{a}|{b}" for a in P.outcomes for b in Q.outcomes]
    return FiniteExperiment(tuple(labels), np.outer(P.p0, Q.p0).ravel(), np.outer(P.p1, Q.p1).ravel())


def power(P: FiniteExperiment, n: int, cap: int = PRODUCT_CAP) -> FiniteExperiment:
    """Explicit n-fold product, outcome by outcome."""
    if n < 1:
        raise ExperimentError("n must be >= 1")
    out = P
    for _ in range(n - 1):
        out = product(out, P, cap)
    return out


def mixture(P: FiniteExperiment, Q: FiniteExperiment, alpha: float) -> FiniteExperiment:
    """Run ``P`` with probability ``alpha`` and ``Q`` otherwise, outcome revealed."""
    if not 0.0 <= alpha <= 1.0:
        raise ExperimentError("alpha must lie in [0, 1]")
    labels = [f"L:{o}" for o in P.outcomes] + [f"R:{o}" for o in Q.outcomes]
    p0 = np.concatenate((alpha * P.p0, (1 - alpha) * Q.p0))
    p1 = np.concatenate((alpha * P.p1, (1 - alpha) * Q.p1))
    keep = (p0 > 0) & (p1 > 0)
    return FiniteExperiment(tuple(np.array(labels, dtype=object)[keep]), p0[keep], p1[keep])


def make_garbling(matrix) -> np.ndarray:
    sigma = np.array(matrix, dtype=np.float64)
    if sigma.ndim != 2:
        raise DimensionMismatch("garbling must be a matrix")
    if np.any(sigma < 0):
        raise ExperimentError("garbling entries must be non-negative")
    if np.any(np.abs(sigma.sum(axis=1) - 1.0) > ROW_TOL):
        raise RowSumMismatch("garbling rows must sum to 1")
    return sigma


def garble(P: FiniteExperiment, sigma, labels: Sequence | None = None) -> FiniteExperiment:
    sigma = make_garbling(sigma)
    if sigma.shape[0] != P.size:
        raise DimensionMismatch(f"garbling has {sigma.shape[0]} rows, experiment has {P.size} outcomes")
    if labels is None:
        labels = [f"y{j + 1}" for j in range(sigma.shape[1])]
    q0, q1 = P.p0 @ sigma, P.p1 @ sigma
    keep = (q0 > 0) & (q1 > 0)
    return FiniteExperiment(tuple(np.array(labels, dtype=object)[keep]), q0[keep], q1[keep])


def llr_distribution(P: FiniteExperiment, theta: int = 1) -> AtomicDistribution:
    """Distribution of ``log(P_theta / P_{1-theta})`` under ``P_theta``."""
    pt, po = P.probs(theta), P.probs(1 - theta)
    return AtomicDistribution.from_atoms(np.log(pt) - np.log(po), pt)


def compositions(n: int, k: int) -> np.ndarray:
    """All non-negative integer vectors of length ``k`` summing to ``n``."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    # stars and bars: choose k-1 bar positions among n+k-1 slots
    bars = np.array(list(itertools.combinations(range(n + k - 1), k - 1)), dtype=np.int64)
    if bars.size == 0:
        return np.zeros((1, k), dtype=np.int64)
    edges = np.hstack((np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), n + k - 1)))
    return np.diff(edges, axis=1) - 1


def convolution_power(X: AtomicDistribution, n: int, cap: int = ENUMERATION_CAP) -> AtomicDistribution:
    """Distribution of the sum of ``n`` i.i.d. copies of ``X``.

    Enumerates the multinomial count vectors over the atoms of ``X`` with
    exact log-multinomial weights, then merges coinciding sums.
    """
    if n < 1:
        raise ExperimentError("n must be >= 1")
    k = len(X)
    if n == 1:
        return X
    terms = math.comb(n + k - 1, k - 1)
    if terms > cap:
        raise SizeOverflow(f"{terms} count vectors exceed the enumeration cap {cap}")
    counts = compositions(n, k)
    logw = gammaln(n + 1) - gammaln(counts + 1).sum(axis=1) + counts @ X.log_probs
    return AtomicDistribution.from_atoms(counts @ X.values, log_probs=logw)


def power_llr(P: FiniteExperiment, n: int, theta: int = 1, cap: int = ENUMERATION_CAP) -> AtomicDistribution:
    """LLR distribution of ``P^{(x)n}`` under state ``theta``."""
    return convolution_power(llr_distribution(P, theta), n, cap)


def convolve(X: AtomicDistribution, Y: AtomicDistribution, cap: int = ENUMERATION_CAP) -> AtomicDistribution:
    """Distribution of ``X + Y`` for independent ``X`` and ``Y``."""
    if len(X) * len(Y) > cap:
        raise SizeOverflow("convolution exceeds the enumeration cap")
    values = np.add.outer(X.values, Y.values).ravel()
    log_probs = np.add.outer(X.log_probs, Y.log_probs).ravel()
    return AtomicDistribution.from_atoms(values, log_probs=log_probs)


def experiment_from_llr(F1: AtomicDistribution, prefix: str = "u") -> FiniteExperiment:
    """Canonical experiment with one outcome per LLR atom.

    It is Blackwell-equivalent to any experiment whose state-1 LLR
    distribution is ``F1``: the LLR is a sufficient statistic.
    """
    p1 = F1.probs / F1.total_mass
    p0 = p1 * np.exp(-F1.values)
    p0 = p0 / math.fsum(p0)
    return FiniteExperiment(tuple(f"{prefix}{i}" for i in range(len(F1))), p0, p1)


def posterior_from_llr(F1: AtomicDistribution) -> PosteriorDistribution:
    """Posterior distribution of an experiment given its state-1 LLR law."""
    prob1 = np.array(F1.probs)
    prob0 = prob1 * np.exp(-F1.values)
    return PosteriorDistribution(np.array(F1.values), prob0, prob1)


def posterior_distribution(P: FiniteExperiment) -> PosteriorDistribution:
    llr = np.log(P.p1) - np.log(P.p0)
    order = np.argsort(llr, kind="stable")
    llr, p0, p1 = llr[order], P.p0[order], P.p1[order]
    gaps = np.diff(llr)
    starts = np.concatenate(([0], np.nonzero(gaps > MERGE_TOL * np.maximum(1.0, np.abs(llr[1:])))[0] + 1))
    prob0 = np.add.reduceat(p0, starts)
    prob1 = np.add.reduceat(p1, starts)
    return PosteriorDistribution(np.log(prob1) - np.log(prob0), prob0, prob1)


def is_trivial(P: FiniteExperiment, tol: float = MERGE_TOL) -> bool:
    return bool(np.all(np.abs(np.log(P.p1) - np.log(P.p0)) <= tol))


def llr_range(P) -> tuple[float, float]:
    """Essential (min, max) of ``log(dP1/dP0)``; works for closed-form experiments too."""
    if isinstance(P, FiniteExperiment):
        F = llr_distribution(P, 1)
        return F.min, F.max
    return -P.max_llr(0), P.max_llr(1)


def is_generic_pair(P, Q, tol: float = MERGE_TOL) -> bool:
    lo_p, hi_p = llr_range(P)
    lo_q, hi_q = llr_range(Q)
    return abs(hi_p - hi_q) > tol and abs(lo_p - lo_q) > tol


def random_experiment(rng: np.random.Generator, m: int, concentration: float = 1.0, floor: float = 1e-3) -> FiniteExperiment:
    rows = rng.dirichlet(np.full(m, concentration), size=2) + floor
    rows /= rows.sum(axis=1, keepdims=True)
    return make_experiment(None, rows[0], rows[1])


def random_garbling(rng: np.random.Generator, m: int, k: int, concentration: float = 0.5) -> np.ndarray:
    return rng.dirichlet(np.full(k, concentration), size=m)


def discretize_example1(n_bins: int) -> FiniteExperiment:
    """Exact bin masses of the densities ``f0 = 1`` and ``f1 = 1/2 + s`` on [0, 1].

    Bin ``k`` covers ``[k/N, (k+1)/N]``; its state-1 mass is
    ``1/(2N) + (2k+1)/(2N^2)``.
    """
    N = int(n_bins)
    if N < 1:
        raise ExperimentError("need at least one bin")
    p0 = [Fraction(1, N)] * N
    p1 = [Fraction(1, 2 * N) + Fraction(2 * k + 1, 2 * N * N) for k in range(N)]
    return make_experiment([f"b{k}" for k in range(N)], p0, p1)


def threshold_garbling(n_bins: int, threshold: float = 0.5) -> np.ndarray:
    """Map bins of the unit interval to {0, 1} according to their left edge."""
    left = np.arange(n_bins) / n_bins
    sigma = np.zeros((n_bins, 2))
    sigma[left >= threshold, 1] = 1.0
    sigma[left < threshold, 0] = 1.0
    return sigma
