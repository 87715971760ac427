"""Rényi divergences of experiments and the Rényi order.

For an experiment ``P`` and state ``theta`` we write ``R_P^theta(t)`` for the
Rényi divergence ``R_t(P_theta || P_{1-theta})``.  Writing ``X`` for the LLR
under ``theta`` and ``s = t - 1``, ``R^theta(t) = log E[exp(s X)] / s``.  Two
experiments are therefore compared through the sign of the exponential
polynomial ``g(s) = sum_i p_i e^{s x_i} - sum_j q_j e^{s y_j}``; atoms shared
by both sides are cancelled exactly before any floating point sum is formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .errors import DomainError, TrivialExperiment
from .experiment import (
    MERGE_TOL,
    AtomicDistribution,
    FiniteExperiment,
    is_trivial,
    llr_distribution,
    make_experiment,
)

NEAR_ONE = 1e-8
TIE_RTOL = 1e-13
DEFAULT_T = 64.0
DEFAULT_POINTS = 512


def _as_array(t) -> np.ndarray:
    return np.atleast_1d(np.asarray(t, dtype=np.float64))


def _renyi_from_logs(logw: np.ndarray, llr: np.ndarray, t) -> np.ndarray:
    """Rényi divergence given log-weights under the first measure and the LLR."""
    ts = _as_array(t)
    if np.any(ts <= 0) or np.any(np.isnan(ts)):
        raise DomainError("Rényi order t must be positive")
    w = np.exp(logw)
    kl = float(np.dot(w, llr))
    out = np.empty_like(ts)
    inf = np.isinf(ts)
    out[inf] = float(np.max(llr))
    s = ts - 1.0
    near = ~inf & (np.abs(s) < NEAR_ONE)
    if np.any(near):
        var = float(np.dot(w, (llr - kl) ** 2))
        out[near] = kl + 0.5 * s[near] * var
    far = ~inf & ~near
    if np.any(far):
        out[far] = logsumexp(logw[None, :] + s[far, None] * llr[None, :], axis=1) / s[far]
    return out


def renyi_divergence(mu, nu, t):
    """``R_t(mu || nu)`` for strictly positive pmfs; ``t`` may be ``inf`` or an array."""
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    if mu.shape != nu.shape:
        raise DomainError("pmfs must share a support")
    logmu = np.log(mu)
    out = _renyi_from_logs(logmu, logmu - np.log(nu), t)
    return float(out[0]) if np.ndim(t) == 0 else out


class Example1Experiment:
    """Continuous experiment on [0, 1] with densities ``f0 = 1`` and ``f1 = 1/2 + s``.

    Only the Rényi profile, KL divergences and LLR extremes are available, all
    in closed form.
    """

    def __init__(self):
        # second moment of the LLR, needed only for the first-order expansion at t=1
        self._var = {
            0: integrate.quad(lambda s: math.log(0.5 + s) ** 2, 0, 1, epsabs=1e-14)[0] - self.kl(0) ** 2,
            1: integrate.quad(lambda s: (0.5 + s) * math.log(0.5 + s) ** 2, 0, 1, epsabs=1e-14)[0] - self.kl(1) ** 2,
        }

    def __repr__(self) -> str:
        return "Example1Experiment()"

    @staticmethod
    def kl(theta: int) -> float:
        if theta == 1:
            return 1.125 * math.log(1.5) + 0.125 * math.log(2.0) - 0.5
        return 1.0 - 1.5 * math.log(1.5) - 0.5 * math.log(2.0)

    @staticmethod
    def max_llr(theta: int) -> float:
        return math.log(1.5) if theta == 1 else math.log(2.0)

    @staticmethod
    def _log_ratio_moment(x: np.ndarray) -> np.ndarray:
        """``log(((3/2)^x - (1/2)^x) / x)`` with the removable point at x=0."""
        la, lb = math.log(1.5), math.log(0.5)
        out = np.empty_like(x)
        small = np.abs(x) < 1e-6
        xs = x[small]
        series = sum((la**k - lb**k) * xs ** (k - 1) / math.factorial(k) for k in range(1, 6))
        out[small] = np.log(series)
        xl = x[~small]
        out[~small] = np.log((1.5**xl - 0.5**xl) / xl)
        return out

    def renyi(self, theta: int, t):
        ts = _as_array(t)
        if np.any(ts <= 0):
            raise DomainError("Rényi order t must be positive")
        out = np.empty_like(ts)
        inf = np.isinf(ts)
        out[inf] = self.max_llr(theta)
        s = ts - 1.0
        near = ~inf & (np.abs(s) < 1e-6)
        out[near] = self.kl(theta) + 0.5 * s[near] * self._var[theta]
        far = ~inf & ~near
        x = (2.0 - ts[far]) if theta == 0 else (ts[far] + 1.0)
        out[far] = self._log_ratio_moment(x) / s[far]
        return float(out[0]) if np.ndim(t) == 0 else out


def example1_binary(p: float) -> FiniteExperiment:
    """The binary experiment ``Q`` of Example 1: ``Q0`` uniform, ``Q1(1) = p``."""
    return make_experiment(["0", "1"], [0.5, 0.5], [1.0 - p, p])


def renyi_values(P, theta: int, t):
    """``R_P^theta(t)`` for finite or closed-form experiments, vectorized in ``t``."""
    if isinstance(P, FiniteExperiment):
        pt, po = P.probs(theta), P.probs(1 - theta)
        out = _renyi_from_logs(np.log(pt), np.log(pt) - np.log(po), t)
        return float(out[0]) if np.ndim(t) == 0 else out
    return P.renyi(theta, t)


def kl_value(P, theta: int) -> float:
    if isinstance(P, FiniteExperiment):
        return float(llr_distribution(P, theta).mean)
    return float(P.kl(theta))


def max_llr_value(P, theta: int) -> float:
    if isinstance(P, FiniteExperiment):
        return llr_distribution(P, theta).max
    return float(P.max_llr(theta))


def default_grid(T: float = DEFAULT_T, grid_points: int = DEFAULT_POINTS) -> np.ndarray:
    """Log-spaced grid on [1/2, T] of exactly ``grid_points`` points containing 1/2, 1 and 2."""
    if T < 2 or grid_points < 3:
        raise DomainError("need T >= 2 and at least 3 grid points")
    grid = np.geomspace(0.5, T, grid_points)
    for anchor in (1.0, 2.0):
        grid[np.argmin(np.abs(grid - anchor))] = anchor
    grid[0] = 0.5
    grid = np.unique(grid)
    if grid.size != grid_points:
        raise DomainError("grid too coarse to hold the anchor points")
    return grid


@dataclass(frozen=True, eq=False)
class RenyiProfile:
    theta: int
    grid: np.ndarray
    values: np.ndarray
    value_inf: float

    def at(self, t: float) -> float:
        if math.isinf(t):
            return self.value_inf
        idx = np.flatnonzero(np.isclose(self.grid, t, rtol=0, atol=1e-12))
        if idx.size == 0:
            raise KeyError(f"t={t} not on the grid")
        return float(self.values[idx[0]])


def renyi_profile(P, theta: int, T: float = DEFAULT_T, grid_points: int = DEFAULT_POINTS) -> RenyiProfile:
    grid = default_grid(T, grid_points)
    values = renyi_values(P, theta, grid)
    return RenyiProfile(theta, grid, values, max_llr_value(P, theta))


# --- the Rényi order -------------------------------------------------------


@dataclass(frozen=True)
class DominatesOnGrid:
    min_gap: float
    grid_size: int

    def __str__(self) -> str:
        return f"DominatesOnGrid(min_gap={self.min_gap:.3e}, points={self.grid_size})"


@dataclass(frozen=True)
class FailsAt:
    """Witness of a failed comparison; ``gap = R_P^theta(t) - R_Q^theta(t) <= 0``."""

    theta: int
    t: float
    gap: float

    def __str__(self) -> str:
        return f"FailsAt(theta={self.theta}, t={self.t:.6g}, gap={self.gap:.3e})"


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    theta: int | None = None
    t: float | None = None

    def __str__(self) -> str:
        return f"Inconclusive({self.reason})"


RenyiVerdict = DominatesOnGrid | FailsAt | Inconclusive


@dataclass(frozen=True, eq=False)
class SignedAtoms:
    """Coefficients of ``g(s) = sum c_i exp(s v_i)`` after exact cancellation."""

    values: np.ndarray
    coef: np.ndarray

    @classmethod
    def difference(cls, X: AtomicDistribution, Y: AtomicDistribution) -> "SignedAtoms":
        values = np.concatenate((X.values, Y.values))
        coef = np.concatenate((X.probs, -Y.probs))
        scale = np.concatenate((X.probs, Y.probs))
        order = np.argsort(values, kind="stable")
        values, coef, scale = values[order], coef[order], scale[order]
        gaps = np.diff(values)
        starts = np.concatenate(([0], np.nonzero(gaps > MERGE_TOL * np.maximum(1.0, np.abs(values[1:])))[0] + 1))
        v = np.add.reduceat(values * scale, starts) / np.add.reduceat(scale, starts)
        c = np.add.reduceat(coef, starts)
        mag = np.maximum.reduceat(scale, starts)
        c[np.abs(c) <= 4 * np.finfo(float).eps * mag] = 0.0
        keep = c != 0
        return cls(v[keep], c[keep])

    @property
    def identically_zero(self) -> bool:
        return self.coef.size == 0

    def leading_sign(self, direction: int = 1) -> int:
        """Sign of ``g(s)`` as ``s -> +inf`` (direction 1) or ``-inf`` (direction -1)."""
        if self.identically_zero:
            return 0
        c = self.coef[-1] if direction > 0 else self.coef[0]
        return int(np.sign(c))


@dataclass
class _SideComparison:
    """Log-scale comparison of ``M_X(s)`` and ``M_Y(s)`` after cancellation."""

    diff: SignedAtoms
    common: AtomicDistribution | None = field(default=None)

    def log_ratio(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``log M_X(s) - log M_Y(s)`` and a tie flag per ``s``."""
        pos = self.diff.coef > 0
        neg = ~pos
        vals, coef = self.diff.values, self.diff.coef
        lp = _lse(np.log(coef[pos]) if pos.any() else None, vals[pos], s)
        ln = _lse(np.log(-coef[neg]) if neg.any() else None, vals[neg], s)
        lc = _lse(np.log(self.common.probs) if self.common is not None else None,
                  self.common.values if self.common is not None else None, s)
        ly = np.logaddexp(lc, ln)
        # M_X / M_Y = 1 + (Pos - Neg) / M_Y, formed without subtracting large logs
        with np.errstate(invalid="ignore", over="ignore"):
            up = lp >= ln
            r = np.where(up, -np.exp(lp - ly) * np.expm1(ln - lp), np.exp(ln - ly) * np.expm1(lp - ln))
        exact = np.isneginf(lp) & np.isneginf(ln)
        r[exact] = 0.0
        with np.errstate(invalid="ignore", divide="ignore"):
            # far below -1/2 the direct difference of logs is accurate and avoids log(0)
            delta = np.where(r > -0.5, np.log1p(np.maximum(r, -0.5)), np.logaddexp(lc, lp) - ly)
            tie = ~exact & (np.abs(lp - ln) <= TIE_RTOL * (np.abs(lp) + np.abs(ln) + 1.0))
        return delta, tie

    def kl_gap(self) -> tuple[float, bool]:
        terms = self.diff.coef * self.diff.values
        gap = float(math.fsum(terms))
        tie = abs(gap) <= TIE_RTOL * (float(np.abs(terms).sum()) + 1e-300) and not self.diff.identically_zero
        return gap, tie


def _lse(logw, values, s: np.ndarray) -> np.ndarray:
    if logw is None or logw.size == 0:
        return np.full(s.shape, -np.inf)
    return logsumexp(logw[None, :] + s[:, None] * values[None, :], axis=1)


def _common_part(X: AtomicDistribution, Y: AtomicDistribution) -> AtomicDistribution | None:
    """Atoms present in both distributions, with the smaller of the two masses."""
    vals, probs = [], []
    j = 0
    for v, p in zip(X.values, X.probs):
        while j < len(Y) and Y.values[j] < v - MERGE_TOL * max(1.0, abs(v)):
            j += 1
        if j < len(Y) and abs(Y.values[j] - v) <= MERGE_TOL * max(1.0, abs(v)):
            vals.append(v)
            probs.append(min(p, Y.probs[j]))
    if not vals:
        return None
    return AtomicDistribution(np.array(vals), np.array(probs))


def _finite_gaps(P: FiniteExperiment, Q: FiniteExperiment, theta: int, grid: np.ndarray):
    X, Y = llr_distribution(P, theta), llr_distribution(Q, theta)
    cmp = _SideComparison(SignedAtoms.difference(X, Y), _common_part(X, Y))
    gaps = np.empty_like(grid)
    ties = np.zeros(grid.shape, dtype=bool)
    exact0 = np.zeros(grid.shape, dtype=bool)
    at_one = grid == 1.0
    s = grid[~at_one] - 1.0
    delta, tie = cmp.log_ratio(s)
    gaps[~at_one] = delta / s
    ties[~at_one] = tie
    exact0[~at_one] = cmp.diff.identically_zero
    kl, kl_tie = cmp.kl_gap()
    gaps[at_one] = kl
    ties[at_one] = kl_tie
    exact0[at_one] = cmp.diff.identically_zero
    lead = cmp.diff.leading_sign(+1)
    inf_gap = X.max - Y.max
    return gaps, ties, exact0, lead, inf_gap


def _generic_gaps(P, Q, theta: int, grid: np.ndarray):
    rp, rq = renyi_values(P, theta, grid), renyi_values(Q, theta, grid)
    at_one = grid == 1.0
    rp = np.where(at_one, kl_value(P, theta), rp)
    rq = np.where(at_one, kl_value(Q, theta), rq)
    gaps = rp - rq
    ties = np.abs(gaps) <= 1e-12 * np.maximum(np.abs(rp), np.abs(rq))
    inf_gap = max_llr_value(P, theta) - max_llr_value(Q, theta)
    lead = 0 if abs(inf_gap) <= MERGE_TOL else int(np.sign(inf_gap))
    return gaps, ties, np.zeros(grid.shape, dtype=bool), lead, inf_gap


def renyi_order_check(P, Q, T: float = DEFAULT_T, grid_points: int = DEFAULT_POINTS) -> RenyiVerdict:
    """Test ``R_P^theta(t) > R_Q^theta(t)`` for both states on the grid and as ``t -> inf``.

    The interval (0, 1/2) needs no samples: ``R^theta(t) = t/(1-t) R^{1-theta}(1-t)``
    maps it onto [1/2, 1) of the other state.  The reported witness is the
    first strict violation (state 0 first, ``t`` ascending, ``t = inf`` last);
    exact equalities come next and unresolvable ties last.
    """
    grid = default_grid(T, grid_points)
    both_finite = isinstance(P, FiniteExperiment) and isinstance(Q, FiniteExperiment)
    worst: FailsAt | None = None
    exact_tie: FailsAt | None = None
    fuzzy: Inconclusive | None = None
    min_gap = math.inf
    for theta in (0, 1):
        gaps, ties, exact0, lead, inf_gap = (_finite_gaps if both_finite else _generic_gaps)(P, Q, theta, grid)
        strict_bad = (gaps < 0) & ~ties & ~exact0
        if strict_bad.any() and worst is None:
            i = int(np.argmax(strict_bad))
            worst = FailsAt(theta, float(grid[i]), float(gaps[i]))
        if exact0.any() and exact_tie is None:
            i = int(np.argmax(exact0))
            exact_tie = FailsAt(theta, float(grid[i]), 0.0)
        if ties.any() and fuzzy is None:
            i = int(np.argmax(ties))
            fuzzy = Inconclusive("numerical tie", theta, float(grid[i]))
        if lead < 0 and worst is None:
            worst = FailsAt(theta, math.inf, float(inf_gap))
        elif lead == 0 and both_finite and exact_tie is None:
            exact_tie = FailsAt(theta, math.inf, 0.0)
        elif lead == 0 and fuzzy is None:
            fuzzy = Inconclusive("tie of LLR maxima", theta, math.inf)
        ok = ~ties & ~exact0
        if ok.any():
            min_gap = min(min_gap, float(gaps[ok].min()))
    if worst is not None:
        return worst
    if exact_tie is not None:
        return exact_tie
    if fuzzy is not None:
        return fuzzy
    return DominatesOnGrid(min_gap, int(grid.size))


@dataclass(frozen=True)
class DominanceRatio:
    value: float
    theta: int
    t: float
    grid_size: int

    def __float__(self) -> float:
        return self.value


def _nontrivial(P) -> bool:
    if isinstance(P, FiniteExperiment):
        return not is_trivial(P)
    return kl_value(P, 1) > 0


def dominance_ratio(P, Q, T: float = DEFAULT_T, grid_points: int = DEFAULT_POINTS) -> DominanceRatio:
    """Grid infimum of ``R_P^theta(t) / R_Q^theta(t)``; an upper bound on the true infimum."""
    if not (_nontrivial(P) and _nontrivial(Q)):
        raise TrivialExperiment("dominance ratio needs two non-trivial experiments")
    grid = default_grid(T, grid_points)
    best = DominanceRatio(math.inf, 0, math.nan, int(grid.size) + 1)
    for theta in (0, 1):
        rp, rq = renyi_values(P, theta, grid), renyi_values(Q, theta, grid)
        ratio = rp / rq
        i = int(np.argmin(ratio))
        if ratio[i] < best.value:
            best = DominanceRatio(float(ratio[i]), theta, float(grid[i]), best.grid_size)
        r_inf = max_llr_value(P, theta) / max_llr_value(Q, theta)
        if r_inf < best.value:
            best = DominanceRatio(float(r_inf), theta, math.inf, best.grid_size)
    return best
