"""Cumulant generating functions, their Fenchel conjugates and the sample-size bound.

``K_X(t) = log E[e^{tX}]`` and ``K*_X(a) = sup_t (t a - K_X(t))``.  For an LLR
``X^theta`` of an experiment, ``K_{X^theta}(t) = t R^theta(t + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from .errors import DomainError, NoEtaFound, NonGeneric, OutOfSupport, PreconditionFailed
from .experiment import AtomicDistribution, FiniteExperiment, convolution_power, is_generic_pair, llr_distribution
from .renyi import DominatesOnGrid, renyi_order_check

T_MAX = 1e4
BISECT_STEPS = 200
ETA_LADDER = tuple(2.0**-k for k in range(1, 31))
ETA_GRID = 1000


def cgf(X: AtomicDistribution, t):
    ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = logsumexp(X.log_probs[None, :] + ts[:, None] * X.values[None, :], axis=1)
    return float(out[0]) if np.ndim(t) == 0 else out


def cgf_derivative(X: AtomicDistribution, t):
    """Mean of ``X`` under the exponential tilt ``e^{tX}``."""
    ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    w = softmax(X.log_probs[None, :] + ts[:, None] * X.values[None, :], axis=1)
    out = w @ X.values
    return float(out[0]) if np.ndim(t) == 0 else out


def _fenchel_array(X: AtomicDistribution, a: np.ndarray) -> np.ndarray:
    """``K*_X`` on an array; ``inf`` outside the support hull."""
    a = np.asarray(a, dtype=np.float64)
    out = np.full(a.shape, np.inf)
    lo, hi = X.min, X.max
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    at_lo = np.abs(a - lo) <= tol
    at_hi = np.abs(a - hi) <= tol
    if len(X) == 1:
        out[at_lo] = 0.0
        return out
    out[at_lo] = -float(X.log_probs[0])
    out[at_hi] = -float(X.log_probs[-1])
    inner = (a > lo) & (a < hi) & ~at_lo & ~at_hi
    if inner.any():
        target = a[inner]
        # the tilt needed to reach a point scales inversely with the support width
        reach = T_MAX / (hi - lo)
        left = np.full(target.shape, -reach)
        right = np.full(target.shape, reach)
        # K' is strictly increasing, so bisection on K'(t) = a is safe
        for _ in range(BISECT_STEPS):
            mid = 0.5 * (left + right)
            up = cgf_derivative(X, mid) < target
            left = np.where(up, mid, left)
            right = np.where(up, right, mid)
            if np.all(right - left <= 1e-15 * np.maximum(1.0, np.abs(mid))):
                break
        t = 0.5 * (left + right)
        out[inner] = np.maximum(t * target - cgf(X, t), 0.0)
    return out


def fenchel(X: AtomicDistribution, a):
    """``K*_X(a)`` for ``a`` in ``[min X, max X]``."""
    arr = np.atleast_1d(np.asarray(a, dtype=np.float64))
    tol = 1e-12 * max(1.0, abs(X.min), abs(X.max))
    if np.any(arr < X.min - tol) or np.any(arr > X.max + tol):
        raise OutOfSupport(f"a must lie in [{X.min}, {X.max}]")
    out = _fenchel_array(X, arr)
    return float(out[0]) if np.ndim(a) == 0 else out


@dataclass(frozen=True, eq=False)
class LargeDeviationSummary:
    """``verification_grid`` rows are ``(theta, a, K*_X(a), K*_Y(a))``."""

    b: float
    eta: float
    n0: int
    verification_grid: np.ndarray

    def __str__(self) -> str:
        return f"b={self.b:.6g} eta={self.eta:.6g} n0={self.n0}"


def _eta_holds(X: AtomicDistribution, Y: AtomicDistribution, eta: float, points: int):
    """Check both inequalities of the eta condition for one state; return (ok, grid rows)."""
    if not X.mean - eta > Y.mean:
        return False, None
    rows = []
    a1 = np.linspace(X.mean - eta, Y.max, points) if X.mean - eta <= Y.max else np.empty(0)
    if a1.size:
        if not np.all(_fenchel_array(Y, a1) - eta > _fenchel_array(X, a1 + eta)):
            return False, None
        rows.append(a1)
    a2 = np.linspace(0.0, Y.mean + eta, points)
    if not np.all(_fenchel_array(Y, a2 - eta) < _fenchel_array(X, a2) - eta):
        return False, None
    rows.append(a2)
    a = np.concatenate(rows)
    return True, np.column_stack((a, _fenchel_array(X, a), _fenchel_array(Y, a)))


def eta_search(P: FiniteExperiment, Q: FiniteExperiment, ladder=ETA_LADDER, points: int = ETA_GRID, check_order: bool = True):
    """Largest ladder value ``eta`` satisfying the conjugate inequalities on the grids."""
    if not is_generic_pair(P, Q):
        raise NonGeneric("the pair shares an LLR maximum or minimum")
    if check_order:
        verdict = renyi_order_check(P, Q)
        if not isinstance(verdict, DominatesOnGrid):
            raise PreconditionFailed(f"P does not dominate Q in the Rényi order: {verdict}")
    laws = [(llr_distribution(P, th), llr_distribution(Q, th)) for th in (0, 1)]
    for eta in ladder:
        blocks = []
        for theta, (X, Y) in enumerate(laws):
            ok, grid = _eta_holds(X, Y, eta, points)
            if not ok:
                break
            blocks.append(np.column_stack((np.full(len(grid), theta), grid)))
        else:
            return eta, np.vstack(blocks)
    raise NoEtaFound(f"no eta down to {ladder[-1]:.3g} passes the grid check")


def support_bound(P: FiniteExperiment, Q: FiniteExperiment) -> float:
    return max(llr_distribution(E, th).bound for E in (P, Q) for th in (0, 1))


def n0_from(b: float, eta: float) -> int:
    return math.ceil(8.0 * b * b / eta**3)


def sample_bound(P: FiniteExperiment, Q: FiniteExperiment, **kw) -> LargeDeviationSummary:
    eta, grid = eta_search(P, Q, **kw)
    b = support_bound(P, Q)
    return LargeDeviationSummary(b, eta, n0_from(b, eta), grid)


def chernoff_bound(X: AtomicDistribution, a: float, n: int, log_scale: bool = False) -> float:
    """``exp(-n K*_X(a))``, an upper bound on ``Pr(X_1 + ... + X_n > n a)`` for ``a >= E[X]``."""
    if a < X.mean - 1e-12 * max(1.0, abs(X.mean)):
        raise DomainError("Chernoff bound needs a >= E[X]")
    k = float(_fenchel_array(X, np.array([a]))[0]) if a <= X.max else math.inf
    log_value = -n * k
    return log_value if log_scale else math.exp(log_value)


def ld_lower_bound(X: AtomicDistribution, a: float, eta: float, n: int, b: float | None = None) -> float:
    """``exp(-n K*_X(a + eta)) (1 - 4 b^2 / (n eta^2))`` clamped at zero."""
    if eta <= 0 or not (X.min <= a < X.max - eta):
        raise DomainError("need eta > 0 and a in [min X, max X - eta)")
    b = X.bound if b is None else b
    factor = 1.0 - 4.0 * b * b / (n * eta * eta)
    if factor <= 0:
        return 0.0
    return math.exp(-n * float(_fenchel_array(X, np.array([a + eta]))[0])) * factor


def exact_tail(X: AtomicDistribution, n: int, a: float, strict: bool = True) -> float:
    """``Pr(X_1 + ... + X_n > n a)`` (``>=`` when ``strict`` is false), by exact enumeration."""
    S = convolution_power(X, n)
    level = n * a
    tol = 1e-9 * max(1.0, abs(level))
    mask = S.values > level + tol if strict else S.values >= level - tol
    return math.fsum(S.probs[mask])
