"""Majorization, Rényi entropies, and conditions for experiments with several states."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DomainError, ExperimentError, NonGeneric, RowSumMismatch, StateMismatch, SupportMismatch, ZeroEntry
from .experiment import FiniteExperiment, compositions, make_experiment
from .renyi import renyi_divergence

MAJ_TOL = 1e-12


def _pmf(mu) -> np.ndarray:
    mu = np.asarray(mu, dtype=np.float64).ravel()
    if mu.size == 0 or np.any(mu <= 0):
        raise ZeroEntry("pmf entries must be strictly positive")
    if abs(math.fsum(mu) - 1.0) > 1e-12:
        raise RowSumMismatch("pmf must sum to 1")
    return mu


def _lorenz_leq(big_vals, big_counts, small_vals, small_counts, tol: float) -> bool:
    """Compare top-k sums of two multisets given as (value, multiplicity) groups.

    The top-k sum is piecewise linear and concave in ``k`` with kinks at the
    cumulative multiplicities, so the union of kinks decides.
    """

    def curve(v, c):
        order = np.argsort(-v, kind="stable")
        v, c = v[order], c[order]
        k = np.concatenate(([0.0], np.cumsum(c)))
        s = np.concatenate(([0.0], np.cumsum(v * c)))
        return k, s

    kb, sb = curve(big_vals, big_counts)
    ks, ss = curve(small_vals, small_counts)
    top = max(kb[-1], ks[-1])
    # a shorter support is padded with zeros
    kb, sb = np.append(kb, top), np.append(sb, sb[-1])
    ks, ss = np.append(ks, top), np.append(ss, ss[-1])
    pts = np.union1d(kb, ks)
    return bool(np.all(np.interp(pts, kb, sb) >= np.interp(pts, ks, ss) - tol))


def majorizes(mu, nu, tol: float = MAJ_TOL) -> bool:
    """Do the sorted prefix sums of ``mu`` dominate those of ``nu``?"""
    mu, nu = np.asarray(mu, dtype=np.float64), np.asarray(nu, dtype=np.float64)
    return _lorenz_leq(mu, np.ones_like(mu), nu, np.ones_like(nu), tol)


def product_groups(mu, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct probabilities of ``mu^{x n}`` with multiplicities, grouped by count vector."""
    mu = np.asarray(mu, dtype=np.float64)
    counts = compositions(n, mu.size)
    mult = np.exp(gammaln(n + 1) - gammaln(counts + 1).sum(axis=1))
    return np.exp(counts @ np.log(mu)), np.rint(mult)


def product_majorizes(mu, nu, n: int, tol: float = MAJ_TOL) -> bool:
    mv, mc = product_groups(mu, n)
    nv, nc = product_groups(nu, n)
    return _lorenz_leq(mv, mc, nv, nc, tol)


def renyi_entropy(mu, alpha: float) -> float:
    mu = _pmf(mu)
    logmu = np.log(mu)
    if alpha == 1:
        return float(-np.dot(mu, logmu))
    if alpha == math.inf:
        return float(-logmu.max())
    if alpha == -math.inf:
        return float(-logmu.min())
    return float(logsumexp(alpha * logmu) / (1.0 - alpha))


def renyi_entropy_derivative0(mu) -> float:
    """``H'(0) = log |S| + mean_s log mu(s)``."""
    mu = _pmf(mu)
    return float(math.log(mu.size) + np.mean(np.log(mu)))


def torgersen_experiment(mu) -> FiniteExperiment:
    """``P^mu``: uniform in state 0, ``mu`` in state 1."""
    mu = _pmf(mu)
    return make_experiment(None, np.full(mu.size, 1.0 / mu.size), mu)


def entropy_via_divergence(mu, alpha: float) -> float:
    """Rényi entropy recomputed from divergences of ``P^mu``; independent of :func:`renyi_entropy`."""
    mu = _pmf(mu)
    u = np.full(mu.size, 1.0 / mu.size)
    if alpha > 0:
        return math.log(mu.size) - renyi_divergence(mu, u, alpha)
    if alpha == 0:
        return math.log(mu.size)
    if alpha == -math.inf:
        return math.log(mu.size) + renyi_divergence(u, mu, math.inf)
    return math.log(mu.size) - alpha / (1.0 - alpha) * renyi_divergence(u, mu, 1.0 - alpha)


ALPHA_POS = np.geomspace(1e-3, 1e3, 400)
ALPHA_NEG = -np.geomspace(1e-3, 1e3, 400)


@dataclass(frozen=True, eq=False)
class JensenReport:
    condition: bool
    failed_at: str | None
    majorizes_at: list[bool]

    @property
    def consistent(self) -> bool:
        """Majorization at any ``n`` forces the entropy condition (generic case)."""
        return self.condition or not any(self.majorizes_at)

    @property
    def suffix_from(self) -> int | None:
        n = None
        for i in range(len(self.majorizes_at), 0, -1):
            if not self.majorizes_at[i - 1]:
                break
            n = i
        return n


def entropy_condition(mu, nu) -> tuple[bool, str | None]:
    """``H_mu < H_nu`` on ``alpha > 0``, ``>`` on ``alpha < 0`` and ``H'_mu(0) < H'_nu(0)``."""
    for a in np.append(ALPHA_POS, math.inf):
        if not renyi_entropy(mu, a) < renyi_entropy(nu, a):
            return False, f"alpha={a:.6g}"
    for a in np.append(ALPHA_NEG, -math.inf):
        if not renyi_entropy(mu, a) > renyi_entropy(nu, a):
            return False, f"alpha={a:.6g}"
    if not renyi_entropy_derivative0(mu) < renyi_entropy_derivative0(nu):
        return False, "H'(0)"
    return True, None


def jensen_check(mu, nu, cap: int = 10) -> JensenReport:
    mu, nu = _pmf(mu), _pmf(nu)
    if mu.size != nu.size:
        raise SupportMismatch("equal support sizes required")
    if math.isclose(mu.max(), nu.max(), rel_tol=1e-12) or math.isclose(mu.min(), nu.min(), rel_tol=1e-12):
        raise NonGeneric("max or min probabilities coincide")
    ok, where = entropy_condition(mu, nu)
    return JensenReport(ok, where, [product_majorizes(mu, nu, n) for n in range(1, cap + 1)])


# --- several states ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MultiStateExperiment:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] < 2 or p.shape[1] < 1:
            raise ExperimentError("need a (states x outcomes) matrix with at least two states")
        if np.any(p <= 0):
            raise ZeroEntry("entries must be strictly positive")
        if np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-12):
            raise RowSumMismatch("rows must sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def states(self) -> int:
        return self.probs.shape[0]

    def product(self, other: "MultiStateExperiment") -> "MultiStateExperiment":
        if other.states != self.states:
            raise StateMismatch("state counts differ")
        return MultiStateExperiment(np.einsum("si,sj->sij", self.probs, other.probs).reshape(self.states, -1))

    def restrict(self, i: int, j: int) -> FiniteExperiment:
        return make_experiment(None, self.probs[i], self.probs[j])


def multistate_mgf(E: MultiStateExperiment, i: int, t) -> float:
    """``sum_w P_i(w) exp(sum_j t_j log(P_i(w) / P_j(w)))`` with ``j`` over the other states in order."""
    if not 0 <= i < E.states:
        raise IndexError(f"state {i} out of range")
    t = np.asarray(t, dtype=np.float64)
    others = [j for j in range(E.states) if j != i]
    if t.shape != (len(others),):
        raise StateMismatch(f"t must have {len(others)} entries")
    logp = np.log(E.probs)
    llr = logp[i][None, :] - logp[others]
    return float(np.exp(logsumexp(logp[i] + t @ llr)))


def log_multistate_mgf(E: MultiStateExperiment, i: int, T: np.ndarray) -> np.ndarray:
    """Vectorized ``log M`` over rows of ``T``."""
    others = [j for j in range(E.states) if j != i]
    logp = np.log(E.probs)
    llr = logp[i][None, :] - logp[others]
    return logsumexp(logp[i][None, :] + T @ llr, axis=1)


class Curvature(enum.Enum):
    CONVEX = "Convex"
    CONCAVE = "Concave"
    NEITHER = "Neither"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ConvexityVerdict:
    kind: Curvature
    strict: bool


def v_convexity(alpha) -> ConvexityVerdict:
    """Curvature of ``v(p) = prod p_i^{alpha_i}`` on the open simplex."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 1 or alpha.size < 2:
        raise DomainError("alpha needs at least two entries")
    if abs(alpha.sum() - 1.0) > 1e-9 or not alpha[0] > 0:
        raise DomainError("alpha must sum to 1 with alpha_0 > 0")
    rest = alpha[1:]
    if np.all(rest <= 0):
        return ConvexityVerdict(Curvature.CONVEX, bool(np.all(rest < 0)))
    if np.all(rest >= 0):
        return ConvexityVerdict(Curvature.CONCAVE, bool(np.all(rest > 0)))
    return ConvexityVerdict(Curvature.NEITHER, False)


def directional_curvature(alpha, p, x) -> np.ndarray:
    """``(sum a_i x_i / p_i)^2 - sum a_i x_i^2 / p_i^2``, the second derivative of ``v`` up to a positive factor."""
    alpha = np.asarray(alpha, dtype=np.float64)
    r = np.asarray(x, dtype=np.float64) / np.asarray(p, dtype=np.float64)
    return (r @ alpha) ** 2 - (r * r) @ alpha


def numeric_curvature(alpha, rng: np.random.Generator, n_random: int = 200) -> Curvature:
    """Classify curvature by sampling second derivatives along simplex directions.

    Points come from a Dirichlet sample plus a deterministic sweep of
    near-boundary configurations; directions are ``e_0 - e_j`` and random
    zero-sum vectors.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    k1 = alpha.size
    pts = [rng.dirichlet(np.full(k1, c)) for c in (0.3, 1.0, 3.0) for _ in range(n_random // 3 + 1)]
    for j in range(1, k1):
        for x in (1e-2, 1e-4):
            for r in np.exp(np.linspace(-8, 8, 33)):
                p = np.full(k1, 0.0)
                p[0], p[j] = x * r / (1 + r), x / (1 + r)
                rest = [i for i in range(1, k1) if i != j]
                if rest:
                    p[rest] = (1 - p[0] - p[j]) / len(rest)
                else:
                    p[0] = 1 - p[j]
                pts.append(p)
            p = np.full(k1, x / (k1 - 1))
            p[0] = 1 - x
            pts.append(p)
    dirs = []
    for j in range(1, k1):
        d = np.zeros(k1)
        d[0], d[j] = 1.0, -1.0
        dirs.append(d)
    for _ in range(8):
        d = rng.normal(size=k1)
        dirs.append(d - d.mean())
    P = np.array([p for p in pts if np.all(p > 0)])
    D = np.array(dirs)
    R = D[None, :, :] / P[:, None, :]
    curv = (R @ alpha) ** 2 - (R * R) @ alpha
    scale = ((R * R) @ np.abs(alpha)) + 1.0
    pos = np.any(curv > 1e-9 * scale)
    neg = np.any(curv < -1e-9 * scale)
    if pos and neg:
        return Curvature.NEITHER
    return Curvature.CONCAVE if neg else Curvature.CONVEX


@dataclass(frozen=True)
class Witness:
    condition: str
    state: int
    t: tuple
    p_value: float
    q_value: float


@dataclass(frozen=True, eq=False)
class MultiStateReport:
    passed: bool
    checked: int
    failures: list[Witness] = field(default_factory=list)


def _multistate_generic(EP: MultiStateExperiment, EQ: MultiStateExperiment, tol: float = 1e-9) -> bool:
    lp, lq = np.log(EP.probs), np.log(EQ.probs)
    for i in range(EP.states):
        for j in range(EP.states):
            if i == j:
                continue
            a, b = lp[i] - lp[j], lq[i] - lq[j]
            if abs(a.max() - b.max()) <= tol or abs(a.min() - b.min()) <= tol:
                return False
    return True


def t_grid(k: int, rng: np.random.Generator, directions: int = 200, magnitudes: int = 10):
    """Sample points for conditions (i) and (ii): nonnegative orthant, and negative orthant with sum > -1."""
    dirs = np.abs(rng.normal(size=(directions, k)))
    dirs[: min(k, directions)] = np.eye(k)[: min(k, directions)]
    dirs /= dirs.sum(axis=1, keepdims=True)
    pos = np.concatenate([dirs * m for m in np.geomspace(1e-2, 30.0, magnitudes)])
    neg = np.concatenate([-dirs * m for m in np.linspace(0.05, 0.95, magnitudes)])
    return pos, neg


def multistate_necessary(EP: MultiStateExperiment, EQ: MultiStateExperiment, rng: np.random.Generator | None = None,
                         directions: int = 200, magnitudes: int = 10) -> MultiStateReport:
    """Check the necessary conditions for large-sample dominance of ``EP`` over ``EQ`` on sampled ``t``."""
    if EP.states != EQ.states:
        raise StateMismatch("state counts differ")
    if not _multistate_generic(EP, EQ):
        raise NonGeneric("some pairwise LLR maximum or minimum coincides")
    rng = np.random.default_rng(0) if rng is None else rng
    k = EP.states - 1
    pos, neg = t_grid(k, rng, directions, magnitudes)
    failures: list[Witness] = []
    checked = 0
    for i in range(EP.states):
        for name, T, sign in (("(i)", pos, 1.0), ("(ii)", neg, -1.0)):
            mp, mq = log_multistate_mgf(EP, i, T), log_multistate_mgf(EQ, i, T)
            bad = ~(sign * (mp - mq) > 0)
            checked += T.shape[0]
            if bad.any():
                r = int(np.argmax(bad))
                failures.append(Witness(name, i, tuple(T[r].tolist()), float(np.exp(mp[r])), float(np.exp(mq[r]))))
    logp, logq = np.log(EP.probs), np.log(EQ.probs)
    for i in range(EP.states):
        for j in range(EP.states):
            if i == j:
                continue
            kp = float(EP.probs[i] @ (logp[i] - logp[j]))
            kq = float(EQ.probs[i] @ (logq[i] - logq[j]))
            checked += 1
            if not kp > kq:
                failures.append(Witness("(iii)", i, (j,), kp, kq))
    return MultiStateReport(not failures, checked, failures)
