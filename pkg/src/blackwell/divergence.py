"""Additive divergences built from Rényi divergences.

``D(mu, nu) = sum_k w_k R_{t_k}(mu || nu) + sum_l v_l R_{s_l}(nu || mu)`` for
finitely supported weight measures ``m0 = {(t_k, w_k)}`` and ``m1 = {(s_l, v_l)}``
on [1/2, inf].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError
from .experiment import make_garbling
from .renyi import renyi_divergence


@dataclass(frozen=True)
class DivergenceSpec:
    m0: tuple[tuple[float, float], ...] = ()
    m1: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        for name in ("m0", "m1"):
            atoms = tuple((float(t), float(w)) for t, w in getattr(self, name))
            for t, w in atoms:
                if not t >= 0.5:
                    raise DomainError(f"{name} atom at t={t} lies below 1/2")
                if not (w >= 0 and math.isfinite(w)):
                    raise DomainError(f"{name} weight {w} must be finite and non-negative")
            object.__setattr__(self, name, atoms)

    @property
    def total_mass(self) -> float:
        return math.fsum(w for _, w in self.m0 + self.m1)

    @classmethod
    def from_json(cls, data: dict) -> "DivergenceSpec":
        def atoms(key):
            return tuple((math.inf if str(t).lower() in ("inf", "infinity") else float(t), float(w)) for t, w in data.get(key, []))

        return cls(atoms("m0"), atoms("m1"))

    def to_json(self) -> dict:
        def enc(t):
            return "inf" if math.isinf(t) else t

        return {"m0": [[enc(t), w] for t, w in self.m0], "m1": [[enc(t), w] for t, w in self.m1]}


def divergence_eval(spec: DivergenceSpec, mu, nu) -> float:
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    if mu.shape != nu.shape:
        raise DimensionMismatch("mu and nu must share a support")
    terms = [w * renyi_divergence(mu, nu, t) for t, w in spec.m0 if w > 0]
    terms += [w * renyi_divergence(nu, mu, t) for t, w in spec.m1 if w > 0]
    return math.fsum(terms)


def check_additivity(spec: DivergenceSpec, mu1, nu1, mu2, nu2, tol: float = 1e-9) -> bool:
    joint = divergence_eval(spec, np.outer(mu1, mu2).ravel(), np.outer(nu1, nu2).ravel())
    parts = divergence_eval(spec, mu1, nu1) + divergence_eval(spec, mu2, nu2)
    return abs(joint - parts) <= tol * max(1.0, abs(parts))


def push_forward(mu, sigma) -> np.ndarray:
    sigma = make_garbling(sigma)
    mu = np.asarray(mu, dtype=np.float64)
    if sigma.shape[0] != mu.size:
        raise DimensionMismatch(f"garbling has {sigma.shape[0]} rows, pmf has {mu.size} entries")
    return mu @ sigma


def check_dpi(spec: DivergenceSpec, mu, nu, sigma, tol: float = 1e-9) -> bool:
    """``D(sigma mu, sigma nu) <= D(mu, nu)``; outputs with zero mass under both are dropped."""
    a, b = push_forward(mu, sigma), push_forward(nu, sigma)
    keep = (a > 0) | (b > 0)
    return divergence_eval(spec, a[keep], b[keep]) <= divergence_eval(spec, mu, nu) + tol


def random_spec(rng: np.random.Generator, max_atoms: int = 3, inf_prob: float = 0.2) -> DivergenceSpec:
    def atoms():
        k = int(rng.integers(0, max_atoms + 1))
        ts = np.where(rng.random(k) < inf_prob, np.inf, 0.5 * np.exp(rng.uniform(0, math.log(40), k)))
        return tuple(zip(ts.tolist(), rng.exponential(1.0, k).tolist()))

    return DivergenceSpec(atoms(), atoms())
