"""Concrete experiment pairs used as reference cases."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction as Fr

import numpy as np

from .errors import UnknownFixture
from .experiment import FiniteExperiment, discretize_example1, make_experiment
from .majorization import MultiStateExperiment
from .renyi import Example1Experiment, example1_binary


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    P: object
    Q: object | None
    params: dict = field(default_factory=dict)


def symmetric(q: float) -> FiniteExperiment:
    """Binary experiment reporting the state correctly with probability ``q``."""
    return make_experiment(["y0", "y1"], [q, 1 - q], [1 - q, q])


def footnote3() -> tuple[FiniteExperiment, FiniteExperiment]:
    P = make_experiment(["w", "w'"], [Fr(1, 3), Fr(2, 3)], [Fr(2, 3), Fr(1, 3)])
    Q = make_experiment(["w", "w'"], [Fr(6, 9), Fr(3, 9)], [Fr(8, 9), Fr(1, 9)])
    return P, Q


def azrieli(alpha: float, beta: float) -> tuple[FiniteExperiment, FiniteExperiment]:
    """``P`` mixes an uninformative signal with a symmetric binary one; ``Q`` is symmetric binary."""
    P = make_experiment(["x1", "x2", "x3"], [beta, 0.5, 0.5 - beta], [0.5 - beta, 0.5, beta])
    Q = make_experiment(["y1", "y2"], [alpha, 1 - alpha], [1 - alpha, alpha])
    return P, Q


def azrieli_margin(alpha: float, beta: float) -> float:
    """``sqrt(a(1-a)) - sqrt(b(1/2-b)) - 1/4``; positive iff the Rényi divergences at 1/2 are ranked."""
    return math.sqrt(alpha * (1 - alpha)) - math.sqrt(beta * (0.5 - beta)) - 0.25


def eventualfail(eps: float) -> tuple[FiniteExperiment, FiniteExperiment]:
    """Non-generic pair: both experiments share the LLR maximum ``log 100``."""
    e = Fr(str(eps)) if not isinstance(eps, Fr) else eps
    P = make_experiment(["x0", "x1", "x2", "x3"], [e, Fr(1, 16), Fr(1, 2), Fr(7, 16) - e],
                        [100 * e, Fr(7, 16), Fr(1, 2), Fr(1, 16) - 100 * e])
    Q = make_experiment(["y0", "y1", "y2"], [e, Fr(1, 4), Fr(3, 4) - e], [100 * e, Fr(3, 4), Fr(1, 4) - 100 * e])
    return P, Q


def example1(p: float = 0.63, n_bins: int | None = 1000):
    """``(P, Q)``; ``P`` is discretized into ``n_bins`` equal bins, or closed-form when ``n_bins`` is None."""
    P = Example1Experiment() if n_bins is None else discretize_example1(n_bins)
    return P, example1_binary(p)


def multistate_fixtures(count: int = 10, seed: int = 12) -> list[tuple[MultiStateExperiment, MultiStateExperiment]]:
    """Three-state pairs ``(Q (x) R, Q)``; the first dominates by construction."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m = int(rng.integers(2, 5))
        Q = MultiStateExperiment(_rows(rng, 3, m))
        R = MultiStateExperiment(_rows(rng, 3, 2))
        out.append((Q.product(R), Q))
    return out


def _rows(rng, k, m):
    rows = rng.dirichlet(np.ones(m), size=k) + 0.02
    return rows / rows.sum(axis=1, keepdims=True)


_BUILDERS = {
    "footnote3": (lambda: footnote3(), ()),
    "azrieli": (azrieli, ("alpha", "beta")),
    "eventualfail": (eventualfail, ("eps",)),
    "example1": (example1, ("p", "n_bins")),
    "symmetric": (lambda q: (symmetric(q), None), ("q",)),
}


def load_fixture(name: str, *args, **kwargs) -> Fixture:
    if name not in _BUILDERS:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {sorted(_BUILDERS)}")
    build, names = _BUILDERS[name]
    P, Q = build(*args, **kwargs)
    params = dict(zip(names, args)) | kwargs
    return Fixture(name, P, Q, params)


def parse_fixture(text: str) -> Fixture:
    """``name`` or ``name:v1,v2`` with positional numeric parameters."""
    name, _, rest = text.partition(":")
    args = []
    for tok in filter(None, rest.split(",")):
        tok = tok.strip()
        if tok.lower() == "none":
            args.append(None)
        elif "/" in tok:
            args.append(float(Fr(tok)))
        else:
            v = float(tok)
            args.append(int(v) if v.is_integer() and name == "example1" and len(args) == 1 else v)
    return load_fixture(name, *args)
