"""JSON files for experiments, pmfs, multi-state experiments and divergence specs."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .divergence import DivergenceSpec
from .errors import ExperimentError
from .experiment import FiniteExperiment, make_experiment
from .majorization import MultiStateExperiment


def parse_prob(x) -> float:
    """Number, decimal string or ``"a/b"`` string; strings are parsed exactly before rounding."""
    if isinstance(x, bool):
        raise ExperimentError(f"not a probability: {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise ExperimentError(f"cannot parse probability {x!r}") from exc
    raise ExperimentError(f"not a probability: {x!r}")


def _read(src) -> dict | list:
    if isinstance(src, (dict, list)):
        return src
    try:
        return json.loads(Path(src).read_text())
    except json.JSONDecodeError as exc:
        raise ExperimentError(f"{src}: invalid JSON ({exc})") from exc


def experiment_from_json(data: dict) -> FiniteExperiment:
    if not isinstance(data, dict) or "p0" not in data or "p1" not in data:
        raise ExperimentError("experiment JSON needs keys p0 and p1")
    p0 = [parse_prob(x) for x in data["p0"]]
    p1 = [parse_prob(x) for x in data["p1"]]
    return make_experiment(data.get("outcomes"), p0, p1)


def experiment_to_json(P: FiniteExperiment) -> dict:
    # repr of a double round-trips exactly through json
    return {"outcomes": list(P.outcomes), "p0": P.p0.tolist(), "p1": P.p1.tolist()}


def load_experiment(src) -> FiniteExperiment:
    return experiment_from_json(_read(src))


def save_experiment(P: FiniteExperiment, path) -> None:
    Path(path).write_text(json.dumps(experiment_to_json(P), indent=2) + "\n")


def load_pmf(src) -> np.ndarray:
    data = _read(src)
    probs = data["probs"] if isinstance(data, dict) else data
    return np.array([parse_prob(x) for x in probs])


def load_multistate(src) -> MultiStateExperiment:
    data = _read(src)
    probs = [[parse_prob(x) for x in row] for row in data["probs"]]
    E = MultiStateExperiment(probs)
    if "states" in data and int(data["states"]) != E.states:
        raise ExperimentError(f"declared {data['states']} states, matrix has {E.states} rows")
    return E


def load_spec(src) -> DivergenceSpec:
    return DivergenceSpec.from_json(_read(src))
