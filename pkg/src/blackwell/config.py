"""Run-time settings shared by the command line tools."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Config:
    tol: float = 1e-9
    t_max: float = 64.0
    grid_points: int = 512
    n_cap: int = 64
    seed: int = 20240601

    def __post_init__(self):
        if not 0 < self.tol <= 1e-3:
            raise ValueError("tol must lie in (0, 1e-3]")
        if self.t_max < 2:
            raise ValueError("t_max must be at least 2")
        if self.grid_points < 3 or self.n_cap < 1:
            raise ValueError("caps must be positive (grid_points >= 3)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
