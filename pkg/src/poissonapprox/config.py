"""Tolerances and sweep grids shared by the certification code and tests."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    # documented absolute error of every probability-valued routine
    prob_abs: float = 1e-12
    # relative gap a strict inequality must clear to count as certified
    strict_margin: float = 1e-10
    # slack allowed when checking a bound against its exact value
    bound_slack: float = 1e-12
    # FinitePmf total-mass tolerance
    mass_abs: float = 1e-12


@dataclass(frozen=True)
class Grids:
    p_percent: tuple = field(default_factory=lambda: tuple(round(0.01 * i, 2) for i in range(1, 100)))
    lambda_lo: float = 0.001
    lambda_hi: float = 6.0
    lambda_points: int = 2000

    def p_values(self, upper=0.99):
        return np.array([p for p in self.p_percent if p <= upper + 1e-12])

    def lambda_grid(self):
        return np.linspace(self.lambda_lo, self.lambda_hi, self.lambda_points)


TOL = Tolerances()
GRIDS = Grids()
DEFAULT_SEED = 20190501
