"""Exact conservative tests for the binomial parameter with Poisson-tail levels.

With ``lam = n p0``:

* right-sided ``reject iff X >= m`` for ``n p0 + 1 <= m <= n`` has level at
  most ``P(Pi_lam >= m)`` for every ``p <= p0``;
* left-sided ``reject iff X <= m`` for ``0 <= m <= n p0 - 1`` has level at
  most ``P(Pi_lam <= m)`` for every ``p >= p0``;
* two-sided ``reject iff X < m1 or X > m2`` for ``m1 <= n p0 <= m2 < n`` has
  level at most ``P(Pi_lam < m1) + P(Pi_lam > m2)`` at ``p = p0``.

Admissibility is decided in exact rational arithmetic on ``n * p0``, reading a
float ``p0`` as the decimal literal it prints as.
"""

import json
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .config import TOL
from .discrete_dist import binom_cdf, binom_sf, poisson_cdf, poisson_sf
from .exceptions import InfeasibleDesign


class Direction(str, Enum):
    RIGHT = "right"
    LEFT = "left"
    TWO_SIDED = "two_sided"


def exact_decimal(x):
    """``x`` as a Fraction; floats are read through their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class TestDesign:
    direction: Direction
    n: int
    p0: float
    m: object
    poisson_level: float
    exact_binomial_level: float
    alpha: float = None

    __test__ = False  # not a pytest class

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.direction is Direction.TWO_SIDED:
            object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        else:
            object.__setattr__(self, "m", int(self.m))
        if not admissible(self.direction, self.n, self.p0, self.m):
            raise ValueError(f"critical value {self.m!r} is not admissible for {self.direction.value}")
        if self.exact_binomial_level > self.poisson_level + TOL.prob_abs:
            raise ValueError("exact binomial level exceeds the Poisson level")

    @property
    def lam(self):
        return float(self.n * exact_decimal(self.p0))

    def rejection_probability(self, p):
        """E[delta(X_{n,p})] for this design."""
        if self.direction is Direction.RIGHT:
            return binom_sf(self.n, p, self.m)
        if self.direction is Direction.LEFT:
            return binom_cdf(self.n, p, self.m)
        m1, m2 = self.m
        return binom_cdf(self.n, p, m1 - 1) + binom_sf(self.n, p, m2 + 1)

    def as_dict(self):
        return {
            "direction": self.direction.value,
            "n": self.n,
            "p0": self.p0,
            "m": list(self.m) if isinstance(self.m, tuple) else self.m,
            "poisson_level": self.poisson_level,
            "exact_binomial_level": self.exact_binomial_level,
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            direction=Direction(data["direction"]),
            n=int(data["n"]),
            p0=float(data["p0"]),
            m=tuple(data["m"]) if isinstance(data["m"], list) else data["m"],
            poisson_level=float(data["poisson_level"]),
            exact_binomial_level=float(data["exact_binomial_level"]),
            alpha=data.get("alpha"),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def admissible(direction, n, p0, m):
    """Whether a critical value lies in the range where the level guarantee holds."""
    np0 = n * exact_decimal(p0)
    direction = Direction(direction)
    if direction is Direction.RIGHT:
        return np0 + 1 <= m <= n
    if direction is Direction.LEFT:
        return 0 <= m <= np0 - 1
    m1, m2 = m
    return 0 <= m1 <= np0 <= m2 and n >= m2 + 1


def _check(n, p0, alpha):
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if not 0 < exact_decimal(p0) < 1:
        raise ValueError("p0 must lie strictly between 0 and 1")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")


def design_right(n, p0, alpha):
    """Smallest admissible ``m`` with ``P(Pi_{n p0} >= m) <= alpha``."""
    _check(n, p0, alpha)
    np0 = n * exact_decimal(p0)
    lam = float(np0)
    m_min = math.ceil(np0) + 1
    if m_min > n:
        raise InfeasibleDesign(f"no m with {float(np0) + 1} <= m <= {n}")
    for m in range(m_min, n + 1):
        level = poisson_sf(lam, m)
        if level <= alpha:
            return TestDesign(Direction.RIGHT, n, p0, m, level, binom_sf(n, float(p0), m), alpha)
    best = poisson_sf(lam, n)
    raise InfeasibleDesign(f"smallest achievable Poisson level is {best!r} > alpha={alpha!r}",
                           best_level=best)


def design_left(n, p0, alpha):
    """Largest admissible ``m`` with ``P(Pi_{n p0} <= m) <= alpha``."""
    _check(n, p0, alpha)
    np0 = n * exact_decimal(p0)
    lam = float(np0)
    m_max = math.floor(np0 - 1)
    if m_max < 0:
        raise InfeasibleDesign(f"no m with 0 <= m <= {lam - 1}")
    for m in range(m_max, -1, -1):
        level = poisson_cdf(lam, m)
        if level <= alpha:
            return TestDesign(Direction.LEFT, n, p0, m, level, binom_cdf(n, float(p0), m), alpha)
    best = poisson_cdf(lam, 0)
    raise InfeasibleDesign(f"smallest achievable Poisson level is {best!r} > alpha={alpha!r}",
                           best_level=best)


def design_two_sided(n, p0, alpha):
    """Equal-tail acceptance interval ``[m1, m2]`` around ``n p0``.

    ``m1`` is the largest integer ``<= n p0`` with ``P(Pi < m1) <= alpha/2``
    and ``m2`` the smallest ``>= n p0`` with ``P(Pi > m2) <= alpha/2``.
    """
    _check(n, p0, alpha)
    np0 = n * exact_decimal(p0)
    lam = float(np0)
    half = alpha / 2.0
    m1 = math.floor(np0)
    while m1 > 0 and poisson_cdf(lam, m1 - 1) > half:
        m1 -= 1
    m2 = math.ceil(np0)
    while poisson_sf(lam, m2 + 1) > half:
        m2 += 1
    if n < m2 + 1:
        raise InfeasibleDesign(f"upper critical value {m2} needs n >= {m2 + 1}, got n={n}")
    level = poisson_cdf(lam, m1 - 1) + poisson_sf(lam, m2 + 1)
    exact = binom_cdf(n, float(p0), m1 - 1) + binom_sf(n, float(p0), m2 + 1)
    return TestDesign(Direction.TWO_SIDED, n, p0, (m1, m2), level, exact, alpha)


def design(direction, n, p0, alpha):
    return {
        Direction.RIGHT: design_right,
        Direction.LEFT: design_left,
        Direction.TWO_SIDED: design_two_sided,
    }[Direction(direction)](n, p0, alpha)


class PValue(NamedTuple):
    value: float
    conservative: bool


def p_value_right(n, p0, x_observed):
    """Poisson-tail p-value for the right-sided test.

    Only for ``x >= n p0 + 1`` is ``P(Pi_{n p0} >= x)`` a guaranteed upper
    bound on the exact p-value; below that the result is 1 with
    ``conservative=False``.
    """
    if not 0 <= x_observed <= n:
        raise ValueError("x_observed must lie in 0..n")
    np0 = n * exact_decimal(p0)
    if x_observed >= np0 + 1:
        return PValue(poisson_sf(float(np0), x_observed), True)
    return PValue(1.0, False)


def power_curve(design, p_grid):
    """Rejection probability of ``design`` at each ``p`` of the grid."""
    p_grid = np.asarray(p_grid, dtype=float)
    if np.any(np.diff(p_grid) <= 0):
        raise ValueError("p_grid must be strictly ascending")
    return np.array([design.rejection_probability(float(p)) for p in p_grid])
