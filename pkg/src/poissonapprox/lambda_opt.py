"""Choice of the Poisson rate that best approximates a Bernoulli law.

For a single trial with success probability ``p`` the distance to
Poisson(lam) falls until ``lam* = min(-log(1-p), 1)`` and rises after it.
This module evaluates the candidate rates, the minimal distance and the
breakpoints ``lam1 < lam2 <= 1 <= lam3`` where the closed form changes branch.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import GRIDS, TOL
from .distances import bernoulli_poisson_tv_closed, tv_binom_poisson_grid

INV_E = math.exp(-1.0)
# p at which -log(1-p) reaches 1
P_CLAMP = -math.expm1(-1.0)


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly between 0 and 1, got {p!r}")


def lambda_circ(p):
    """Rate ``-log(1-p)`` matching the Poisson zero mass to ``1 - p``."""
    _check_p(p)
    return -math.log1p(-p)


def lambda_star(p):
    """The distance-minimising rate ``min(-log(1-p), 1)``."""
    return min(lambda_circ(p), 1.0)


def delta_p(p):
    """``p + (1-p) log(1-p)``, which behaves like ``p**2 / 2`` as p -> 0."""
    _check_p(p)
    if p < 0.5:
        # sum_{k>=2} p^k / (k (k-1)); the direct form cancels for small p
        total = 0.0
        term = p
        for k in range(2, 200):
            term *= p
            piece = term / (k * (k - 1))
            total += piece
            if piece < 1e-18 * total:
                break
        return total
    return p + (1.0 - p) * math.log1p(-p)


def min_tv_value(p):
    """min over lam > 0 of d_tv(Bernoulli(p), Poisson(lam))."""
    _check_p(p)
    if p <= P_CLAMP:
        return delta_p(p)
    return p - INV_E


@dataclass(frozen=True)
class LambdaBreakpoints:
    lambda1: float
    lambda2: Optional[float] = None
    lambda3: Optional[float] = None

    def __post_init__(self):
        if (self.lambda2 is None) != (self.lambda3 is None):
            raise ValueError("lambda2 and lambda3 are present together or not at all")
        if self.lambda2 is not None and not (
            0 < self.lambda1 < self.lambda2 <= 1.0 <= self.lambda3 < math.inf
        ):
            raise ValueError(f"breakpoints out of order: {self}")

    def as_dict(self):
        return {"lambda1": self.lambda1, "lambda2": self.lambda2, "lambda3": self.lambda3}


def _bisect(f, lo, hi):
    # f(lo) and f(hi) must have opposite signs; runs to full floating-point resolution
    flo = f(lo)
    for _ in range(2200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def breakpoints(p):
    """Breakpoints of the piecewise closed form.

    ``lambda1 = -log(1-p)``; when ``p <= 1/e`` also the two roots of
    ``lam * exp(-lam) = p``, one in ``(0, 1]`` and one in ``[1, 3 - 2 log p]``.
    """
    lam1 = lambda_circ(p)
    if p > INV_E:
        return LambdaBreakpoints(lam1)
    if p == INV_E:
        return LambdaBreakpoints(lam1, 1.0, 1.0)

    def f(lam):
        return lam * math.exp(-lam) - p

    lam2 = _bisect(f, 0.0, 1.0)
    lam3 = _bisect(f, 1.0, 3.0 - 2.0 * math.log(p))
    return LambdaBreakpoints(lam1, lam2, lam3)


def tv_profile(p, lambdas):
    """d_tv(Bernoulli(p), Poisson(lam)) along an ascending grid of rates."""
    _check_p(p)
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if lambdas.size == 0:
        raise ValueError("empty rate grid")
    if np.any(lambdas <= 0) or np.any(np.diff(lambdas) <= 0):
        raise ValueError("rate grid must be positive and strictly ascending")
    return np.atleast_1d(bernoulli_poisson_tv_closed(p, lambdas))


@dataclass(frozen=True)
class UnimodalCheck:
    p: float
    certified: bool
    argmin: int
    sign_changes: int
    flat_steps: tuple
    brackets_lambda_star: bool
    diagnostic: str = ""


def certify_unimodal(p, lambdas=None, margin=TOL.strict_margin):
    """Check that the profile strictly decreases then strictly increases.

    A step whose change is within ``margin`` is reported as numerically flat
    and fails the check.
    """
    lambdas = GRIDS.lambda_grid() if lambdas is None else np.asarray(lambdas, dtype=float)
    profile = tv_profile(p, lambdas)
    steps = np.diff(profile)
    signs = np.where(steps > margin, 1, np.where(steps < -margin, -1, 0))
    flat = tuple(int(i) for i in np.flatnonzero(signs == 0))
    changes = int(np.count_nonzero(signs[1:] != signs[:-1]))
    ordered = not np.any((signs[1:] == -1) & (signs[:-1] == 1))
    argmin = int(np.argmin(profile))
    lo = lambdas[max(argmin - 1, 0)]
    hi = lambdas[min(argmin + 1, lambdas.size - 1)]
    lam_star = lambda_star(p)
    brackets = bool(lo <= lam_star <= hi)
    certified = not flat and ordered and changes <= 1 and brackets
    diagnostic = ""
    if flat:
        diagnostic = f"numerically flat steps at indices {list(flat)}"
    elif not ordered or changes > 1:
        diagnostic = f"{changes} sign changes in the profile"
    elif not brackets:
        diagnostic = f"argmin {lambdas[argmin]!r} is more than one step from lambda*={lam_star!r}"
    return UnimodalCheck(p, certified, argmin, changes, flat, brackets, diagnostic)


def grid_minimize_tv(p, lambdas=None, n=1, refine_until=1e-7):
    """Minimise d_tv(Bin(n, p), Poisson(lam)) over a rate grid, then zoom in.

    Uses the general summation path, not the closed form. Each refinement
    lays a new grid of the same size across the two cells around the current
    argmin. Returns ``(lam_hat, tv_min, coarse_argmin_index)``.
    """
    lambdas = GRIDS.lambda_grid() if lambdas is None else np.asarray(lambdas, dtype=float)
    size = lambdas.size
    values = tv_binom_poisson_grid(n, p, lambdas)
    i = int(np.argmin(values))
    coarse = i
    grid = lambdas
    while grid[1] - grid[0] > refine_until:
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, grid.size - 1)]
        grid = np.linspace(lo, hi, size)
        values = tv_binom_poisson_grid(n, p, grid)
        i = int(np.argmin(values))
    return float(grid[i]), float(values[i]), coarse


def summary(p):
    """Everything the ``optimal-lambda`` command reports for one ``p``."""
    return {
        "p": p,
        "lambda_circ": lambda_circ(p),
        "lambda_star": lambda_star(p),
        "min_tv": min_tv_value(p),
        "delta_p": delta_p(p),
        "breakpoints": breakpoints(p).as_dict(),
    }
