"""Explicit bounds on the binomial/Poisson discrepancy, each paired with the
exact quantity it bounds."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import TOL
from .discrete_dist import binom_pmf_vector, binom_tails, poisson_pmf_vector, poisson_sf, poisson_tails
from .distances import tv_binom_poisson
from .exceptions import HypothesisError
from .lambda_opt import INV_E, P_CLAMP, delta_p, lambda_circ, lambda_star


class BoundName(str, Enum):
    MAGIC = "magic"
    MAGIC_CAP = "magic_cap"
    TRIANGLE = "triangle"
    SERFLING = "serfling"
    COROLLARY = "corollary"
    BORISOV_UPPER = "borisov_upper"
    BORISOV_LOWER = "borisov_lower"


@dataclass(frozen=True)
class BoundReport:
    bound_name: BoundName
    bound_value: float
    exact_value: float
    lower: bool = False

    @property
    def slack(self):
        if self.lower:
            return self.exact_value - self.bound_value
        return self.bound_value - self.exact_value

    @property
    def certified(self):
        return self.slack >= -TOL.bound_slack

    def as_dict(self):
        return {
            "bound_name": self.bound_name.value,
            "bound_value": self.bound_value,
            "exact_value": self.exact_value,
            "slack": self.slack,
            "certified": self.certified,
        }


def magic_bound(n, p):
    """``(1 - exp(-n p)) p``, a bound on d_tv(Bin(n, p), Poisson(n p))."""
    if not 0.0 <= p < 1.0:
        raise ValueError("magic_bound needs 0 <= p < 1")
    return -math.expm1(-n * p) * p


def magic_cap(n, p):
    """The cruder ``n p**2`` that the magic bound stays strictly below for p > 0."""
    return n * p * p


def triangle_bound(n, p, lam):
    """``|n p - lam| + (1 - exp(-lam)) lam / n`` bounding d_tv(Bin(n, p), Poisson(lam)).

    Goes through Bin(n, lam/n), so ``lam < n`` is required.
    """
    if lam >= n:
        raise HypothesisError(f"lambda={lam!r} >= n={n}: Bin(n, lambda/n) does not exist")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return abs(n * p - lam) + -math.expm1(-lam) * lam / n


def serfling_bound(n, p):
    """``n * delta_p(p)``, bounding d_tv(Bin(n, p), Poisson(n lambda_circ(p)))."""
    return n * delta_p(p)


def corollary_bound(n, p):
    """Bound on d_tv(Bin(n, p), Poisson(n lambda_star(p)))."""
    if p <= P_CLAMP:
        return n * delta_p(p)
    return n * (p - INV_E)


def borisov_envelope(n, p, event_prob_poisson):
    """Envelope for P(X_{n,p} in A) given ``q = P(Pi_{np} in A)``.

    Returns ``(max(0, (q - p)/(1 - p)), min(1, q/(1 - p)))``; ``n`` only
    fixes which Poisson law ``q`` refers to.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("borisov_envelope needs 0 <= p < 1")
    q = event_prob_poisson
    return max(0.0, (q - p) / (1.0 - p)), min(1.0, q / (1.0 - p))


def bound_reports(n, p, lam=None, m=None):
    """All bounds that apply at ``(n, p)``, each against its exact counterpart.

    ``lam`` adds the triangle bound; ``m`` adds the envelope for ``{X >= m}``.
    """
    tv_mean = tv_binom_poisson(n, p, n * p) if p > 0 else 0.0
    reports = [
        BoundReport(BoundName.MAGIC, magic_bound(n, p), tv_mean),
        BoundReport(BoundName.MAGIC_CAP, magic_cap(n, p), tv_mean),
    ]
    if 0.0 < p < 1.0:
        reports.append(BoundReport(BoundName.SERFLING, serfling_bound(n, p),
                                   tv_binom_poisson(n, p, n * lambda_circ(p))))
        reports.append(BoundReport(BoundName.COROLLARY, corollary_bound(n, p),
                                   tv_binom_poisson(n, p, n * lambda_star(p))))
    if lam is not None:
        reports.append(BoundReport(BoundName.TRIANGLE, triangle_bound(n, p, lam),
                                   tv_binom_poisson(n, p, lam)))
    if m is not None and p > 0:
        exact = binom_tails(n, p, m)[0]
        lower, upper = borisov_envelope(n, p, poisson_tails(n * p, m)[0])
        reports.append(BoundReport(BoundName.BORISOV_UPPER, upper, exact))
        reports.append(BoundReport(BoundName.BORISOV_LOWER, lower, exact, lower=True))
    return reports


def envelope_sweep(n, p):
    """Envelope check for every tail event ``{X >= m}`` and ``{X <= m}``, ``m = 0..n``.

    Returns the smallest slack over all events (negative means a violation).
    All tails come from one pair of mass vectors; each is cumulated from its
    small end.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("envelope_sweep needs 0 < p < 1")
    lam = n * p
    b = binom_pmf_vector(n, p)
    pi = poisson_pmf_vector(lam, n)
    b_up = np.cumsum(b[::-1])[::-1]
    pi_up = np.cumsum(pi[::-1])[::-1] + poisson_sf(lam, n + 1)
    b_low = np.cumsum(b)
    pi_low = np.cumsum(pi)
    worst = math.inf
    for exact, q in ((b_up, pi_up), (b_low, pi_low)):
        exact = np.minimum(exact, 1.0)
        q = np.minimum(q, 1.0)
        lower = np.maximum(0.0, (q - p) / (1.0 - p))
        upper = np.minimum(1.0, q / (1.0 - p))
        worst = min(worst, float(np.min(exact - lower)), float(np.min(upper - exact)))
    return worst
