"""Total-variation and Kolmogorov distances between binomial and Poisson laws."""

import math
from dataclasses import dataclass

import numpy as np

from .discrete_dist import (
    BinomialParams,
    FinitePmf,
    PoissonParams,
    binom_pmf_vector,
    poisson_pmf_vector,
    poisson_sf,
)


@dataclass(frozen=True)
class DistanceReport:
    tv: float
    kolmogorov: float
    binom: BinomialParams
    poisson: PoissonParams

    def __post_init__(self):
        if not 0.0 <= self.kolmogorov <= self.tv + 1e-13 or self.tv > 1.0:
            raise ValueError(f"inconsistent distances: d_K={self.kolmogorov!r}, d_tv={self.tv!r}")

    def as_dict(self):
        return {
            "n": self.binom.n,
            "p": self.binom.p,
            "lambda": self.poisson.lam,
            "tv": self.tv,
            "kolmogorov": self.kolmogorov,
        }


def tv_binom_poisson(n, p, lam):
    """d_tv(Bin(n, p), Poisson(lam)).

    The sum over ``0..n`` is exact and the Poisson mass above ``n`` enters as a
    single lump, so no truncation is involved.
    """
    diff = np.abs(binom_pmf_vector(n, p) - poisson_pmf_vector(lam, n))
    return min(1.0, 0.5 * math.fsum(diff) + 0.5 * poisson_sf(lam, n + 1))


def tv_binom_poisson_grid(n, p, lams):
    """:func:`tv_binom_poisson` for a vector of Poisson rates at once.

    Meant for small ``n`` (grid searches); the Poisson mass above ``n`` is taken
    as one minus the mass below, good to about ``(n + 1)`` ulps.
    """
    lams = np.asarray(lams, dtype=float)
    binom = binom_pmf_vector(n, p)
    ks = np.arange(n + 1)
    poi = np.exp(_poisson_logpmf_array_2d(lams, ks))
    tail = np.clip(1.0 - poi.sum(axis=1), 0.0, 1.0)
    return np.minimum(1.0, 0.5 * np.abs(poi - binom).sum(axis=1) + 0.5 * tail)


def _poisson_logpmf_array_2d(lams, ks):
    # rows: rates, columns: counts; plain form is fine for the small counts used here
    out = np.empty((lams.size, ks.size))
    for j, k in enumerate(ks):
        out[:, j] = -lams if k == 0 else k * np.log(lams) - lams - math.lgamma(k + 1.0)
    return out


def _running_max_abs(diffs):
    # Neumaier-compensated prefix sums, tracking max |prefix|
    total = 0.0
    comp = 0.0
    best = 0.0
    for x in diffs:
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
        best = max(best, abs(total + comp))
    return best


def kolmogorov_binom_poisson(n, p, lam):
    """sup_x |P(X <= x) - P(Pi <= x)|, scanned over the integers.

    For ``x >= n`` the difference is the Poisson tail above ``x``, largest at
    ``x = n``.
    """
    diffs = binom_pmf_vector(n, p) - poisson_pmf_vector(lam, n)
    inner = _running_max_abs(diffs[:-1].tolist())
    return max(inner, poisson_sf(lam, n + 1))


def distance_report(n, p, lam):
    return DistanceReport(
        tv=tv_binom_poisson(n, p, lam),
        kolmogorov=kolmogorov_binom_poisson(n, p, lam),
        binom=BinomialParams(n, p),
        poisson=PoissonParams(lam),
    )


def tv_finite(f, g):
    size = max(len(f), len(g))
    return 0.5 * math.fsum(np.abs(f.padded(size) - g.padded(size)))


def kolmogorov_finite(f, g):
    size = max(len(f), len(g))
    return _running_max_abs((f.padded(size) - g.padded(size)).tolist())


def bernoulli_poisson_tv_closed(p, lam):
    """Closed-form d_tv(Bernoulli(p), Poisson(lam)) for ``0 < p < 1``, ``lam > 0``.

    Accepts a numpy array of rates as well as a scalar.
    """
    e = np.exp(-lam)
    le = lam * e
    # 1 - e^{-lam} - lam e^{-lam} = P(Pi >= 2), written to avoid cancellation at small lam
    tail2 = -np.expm1(-lam) - le
    out = 0.5 * (np.abs(1.0 - p - e) + np.abs(p - le) + tail2)
    return float(out) if np.ndim(out) == 0 else out


__all__ = [
    "DistanceReport",
    "FinitePmf",
    "bernoulli_poisson_tv_closed",
    "distance_report",
    "kolmogorov_binom_poisson",
    "kolmogorov_finite",
    "tv_binom_poisson",
    "tv_binom_poisson_grid",
    "tv_finite",
]
