"""Binomial and Poisson masses, tails and finite probability vectors.

Masses are evaluated in log space (Loader's saddle-point form) and only
exponentiated when summed. Tail probabilities are summed over the smaller
tail with ``math.fsum``, so the small tail is accurate in relative terms and
the large one is its complement.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .special import LOG_2PI, bd0_array, reg_inc_beta, stirlerr, stirlerr_array

# a Poisson upper-tail series stops once a term is this small relative to the partial sum
POISSON_SERIES_CUTOFF = 1e-18


@dataclass(frozen=True)
class BinomialParams:
    n: int
    p: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")

    def log_pmf(self, k):
        return binom_log_pmf(self.n, self.p, k)

    def sf(self, m):
        return binom_sf(self.n, self.p, m)

    def pmf_vector(self):
        return binom_pmf_vector(self.n, self.p)


@dataclass(frozen=True)
class PoissonParams:
    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be a positive real, got {self.lam!r}")

    def log_pmf(self, k):
        return poisson_log_pmf(self.lam, k)

    def sf(self, m):
        return poisson_sf(self.lam, m)


def _complement(p, q):
    return 1.0 - p if q is None else q


def _binom_logpmf_array(n, p, q, ks):
    ks = np.asarray(ks, dtype=np.int64)
    if p == 0.0:
        return np.where(ks == 0, 0.0, -np.inf)
    if q == 0.0:
        return np.where(ks == n, 0.0, -np.inf)
    log_q = math.log1p(-p) if p < 0.5 else math.log(q)
    out = np.full(ks.shape, -np.inf)
    out[ks == 0] = n * log_q
    out[ks == n] = n * math.log(p)
    if n < 2:
        return out
    inside = (ks > 0) & (ks < n)
    every = bool(inside.all())
    k = ks if every else ks[inside]
    if k.size == 0:
        return out
    kf = k.astype(float)
    nk = n - k
    lc = (stirlerr(n) - stirlerr_array(k) - stirlerr_array(nk)
          - bd0_array(kf, n * p) - bd0_array(nk.astype(float), n * q))
    vals = lc - 0.5 * (LOG_2PI + np.log(kf * nk / n))
    if every:
        return vals
    out[inside] = vals
    return out


def _poisson_logpmf_array(lam, ks):
    ks = np.asarray(ks, dtype=np.int64)
    out = np.full(ks.shape, -np.inf)
    out[ks == 0] = -lam
    pos = ks > 0
    if np.any(pos):
        k = ks[pos]
        kf = k.astype(float)
        out[pos] = -stirlerr_array(k) - bd0_array(kf, lam) - 0.5 * (LOG_2PI + np.log(kf))
    return out


def binom_log_pmf(n, p, k, q=None):
    """log P(X_{n,p} = k); ``-inf`` outside ``0..n``.

    ``q`` may be passed when ``1 - p`` is known more accurately than the
    floating-point subtraction gives it.
    """
    if k < 0 or k > n:
        return -math.inf
    return float(_binom_logpmf_array(n, p, _complement(p, q), [k])[0])


def binom_pmf_vector(n, p, q=None):
    """The full mass vector ``P(X = 0..n)``."""
    return np.exp(_binom_logpmf_array(n, p, _complement(p, q), np.arange(n + 1)))


def poisson_log_pmf(lam, k):
    if k < 0:
        return -math.inf
    return float(_poisson_logpmf_array(lam, [k])[0])


def poisson_pmf_vector(lam, kmax):
    """``P(Pi = 0..kmax)``."""
    return np.exp(_poisson_logpmf_array(lam, np.arange(kmax + 1)))


def binom_tails(n, p, m, q=None):
    """``(P(X >= m), P(X <= m-1))`` for X ~ Bin(n, p).

    The smaller of the two is summed directly (terms smallest first), the
    other is its complement.
    """
    q = _complement(p, q)
    if m <= 0:
        return 1.0, 0.0
    if m > n:
        return 0.0, 1.0
    if p == 0.0:
        return 0.0, 1.0
    if q == 0.0:
        return 1.0, 0.0
    if m > n * p:
        # terms decrease from m upward, so walk down from n
        ks = np.arange(n, m - 1, -1)
        upper = min(1.0, math.fsum(np.exp(_binom_logpmf_array(n, p, q, ks))))
        return upper, 1.0 - upper
    ks = np.arange(0, m)
    lower = min(1.0, math.fsum(np.exp(_binom_logpmf_array(n, p, q, ks))))
    return 1.0 - lower, lower


def binom_sf(n, p, m, q=None):
    """P(X_{n,p} >= m); 1 for ``m <= 0`` and 0 for ``m > n``."""
    return binom_tails(n, p, m, q)[0]


def binom_cdf(n, p, k, q=None):
    """P(X_{n,p} <= k)."""
    return binom_tails(n, p, k + 1, q)[1]


def binom_interval(n, p, m1, m2, q=None):
    """``(P(m1 <= X <= m2), 1 - P(m1 <= X <= m2))``, both summed directly."""
    lo, hi = max(m1, 0), min(m2, n)
    if lo > hi:
        return 0.0, 1.0
    pmf = binom_pmf_vector(n, p, q)
    inside = math.fsum(pmf[lo:hi + 1])
    outside = math.fsum(pmf[:lo]) + math.fsum(pmf[hi + 1:])
    return min(inside, 1.0), min(outside, 1.0)


def binom_sf_via_beta(n, p, m):
    """P(X_{n,p} >= m) through the identity with ``I_p(m, n - m + 1)``."""
    if m <= 0:
        return 1.0
    if m > n:
        return 0.0
    return reg_inc_beta(m, n - m + 1, p)


def _poisson_upper_terms(lam, m):
    chunk = max(64, int(8 * math.sqrt(lam)))
    pieces = []
    partial = 0.0
    start = m
    while True:
        terms = np.exp(_poisson_logpmf_array(lam, np.arange(start, start + chunk)))
        pieces.append(terms)
        partial += float(terms.sum())
        last = terms[-1]
        if last == 0.0 or last < POISSON_SERIES_CUTOFF * partial:
            break
        start += chunk
    return np.concatenate(pieces)


def poisson_tails(lam, m):
    """``(P(Pi >= m), P(Pi <= m-1))`` for Pi ~ Poisson(lam)."""
    if m <= 0:
        return 1.0, 0.0
    if m > lam:
        terms = _poisson_upper_terms(lam, m)
        upper = min(1.0, math.fsum(terms[::-1]))
        return upper, 1.0 - upper
    lower = min(1.0, math.fsum(np.exp(_poisson_logpmf_array(lam, np.arange(0, m)))))
    return 1.0 - lower, lower


def poisson_sf(lam, m):
    """P(Pi_lam >= m); 1 for ``m <= 0``."""
    return poisson_tails(lam, m)[0]


def poisson_cdf(lam, k):
    """P(Pi_lam <= k)."""
    return poisson_tails(lam, k + 1)[1]


def poisson_interval(lam, m1, m2):
    """``(P(m1 <= Pi <= m2), complement)``, smaller member accurate."""
    lo = max(m1, 0)
    if lo > m2:
        return 0.0, 1.0
    inside = math.fsum(np.exp(_poisson_logpmf_array(lam, np.arange(lo, m2 + 1))))
    if inside <= 0.5:
        return inside, 1.0 - inside
    outside = poisson_tails(lam, lo)[1] + poisson_tails(lam, m2 + 1)[0]
    return 1.0 - outside, outside


@dataclass(frozen=True, eq=False)
class FinitePmf:
    """A probability vector on ``{0, ..., N}``.

    ``renormalized`` records that the vector was rescaled to unit mass after
    an operation drifted by more than the mass tolerance.
    """

    probs: np.ndarray
    renormalized: bool = False

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("a FinitePmf needs a non-empty 1-d vector")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("FinitePmf entries must be finite and non-negative")
        if abs(math.fsum(probs) - 1.0) > TOL.mass_abs:
            raise ValueError(f"FinitePmf mass {math.fsum(probs)!r} differs from 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self):
        return self.probs.size

    @classmethod
    def point_mass(cls, k):
        probs = np.zeros(k + 1)
        probs[k] = 1.0
        return cls(probs)

    @classmethod
    def bernoulli(cls, p):
        return cls([1.0 - p, p])

    @classmethod
    def binomial(cls, n, p):
        return cls(binom_pmf_vector(n, p))

    def padded(self, size):
        out = np.zeros(size)
        out[: self.probs.size] = self.probs
        return out


def convolve(f, g):
    """Law of the sum of independent variables with laws ``f`` and ``g``."""
    probs = np.convolve(f.probs, g.probs)
    drift = abs(math.fsum(probs) - 1.0)
    if drift > TOL.mass_abs:
        return FinitePmf(probs / math.fsum(probs), renormalized=True)
    return FinitePmf(probs)
