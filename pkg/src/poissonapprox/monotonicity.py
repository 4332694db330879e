"""Numerical certification of the monotonicity results for binomial tails.

Every strict inequality is certified on a *relative* gap: the difference of
the two probabilities divided by the larger of them, where both are taken in
whichever tail representation (``P(X >= m)`` or ``P(X <= m-1)``) is small and
therefore accurate to a few ulps. A gap at or below ``TOL.strict_margin`` is a
failure ("numerically indistinguishable"), never a pass.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .config import DEFAULT_SEED, TOL
from .discrete_dist import (
    _binom_logpmf_array,
    binom_interval,
    binom_log_pmf,
    binom_pmf_vector,
    binom_tails,
    poisson_interval,
    poisson_tails,
)
from .exceptions import CertificationError, HypothesisError
from .special import reg_inc_beta_pair


class Claim(str, Enum):
    T1i = "T1i"
    T1ii = "T1ii"
    C1i = "C1i"
    C1ii = "C1ii"
    C2 = "C2"
    T2 = "T2"
    C3 = "C3"
    SM = "SM"
    MLR = "MLR"


class Verdict(str, Enum):
    GREATER = "greater"
    LESS = "less"
    NOT_APPLICABLE = "not-applicable"


@dataclass
class MonotonicityReport:
    claim: Claim
    grid_size: int
    violations: list = field(default_factory=list)
    min_margin: float = math.inf
    seed: int = None
    details: dict = field(default_factory=dict)
    margin: float = TOL.strict_margin

    @property
    def certified(self):
        return not self.violations and self.min_margin > self.margin

    def as_dict(self):
        return {
            "claim": self.claim.value,
            "certified": self.certified,
            "grid_size": self.grid_size,
            "min_margin": self.min_margin,
            "margin": self.margin,
            "seed": self.seed,
            "violations": [list(v) for v in self.violations],
            "details": self.details,
        }


def signed_gap(a, b):
    """Relative gap of ``a - b`` for ``(value, complement)`` pairs.

    Returns ``(difference, difference / scale)``.
    """
    if a[0] <= 0.5 and b[0] <= 0.5:
        diff, scale = a[0] - b[0], max(a[0], b[0])
    elif a[1] <= 0.5 and b[1] <= 0.5:
        diff, scale = b[1] - a[1], max(a[1], b[1])
    else:
        diff, scale = a[0] - b[0], max(a[0], b[0])
    if scale == 0.0:
        return 0.0, 0.0
    return diff, diff / scale


def _log_binom_coef(n, k):
    return math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)


def delta_n(n, m, p_n, p_next):
    """``(n+1) J_{n+1} - (n-m+1) J_n`` with ``J`` the incomplete-beta integrals.

    ``J_n = B(n-m+1, m) I_{p_n}(m, n-m+1)``; both terms share the factor
    ``1 / C(n, m-1)``, so the difference is formed between regularized values
    and scaled in log space.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    upper_next = reg_inc_beta_pair(m, n - m + 2, p_next)
    upper_cur = reg_inc_beta_pair(m, n - m + 1, p_n)
    diff, _ = signed_gap(upper_next, upper_cur)
    if diff == 0.0:
        return 0.0
    return math.copysign(math.exp(math.log(abs(diff)) - _log_binom_coef(n, m - 1)), diff)


def q_difference(n, m, p_n, p_next, q_n=None, q_next=None):
    """``P(X_{n+1,p_next} >= m) - P(X_{n,p_n} >= m)`` from the summed tails."""
    return signed_gap(binom_tails(n + 1, p_next, m, q_next), binom_tails(n, p_n, m, q_n))


def theorem1_part(n, m, p_n, p_next):
    """Which set of hypotheses holds: ``"i"``, ``"ii"`` or ``None``.

    Compared in exact rational arithmetic on the given floats, so the weak
    boundary cases are classified exactly.
    """
    n_, pn, pn1 = Fraction(n), Fraction(p_n), Fraction(p_next)
    if (n_ + 1) * pn1 >= n_ * pn and m >= 1 + n_ * pn:
        return "i"
    if (n_ + 1) * pn1 <= n_ * pn and m <= 1 + n_ * pn1:
        return "ii"
    return None


def _theorem1_margin(n, m, p_n, p_next):
    part = theorem1_part(n, m, p_n, p_next)
    _, rel = q_difference(n, m, p_n, p_next)
    if part == "ii":
        rel = -rel
    return part, rel


def check_theorem1(n, m, p_n, p_next, margin=TOL.strict_margin):
    """Classify the tuple and confirm the predicted strict ordering.

    Returns :class:`Verdict` ``GREATER`` (``P(X_{n+1,p_next} >= m)`` is larger),
    ``LESS``, or ``NOT_APPLICABLE``. Raises :class:`CertificationError` if the
    prediction is not observed with the margin.
    """
    if not p_n > p_next:
        raise HypothesisError(f"requires p_n > p_next, got {p_n!r} <= {p_next!r}")
    if not 1 <= m <= n:
        raise HypothesisError(f"requires 1 <= m <= n, got m={m}, n={n}")
    if not (0.0 <= p_next and p_n <= 1.0):
        raise HypothesisError("probabilities must lie in [0, 1]")
    part, rel = _theorem1_margin(n, m, p_n, p_next)
    if part is None:
        return Verdict.NOT_APPLICABLE
    if rel <= margin:
        raise CertificationError(
            f"part ({part}) predicted a strict ordering at n={n}, m={m}, "
            f"p_n={p_n!r}, p_next={p_next!r}; relative gap {rel!r}"
        )
    return Verdict.GREATER if part == "i" else Verdict.LESS


def _below_exact(x, bound):
    # largest float <= x that is also <= bound in exact arithmetic
    while Fraction(x) > bound:
        x = math.nextafter(x, -math.inf)
    return x


def _above_exact(x, bound):
    while Fraction(x) < bound:
        x = math.nextafter(x, math.inf)
    return x


def sample_theorem1_tuples(part, samples, seed=DEFAULT_SEED, n_max=100, boundary_share=0.1):
    """Random tuples ``(n, m, p_n, p_next)`` satisfying one part's hypotheses.

    A ``boundary_share`` of the draws sit on the weak-inequality boundary
    (``m = 1 + n p_n`` for part (i), ``(n+1) p_next = n p_n`` for part (ii)).
    Probabilities stay in ``[0.005, 0.99]`` so no tail underflows.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < samples:
        boundary = rng.random() < boundary_share
        if part == "i":
            n = int(rng.integers(2, n_max + 1))
            if boundary:
                m = int(rng.integers(2, n + 1))
                p_n = _below_exact((m - 1) / n, Fraction(m - 1, n))
            else:
                p_n = float(rng.uniform(0.01, (n - 1) / n))
                m_lo = math.floor(n * Fraction(p_n)) + 1
                if Fraction(m_lo) < 1 + n * Fraction(p_n):
                    m_lo += 1
                if m_lo > n:
                    continue
                m = int(rng.integers(m_lo, n + 1))
            if p_n < 0.01:
                continue
            lo = _above_exact(n * p_n / (n + 1), Fraction(n) * Fraction(p_n) / (n + 1))
            p_next = float(lo + rng.random() * (p_n - lo))
            p_next = _above_exact(p_next, Fraction(n) * Fraction(p_n) / (n + 1))
            if not p_next < p_n:
                continue
        else:
            n = int(rng.integers(1, n_max + 1))
            p_n = float(rng.uniform(0.01, 0.99))
            hi_exact = Fraction(n) * Fraction(p_n) / (n + 1)
            hi = _below_exact(n * p_n / (n + 1), hi_exact)
            if boundary:
                p_next = hi
            else:
                p_next = float(rng.uniform(0.005, hi))
            m_hi = min(n, math.floor(1 + n * Fraction(p_next)))
            m = int(rng.integers(1, m_hi + 1))
        if theorem1_part(n, m, p_n, p_next) != part:
            continue
        out.append((n, m, p_n, p_next))
    return out


def _margins(chunk):
    return [_theorem1_margin(*t) for t in chunk]


def certify_theorem1(part, samples=10_000, seed=DEFAULT_SEED, n_max=100, workers=1,
                     margin=TOL.strict_margin):
    """Sweep random admissible tuples for one part and collect violations."""
    if part not in ("i", "ii"):
        raise ValueError("part is 'i' or 'ii'")
    tuples = sample_theorem1_tuples(part, samples, seed=seed, n_max=n_max)
    if workers > 1:
        size = math.ceil(len(tuples) / workers)
        chunks = [tuples[i:i + size] for i in range(0, len(tuples), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(_margins, chunks) for r in chunk]
    else:
        results = _margins(tuples)
    report = MonotonicityReport(Claim.T1i if part == "i" else Claim.T1ii,
                                grid_size=len(tuples), seed=seed)
    for t, (found, rel) in zip(tuples, results):
        report.min_margin = min(report.min_margin, rel)
        if found != part or rel <= margin:
            report.violations.append((*t, rel))
    report.details = {"n_max": n_max, "boundary_share": 0.1}
    return report


@dataclass
class SequenceResult:
    """Probabilities along ``n`` together with their Poisson limit.

    ``values`` and ``limit`` are ``(probability, complement)`` pairs.
    ``direction`` is ``"increasing"``, ``"decreasing"`` or ``"constant"`` and
    ``side`` says where the terms sit relative to the limit.
    """

    claim: Claim
    ns: list
    values: list
    limit: tuple
    direction: str
    side: str
    params: dict

    def probabilities(self):
        return [v[0] for v in self.values]


def _natural_at_least(x):
    return max(1, math.ceil(x))


def corollary1_sequence(lam, m, n_max):
    """``P(X_{n, lam/n} >= m)`` for ``n`` from ``max(m, ceil(lam))`` to ``n_max``."""
    if lam <= 0 or m < 1:
        raise ValueError("need lam > 0 and m >= 1")
    lam_q = Fraction(lam)
    if m >= 1 + lam_q:
        claim, direction, side = Claim.C1i, "increasing", "below"
    elif m <= lam_q:
        claim, direction, side = Claim.C1ii, "decreasing", "above"
    else:
        raise HypothesisError(f"m={m} lies strictly between lambda={lam!r} and lambda + 1")
    start = max(m, _natural_at_least(lam))
    ns = list(range(start, n_max + 1))
    values = [binom_tails(n, lam / n, m) for n in ns]
    return SequenceResult(claim, ns, values, poisson_tails(lam, m), direction, side,
                          {"lambda": lam, "m": m, "n_max": n_max})


def corollary2_sequence(lam, m1, m2, n_max):
    """``P(m1 <= X_{n, lam/n} <= m2)`` for ``n >= m2 + 1``."""
    if not m1 <= Fraction(lam) <= m2:
        raise HypothesisError(f"requires m1 <= lambda <= m2, got {m1}, {lam!r}, {m2}")
    if m1 < 1:
        raise HypothesisError("m1 must be a natural number")
    ns = list(range(m2 + 1, n_max + 1))
    values = [binom_interval(n, lam / n, m1, m2) for n in ns]
    return SequenceResult(Claim.C2, ns, values, poisson_interval(lam, m1, m2), "decreasing",
                          "above", {"lambda": lam, "m1": m1, "m2": m2, "n_max": n_max})


def theorem2_sequence(lam, m, n_max):
    """``P(X_{n, p_n} >= m)`` with ``p_n = 1 - exp(-lam/n)``, ``n >= max(1, m-1)``.

    For ``m = 1`` every term equals ``1 - exp(-lam)``.
    """
    if lam <= 0 or m < 1:
        raise ValueError("need lam > 0 and m >= 1")
    ns = list(range(max(1, m - 1), n_max + 1))
    values = [binom_tails(n, -math.expm1(-lam / n), m, math.exp(-lam / n)) for n in ns]
    if m == 1:
        limit = (-math.expm1(-lam), math.exp(-lam))
        return SequenceResult(Claim.T2, ns, values, limit, "constant", "equal",
                              {"lambda": lam, "m": m, "n_max": n_max})
    return SequenceResult(Claim.T2, ns, values, poisson_tails(lam, m), "increasing", "below",
                          {"lambda": lam, "m": m, "n_max": n_max})


def certify_sequence(seq, margin=TOL.strict_margin, constant_tol=1e-14):
    """Check strict monotonicity, the side of the limit and shrinking distance to it."""
    report = MonotonicityReport(seq.claim, grid_size=len(seq.ns), details=dict(seq.params))
    if seq.direction == "constant":
        target = seq.limit[0]
        worst = 0.0
        for n, v in zip(seq.ns, seq.values):
            err = abs(v[0] - target)
            worst = max(worst, err)
            if err > constant_tol:
                report.violations.append((n, "not constant", err))
        report.details["max_deviation"] = worst
        return report
    sign = 1.0 if seq.direction == "increasing" else -1.0
    side = -1.0 if seq.side == "below" else 1.0
    prev_dist = math.inf
    for i, (n, v) in enumerate(zip(seq.ns, seq.values)):
        diff, rel = signed_gap(v, seq.limit)
        rel *= side
        report.min_margin = min(report.min_margin, rel)
        if rel <= margin:
            report.violations.append((n, "wrong side of limit", rel))
        if abs(diff) >= prev_dist:
            report.violations.append((n, "distance to limit not shrinking", abs(diff)))
        prev_dist = abs(diff)
        if i:
            _, step = signed_gap(v, seq.values[i - 1])
            step *= sign
            report.min_margin = min(report.min_margin, step)
            if step <= margin:
                report.violations.append((n, f"not strictly {seq.direction}", step))
    return report


def certify_stochastic_order(lam, n_max, tol=TOL.prob_abs):
    """``P(X_{n+1,p_{n+1}} >= m) >= P(X_{n,p_n} >= m)`` for every ``m`` at once,
    with ``p_n = 1 - exp(-lam/n)``."""
    report = MonotonicityReport(Claim.SM, grid_size=0, details={"lambda": lam, "n_max": n_max},
                                margin=-tol)

    def survival(n):
        pmf = binom_pmf_vector(n, -math.expm1(-lam / n), math.exp(-lam / n))
        return np.concatenate([np.cumsum(pmf[::-1])[::-1], [0.0]])

    prev = survival(1)
    for n in range(1, n_max):
        cur = survival(n + 1)
        gaps = cur[: prev.size] - prev
        report.grid_size += gaps.size
        worst = float(gaps.min())
        report.min_margin = min(report.min_margin, worst)
        for m in np.flatnonzero(gaps < -tol):
            report.violations.append((n, int(m), float(gaps[m])))
        prev = cur
    return report


@dataclass(frozen=True)
class MlrCell:
    n: int
    k: int
    delta_nk: float
    tilde_delta_nk: float


def h_boundary(c):
    """``(exp(-c) - 1 + c) / c``, rising from 0 to 1 on ``(0, inf)``."""
    return (math.expm1(-c) + c) / c


def tilde_delta(n, k, lam):
    """``-(n-k) (e^{lam/n} - e^{lam/(n+1)}) + e^{lam/(n+1)} - 1``, sign-equivalent to delta."""
    a = lam / (n + 1)
    return -(n - k) * math.exp(a) * math.expm1(lam / (n * (n + 1))) + math.expm1(a)


def _family_params(n, lam):
    return -math.expm1(-lam / n), math.exp(-lam / n)


def delta_nk(n, k, lam):
    """``P_{n+1,k+1} P_{n,k} - P_{n,k+1} P_{n+1,k}`` for ``p_n = 1 - exp(-lam/n)``.

    The two products are combined as ``e^B expm1(A - B)`` from their logs.
    """
    p0, q0 = _family_params(n, lam)
    p1, q1 = _family_params(n + 1, lam)
    a = binom_log_pmf(n + 1, p1, k + 1, q1) + binom_log_pmf(n, p0, k, q0)
    b = binom_log_pmf(n, p0, k + 1, q0) + binom_log_pmf(n + 1, p1, k, q1)
    return math.exp(b) * math.expm1(a - b)


def mlr_matrix(n, lam):
    """``delta_{n,k}`` and its sign proxy for ``k = 0..n-1``."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    p0, q0 = _family_params(n, lam)
    p1, q1 = _family_params(n + 1, lam)
    log_n = _binom_logpmf_array(n, p0, q0, np.arange(n + 1))
    log_n1 = _binom_logpmf_array(n + 1, p1, q1, np.arange(n + 2))
    cells = []
    for k in range(n):
        a = log_n1[k + 1] + log_n[k]
        b = log_n[k + 1] + log_n1[k]
        cells.append(MlrCell(n, k, float(np.exp(b) * np.expm1(a - b)), tilde_delta(n, k, lam)))
    return cells


def find_mlr_violation(c, a, n_start=1, n_cap=10_000, threshold=-1e-12):
    """Search ``n = n_start, ...`` with ``k = floor(a n)``, ``lam = c n`` for
    ``delta_{n,k} < threshold``. Returns ``(n, k, delta)``."""
    if c <= 0 or not 0 < a < 1:
        raise ValueError("need c > 0 and 0 < a < 1")
    if a >= h_boundary(c):
        raise HypothesisError(f"a={a!r} is not below h(c)={h_boundary(c)!r}")
    for n in range(max(1, n_start), n_cap + 1):
        k = math.floor(a * n)
        if k > n - 1:
            continue
        d = delta_nk(n, k, c * n)
        if d < threshold:
            return n, k, d
    raise LookupError(f"no violation found for c={c!r}, a={a!r} up to n={n_cap}")


def certify_mlr_failure(pairs=((1.0, 0.2), (2.0, 0.3), (0.5, 0.1)), n_start=1, n_cap=10_000):
    # the certificate is delta below -1e-12, so that is the margin here
    report = MonotonicityReport(Claim.MLR, grid_size=len(pairs), margin=1e-12)
    found = []
    for c, a in pairs:
        try:
            n, k, d = find_mlr_violation(c, a, n_start=n_start, n_cap=n_cap)
        except LookupError:
            report.violations.append((c, a, "no violation found"))
            continue
        found.append({"c": c, "a": a, "n": n, "k": k, "delta": d})
        report.min_margin = min(report.min_margin, -d)
    report.details = {"violations_of_mlr": found}
    return report
