"""Exact binomial/Poisson probabilities, their distances, and the
monotonicity results that yield conservative binomial tests."""

__version__ = "0.1.0"

from .discrete_dist import (  # noqa: E402
    BinomialParams,
    FinitePmf,
    PoissonParams,
    binom_cdf,
    binom_interval,
    binom_log_pmf,
    binom_sf,
    binom_tails,
    convolve,
    poisson_cdf,
    poisson_log_pmf,
    poisson_sf,
    poisson_tails,
)
from .distances import (  # noqa: E402
    bernoulli_poisson_tv_closed,
    kolmogorov_binom_poisson,
    tv_binom_poisson,
    tv_finite,
)
from .special import reg_inc_beta  # noqa: E402
