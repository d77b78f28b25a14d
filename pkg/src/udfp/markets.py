"""Synthetic factor-driven markets and growth-rate bound verifiers.

Two generators produce gross-return sequences from known exposures:

* single-factor: ``X_i = R_i * beta`` for a scalar market return ``R_i``,
* two-factor:    ``X_ji = r1_i ** beta1_j * r2_i ** beta2_j``.

The verifiers evaluate the closed-form quantities these models imply: the
excess growth ``log(b . beta)`` of a CRP over the market, an AM/GM lower
bound on two-factor growth, and the tilted-vs-uniform wealth ratio whose
log-space form ``n * (log m + log sum(beta^2) - 2 log sum(beta))`` is
non-negative by Cauchy-Schwarz.  Everything runs in log space so horizons of
hundreds of periods stay representable.
"""

from typing import NamedTuple

import numpy as np

from .simplex import RngStream, sample_dirichlet
from .validation import check_portfolio

_CS_RTOL = 1e-12


def _check_positive_vector(v, name, minimum=1):
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size < minimum:
        raise ValueError(f"{name} must be a vector of at least {minimum} entries")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError(f"{name} must be strictly positive and finite")
    return arr


def gen_single_factor(beta, market):
    """Gross returns of m assets driven by one market factor.

    ``beta`` is the (m,) exposure vector (strictly positive: a zero exposure
    would zero out a gross return); ``market`` the (n,) sequence of market
    gross returns.  Returns an (n, m) matrix with row i equal to
    ``market[i] * beta``.
    """
    beta = _check_positive_vector(beta, "beta", minimum=2)
    market = _check_positive_vector(market, "market returns")
    return market[:, None] * beta[None, :]


def gen_two_factor(beta, factor_returns):
    """Gross returns under a two-factor log model.

    ``beta`` is (m, 2) with non-negative exposures; ``factor_returns`` is
    (n, 2) of strictly positive per-factor gross returns.  Asset j earns
    ``r1 ** beta[j, 0] * r2 ** beta[j, 1]`` each period.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 2 or beta.shape[1] != 2 or beta.shape[0] < 2:
        raise ValueError(f"beta must be (m, 2) with m >= 2, got shape {beta.shape}")
    if not np.all(np.isfinite(beta)) or np.any(beta < 0):
        raise ValueError("two-factor exposures must be non-negative and finite")
    f = np.asarray(factor_returns, dtype=float)
    if f.ndim != 2 or f.shape[1] != 2:
        raise ValueError(f"factor returns must be (n, 2), got shape {f.shape}")
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise ValueError("factor returns must be strictly positive and finite")
    # exp(log r1 * b1 + log r2 * b2), vectorized over periods and assets
    return np.exp(np.log(f) @ beta.T)


def lognormal_returns(n, drift, vol, gen):
    """n log-normal gross returns exp(N(drift, vol^2)) from a Generator."""
    return np.exp(gen.normal(drift, vol, size=n))


def single_factor_excess_growth(b, beta):
    """Excess growth rate of CRP ``b`` over the market: log(b . beta)."""
    b = check_portfolio(b)
    beta = _check_positive_vector(beta, "beta", minimum=2)
    if beta.size != b.size:
        raise ValueError(f"beta has {beta.size} assets, portfolio has {b.size}")
    dot = b @ beta
    if dot <= 0:
        raise ValueError("portfolio-weighted exposure must be positive")
    return float(np.log(dot))


def two_factor_lower_bound(beta, g1, g2, b):
    """AM/GM lower bound on the average growth of a two-factor CRP.

    ``mean(beta1) * g1 + mean(beta2) * g2 + log(m * gm(b))`` where ``gm`` is
    the geometric mean.  The last term (the diversification drag) is
    computed as the mean of ``log(b_j) - log(1/m)`` so it vanishes
    identically, not just approximately, for the equal-weight portfolio.
    Portfolios with a zero weight have gm(b) = 0 and the bound is -inf.
    """
    beta = np.asarray(beta, dtype=float)
    b = check_portfolio(b)
    if beta.ndim != 2 or beta.shape[1] != 2:
        raise ValueError(f"beta must be (m, 2), got shape {beta.shape}")
    if beta.shape[0] != b.size:
        raise ValueError(f"beta has {beta.shape[0]} assets, portfolio has {b.size}")
    if not np.all(np.isfinite(beta)) or np.any(beta < 0):
        raise ValueError("two-factor exposures must be non-negative and finite")
    factor_part = beta[:, 0].mean() * g1 + beta[:, 1].mean() * g2
    if np.any(b == 0):
        return float("-inf")
    m = b.size
    drag = np.mean(np.log(b) - np.log(1.0 / m))
    return float(factor_part + drag)


def fn_log_ratio(beta, n):
    """log of the tilted/uniform wealth ratio: n*(log m + log sum(b^2) - 2 log sum(b))."""
    beta = _check_positive_vector(beta, "beta", minimum=2)
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    m = beta.size
    return float(n * (np.log(m) + np.log(beta @ beta) - 2.0 * np.log(beta.sum())))


def fn_ratio(beta, n):
    """Tilted/uniform wealth ratio ``m^n (sum b^2)^n / (sum b)^(2n)``.

    Cauchy-Schwarz makes this >= 1, with equality exactly for constant
    exposures.  Evaluated in log space; when the result exceeds float range
    it comes back as +inf (use :func:`fn_log_ratio` for the always-finite
    log value).
    """
    with np.errstate(over="ignore"):
        return float(np.exp(fn_log_ratio(beta, n)))


class CauchySchwarzCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def cauchy_schwarz_check(beta):
    """Evaluate (sum beta)^2 <= m * sum(beta^2) with relative tolerance 1e-12."""
    beta = _check_positive_vector(beta, "beta")
    lhs = float(beta.sum() ** 2)
    rhs = float(beta.size * (beta @ beta))
    return CauchySchwarzCheck(lhs, rhs, lhs <= rhs + _CS_RTOL * rhs)


class DominanceResult(NamedTuple):
    wealth_beta: float
    wealth_uniform: float
    ratio: float
    log_wealth_beta: float
    log_wealth_uniform: float


def _log_mean_terminal_wealth(portfolios, beta, log_market_total, n_periods):
    # terminal wealth of CRP b on this market is (prod R_i) * (b . beta)^n;
    # ensemble average computed with a log-sum-exp shift.
    log_w = log_market_total + n_periods * np.log(portfolios @ beta)
    shift = log_w.max()
    return float(shift + np.log(np.exp(log_w - shift).mean()))


def dominance_experiment(beta, n_periods, n_managers, rng, drift=5e-4, vol=0.01):
    """Monte Carlo tilted-vs-uniform ensemble wealth on a single-factor market.

    Samples ``n_managers`` CRPs from Dirichlet(beta) and from
    Dirichlet(1,..,1), scores both ensembles on one shared log-normal market
    path of ``n_periods`` periods, and reports the ensemble-average terminal
    wealths and their ratio.  The market path and the underlying random
    bitstream are common to both ensembles (paired draws), so the ratio
    isolates the effect of the tilt.
    """
    beta = _check_positive_vector(beta, "beta", minimum=2)
    n_periods = int(n_periods)
    if n_periods < 0:
        raise ValueError(f"n_periods must be >= 0, got {n_periods}")
    n_managers = int(n_managers)
    if n_managers < 100:
        raise ValueError(f"need at least 100 managers for a usable estimate, got {n_managers}")
    if not isinstance(rng, RngStream):
        raise TypeError("dominance_experiment needs an RngStream to derive paired substreams")

    if n_periods == 0:
        return DominanceResult(1.0, 1.0, 1.0, 0.0, 0.0)

    market = lognormal_returns(n_periods, drift, vol, rng.generator(subkey=0))
    log_market_total = float(np.log(market).sum())

    tilted = sample_dirichlet(beta, n_managers, rng.generator(subkey=1))
    uniform = sample_dirichlet(np.ones_like(beta), n_managers, rng.generator(subkey=1))

    log_beta = _log_mean_terminal_wealth(tilted, beta, log_market_total, n_periods)
    log_uniform = _log_mean_terminal_wealth(uniform, beta, log_market_total, n_periods)
    with np.errstate(over="ignore"):
        return DominanceResult(
            float(np.exp(log_beta)),
            float(np.exp(log_uniform)),
            float(np.exp(log_beta - log_uniform)),
            log_beta,
            log_uniform,
        )
