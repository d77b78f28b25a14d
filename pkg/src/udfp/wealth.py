"""Wealth processes over gross-return sequences.

A constant-rebalanced portfolio (CRP) ``b`` applied to a sequence of gross
returns ``x_1..x_n`` earns ``prod_i (b . x_i)``.  This module evaluates those
products (in log space, so thousand-period horizons neither overflow nor
underflow), maintains Monte Carlo ensembles of CRP managers, forms the
wealth-weighted average portfolio that approximates the universal-portfolio
integral, and solves for the best CRP in hindsight.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .validation import (
    check_portfolio,
    check_relative_price,
    check_relative_prices,
    check_wealth_series,
)


@dataclass
class ManagerEnsemble:
    """N sampled portfolios with their accumulated log wealth.

    ``portfolios`` is (N, m); ``log_wealth`` is (N,), zero for a fresh
    ensemble (unit starting wealth).
    """

    portfolios: np.ndarray
    log_wealth: np.ndarray
    periods_seen: int = 0

    def __post_init__(self):
        self.portfolios = np.asarray(self.portfolios, dtype=float)
        self.log_wealth = np.asarray(self.log_wealth, dtype=float)
        if self.portfolios.ndim != 2 or self.portfolios.shape[0] == 0:
            raise ValueError("ensemble needs a non-empty (N, m) portfolio matrix")
        if self.log_wealth.shape != (self.portfolios.shape[0],):
            raise ValueError("log_wealth must have one entry per manager")
        if not np.all(np.isfinite(self.log_wealth)):
            raise ValueError("manager wealths must be positive and finite")
        if self.periods_seen < 0:
            raise ValueError("periods_seen must be non-negative")

    @classmethod
    def fresh(cls, portfolios):
        portfolios = np.asarray(portfolios, dtype=float)
        return cls(portfolios, np.zeros(portfolios.shape[0]), 0)

    @property
    def n_managers(self):
        return self.portfolios.shape[0]

    @property
    def n_assets(self):
        return self.portfolios.shape[1]

    @property
    def wealths(self):
        return np.exp(self.log_wealth)


def period_return(b, x):
    """Gross return of portfolio ``b`` over one period: the dot product b . x."""
    b = check_portfolio(b)
    x = check_relative_price(x, n_assets=b.size)
    return float(b @ x)


def log_cumulative_wealth(b, xs):
    """Sum of per-period log returns of a CRP (the log of its wealth)."""
    b = check_portfolio(b)
    xs = check_relative_prices(xs, n_assets=b.size)
    if xs.shape[0] == 0:
        return 0.0
    return float(np.log(xs @ b).sum())


def cumulative_wealth(b, xs):
    """Terminal wealth of a CRP over a return sequence.

    An empty sequence returns 1.0 (the empty product) rather than raising.
    """
    return float(np.exp(log_cumulative_wealth(b, xs)))


def update_ensemble(ensemble, x):
    """Advance every manager's wealth by one period's gross return."""
    x = check_relative_price(x, n_assets=ensemble.n_assets)
    step = np.log(ensemble.portfolios @ x)
    return ManagerEnsemble(
        ensemble.portfolios,
        ensemble.log_wealth + step,
        ensemble.periods_seen + 1,
    )


def universal_weights(ensemble):
    """Wealth-weighted mean portfolio of the ensemble: sum_k S_k b_k / sum_k S_k.

    Log wealths are shifted by their maximum before exponentiating so long
    horizons cannot overflow, and the reduction runs in fixed manager order
    so results are bit-identical regardless of how wealths were produced.
    """
    scores = np.exp(ensemble.log_wealth - ensemble.log_wealth.max())
    w = scores @ ensemble.portfolios
    w /= w.sum()
    return check_portfolio(w)


def average_growth_rate(values):
    """Per-period average log growth of a wealth series: (1/n) log(W_n / W_0)."""
    values = check_wealth_series(values)
    if values.size < 2:
        raise ValueError("wealth series needs at least 2 entries to have a growth rate")
    n = values.size - 1
    return float(np.log(values[-1] / values[0]) / n)


def expected_log_growth(b, xs):
    """Empirical mean of log(b . x) over a return sequence."""
    b = check_portfolio(b)
    xs = check_relative_prices(xs, n_assets=b.size)
    if xs.shape[0] == 0:
        raise ValueError("cannot average over an empty return sequence")
    returns = xs @ b
    if np.any(returns <= 0):
        raise ValueError("encountered a non-positive portfolio return")
    return float(np.log(returns).mean())


def project_to_simplex(v):
    """Euclidean projection of a vector onto the unit simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, v.size + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def best_crp(xs, tol=1e-10, max_iter=10_000):
    """Best constant-rebalanced portfolio in hindsight.

    Maximizes ``sum_i log(b . x_i)`` over the simplex.  The objective is
    concave, so the Frank-Wolfe gap ``max_j g_j - g . b`` upper-bounds the
    suboptimality; iteration stops once it falls below ``tol``.

    Projected gradient ascent with backtracking handles the descent and
    face identification.  A line search certifies progress through objective
    differences, which bottom out at floating-point resolution well before
    gaps reach 1e-10; once that happens the iteration switches to the
    certificate-free multiplicative fixed point ``b <- b * g / n`` (whose
    progress is a relative rescaling, not a measured improvement) to close
    the remaining gap.  Degenerate instances that exhaust the budget raise
    :class:`ConvergenceError` carrying the best iterate.
    """
    xs = check_relative_prices(xs)
    n = xs.shape[0]
    if n == 0:
        raise ValueError("best_crp needs at least one period of returns")
    m = xs.shape[1]

    b = np.full(m, 1.0 / m)
    returns = xs @ b
    f = float(np.log(returns).sum())
    step = 1.0
    polishing = False
    for _ in range(max_iter):
        grad = xs.T @ (1.0 / returns)
        gap = grad.max() - grad @ b
        if gap <= tol:
            b = b / b.sum()
            return check_portfolio(b)
        if not polishing:
            step = min(step * 2.0, 1e12)
            while True:
                candidate = project_to_simplex(b + step * grad)
                direction = candidate - b
                # log1p of per-period relative changes measures the
                # improvement without the catastrophic cancellation of
                # f_new - f; centering the gradient removes its large
                # simplex-normal component before the ascent test.
                delta = float(np.log1p((xs @ direction) / returns).sum())
                if delta >= 1e-4 * ((grad - grad.mean()) @ direction) or step < 1e-18:
                    break
                step *= 0.5
            if delta < 1e-14 * (1.0 + abs(f)):
                polishing = True
            else:
                b, returns, f = candidate, xs @ candidate, f + delta
        if polishing:
            b = b * grad / n
            b /= b.sum()
            returns = xs @ b
    raise ConvergenceError(
        f"best_crp did not reach tolerance {tol} within {max_iter} iterations "
        f"(final duality gap {gap:.3e})",
        best_point=b / b.sum(),
        best_objective=float(np.log(xs @ b).sum()),
        iterations=max_iter,
    )
