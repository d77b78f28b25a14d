"""End-to-end backtest: factor alpha -> Dirichlet managers -> universal weights.

The loop, per decision period t (prices p_0..p_t observed):

1. compute the factor concentration ``alpha_t`` from history up to t,
2. redraw N manager portfolios from Dirichlet(alpha_t) on the substream for
   period t (redrawing is what makes a time-varying alpha meaningful),
3. score each manager by its hypothetical CRP wealth over every in-window
   return seen so far,
4. trade the next period at the ensemble's wealth-weighted mean portfolio.

Weights for period t+1 therefore use data up to and including period t only.
:class:`DirichletFactorPortfolio` packages the loop as a scikit-learn style
estimator over a price-level matrix; :func:`run_backtest` adapts it to
:class:`~udfp.panel.PricePanel` inputs and the config/result records the CLI
consumes.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator

from .errors import DataError
from .factors import DEFAULT_SHARPE_SPAN, FactorKind, alpha_for, min_price_rows
from .markets import gen_single_factor, gen_two_factor, lognormal_returns
from .panel import PricePanel, filter_universe, resample_weekly_median
from .simplex import RngStream, sample_dirichlet
from .validation import check_price_matrix, check_wealth_series
from .wealth import ManagerEnsemble, average_growth_rate, universal_weights

DEFAULT_MANAGERS = 10_000
PERIODS_PER_YEAR = {"daily": 252.0, "weekly-median": 52.0}

# Managers are scored in fixed-size chunks so the arithmetic (and therefore
# the output bytes) is identical no matter how many workers run the chunks.
_CHUNK = 4096


def _score_chunks(portfolios, history, threads):
    """Per-manager CRP log wealth over ``history``, chunked deterministically."""
    chunks = [portfolios[i:i + _CHUNK] for i in range(0, portfolios.shape[0], _CHUNK)]

    def score(chunk):
        return np.log(chunk @ history.T).sum(axis=1)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(score, chunks))
    else:
        parts = [score(chunk) for chunk in chunks]
    return np.concatenate(parts)


class DirichletFactorPortfolio(BaseEstimator):
    """Universal portfolio over factor-tilted Dirichlet manager ensembles.

    Parameters
    ----------
    factor : str or FactorKind
        Which concentration recipe drives the per-period Dirichlet tilt.
    managers : int
        Ensemble size N approximating the universal-portfolio integral.
    seed : int
        Master seed; period t draws from the (seed, t) substream, so a
        truncated price history reproduces its prefix of weights exactly.
    span : int
        EWMA/rolling window span for the sharpe factor.
    warmup : int, optional
        Price rows to observe before the first trade.  Defaults to the
        factor's own minimum; comparisons pass the maximum across factors so
        every strategy trades the same window.
    persistent : bool
        Sample one ensemble at the window start and only update its wealth,
        instead of redrawing each period.  Only meaningful (and only
        allowed) for the uniform factor, where the sampling law never
        changes.
    threads : int
        Worker threads for manager scoring.  Results are identical for any
        value.

    Attributes
    ----------
    weights_ : ndarray of shape (n_trades, n_assets)
        Traded portfolio per period, first trade at the warm-up end.
    wealth_ : ndarray of shape (n_trades + 1,)
        Strategy wealth, normalized to 1.0 at the window start.
    alphas_ : ndarray of shape (n_trades, n_assets)
        Dirichlet concentration used for each decision.
    start_index_ : int
        Row of the fitted price matrix where the traded window starts.
    """

    def __init__(self, factor="uniform", managers=DEFAULT_MANAGERS, seed=0,
                 span=DEFAULT_SHARPE_SPAN, warmup=None, persistent=False, threads=1):
        self.factor = factor
        self.managers = managers
        self.seed = seed
        self.span = span
        self.warmup = warmup
        self.persistent = persistent
        self.threads = threads

    def fit(self, X, y=None):
        """Run the backtest over a (n_dates, n_assets) price-level matrix."""
        prices = check_price_matrix(X)
        kind = FactorKind.coerce(self.factor)
        managers = int(self.managers)
        if managers < 1:
            raise ValueError(f"managers must be >= 1, got {managers}")
        threads = int(self.threads)
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        if self.persistent and kind is not FactorKind.UNIFORM:
            raise ValueError("a persistent ensemble is only defined for the uniform factor")

        start = min_price_rows(kind, self.span) - 1
        if self.warmup is not None:
            if int(self.warmup) < min_price_rows(kind, self.span):
                raise ValueError(
                    f"warmup {self.warmup} is below factor {kind.value!r}'s minimum "
                    f"of {min_price_rows(kind, self.span)} price rows"
                )
            start = int(self.warmup) - 1
        n_rows, m = prices.shape
        if start > n_rows - 2:
            raise DataError(
                f"panel has {n_rows} rows but factor {kind.value!r} needs "
                f"{start + 1} warm-up rows plus one traded period"
            )

        returns = prices[1:] / prices[:-1]
        n_trades = n_rows - 1 - start

        weights = np.empty((n_trades, m))
        alphas = np.empty((n_trades, m))
        wealth = np.empty(n_trades + 1)
        wealth[0] = 1.0

        ensemble = None
        for t in range(start, n_rows - 1):
            if self.persistent:
                if ensemble is None:
                    drawn = sample_dirichlet(
                        np.ones(m), managers, RngStream(self.seed, stream_id=t)
                    )
                    ensemble = ManagerEnsemble.fresh(drawn)
                alpha = np.ones(m)
            else:
                alpha = alpha_for(kind, prices[: t + 1], span=self.span)
                drawn = sample_dirichlet(alpha, managers, RngStream(self.seed, stream_id=t))
                log_wealth = _score_chunks(drawn, returns[start:t], threads)
                ensemble = ManagerEnsemble(drawn, log_wealth, t - start)

            w = universal_weights(ensemble)
            k = t - start
            weights[k] = w
            alphas[k] = alpha
            wealth[k + 1] = wealth[k] * (w @ returns[t])

            if self.persistent:
                ensemble = ManagerEnsemble(
                    ensemble.portfolios,
                    ensemble.log_wealth + np.log(ensemble.portfolios @ returns[t]),
                    ensemble.periods_seen + 1,
                )

        self.n_assets_ = m
        self.start_index_ = start
        self.weights_ = weights
        self.alphas_ = alphas
        self.wealth_ = check_wealth_series(wealth)
        self.growth_rate_ = average_growth_rate(wealth) if n_trades >= 1 else 0.0
        return self

    def score(self, X=None, y=None):
        """Average per-period log growth of the fitted run."""
        return self.growth_rate_


@dataclass
class BacktestConfig:
    """Everything needed to reproduce one backtest run."""

    factor: str = "uniform"
    managers: int = DEFAULT_MANAGERS
    seed: int = 0
    resample: str = "weekly-median"
    window: Optional[tuple] = None
    history_filter: int = 4000
    min_price: float = 1.0
    span: int = DEFAULT_SHARPE_SPAN
    threads: int = 1
    persistent: bool = False

    def __post_init__(self):
        if self.resample not in PERIODS_PER_YEAR:
            raise ValueError(
                f"resample must be one of {sorted(PERIODS_PER_YEAR)}, got {self.resample!r}"
            )
        if self.managers < 1:
            raise ValueError(f"managers must be >= 1, got {self.managers}")
        if self.window is not None:
            start, end = self.window
            if start is not None and end is not None and not pd.Timestamp(start) < pd.Timestamp(end):
                raise ValueError(f"window start {start} must precede end {end}")


@dataclass
class BacktestResult:
    """Wealth curve, traded weights, and summary metrics for one strategy."""

    factor: str
    tickers: list
    dates: pd.DatetimeIndex
    wealth: np.ndarray
    weights: np.ndarray
    alphas: np.ndarray
    metrics: dict = field(default_factory=dict)


def metrics(values, periods_per_year):
    """Summary statistics of a wealth series.

    Annualized Sharpe is mean over std (ddof=1) of per-period log returns;
    a flat series has no spread, so its Sharpe is reported as 0 with
    ``sharpe_degenerate`` set.  Max drawdown is the largest peak-to-trough
    decline, 1 - min(wealth / running peak).
    """
    values = check_wealth_series(values)
    if values.size < 2:
        raise ValueError("metrics need at least 2 wealth points")
    log_returns = np.log(values[1:] / values[:-1])
    spread = log_returns.std(ddof=1) if log_returns.size >= 2 else 0.0
    degenerate = bool(spread <= 0.0)
    sharpe = 0.0 if degenerate else float(
        log_returns.mean() / spread * np.sqrt(periods_per_year)
    )
    peaks = np.maximum.accumulate(values)
    return {
        "terminal_wealth": float(values[-1]),
        "average_growth_rate": average_growth_rate(values),
        "annualized_sharpe": sharpe,
        "sharpe_degenerate": degenerate,
        "max_drawdown": float(1.0 - np.min(values / peaks)),
        "periods": int(values.size - 1),
        "periods_per_year": float(periods_per_year),
    }


def _prepare_panel(cfg, panel):
    filtered = filter_universe(panel, cfg.history_filter, cfg.min_price)
    if cfg.resample == "weekly-median":
        filtered = resample_weekly_median(filtered)
    if cfg.window is not None:
        filtered = filtered.window(*cfg.window)
    if not filtered.is_complete():
        missing = filtered.frame.isna()
        row = missing.any(axis=1).idxmax()
        col = missing.loc[row].idxmax()
        raise DataError(
            f"backtest window has missing prices (first hole: "
            f"{row.strftime('%Y-%m-%d')}, {col})"
        )
    return filtered


def run_backtest(cfg, panel, warmup=None):
    """Filter, resample, and window ``panel`` per ``cfg``, then run the loop.

    ``warmup`` overrides the factor's own warm-up (in price rows) so
    multi-strategy comparisons can share a trading window.
    """
    prepared = _prepare_panel(cfg, panel)
    estimator = DirichletFactorPortfolio(
        factor=cfg.factor,
        managers=cfg.managers,
        seed=cfg.seed,
        span=cfg.span,
        warmup=warmup,
        persistent=cfg.persistent,
        threads=cfg.threads,
    ).fit(prepared.values)

    wealth = estimator.wealth_
    result_metrics = metrics(wealth, PERIODS_PER_YEAR[cfg.resample])
    return BacktestResult(
        factor=FactorKind.coerce(cfg.factor).value,
        tickers=prepared.tickers,
        dates=prepared.dates[estimator.start_index_:],
        wealth=wealth,
        weights=estimator.weights_,
        alphas=estimator.alphas_,
        metrics=result_metrics,
    )


def compare_strategies(cfgs, panel):
    """Run several configs on the identical return sequence.

    All configs must share their resample/window/universe settings; every
    strategy starts trading at the latest warm-up across the set so the
    wealth series align date for date.  Returns one BacktestResult per
    config, in config order (identical configs produce identical rows).
    """
    if not cfgs:
        raise ValueError("compare_strategies needs at least one config")
    reference = cfgs[0]
    for cfg in cfgs[1:]:
        same = (
            cfg.resample == reference.resample
            and cfg.window == reference.window
            and cfg.history_filter == reference.history_filter
            and cfg.min_price == reference.min_price
        )
        if not same:
            raise ValueError("compared configs must share resample/window/universe settings")

    shared_warmup = max(min_price_rows(cfg.factor, cfg.span) for cfg in cfgs)
    return [run_backtest(cfg, panel, warmup=shared_warmup) for cfg in cfgs]


def gen_synthetic_panel(n_assets, days, beta=None, seed=0, model="single-factor",
                        initial_prices=None, drift=5e-4, vol=0.01,
                        drift2=2e-4, vol2=8e-3, start="2000-01-03"):
    """Integrate a synthetic factor market into a daily PricePanel.

    ``days`` counts price rows (business days); the generated gross returns
    fill the ``days - 1`` transitions.  Default exposures slope upward with
    asset index while default initial prices slope downward, so the cheap
    assets are the fast growers and size/momentum tilts have something to
    find.  Pass ``initial_prices`` / ``beta`` to rearrange the scenario.
    """
    n_assets = int(n_assets)
    days = int(days)
    if n_assets < 2 or days < 2:
        raise ValueError("need at least 2 assets and 2 days")
    if model not in ("single-factor", "two-factor"):
        raise ValueError(f"model must be 'single-factor' or 'two-factor', got {model!r}")

    spread = 0.9 / days
    if beta is None:
        slope = np.linspace(1.0 - spread, 1.0 + spread, n_assets)
        beta = slope if model == "single-factor" else np.column_stack([slope, slope[::-1]])
    beta = np.asarray(beta, dtype=float)

    if initial_prices is None:
        initial_prices = np.linspace(100.0, 10.0, n_assets)
    initial_prices = np.asarray(initial_prices, dtype=float)
    if initial_prices.shape != (n_assets,) or np.any(initial_prices <= 0):
        raise ValueError("initial_prices must be strictly positive with one entry per asset")

    stream = RngStream(seed, stream_id=0)
    if model == "single-factor":
        if beta.shape != (n_assets,):
            raise ValueError(f"single-factor beta must have shape ({n_assets},), got {beta.shape}")
        market = lognormal_returns(days - 1, drift, vol, stream.generator(subkey=0))
        gross = gen_single_factor(beta, market)
    else:
        if beta.shape != (n_assets, 2):
            raise ValueError(f"two-factor beta must have shape ({n_assets}, 2), got {beta.shape}")
        factors = np.column_stack([
            lognormal_returns(days - 1, drift, vol, stream.generator(subkey=0)),
            lognormal_returns(days - 1, drift2, vol2, stream.generator(subkey=1)),
        ])
        gross = gen_two_factor(beta, factors)

    prices = np.vstack([initial_prices, initial_prices * np.cumprod(gross, axis=0)])
    dates = pd.bdate_range(start, periods=days)
    tickers = [f"A{j:02d}" for j in range(n_assets)]
    return PricePanel(pd.DataFrame(prices, index=dates, columns=tickers))
