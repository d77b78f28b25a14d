"""Universal Dirichlet factor portfolios.

Monte Carlo universal portfolio weights with factor-tilted Dirichlet
resampling, synthetic factor-market generators with closed-form growth
bounds, and a reproducible backtest harness.
"""

from .backtest import (
    BacktestConfig,
    BacktestResult,
    DirichletFactorPortfolio,
    compare_strategies,
    gen_synthetic_panel,
    metrics,
    run_backtest,
)
from .errors import ConvergenceError, DataError, InsufficientHistoryError
from .factors import (
    FactorKind,
    alpha_for,
    compound_alpha,
    momentum_alpha,
    rolling_sharpe,
    sharpe_alpha,
    size_alpha,
    truncate_floor,
    winsorize,
    zscore,
)
from .markets import (
    cauchy_schwarz_check,
    dominance_experiment,
    fn_log_ratio,
    fn_ratio,
    gen_single_factor,
    gen_two_factor,
    single_factor_excess_growth,
    two_factor_lower_bound,
)
from .panel import (
    PricePanel,
    filter_universe,
    load_prices,
    resample_weekly_median,
    save_prices,
    to_relative_prices,
)
from .simplex import RngStream, normalize_to_simplex, sample_dirichlet
from .wealth import (
    ManagerEnsemble,
    average_growth_rate,
    best_crp,
    cumulative_wealth,
    expected_log_growth,
    period_return,
    universal_weights,
    update_ensemble,
)

__version__ = "0.1.0"

__all__ = [
    "BacktestConfig",
    "BacktestResult",
    "ConvergenceError",
    "DataError",
    "DirichletFactorPortfolio",
    "FactorKind",
    "InsufficientHistoryError",
    "ManagerEnsemble",
    "PricePanel",
    "RngStream",
    "alpha_for",
    "average_growth_rate",
    "best_crp",
    "cauchy_schwarz_check",
    "compare_strategies",
    "compound_alpha",
    "cumulative_wealth",
    "dominance_experiment",
    "expected_log_growth",
    "filter_universe",
    "fn_log_ratio",
    "fn_ratio",
    "gen_single_factor",
    "gen_synthetic_panel",
    "gen_two_factor",
    "load_prices",
    "metrics",
    "momentum_alpha",
    "normalize_to_simplex",
    "period_return",
    "resample_weekly_median",
    "rolling_sharpe",
    "run_backtest",
    "sample_dirichlet",
    "save_prices",
    "sharpe_alpha",
    "single_factor_excess_growth",
    "size_alpha",
    "to_relative_prices",
    "truncate_floor",
    "two_factor_lower_bound",
    "universal_weights",
    "update_ensemble",
    "winsorize",
    "zscore",
]
