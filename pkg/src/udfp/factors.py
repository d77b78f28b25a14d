"""Cross-sectional factor transforms producing Dirichlet concentrations.

Each factor maps price/return history to one strictly positive concentration
per asset.  The chains are deliberately simple, price-only constructions:

* size:      inverse price, rescaled so the minimum concentration is 1,
* momentum:  floor(exp(winsorized z-score of cumulative return), 1),
* sharpe:    floor(winsorized z-score of a rolling EWMA Sharpe ratio, 1),
* compound:  componentwise geometric mean of momentum and sharpe,
* uniform:   all ones (the untilted baseline).
"""

from enum import Enum

import numpy as np

from .errors import InsufficientHistoryError
from .validation import check_alpha_vector, check_cross_section

WINSOR_LO = -6.0
WINSOR_HI = 6.0
ALPHA_FLOOR = 1.0
DEFAULT_SHARPE_SPAN = 10
_STD_EPS = 1e-12
_SHARPE_STD_FLOOR = 1e-8


class FactorKind(str, Enum):
    UNIFORM = "uniform"
    SIZE = "size"
    MOMENTUM = "momentum"
    SHARPE = "sharpe"
    COMPOUND = "compound"

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown factor {value!r}; expected one of: {names}") from None


def zscore(v):
    """Cross-sectional z-score with population (divide-by-m) std.

    A degenerate cross-section (std below 1e-12) carries no ranking
    information and maps to all zeros.
    """
    v = check_cross_section(v)
    if v.size < 2:
        raise ValueError("z-score needs at least 2 assets")
    std = v.std()
    if std < _STD_EPS:
        return np.zeros_like(v)
    return (v - v.mean()) / std


def winsorize(v, lo=WINSOR_LO, hi=WINSOR_HI):
    """Clamp componentwise to [lo, hi]."""
    if not lo < hi:
        raise ValueError(f"winsorize bounds must satisfy lo < hi, got [{lo}, {hi}]")
    return np.clip(check_cross_section(v), lo, hi)


def truncate_floor(v, floor=ALPHA_FLOOR):
    """Componentwise max(v, floor)."""
    if floor <= 0:
        raise ValueError(f"floor must be positive, got {floor}")
    return np.maximum(check_cross_section(v), floor)


def size_alpha(prices):
    """Inverse-price concentration, normalized so the minimum is exactly 1."""
    prices = check_cross_section(prices)
    if np.any(prices <= 0):
        raise ValueError("prices must be strictly positive")
    inv = 1.0 / prices
    return check_alpha_vector(inv / inv.min())


def momentum_alpha(cum_returns):
    """Concentration from cumulative returns: floor(exp(winsorize(z)), 1)."""
    return check_alpha_vector(truncate_floor(np.exp(winsorize(zscore(cum_returns)))))


def rolling_sharpe(returns, span=DEFAULT_SHARPE_SPAN):
    """Latest EWMA(returns, span) / trailing-window std, per asset.

    ``returns`` is (n_periods, n_assets) of simple returns; NaN marks
    observations before an asset's history begins.  The EWMA uses decay
    2/(span+1) with weights normalized over the available history; the std
    is the sample std of the trailing ``span`` observations, floored at 1e-8
    before dividing.  Assets with fewer than 2 observations in the trailing
    window cannot support a std and are flagged by a Sharpe of 0.
    """
    returns = np.asarray(returns, dtype=float)
    if returns.ndim != 2:
        raise ValueError(f"returns must be (n_periods, n_assets), got shape {returns.shape}")
    n, m = returns.shape
    if n < 2:
        raise InsufficientHistoryError(
            f"rolling Sharpe needs at least 2 return observations, got {n}",
            required=2,
        )
    if np.isinf(returns).any():
        raise ValueError("returns contain infinite values")

    present = ~np.isnan(returns)
    values = np.where(present, returns, 0.0)

    decay = 1.0 - 2.0 / (span + 1.0)
    weights = decay ** np.arange(n - 1, -1, -1)
    weight_total = weights @ present
    ewma = np.divide(
        weights @ values,
        weight_total,
        out=np.zeros(m),
        where=weight_total > 0,
    )

    window, window_present = values[-span:], present[-span:]
    counts = window_present.sum(axis=0)
    supported = counts >= 2
    mean = np.divide(window.sum(axis=0), counts, out=np.zeros(m), where=supported)
    sq_dev = np.where(window_present, (window - mean) ** 2, 0.0)
    var = np.divide(sq_dev.sum(axis=0), counts - 1, out=np.zeros(m), where=supported)

    sharpe = ewma / np.maximum(np.sqrt(var), _SHARPE_STD_FLOOR)
    sharpe[~supported] = 0.0
    return sharpe


def sharpe_alpha(sharpes):
    """Concentration from rolling Sharpe ratios: floor(winsorize(z), 1)."""
    return check_alpha_vector(truncate_floor(winsorize(zscore(sharpes))))


def compound_alpha(mom, sharpe):
    """Componentwise geometric mean of the momentum and sharpe concentrations."""
    mom = check_alpha_vector(mom)
    sharpe = check_alpha_vector(sharpe, n_assets=mom.size)
    return check_alpha_vector(np.sqrt(mom * sharpe))


def min_price_rows(kind, span=DEFAULT_SHARPE_SPAN):
    """Number of price rows needed before a factor is computable.

    Momentum needs one return on the books; sharpe needs two so the trailing
    std (ddof=1) exists.  ``span`` only shapes the weighting, not the
    minimum.
    """
    kind = FactorKind.coerce(kind)
    if kind in (FactorKind.UNIFORM, FactorKind.SIZE):
        return 1
    if kind is FactorKind.MOMENTUM:
        return 2
    return 3


def alpha_for(kind, prices, span=DEFAULT_SHARPE_SPAN):
    """Dispatch to the factor transform for ``kind`` on a price history.

    ``prices`` is the (n_rows, n_assets) price history up to and including
    the decision period.  Cumulative returns are anchored at the first row.
    """
    kind = FactorKind.coerce(kind)
    prices = np.asarray(prices, dtype=float)
    if prices.ndim != 2:
        raise ValueError(f"price history must be 2-dimensional, got shape {prices.shape}")
    rows, m = prices.shape
    needed = min_price_rows(kind, span)
    if rows < needed:
        raise InsufficientHistoryError(
            f"factor {kind.value!r} needs {needed} price rows, have {rows} (period {rows - 1})",
            period=rows - 1,
            required=needed,
        )

    if kind is FactorKind.UNIFORM:
        return np.ones(m)
    if kind is FactorKind.SIZE:
        return size_alpha(prices[-1])
    if kind is FactorKind.MOMENTUM:
        return momentum_alpha(prices[-1] / prices[0] - 1.0)

    simple_returns = prices[1:] / prices[:-1] - 1.0
    sharpe = sharpe_alpha(rolling_sharpe(simple_returns, span=span))
    if kind is FactorKind.SHARPE:
        return sharpe
    return compound_alpha(momentum_alpha(prices[-1] / prices[0] - 1.0), sharpe)
