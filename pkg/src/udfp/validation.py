"""Input validation helpers.

All numeric quantities in this package travel as plain numpy arrays; the
``check_*`` functions below are the single place where their invariants are
enforced.  Each returns a validated ``float64`` array (copying only when
conversion requires it), so callers can write ``w = check_portfolio(w)`` at
their boundary, sklearn-style.
"""

import numpy as np

PORTFOLIO_SUM_TOL = 1e-12


def _as_float_vector(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def check_portfolio(w, n_assets=None):
    """Validate a point on the unit simplex: w_j >= 0, sum(w) == 1, m >= 2."""
    arr = _as_float_vector(w, "portfolio")
    if arr.size < 2:
        raise ValueError(f"portfolio needs at least 2 assets, got {arr.size}")
    if n_assets is not None and arr.size != n_assets:
        raise ValueError(f"portfolio has {arr.size} assets, expected {n_assets}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("portfolio contains non-finite weights")
    if np.any(arr < 0):
        raise ValueError(f"portfolio contains negative weights: {arr}")
    if abs(arr.sum() - 1.0) > PORTFOLIO_SUM_TOL:
        raise ValueError(f"portfolio weights sum to {arr.sum()!r}, not 1")
    return arr


def check_alpha_vector(alpha, n_assets=None):
    """Validate Dirichlet concentrations: strictly positive, finite."""
    arr = _as_float_vector(alpha, "alpha")
    if arr.size < 2:
        raise ValueError(f"alpha needs at least 2 components, got {arr.size}")
    if n_assets is not None and arr.size != n_assets:
        raise ValueError(f"alpha has {arr.size} components, expected {n_assets}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError(f"alpha components must be strictly positive and finite: {arr}")
    return arr


def check_relative_price(x, n_assets=None):
    """Validate one gross-return vector: strictly positive, finite."""
    arr = _as_float_vector(x, "relative price")
    if n_assets is not None and arr.size != n_assets:
        raise ValueError(f"relative price has {arr.size} assets, expected {n_assets}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("relative prices must be strictly positive and finite")
    return arr


def check_relative_prices(xs, n_assets=None):
    """Validate a (n_periods, n_assets) matrix of gross returns."""
    arr = np.asarray(xs, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"relative prices must be 2-dimensional, got shape {arr.shape}")
    if n_assets is not None and arr.shape[1] != n_assets:
        raise ValueError(f"relative prices have {arr.shape[1]} assets, expected {n_assets}")
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0)):
        raise ValueError("relative prices must be strictly positive and finite")
    return arr


def check_price_matrix(prices):
    """Validate a (n_dates, n_assets) matrix of price levels (no gaps)."""
    arr = np.asarray(prices, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"price matrix must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[1] < 2:
        raise ValueError("price matrix needs at least 2 assets")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("price matrix must be strictly positive and finite")
    return arr


def check_cross_section(v, n_assets=None):
    """Validate one finite value per asset."""
    arr = _as_float_vector(v, "cross section")
    if n_assets is not None and arr.size != n_assets:
        raise ValueError(f"cross section has {arr.size} assets, expected {n_assets}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("cross section contains non-finite values")
    return arr


def check_wealth_series(values):
    """Validate a wealth trajectory: positive, finite, starting at 1.0."""
    arr = _as_float_vector(values, "wealth series")
    if arr.size < 1:
        raise ValueError("wealth series is empty")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("wealth series must be strictly positive and finite")
    if arr[0] != 1.0:
        raise ValueError(f"wealth series must start at 1.0, got {arr[0]!r}")
    return arr
