"""Price panel loading, resampling, universe filtering, and return extraction.

The on-disk contract is a long-format UTF-8 CSV with header
``date,ticker,price``: ISO-8601 dates, ``.`` decimal separator, no thousands
separators.  Gaps (an asset's pre-listing history) are simply absent rows.
In memory a panel is a dates-by-tickers frame; dates are strictly
increasing, tickers unique, and every present price strictly positive.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["date", "ticker", "price"]
DEFAULT_MIN_HISTORY_DAYS = 4000
DEFAULT_MIN_PRICE = 1.0


@dataclass
class PricePanel:
    """A dates-by-tickers matrix of prices; NaN marks missing history."""

    frame: pd.DataFrame = field(repr=False)

    def __post_init__(self):
        frame = self.frame
        if not isinstance(frame, pd.DataFrame):
            raise DataError("panel frame must be a pandas DataFrame")
        if frame.shape[0] == 0 or frame.shape[1] == 0:
            raise DataError("panel has no data")
        if frame.index.has_duplicates or not frame.index.is_monotonic_increasing:
            raise DataError("panel dates must be strictly increasing")
        if frame.columns.has_duplicates:
            raise DataError("panel tickers must be unique")
        values = frame.to_numpy(dtype=float)
        present = ~np.isnan(values)
        if np.any(~np.isfinite(values[present])) or np.any(values[present] <= 0):
            raise DataError("present prices must be strictly positive and finite")
        self.frame = frame.astype(float)

    @property
    def dates(self):
        return self.frame.index

    @property
    def tickers(self):
        return list(self.frame.columns)

    @property
    def n_assets(self):
        return self.frame.shape[1]

    @property
    def values(self):
        return self.frame.to_numpy(dtype=float)

    def is_complete(self):
        return not bool(self.frame.isna().any().any())

    def window(self, start=None, end=None):
        """Restrict to dates within [start, end] (inclusive)."""
        frame = self.frame
        if start is not None:
            frame = frame.loc[frame.index >= pd.Timestamp(start)]
        if end is not None:
            frame = frame.loc[frame.index <= pd.Timestamp(end)]
        if frame.shape[0] == 0:
            raise DataError(f"no panel rows fall inside the window [{start}, {end}]")
        return PricePanel(frame)


def load_prices(path):
    """Load a long-format ``date,ticker,price`` CSV into a PricePanel.

    Raises :class:`DataError` naming the offending line for malformed rows,
    non-positive prices, and duplicate (date, ticker) keys.
    """
    try:
        raw = pd.read_csv(path, dtype=str)
    except pd.errors.EmptyDataError:
        raise DataError(f"{path}: file is empty") from None
    except pd.errors.ParserError as exc:
        raise DataError(f"{path}: malformed row ({exc})") from None
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not UTF-8 encoded ({exc})") from None
    if list(raw.columns) != CSV_COLUMNS:
        raise DataError(
            f"{path}: header must be exactly {','.join(CSV_COLUMNS)}, got {','.join(raw.columns)}"
        )
    if raw.shape[0] == 0:
        raise DataError(f"{path}: no data rows")

    # +2: one for the header, one for 1-based line numbers.
    lines = raw.index + 2

    if raw.isna().any().any():
        bad = int(lines[raw.isna().any(axis=1)][0])
        raise DataError(f"{path}:{bad}: malformed row (missing field)")

    dates = pd.to_datetime(raw["date"], format="ISO8601", errors="coerce")
    if dates.isna().any():
        bad = int(lines[dates.isna()][0])
        raise DataError(f"{path}:{bad}: malformed date (expected ISO-8601)")

    def parse_price(text):
        # Python's float() round-trips repr output exactly; pandas' numeric
        # parser does not.
        try:
            value = float(text)
        except ValueError:
            return np.nan
        return value if np.isfinite(value) else np.nan

    prices = raw["price"].map(parse_price)
    if prices.isna().any():
        bad = int(lines[prices.isna()][0])
        raise DataError(f"{path}:{bad}: malformed price")
    non_positive = prices <= 0
    if non_positive.any():
        bad = int(lines[non_positive][0])
        row = raw.loc[non_positive.idxmax()]
        raise DataError(
            f"{path}:{bad}: non-positive price {row['price']} for {row['ticker']} on {row['date']}"
        )

    duplicated = raw.duplicated(subset=["date", "ticker"])
    if duplicated.any():
        bad = int(lines[duplicated][0])
        row = raw.loc[duplicated.idxmax()]
        raise DataError(f"{path}:{bad}: duplicate entry for ({row['date']}, {row['ticker']})")

    frame = pd.DataFrame({"date": dates, "ticker": raw["ticker"], "price": prices})
    wide = frame.pivot(index="date", columns="ticker", values="price")
    wide.index.name = None
    wide.columns.name = None
    return PricePanel(wide)


def save_prices(panel, path):
    """Write a PricePanel back to the CSV contract.

    Prices are written with ``repr`` so a reload reproduces them bit-exactly;
    missing entries are skipped (long format carries no gaps).
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for date, row in panel.frame.iterrows():
            day = date.strftime("%Y-%m-%d")
            for ticker, price in row.items():
                if not np.isnan(price):
                    fh.write(f"{day},{ticker},{price!r}\n")


def resample_weekly_median(panel):
    """Collapse a daily panel to one row per ISO week.

    Each ticker's weekly value is the median of its present daily prices in
    that week (even counts average the middle pair); the row is stamped with
    the week's last trading date.  Weeks where a ticker has no data stay
    missing.
    """
    iso = panel.frame.index.isocalendar()
    keys = [iso["year"].to_numpy(), iso["week"].to_numpy()]
    grouped = panel.frame.groupby(keys, sort=False)
    medians = grouped.median()
    stamps = panel.frame.index.to_series().groupby(keys, sort=False).max()
    medians.index = pd.DatetimeIndex(stamps.to_numpy())
    medians.columns.name = None
    return PricePanel(medians)


def universe_filter_report(panel, min_history_days=DEFAULT_MIN_HISTORY_DAYS,
                           min_price=DEFAULT_MIN_PRICE):
    """Decide keep/drop per ticker; returns {ticker: reason} for the drops.

    A ticker survives with at least ``min_history_days`` present daily
    observations and no present price below ``min_price``.
    """
    report = {}
    for ticker in panel.frame.columns:
        series = panel.frame[ticker].dropna()
        if len(series) < min_history_days:
            report[ticker] = "history"
        elif series.min() < min_price:
            report[ticker] = "min price"
    return report


def filter_universe(panel, min_history_days=DEFAULT_MIN_HISTORY_DAYS,
                    min_price=DEFAULT_MIN_PRICE):
    """Drop tickers failing the history or minimum-price screens.

    Column order of the survivors is preserved.  Raises :class:`DataError`
    if fewer than 2 tickers survive (a portfolio needs at least 2 assets).
    """
    report = universe_filter_report(panel, min_history_days, min_price)
    for ticker, reason in report.items():
        logger.info("dropping %s (%s)", ticker, reason)
    keep = [t for t in panel.frame.columns if t not in report]
    if len(keep) < 2:
        raise DataError(
            f"universe too small after filtering: {len(keep)} tickers remain "
            f"(dropped: {report})"
        )
    return PricePanel(panel.frame[keep])


def to_relative_prices(panel):
    """Per-period gross returns p_t / p_(t-1), shape (n_dates - 1, n_assets).

    The panel must be complete over its window; a missing entry is an error
    naming the (date, ticker) hole.
    """
    values = panel.values
    missing = np.isnan(values)
    if missing.any():
        row, col = np.argwhere(missing)[0]
        date = panel.dates[row].strftime("%Y-%m-%d")
        raise DataError(f"missing price for ({date}, {panel.tickers[col]}) inside the window")
    return values[1:] / values[:-1]
