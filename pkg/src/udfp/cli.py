"""Command-line surface: backtest, compare, verify-bounds, gen.

Every artifact-producing run writes a manifest recording the fully resolved
configuration, input digests, seed, and timestamps, so reruns from the
manifest reproduce outputs byte for byte.  Flag values resolve as
command line > config file (``--config`` or ``$UDFP_CONFIG``) > defaults.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error,
4 verified bound violated.
"""

import hashlib
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__
from .backtest import BacktestConfig, compare_strategies, gen_synthetic_panel
from .errors import DataError
from .factors import FactorKind
from .markets import (
    cauchy_schwarz_check,
    dominance_experiment,
    fn_ratio,
    gen_single_factor,
    gen_two_factor,
    lognormal_returns,
    two_factor_lower_bound,
)
from .panel import load_prices, save_prices, universe_filter_report
from .simplex import RngStream

FACTOR_NAMES = [k.value for k in FactorKind]
CONFIG_ENV_VAR = "UDFP_CONFIG"


class BoundViolation(Exception):
    """A verified inequality failed; carries the counterexample description."""


# ---------------------------------------------------------------------------
# config file and manifest plumbing


def _parse_config_file(path):
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _resolve(ctx):
    """Merge config-file values under explicit command-line flags.

    Only parameters still at their defaults pick up config values; the
    config path itself comes from --config or $UDFP_CONFIG.
    """
    params = dict(ctx.params)
    config_path = params.get("config") or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        file_values = _parse_config_file(config_path)
        known = {p.name.replace("_", "-"): p for p in ctx.command.params}
        for key, raw in file_values.items():
            param = known.get(key)
            if param is None:
                click.echo(f"warning: config key {key!r} not used by this command", err=True)
                continue
            source = ctx.get_parameter_source(param.name)
            if source == click.core.ParameterSource.DEFAULT:
                params[param.name] = param.type.convert(raw, param, ctx)
    params["config"] = config_path
    return params


def _require(params, *names):
    for name in names:
        if params.get(name) is None:
            flag = "--" + name.replace("_", "-")
            raise click.UsageError(f"missing required option {flag} (flag or config file)")


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_manifest(out_dir, command, params, inputs, started_at):
    resolved = {}
    for name, value in sorted(params.items()):
        if name in ("config",):
            continue
        if isinstance(value, Path):
            value = str(value)
        resolved[name.replace("_", "-")] = value
    manifest = {
        "tool": "udfp",
        "version": __version__,
        "command": command,
        "resolved_config": resolved,
        "seed": params.get("seed"),
        "input_digests": {str(p): _digest(p) for p in inputs if p},
        "started_at": started_at,
        "finished_at": datetime.now(timezone.utc).isoformat(),
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _write_wealth_csv(path, dates, columns):
    """columns: list of (name, values) aligned with dates."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("date," + ",".join(name for name, _ in columns) + "\n")
        for i, date in enumerate(dates):
            cells = ",".join(repr(float(values[i])) for _, values in columns)
            fh.write(f"{date.strftime('%Y-%m-%d')},{cells}\n")


def _write_weights_csv(path, dates, tickers, weights):
    """Long-format weights; row k is the portfolio traded over period dates[k+1]."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("date,ticker,weight\n")
        for k in range(weights.shape[0]):
            day = dates[k + 1].strftime("%Y-%m-%d")
            for j, ticker in enumerate(tickers):
                fh.write(f"{day},{ticker},{float(weights[k, j])!r}\n")


def _write_metrics(path, sections):
    """sections: list of (prefix or None, dict)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for prefix, values in sections:
            for key, value in values.items():
                name = f"{prefix}.{key}" if prefix else key
                fh.write(f"{name}={_fmt(value)}\n")


def _echo_drop_report(panel, min_history, min_price):
    for ticker, reason in universe_filter_report(panel, min_history, min_price).items():
        click.echo(f"dropped {ticker} ({reason})", err=True)


def _parse_beta(text, n_assets, model):
    entries = [e for e in text.split(",") if e.strip()]
    if len(entries) != n_assets:
        raise click.UsageError(f"--beta lists {len(entries)} values for {n_assets} assets")
    try:
        if any(":" in e for e in entries):
            if model != "two-factor":
                raise click.UsageError("paired --beta values (b1:b2) need --model two-factor")
            return np.array([[float(a), float(b)] for a, b in
                             (e.split(":", 1) for e in entries)])
        values = np.array([float(e) for e in entries])
    except ValueError:
        raise click.UsageError(f"--beta must be comma-separated numbers, got {text!r}") from None
    if model == "two-factor":
        raise click.UsageError("--model two-factor needs paired --beta values (b1:b2,...)")
    return values


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(version=__version__, prog_name="udfp")
def cli():
    """Universal Dirichlet factor portfolios: backtests, synthetic markets, bound checks."""


def _common_backtest_options(fn):
    decorators = [
        click.option("--prices", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="Input CSV panel (date,ticker,price)."),
        click.option("--managers", type=int, default=10_000, show_default=True,
                     help="Dirichlet managers sampled per period."),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
                     help="Master seed (required)."),
        click.option("--resample", type=click.Choice(["daily", "weekly-median"]),
                     default="weekly-median", show_default=True),
        click.option("--min-history", type=int, default=4000, show_default=True,
                     help="Minimum present daily observations per ticker."),
        click.option("--min-price", type=float, default=1.0, show_default=True,
                     help="Minimum present price per ticker."),
        click.option("--span", type=int, default=10, show_default=True,
                     help="EWMA/rolling span for the sharpe factor."),
        click.option("--output-dir", type=click.Path(file_okay=False), default=None,
                     help="Directory for wealth/weights/metrics/manifest artifacts."),
        click.option("--threads", type=click.IntRange(1, None), default=1, show_default=True,
                     help="Worker threads for manager scoring (results identical for any value)."),
        click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
                     help=f"key=value config file; ${CONFIG_ENV_VAR} is the fallback path."),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


def _run_single_backtest(params, factors):
    """Shared body of `backtest` and `compare`; factors is the deduped list."""
    out_dir = Path(params["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    started_at = datetime.now(timezone.utc).isoformat()

    panel = load_prices(params["prices"])
    _echo_drop_report(panel, params["min_history"], params["min_price"])

    cfgs = [
        BacktestConfig(
            factor=factor,
            managers=params["managers"],
            seed=params["seed"],
            resample=params["resample"],
            history_filter=params["min_history"],
            min_price=params["min_price"],
            span=params["span"],
            threads=params["threads"],
        )
        for factor in factors
    ]
    results = compare_strategies(cfgs, panel)

    _write_wealth_csv(
        out_dir / "wealth.csv",
        results[0].dates,
        [(res.factor, res.wealth) for res in results],
    )
    if len(results) == 1:
        only = results[0]
        _write_weights_csv(out_dir / "weights.csv", only.dates, only.tickers, only.weights)
        sections = [(None, {"factor": only.factor}), (None, only.metrics)]
    else:
        sections = [(res.factor, res.metrics) for res in results]
    _write_metrics(out_dir / "metrics.txt", sections)
    _write_manifest(out_dir, "backtest" if len(results) == 1 else "compare",
                    params, [params["prices"], params.get("config")], started_at)

    click.echo(f"{'factor':<10} {'terminal':>12} {'growth/period':>14} {'sharpe':>9} {'max_dd':>8}")
    for res in results:
        m = res.metrics
        click.echo(
            f"{res.factor:<10} {m['terminal_wealth']:>12.6f} {m['average_growth_rate']:>14.6e} "
            f"{m['annualized_sharpe']:>9.3f} {m['max_drawdown']:>8.4f}"
        )
    click.echo(f"artifacts written to {out_dir}")


@cli.command()
@click.option("--factor", type=click.Choice(FACTOR_NAMES), default="uniform",
              show_default=True, help="Dirichlet tilt driving the manager ensemble.")
@_common_backtest_options
@click.pass_context
def backtest(ctx, **_kwargs):
    """Run one factor strategy over a price panel."""
    params = _resolve(ctx)
    _require(params, "prices", "seed", "output_dir")
    _run_single_backtest(params, [params["factor"]])


@cli.command()
@click.option("--factors", default=None,
              help=f"Comma-separated list from: {', '.join(FACTOR_NAMES)}.")
@_common_backtest_options
@click.pass_context
def compare(ctx, **_kwargs):
    """Run several factor strategies on the identical return sequence."""
    params = _resolve(ctx)
    _require(params, "prices", "seed", "output_dir", "factors")
    raw = [f.strip().lower() for f in params["factors"].split(",") if f.strip()]
    factors = []
    for name in raw:
        if name not in FACTOR_NAMES:
            raise click.UsageError(
                f"unknown factor {name!r}; expected one of: {', '.join(FACTOR_NAMES)}"
            )
        if name in factors:
            click.echo(f"warning: duplicate factor {name!r} ignored", err=True)
        else:
            factors.append(name)
    if len(factors) < 2:
        raise click.UsageError("--factors needs at least 2 distinct factors")
    _run_single_backtest(params, factors)


@cli.command("gen")
@click.option("--assets", type=click.IntRange(2, None), default=20, show_default=True)
@click.option("--days", type=click.IntRange(2, None), default=4200, show_default=True,
              help="Business days of daily prices to generate.")
@click.option("--model", type=click.Choice(["single-factor", "two-factor"]),
              default="single-factor", show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--beta", default=None,
              help="Comma-separated exposures (pairs b1:b2 for two-factor); default slopes "
                   "upward across assets while initial prices slope downward.")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def gen(ctx, **_kwargs):
    """Write a synthetic factor-market price panel in the ingest CSV format."""
    params = _resolve(ctx)
    _require(params, "output_dir")
    out_dir = Path(params["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    started_at = datetime.now(timezone.utc).isoformat()

    beta = None
    if params["beta"]:
        beta = _parse_beta(params["beta"], params["assets"], params["model"])
    panel = gen_synthetic_panel(
        params["assets"], params["days"], beta=beta,
        seed=params["seed"], model=params["model"],
    )
    prices_path = out_dir / "prices.csv"
    save_prices(panel, prices_path)
    _write_manifest(out_dir, "gen", params, [params.get("config")], started_at)
    click.echo(f"wrote {panel.frame.shape[0]} days x {panel.n_assets} assets to {prices_path}")


# ---------------------------------------------------------------------------
# verify-bounds


def _verify_fn_and_cs(instances, max_assets, max_periods, gen):
    fn_min_excess = np.inf
    equality_mismatches = []
    cs_failures = []
    for i in range(instances):
        m = int(gen.integers(2, max_assets + 1))
        n = int(gen.integers(1, max_periods + 1))
        constant = i % 10 == 0
        if constant:
            beta = np.full(m, max(gen.uniform(0.0, 10.0), 1e-12))
        else:
            beta = np.maximum(gen.uniform(0.0, 10.0, size=m), 1e-12)
        ratio = fn_ratio(beta, n)
        fn_min_excess = min(fn_min_excess, ratio - 1.0)
        if ratio < 1.0 - 1e-12:
            equality_mismatches.append((beta, n, ratio, "ratio below 1"))
        is_equal = abs(ratio - 1.0) <= 1e-10
        if constant and not is_equal:
            equality_mismatches.append((beta, n, ratio, "constant beta but ratio != 1"))
        if not constant and is_equal and np.ptp(beta) > 1e-6:
            equality_mismatches.append((beta, n, ratio, "non-constant beta at equality"))
        check = cauchy_schwarz_check(beta)
        if not check.holds:
            cs_failures.append((beta, check))
    return fn_min_excess, equality_mismatches, cs_failures


def _verify_identity(instances, gen):
    worst = 0.0
    for _ in range(instances):
        m = int(gen.integers(2, 11))
        n = int(gen.integers(2, 501))
        beta = gen.uniform(0.5, 2.0, size=m)
        b = gen.dirichlet(np.ones(m))
        market = lognormal_returns(n, gen.uniform(-1e-3, 1e-3), gen.uniform(0.0, 0.05), gen)
        xs = gen_single_factor(beta, market)
        crp_growth = float(np.log(xs @ b).mean())
        market_growth = float(np.log(market).mean())
        residual = float(abs(crp_growth - market_growth - np.log(b @ beta)))
        worst = max(worst, residual)
    return worst


def _verify_two_factor_bound(instances, gen):
    worst_margin = np.inf
    worst_case = None
    for _ in range(instances):
        m = int(gen.integers(2, 11))
        n = int(gen.integers(1, 201))
        beta = gen.uniform(0.0, 2.0, size=(m, 2))
        b = gen.dirichlet(np.ones(m))
        factors = np.column_stack([
            lognormal_returns(n, gen.uniform(-2e-3, 2e-3), gen.uniform(0.0, 0.05), gen),
            lognormal_returns(n, gen.uniform(-2e-3, 2e-3), gen.uniform(0.0, 0.05), gen),
        ])
        returns = gen_two_factor(beta, factors)
        gr_avg = float(np.log(returns @ b).mean())
        g1 = float(np.log(factors[:, 0]).mean())
        g2 = float(np.log(factors[:, 1]).mean())
        margin = gr_avg - two_factor_lower_bound(beta, g1, g2, b)
        if margin < worst_margin:
            worst_margin, worst_case = margin, (beta, b, n)
    return worst_margin, worst_case


def _verify_dominance(seeds, managers, periods, base_seed):
    beta = np.array([0.6, 0.8, 1.0, 1.2, 1.4])
    ratios = np.array([
        dominance_experiment(beta, periods, managers, RngStream(base_seed, stream_id=s)).ratio
        for s in range(seeds)
    ])
    mean = float(ratios.mean())
    if seeds >= 2:
        half_width = 1.645 * ratios.std(ddof=1) / np.sqrt(seeds)
        lower = float(mean - half_width)
    else:
        lower = mean
    return mean, lower


@cli.command("verify-bounds")
@click.option("--instances", type=click.IntRange(1, None), default=10_000, show_default=True,
              help="Random instances for the wealth-ratio and Cauchy-Schwarz suites.")
@click.option("--max-assets", type=click.IntRange(2, None), default=50, show_default=True)
@click.option("--max-periods", type=click.IntRange(1, None), default=100, show_default=True)
@click.option("--identity-instances", type=click.IntRange(1, None), default=100, show_default=True)
@click.option("--bound-instances", type=click.IntRange(1, None), default=1000, show_default=True)
@click.option("--dominance-seeds", type=click.IntRange(0, None), default=50, show_default=True,
              help="Paired seeds for the tilted-vs-uniform wealth experiment (0 skips it).")
@click.option("--dominance-managers", type=click.IntRange(100, None), default=2000, show_default=True)
@click.option("--dominance-periods", type=click.IntRange(0, None), default=100, show_default=True,
              help="Kept moderate by default: longer horizons fatten the ratio's tail and "
                   "need a larger ensemble for a stable confidence bound.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--threads", type=click.IntRange(1, None), default=1, show_default=True,
              help="Accepted for interface parity; the suites are vectorized single-process.")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None,
              help="Optional; also write report.txt and manifest.json here.")
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def verify_bounds(ctx, **_kwargs):
    """Check the analytic growth identities and dominance bounds on random instances."""
    params = _resolve(ctx)
    started_at = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    master = RngStream(params["seed"], stream_id=0)

    fn_min_excess, equality_mismatches, cs_failures = _verify_fn_and_cs(
        params["instances"], params["max_assets"], params["max_periods"],
        master.generator(subkey=0),
    )
    identity_residual = _verify_identity(params["identity_instances"], master.generator(subkey=1))
    bound_margin, bound_case = _verify_two_factor_bound(
        params["bound_instances"], master.generator(subkey=2)
    )
    dominance_mean = dominance_lower = None
    if params["dominance_seeds"] > 0:
        dominance_mean, dominance_lower = _verify_dominance(
            params["dominance_seeds"], params["dominance_managers"],
            params["dominance_periods"], params["seed"],
        )

    report = {
        "instances": params["instances"],
        "fn_min_minus_one": fn_min_excess,
        "fn_equality_mismatches": len(equality_mismatches),
        "cauchy_schwarz_failures": len(cs_failures),
        "identity_max_abs_residual": identity_residual,
        "bound_min_margin": bound_margin,
    }
    if dominance_mean is not None:
        report["dominance_mean_ratio"] = dominance_mean
        report["dominance_lower_95"] = dominance_lower

    # timing goes to the console only, keeping report.txt stable across reruns
    lines = [f"{key}={_fmt(value)}" for key, value in report.items()]
    for line in lines:
        click.echo(line)
    click.echo(f"elapsed_seconds={round(time.perf_counter() - t0, 3)}")

    violations = []
    if fn_min_excess < -1e-12:
        violations.append(f"wealth ratio below 1: min excess {fn_min_excess!r}")
    for beta, n, ratio, why in equality_mismatches:
        violations.append(f"{why}: beta={beta.tolist()}, n={n}, ratio={ratio!r}")
    for beta, check in cs_failures:
        violations.append(
            f"Cauchy-Schwarz failed: beta={beta.tolist()}, lhs={check.lhs!r}, rhs={check.rhs!r}"
        )
    if identity_residual > 1e-9:
        violations.append(f"single-factor identity residual {identity_residual!r} > 1e-9")
    if bound_margin < -1e-9:
        beta, b, n = bound_case
        violations.append(
            f"two-factor bound violated by {bound_margin!r}: "
            f"beta={beta.tolist()}, b={b.tolist()}, n={n}"
        )
    if dominance_lower is not None and params["dominance_seeds"] >= 2 and dominance_lower <= 1.0:
        violations.append(
            f"dominance not established: mean ratio {dominance_mean!r}, "
            f"95% lower bound {dominance_lower!r}"
        )

    if params["output_dir"]:
        out_dir = Path(params["output_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        _write_manifest(out_dir, "verify-bounds", params, [params.get("config")], started_at)

    if violations:
        raise BoundViolation("\n".join(["bound violations detected:"] + violations))
    click.echo("all bounds hold")


# ---------------------------------------------------------------------------
# entry point with the documented exit codes


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:  # --help/--version
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except BoundViolation as exc:
        click.echo(str(exc), err=True)
        return 4
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return 3


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
