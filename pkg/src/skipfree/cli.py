"""Config-driven command line front end.

Three subcommands: ``verify`` (closed form vs Monte Carlo vs enumeration for
crossing queries), ``identities`` (exhaustive combinatorial identity suites),
and ``simulate`` (ruin probability curves).  Configs are YAML documents with
a ``schema_version``; reports are CSV or structured JSON.

Report files are a pure function of (config, seed): wall-clock timings go to
stderr only, and rows are reduced in config order whatever the worker count,
so reruns at any parallelism produce byte-identical files.  Files are written
atomically (temp file + rename): on error no partial report appears.

Exit codes: 0 all checks passed, 1 some check failed, 2 config error,
3 net-profit violation, 4 enumeration budget exceeded.
"""

from __future__ import annotations

import itertools
import json
import os
import sys
import time
from typing import Optional

import click
import yaml

from . import combinatorics, oracle
from .errors import BudgetExceeded, NetProfitViolation, SkipfreeError
from .pmf import family_pmf, make_pmf
from .ruin import CrossingQuery, verify as run_verify
from .walk import (
    PerturbedModel,
    UnitDriftModel,
    default_horizon,
    ruin_probability_estimate,
    validate_model,
)

SCHEMA_VERSION = 1

BALLOT_TOLERANCE = 1e-9
KEMPERMAN_TOLERANCE = 1e-12


class ConfigError(Exception):
    """Anything wrong with the config document itself."""


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config root must be a mapping")
    version = config.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {version!r}; this build reads {SCHEMA_VERSION}"
        )
    return config


def _build_model(config: dict):
    try:
        section = config["model"]
        kind = section["kind"]
        portfolios = tuple(
            family_pmf(desc, role="claim") for desc in section["portfolios"]
        )
        if kind == "unit_drift":
            return UnitDriftModel(portfolios=portfolios)
        if kind == "perturbed":
            perturbation = family_pmf(section["perturbation"], role="perturbation")
            return PerturbedModel(portfolios=portfolios, perturbation=perturbation)
        raise ConfigError(f"unknown model kind {kind!r}")
    except NetProfitViolation:
        raise
    except ConfigError:
        raise
    except (KeyError, TypeError, SkipfreeError) as exc:
        raise ConfigError(f"bad model section: {exc}") from exc


def _section(config: dict, name: str) -> dict:
    section = config.get(name)
    if not isinstance(section, dict):
        raise ConfigError(f"config needs a '{name}' section")
    return section


def _resolve_horizon(raw, model) -> int:
    if raw in (None, "auto"):
        return default_horizon(model)
    return int(raw)


def _resolve_oracle_horizon(raw) -> Optional[int]:
    if raw in (None, "off"):
        return None
    return int(raw)


def _resolve_workers(raw) -> int:
    if raw in (None, "auto"):
        return os.cpu_count() or 1
    value = int(raw)
    if value < 1:
        raise ConfigError(f"workers must be >= 1, got {value}")
    return value


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_report(path: str, fmt: str, header: dict, columns, rows) -> None:
    """Serialize deterministically and publish with an atomic rename."""
    if fmt == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt(row[c]) for c in columns))
        payload = "\n".join(lines) + "\n"
    elif fmt == "structured":
        document = dict(header)
        document["rows"] = [{c: row[c] for c in columns} for row in rows]
        payload = json.dumps(document, indent=2, allow_nan=True) + "\n"
    else:
        raise ConfigError(f"unknown report format {fmt!r}")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def _log(message: str) -> None:
    click.echo(message, err=True)


def _guard(fn) -> int:
    try:
        return fn()
    except BudgetExceeded as exc:
        _log(f"enumeration budget exceeded: {exc}")
        return 4
    except NetProfitViolation as exc:
        _log(f"net profit violation: {exc}")
        return 3
    except (ConfigError, SkipfreeError) as exc:
        _log(f"config error: {exc}")
        return 2


@click.group()
def main():
    """Level-crossing analysis for discrete-time skip-free risk processes."""


def _common_options(fn):
    fn = click.option("--config", "config_path", required=True, type=str)(fn)
    fn = click.option("--seed", type=int, default=None, help="Override master seed.")(fn)
    fn = click.option("--trials", type=int, default=None)(fn)
    fn = click.option("--horizon", type=str, default=None, help="Steps per trial or 'auto'.")(fn)
    fn = click.option("--workers", type=str, default=None, help="Thread count or 'auto'.")(fn)
    fn = click.option("--out", "out_path", type=str, default=None)(fn)
    fn = click.option(
        "--format",
        "fmt",
        type=click.Choice(["csv", "structured"]),
        default=None,
    )(fn)
    return fn


def _report_target(config: dict, section: dict, out_path, fmt, default_name: str):
    report = config.get("report", {})
    path = out_path or section.get("out") or report.get("path") or default_name
    chosen = fmt or section.get("format") or report.get("format") or "csv"
    return path, chosen


@main.command()
@_common_options
@click.option(
    "--oracle-horizon",
    type=str,
    default=None,
    help="Enumeration horizon for the oracle column, or 'off'.",
)
def verify(config_path, seed, trials, horizon, workers, out_path, fmt, oracle_horizon):
    """Check closed-form crossing probabilities against simulation (and,
    optionally, exhaustive enumeration) for every query in the config."""

    def run() -> int:
        config = _load_config(config_path)
        model = validate_model(_build_model(config))
        section = _section(config, "verify")
        n_trials = int(trials or section.get("trials", 100_000))
        n_horizon = _resolve_horizon(horizon or section.get("horizon"), model)
        o_horizon = _resolve_oracle_horizon(
            oracle_horizon if oracle_horizon is not None else section.get("oracle_horizon")
        )
        master_seed = int(seed if seed is not None else section.get("master_seed", 0))
        n_workers = _resolve_workers(workers or section.get("workers"))
        raw_queries = section.get("queries")
        if not raw_queries:
            raise ConfigError("verify section needs a non-empty 'queries' list")
        queries = []
        for raw in raw_queries:
            try:
                queries.append(
                    CrossingQuery(
                        model=model,
                        x=int(raw["x"]),
                        y=int(raw["y"]) if "y" in raw and raw["y"] is not None else None,
                        portfolio_index=int(raw["portfolio"]) if "portfolio" in raw else None,
                    )
                )
            except (KeyError, TypeError, SkipfreeError) as exc:
                raise ConfigError(f"bad query {raw!r}: {exc}") from exc

        columns = [
            "portfolio",
            "x",
            "y",
            "closed_form",
            "mc_estimate",
            "mc_std_err",
            "trials",
            "horizon",
            "censored_fraction",
            "oracle_truncated",
            "oracle_horizon",
            "mc_consistent",
            "oracle_bounded",
            "passed",
        ]
        rows = []
        all_passed = True
        for query in queries:
            started = time.perf_counter()
            report = run_verify(
                query, n_trials, n_horizon, o_horizon, master_seed, n_workers
            )
            elapsed = time.perf_counter() - started
            rows.append(
                {
                    "portfolio": query.portfolio_index,
                    "x": query.x,
                    "y": query.y,
                    "closed_form": report.closed_form,
                    "mc_estimate": report.mc_estimate,
                    "mc_std_err": report.mc_std_err,
                    "trials": report.trials,
                    "horizon": n_horizon,
                    "censored_fraction": report.censored_fraction,
                    "oracle_truncated": report.oracle_truncated,
                    "oracle_horizon": report.oracle_horizon,
                    "mc_consistent": report.mc_consistent,
                    "oracle_bounded": report.oracle_bounded,
                    "passed": report.passed,
                }
            )
            all_passed = all_passed and report.passed
            _log(
                f"verify portfolio={query.portfolio_index} x={query.x} y={query.y}: "
                f"closed={report.closed_form:.6g} mc={report.mc_estimate:.6g} "
                f"passed={report.passed} wall={elapsed:.2f}s"
            )
        path, chosen_fmt = _report_target(config, section, out_path, fmt, "verify_report.csv")
        header = {
            "schema_version": SCHEMA_VERSION,
            "command": "verify",
            "master_seed": master_seed,
            "trials": n_trials,
            "horizon": n_horizon,
            "oracle_horizon": o_horizon,
        }
        _write_report(path, chosen_fmt, header, columns, rows)
        _log(f"report written to {path}")
        return 0 if all_passed else 1

    sys.exit(_guard(run))


@main.command()
@_common_options
def identities(config_path, seed, trials, horizon, workers, out_path, fmt):
    """Run the exhaustive combinatorial identity suites named in the config."""

    def run() -> int:
        config = _load_config(config_path)
        section = _section(config, "identities")
        suites = section.get("suites", ["ballot", "rotations", "kemperman"])
        columns = ["suite", "instance", "observed", "expected", "abs_error", "tolerance", "passed"]
        rows = []

        def emit(suite, instance, observed, expected, tolerance):
            err = abs(observed - expected)
            rows.append(
                {
                    "suite": suite,
                    "instance": instance,
                    "observed": observed,
                    "expected": expected,
                    "abs_error": err,
                    "tolerance": tolerance,
                    "passed": err <= tolerance,
                }
            )

        if "ballot" in suites:
            sub = section.get("ballot", {})
            n_max = int(sub.get("n_max", 10))
            pmfs = [make_pmf([(int(v), float(p)) for v, p in d["entries"]])
                    for d in sub.get("pmfs", [])]
            if not pmfs:
                raise ConfigError("ballot suite needs at least one pmf")
            started = time.perf_counter()
            for pi, dist in enumerate(pmfs):
                for n in range(1, n_max + 1):
                    profile = oracle.ballot_profile(dist, n)
                    for k in sorted(profile):
                        num, den = profile[k]
                        if den <= 0.0:
                            continue
                        emit(
                            "ballot",
                            f"pmf={pi} n={n} k={k}",
                            num / den,
                            combinatorics.ballot_probability(n, k),
                            BALLOT_TOLERANCE,
                        )
            _log(f"ballot suite wall={time.perf_counter() - started:.2f}s")

        if "rotations" in suites:
            sub = section.get("rotations", {})
            entries = [int(v) for v in sub.get("entries", [-1, 0, 1, 2])]
            max_len = int(sub.get("max_len", 6))
            started = time.perf_counter()
            for length in range(1, max_len + 1):
                for seq in itertools.product(entries, repeat=length):
                    if sum(seq) >= 0:
                        continue
                    cert = combinatorics.qualifying_rotations(seq)
                    emit(
                        "rotations",
                        "seq=" + ",".join(str(v) for v in seq),
                        float(len(cert.qualifying_indices)),
                        float(cert.k),
                        0.0,
                    )
            _log(f"rotations suite wall={time.perf_counter() - started:.2f}s")

        if "kemperman" in suites:
            sub = section.get("kemperman", {})
            k_max = int(sub.get("k_max", 5))
            n_max = int(sub.get("n_max", 50))
            pmfs = [make_pmf([(int(v), float(p)) for v, p in d["entries"]])
                    for d in sub.get("pmfs", [])]
            if not pmfs:
                raise ConfigError("kemperman suite needs at least one pmf")
            started = time.perf_counter()
            for pi, dist in enumerate(pmfs):
                for k in range(1, k_max + 1):
                    identity = combinatorics.kemperman_first_passage_pmf(dist, k, n_max)
                    direct = combinatorics.first_passage_pmf_dp(dist, k, n_max)
                    deviation = max(
                        abs(identity[n] - direct[n]) for n in range(1, n_max + 1)
                    )
                    emit(
                        "kemperman",
                        f"pmf={pi} k={k} n<={n_max}",
                        deviation,
                        0.0,
                        KEMPERMAN_TOLERANCE,
                    )
            _log(f"kemperman suite wall={time.perf_counter() - started:.2f}s")

        path, chosen_fmt = _report_target(
            config, section, out_path, fmt, "identities_report.csv"
        )
        header = {"schema_version": SCHEMA_VERSION, "command": "identities"}
        _write_report(path, chosen_fmt, header, columns, rows)
        all_passed = all(r["passed"] for r in rows)
        _log(f"{len(rows)} identity rows, all_passed={all_passed}, report at {path}")
        return 0 if all_passed else 1

    sys.exit(_guard(run))


@main.command()
@_common_options
def simulate(config_path, seed, trials, horizon, workers, out_path, fmt):
    """Estimate ruin probabilities for each initial capital in the config."""

    def run() -> int:
        config = _load_config(config_path)
        model = validate_model(_build_model(config))
        section = _section(config, "simulate")
        n_trials = int(trials or section.get("trials", 100_000))
        n_horizon = _resolve_horizon(horizon or section.get("horizon"), model)
        master_seed = int(seed if seed is not None else section.get("master_seed", 0))
        n_workers = _resolve_workers(workers or section.get("workers"))
        capitals = section.get("capitals")
        if not capitals:
            raise ConfigError("simulate section needs a non-empty 'capitals' list")

        columns = ["u", "p_hat", "std_err", "censored_fraction", "trials", "horizon"]
        rows = []
        for raw_u in capitals:
            u = int(raw_u)
            started = time.perf_counter()
            estimate = ruin_probability_estimate(
                model, u, n_horizon, n_trials, master_seed, n_workers
            )
            elapsed = time.perf_counter() - started
            rows.append(
                {
                    "u": u,
                    "p_hat": estimate.p_hat,
                    "std_err": estimate.std_err,
                    "censored_fraction": estimate.censored_fraction,
                    "trials": n_trials,
                    "horizon": n_horizon,
                }
            )
            _log(
                f"simulate u={u}: p_hat={estimate.p_hat:.6g} "
                f"se={estimate.std_err:.3g} wall={elapsed:.2f}s"
            )
        path, chosen_fmt = _report_target(
            config, section, out_path, fmt, "simulate_report.csv"
        )
        header = {
            "schema_version": SCHEMA_VERSION,
            "command": "simulate",
            "master_seed": master_seed,
            "trials": n_trials,
            "horizon": n_horizon,
        }
        _write_report(path, chosen_fmt, header, columns, rows)
        _log(f"report written to {path}")
        return 0

    sys.exit(_guard(run))


if __name__ == "__main__":  # pragma: no cover
    main()
