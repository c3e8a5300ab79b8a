"""Command line front end: simulate, bench, serve.

Exit codes: 0 success, 2 invalid configuration (the message names the
offending key), 3 runtime failure.
"""

from __future__ import annotations

import sys

import click

from .benchmark import BACKENDS
from .config import RunConfig, default_config, load_config
from .errors import ConfigError, WmsnError
from .runner import run_scaling, simulate_run

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load(config_path: str | None) -> RunConfig:
    if config_path is None:
        return default_config()
    return load_config(config_path)


def _parse_months(text: str) -> list[int]:
    try:
        if ".." in text:
            lo_s, hi_s = text.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
            if lo < 1 or hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        months = [int(part) for part in text.split(",") if part.strip()]
        if not months or any(m < 1 for m in months):
            raise ValueError
        return months
    except ValueError:
        raise click.BadParameter(
            f"{text!r}: expected positive integers like '1,2,3' or a range like '1..5'"
        ) from None


config_option = click.option(
    "--config", "config_path", type=str, default=None, envvar="WMSNGRAPH_CONFIG",
    help="Path to a JSON run configuration (defaults apply when omitted).",
)


@click.group()
def main() -> None:
    """Deterministic surveillance-field simulator over an embedded property
    graph, with a graph-vs-relational query benchmark."""


@main.command()
@config_option
@click.option("--ticks", type=int, default=None, help="Override simulation length.")
@click.option("--seed", type=int, default=None, help="Override the run seed.")
@click.option("--mode", type=click.Choice(["threaded", "serial"]), default=None,
              help="Override the pipeline execution mode.")
@click.option("--export", "export_dir", type=str, default=None,
              help="Directory for graph.snapshot, trace.jsonl and stats.json.")
def simulate(config_path, ticks, seed, mode, export_dir) -> None:
    """Run one simulation and report what the fusion pipeline produced."""
    try:
        cfg = _load(config_path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        result = simulate_run(cfg, ticks=ticks, seed=seed, mode=mode, export_dir=export_dir)
    except (WmsnError, ValueError) as exc:
        click.echo(f"simulation failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)

    stats = result.stats.as_dict()
    click.echo(f"seed={result.seed} ticks={result.ticks} mode={result.mode}")
    for key in sorted(stats):
        click.echo(f"  {key}: {stats[key]}")
    click.echo(f"  actionRecords: {len(result.actions)}")
    if result.export_dir is not None:
        click.echo(
            f"exported {result.record_count} records to {result.export_dir}"
        )


@main.command()
@config_option
@click.option("--months", default=None,
              help="Dataset sizes, e.g. '1..5' or '1,2,4' (config default otherwise).")
@click.option("--repetitions", type=int, default=None,
              help="Timed repetitions per query/backend pair (minimum 5).")
@click.option("--seed", type=int, default=None, help="Override the dataset seed.")
@click.option("--csv", "csv_path", type=str, default=None,
              help="Also write the report as CSV to this path.")
def bench(config_path, months, repetitions, seed, csv_path) -> None:
    """Benchmark the three analysis queries on graph and relational backends
    over datasets that grow month by month."""
    try:
        cfg = _load(config_path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    month_list = _parse_months(months) if months is not None else None
    try:
        report = run_scaling(cfg, months=month_list, repetitions=repetitions, seed=seed)
    except (WmsnError, ValueError) as exc:
        click.echo(f"benchmark failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)

    click.echo(report.format_table())
    for query in ("q1", "q2", "q3"):
        for backend in BACKENDS:
            factors = report.growth_factors(query, backend)
            if factors:
                shown = ", ".join(f"{f:.2f}" for f in factors)
                click.echo(f"growth per doubling {query}/{backend}: {shown}")
    if csv_path is not None:
        report.write_csv(csv_path)
        click.echo(f"wrote {csv_path}")


@main.command()
@config_option
@click.option("--host", type=str, default=None, help="Override the bind host.")
@click.option("--port", type=int, default=None, help="Override the bind port.")
def serve(config_path, host, port) -> None:
    """Start the HTTP control service with the live event stream."""
    try:
        cfg = _load(config_path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    from .service import serve_forever

    try:
        serve_forever(
            cfg,
            host=host if host is not None else cfg.service.host,
            port=port if port is not None else cfg.service.port,
        )
    except WmsnError as exc:
        click.echo(f"service failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)


if __name__ == "__main__":
    main()
