"""Command-line front end: ``holderlie {extract|holder|bootstrap|padic|verify}``.

Exit status: 0 when every report row passes, 1 when a check fails, 2 for
usage or configuration errors.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import ConfigError, load_config
from .runners import COMMANDS

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


def _emit(report, fmt: str, out: str | None) -> None:
    text = report.render(fmt)
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)
    s = report.summary()
    status = "PASS" if s["passed"] else "FAIL " + ",".join(s["failed_tables"])
    click.echo(f"{report.command}: {s['rows']} rows, {status} ({report.wall_clock:.2f}s)", err=True)


def _run(name: str, config: str | None, out: str | None, fmt: str | None, seed: int | None) -> None:
    ctx = click.get_current_context()
    try:
        cfg = load_config(config) if config is not None else None
        if cfg is None and name != "verify":
            raise ConfigError("--config is required")
        fmt = fmt or (cfg.format if cfg is not None else "json")
        report = COMMANDS[name](cfg, seed)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_USAGE)
    _emit(report, fmt, out)
    ctx.exit(EXIT_OK if report.passed else EXIT_CHECK)


def _common(f):
    f = click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None,
                     help="Override the probe seed from the config.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None,
                     help="Report format (default: from config, else json).")(f)
    f = click.option("--out", type=click.Path(dir_okay=False), default=None,
                     help="Write the report here instead of stdout.")(f)
    return f


@click.group()
def main():
    """Recover derivatives of chart homomorphisms and check Hölder and differentiability bounds."""


@main.command()
@click.option("--config", type=click.Path(dir_okay=False), required=True)
@_common
def extract(config, out, fmt, seed):
    """Dyadic extraction, certificate, linearization and residual for a real map."""
    _run("extract", config, out, fmt, seed)


@main.command()
@click.option("--config", type=click.Path(dir_okay=False), required=True)
@_common
def holder(config, out, fmt, seed):
    """Hölder exponent at the identity and at translated base points."""
    _run("holder", config, out, fmt, seed)


@main.command()
@click.option("--config", type=click.Path(dir_okay=False), required=True)
@_common
def bootstrap(config, out, fmt, seed):
    """Exponent bootstrap for alpha <= 1/2 with its inequality ledger."""
    _run("bootstrap", config, out, fmt, seed)


@main.command()
@click.option("--config", type=click.Path(dir_okay=False), required=True)
@_common
def padic(config, out, fmt, seed):
    """Exact p-adic extraction and linearization."""
    _run("padic", config, out, fmt, seed)


@main.command()
@click.option("--config", type=click.Path(dir_okay=False), default=None)
@_common
def verify(config, out, fmt, seed):
    """Run the invariant suite over the built-in corpus."""
    _run("verify", config, out, fmt, seed)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
