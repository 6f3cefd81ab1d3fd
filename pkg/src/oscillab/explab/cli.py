"""Command line entry point: one subcommand per experiment."""
import json
import os
import sys

import click
import numpy as np

from .. import broadnorm as bn
from ..errors import OscillabError
from . import report
from .config import EXPERIMENTS, default_config, load_config, out_path
from .experiments import exponent_records, run
from .report import ReportRow

# flag name -> ExperimentConfig field
OVERRIDES = [
    ("--n", "n", int), ("--lam", "lam", float), ("--r", "r", float), ("--rho", "rho", float),
    ("--K", "K", float), ("--k", "k", int), ("--A", "A", int), ("--p", "p", float),
    ("--alpha", "alpha", float), ("--delta", "delta", float),
    ("--delta-m", "delta_m", float), ("--grid", "grid", int), ("--samples", "samples", int),
]


def _common(fn):
    for flag, dest, typ in reversed(OVERRIDES):
        fn = click.option(flag, dest, type=typ, default=None, help=f"override {dest}")(fn)
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="TOML or JSON config file"),
        click.option("--seed", type=int, default=None),
        click.option("--out-dir", type=click.Path(file_okay=False), default=None),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv"),
        click.option("--timings/--no-timings", default=False,
                     help="append per-row runtime (makes reports non-reproducible)"),
        click.option("--plot/--no-plot", default=False, help="also write a plot script"),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _build(name, config_path, seed, out_dir, overrides):
    kw = {dest: overrides.get(dest) for _, dest, _ in OVERRIDES}
    kw.update(seed=seed, out_dir=out_dir)
    if config_path:
        return load_config(config_path, name, **kw)
    return default_config(name, **kw)


def _write(cfg, rows, fmt, timings, plot):
    path = report.emit(rows, fmt, out_path(cfg, fmt), timings)
    click.echo(f"wrote {path}")
    if plot:
        csv_path = path if fmt == "csv" else report.emit(rows, "csv", out_path(cfg, "csv"))
        script = report.emit_plotscript(rows, out_path(cfg, "plot.py"),
                                        os.path.basename(csv_path))
        click.echo(f"wrote {script}")


def _summarize(rows):
    failed = 0
    for r in rows:
        verdict = report._passed_text(r.passed)
        failed += r.passed is False
        click.echo(f"  {verdict:4s}  {r.check}: {r.measured:.6g} {r.comparison} {r.reference:.6g}")
    return failed


def _execute(name, config_path, seed, out_dir, fmt, timings, plot, **overrides):
    try:
        cfg = _build(name, config_path, seed, out_dir, overrides)
        rows = run(cfg)
        _write(cfg, rows, fmt, timings, plot)
    except (OscillabError, OSError) as exc:
        raise click.ClickException(str(exc))
    failed = _summarize(rows)
    if failed:
        click.echo(f"{failed} check(s) failed", err=True)
        sys.exit(1)


@click.group()
def main():
    """Desk-scale experiments for oscillatory integral operators."""


def _make_command(name):
    @main.command(name=name, help=f"Run the {name} experiment and write its report.")
    @_common
    def cmd(config_path, seed, out_dir, fmt, timings, plot, **overrides):
        _execute(name, config_path, seed, out_dir, fmt, timings, plot, **overrides)
    return cmd


for _name in EXPERIMENTS:
    if _name not in ("exponents", "broad"):
        _make_command(_name)


@main.command()
@_common
@click.option("--table", "table_path", type=click.Path(dir_okay=False), default=None,
              help="also write p_critical / range records up to n_max as JSON")
def exponents(config_path, seed, out_dir, fmt, timings, plot, table_path, **overrides):
    """Exact exponent bookkeeping checks."""
    if table_path:
        cfg = _build("exponents", config_path, seed, out_dir, overrides)
        recs = exponent_records(int(cfg.extra.get("n_max", 20)))
        try:
            os.makedirs(os.path.dirname(table_path) or ".", exist_ok=True)
            with open(table_path, "w", encoding="utf-8") as fh:
                json.dump(recs, fh, indent=1, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise click.ClickException(f"cannot write table to {table_path}: {exc}")
        click.echo(f"wrote {table_path}")
    _execute("exponents", config_path, seed, out_dir, fmt, timings, plot, **overrides)


@main.command()
@_common
@click.option("--npz", "npz_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="evaluate the broad norm of a stored grid (arrays: field, directions, lo, spacing)")
def broad(config_path, seed, out_dir, fmt, timings, plot, npz_path, **overrides):
    """Broad-norm property checks, or evaluation of a stored per-cap grid."""
    if npz_path is None:
        _execute("broad", config_path, seed, out_dir, fmt, timings, plot, **overrides)
        return
    try:
        cfg = _build("broad", config_path, seed, out_dir, overrides)
        rows = broad_rows_from_npz(npz_path, cfg)
        _write(cfg, rows, fmt, timings, plot)
    except (OscillabError, OSError, KeyError) as exc:
        raise click.ClickException(str(exc))
    _summarize(rows)


def broad_rows_from_npz(path, cfg):
    with np.load(path) as z:
        field, dirs = z["field"], z["directions"]
        lo, spacing = z["lo"], z["spacing"]
    out = []
    for A in cfg.extra.get("A_values", [cfg.A]):
        c = bn.BroadNormConfig(cfg.k, int(A), cfg.K, cfg.p, field.ndim - 1)
        val = bn.broad_norm(field, dirs, c, lo, spacing)
        out.append(ReportRow.make("broad", "broad_norm",
                                  {"file": os.path.basename(path), "k": cfg.k, "A": int(A),
                                   "K": cfg.K, "p": cfg.p}, val, 0.0, "info"))
    return out


if __name__ == "__main__":
    main()
