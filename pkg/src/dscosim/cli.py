"""Command-line front end.

Exit codes: 0 success, 1 network-assumption violation, 2 config/usage error,
3 divergence.
"""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from .algorithms import run
from .config import load_config
from .errors import (
    AssumptionError,
    CapabilityError,
    ConfigurationError,
    DivergenceError,
    InsufficientDataError,
)
from .normality import collect_delta, compare_covariance, samples_to_csv, theoretical_covariance
from .records import aggregate_mean_rows, record_to_csv, RunRecord
from .topology import build_weight_pair, check_assumption2


@click.group()
def main():
    """Distributed compositional optimization simulator."""


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _single_run(args):
    cfg_path, seed, out_dir = args
    cfg = load_config(cfg_path)
    return _execute_run(cfg, seed, out_dir)


def _execute_run(cfg, seed, out_dir):
    problem = cfg.build_problem()
    algorithm = cfg["algorithm"]
    weights = None
    if algorithm not in ("scgd", "scsc"):
        weights = cfg.build_weights()
    schedule = cfg.build_schedule()
    record = run(
        algorithm,
        problem,
        schedule,
        cfg["iterations"],
        weights=weights,
        seed=seed,
        metric_stride=cfg["metric_stride"],
        eta=cfg["eta"],
        gamma=cfg["gamma"],
        config=cfg.values,
    )
    path = Path(out_dir) / f"run_{algorithm}_seed{seed}.csv"
    path.write_text(record_to_csv(record))
    return record, path


def _write_aggregate(cfg, records, out_dir):
    agg = RunRecord(config=dict(cfg.values), seed=-1, rows=aggregate_mean_rows(records))
    agg.status = "aggregate"
    path = Path(out_dir) / "aggregate.csv"
    path.write_text(record_to_csv(agg))
    return path


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="override the config's seed list")
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False))
def cmd_run(config_path, seed, out_dir):
    """Execute one run per seed and write per-seed plus aggregate CSVs."""
    try:
        cfg = load_config(config_path)
        seeds = [seed] if seed is not None else cfg.seed_list()
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        records = []
        for s in seeds:
            record, path = _execute_run(cfg, s, out_dir)
            click.echo(f"seed {s}: {record.status}, {len(record.rows)} rows -> {path}")
            records.append(record)
        agg_path = _write_aggregate(cfg, records, out_dir)
        click.echo(f"aggregate -> {agg_path}")
    except (ConfigurationError, CapabilityError) as err:
        _fail(2, err)
    except AssumptionError as err:
        _fail(1, err)
    except DivergenceError as err:
        record = getattr(err, "record", None)
        if record is not None:
            path = Path(out_dir) / f"run_{record.config.get('algorithm', 'x')}_seed{record.seed}_partial.csv"
            path.write_text(record_to_csv(record))
            click.echo(f"partial record -> {path}", err=True)
        _fail(3, err)


@main.command("sweep")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False))
def cmd_sweep(config_path, jobs, out_dir):
    """Multi-seed sweep with optional parallel workers."""
    try:
        cfg = load_config(config_path)
        seeds = cfg.seed_list()
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        if jobs <= 1:
            results = [_single_run((config_path, s, out_dir)) for s in seeds]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_single_run, [(config_path, s, out_dir) for s in seeds]))
        records = [r for r, _ in results]
        agg_path = _write_aggregate(cfg, records, out_dir)
        click.echo(f"{len(records)} runs complete, aggregate -> {agg_path}")
    except (ConfigurationError, CapabilityError) as err:
        _fail(2, err)
    except AssumptionError as err:
        _fail(1, err)
    except DivergenceError as err:
        _fail(3, err)


@main.command("validate-topology")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def cmd_validate_topology(config_path):
    """Report graph, spanning-tree and weight-matrix diagnostics."""
    try:
        cfg = load_config(config_path)
        g = cfg.build_graph()
        click.echo(f"n = {g.n}")
        click.echo(f"edges (excl. self-loops) = {len(g.edges)}")
        roots = sorted(g.roots())
        click.echo(f"spanning tree: {'yes' if roots else 'NO'}")
        click.echo(f"roots = {roots}")
        ok = check_assumption2(g, g)
        click.echo(f"common root: {'yes' if ok else 'NO'}")
        if not ok:
            _fail(1, "no spanning tree with a common root" if not roots else "root sets disjoint")
        wp = build_weight_pair(g, g)
        click.echo(f"u = {np.array2string(wp.u, precision=6)}")
        click.echo(f"v = {np.array2string(wp.v, precision=6)}")
        click.echo(f"tau_A = {wp.tau_A:.6f}")
        click.echo(f"tau_B = {wp.tau_B:.6f}")
        if not (wp.tau_A < 1 and wp.tau_B < 1):
            _fail(1, "contraction factor not below 1")
    except ConfigurationError as err:
        _fail(2, err)
    except AssumptionError as err:
        _fail(1, err)


@main.command("normality")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False))
def cmd_normality(config_path, out_dir):
    """Averaged-iterate covariance study; exit 0 iff the match is within threshold."""
    try:
        cfg = load_config(config_path)
        if cfg["problem"] != "quadratic":
            raise ConfigurationError("normality study supports the quadratic family only")
        R = cfg["replications"]
        if R < 50:
            raise InsufficientDataError(f"replications must be >= 50, got {R}")
        problem = cfg.build_problem()
        weights = cfg.build_weights()
        schedule = cfg.build_schedule()
        base_seed = cfg.seed_list()[0]
        samples = collect_delta(
            R, problem, weights, schedule, cfg["normality_k"], cfg["agent"], base_seed
        )
        report = compare_covariance(samples, theoretical_covariance(problem))
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "normality_samples.csv").write_text(samples_to_csv(samples))
        lines = [
            "# gradient-noise covariance read as the sum over agents of per-agent covariances",
            "key,value",
        ]
        lines += [f"{k},{v:.17g}" for k, v in report.to_kv_rows()]
        (Path(out_dir) / "normality_report.csv").write_text("\n".join(lines) + "\n")
        click.echo(f"rel_frobenius_error = {report.rel_frobenius_error:.4f}")
        if report.rel_frobenius_error > cfg["threshold"]:
            _fail(1, f"covariance mismatch {report.rel_frobenius_error:.4f} > {cfg['threshold']}")
    except (ConfigurationError, CapabilityError, InsufficientDataError) as err:
        _fail(2, err)
    except AssumptionError as err:
        _fail(1, err)
    except DivergenceError as err:
        _fail(3, err)


if __name__ == "__main__":
    main()
