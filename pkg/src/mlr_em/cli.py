"""Command-line harness: single runs, landscape scans, sweeps, bound checks.

Subcommands:
- run: one population or finite-sample trajectory + bound report
- landscape: the five planar fixed points with residuals / curvature
- sweep: a (d, eta, n, T, variant) grid with per-cell summary statistics
- check: re-run bound reports on an existing trajectory CSV

Exit codes: 0 success, 1 usage error, 2 hard numerical failure.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import itertools
import json
import math
import os
import statistics
import sys
from dataclasses import asdict, dataclass

import click
import numpy as np

from . import csvio
from .diagnostics import check_trajectory
from .errors import DomainError, NumericalError
from .finite import EmConfig, run_sample_splitting
from .model import GroundTruth, random_init
from .population import (
    apply_population_step,
    default_quadrature,
    find_fixed_point_E,
    hessian_quadform_along_bstar,
    population_loglik,
    run_population_trajectory,
)


def _positive_int(ctx, param, value):
    if value is not None and value < 1:
        raise click.BadParameter(f"{param.name} must be >= 1")
    return value


def _positive_float(ctx, param, value):
    if value is not None and value <= 0:
        raise click.BadParameter(f"{param.name} must be > 0")
    return value


def _make_truth(d: int, eta: float, beta_norm: float,
                sigma: float | None) -> GroundTruth:
    beta_star = np.zeros(d)
    beta_star[0] = beta_norm
    if sigma is None:
        sigma = beta_norm / eta
    return GroundTruth(beta_star=beta_star, sigma=sigma)


def _echo_config(out_dir: str, params: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "config.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(params, fh, sort_keys=True, indent=2)
        fh.write("\n")


@click.group()
def cli():
    """EM / Easy-EM experiment harness for mixed linear regression."""


@cli.command("run")
@click.option("--d", type=int, default=10, callback=_positive_int)
@click.option("--eta", type=float, default=2.0, callback=_positive_float)
@click.option("--beta-norm", type=float, default=1.0, callback=_positive_float)
@click.option("--sigma", type=float, default=None, callback=_positive_float)
@click.option("--n", type=int, default=100_000, callback=_positive_int)
@click.option("--t", "--T", "t_iters", type=int, default=20,
              callback=_positive_int)
@click.option("--variant", type=click.Choice(["em", "easyem", "twophase"]),
              default="em")
@click.option("--population", is_flag=True, default=False)
@click.option("--no-splitting", "splitting", is_flag=True, default=True,
              flag_value=False, help="practical mode: reuse all samples")
@click.option("--quad-order", type=int, default=100, callback=_positive_int)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=".")
@click.option("--tol", type=float, default=1e-8, callback=_positive_float)
@click.option("--max-iters", type=int, default=500, callback=_positive_int)
def cmd_run(d, eta, beta_norm, sigma, n, t_iters, variant, population,
            splitting, quad_order, seed, out, tol, max_iters):
    """Run one trajectory and its bound report."""
    truth = _make_truth(d, eta, beta_norm, sigma)
    beta0 = random_init(d, beta_norm, seed)
    params = dict(command="run", d=d, eta=truth.snr(), beta_norm=beta_norm,
                  sigma=truth.sigma, n=n, T=t_iters, variant=variant,
                  population=population, splitting=splitting,
                  quad_order=quad_order, seed=seed, tol=tol,
                  max_iters=max_iters)
    _echo_config(out, params)
    traj_path = os.path.join(out, "trajectory.csv")
    bounds_path = os.path.join(out, "bounds.csv")
    if population:
        quad = default_quadrature(quad_order)
        records = run_population_trajectory(beta0, truth, quad,
                                            max_iters=max_iters, tol=tol)
        reports = check_trajectory(records, truth, "population")
        csvio.write_population_trajectory(records, traj_path)
    else:
        config = EmConfig(variant=variant, n=n, T=t_iters,
                          splitting=splitting, seed=seed)
        records = run_sample_splitting(config, truth, beta0)
        reports = check_trajectory(records, truth, "finite",
                                   eps_f=config.eps_f(d))
        csvio.write_finite_trajectory(records, traj_path)
    csvio.write_bound_reports(reports, bounds_path, run_id=f"seed{seed}")
    click.echo(f"wrote {traj_path} and {bounds_path}")


@cli.command("landscape")
@click.option("--d", type=int, default=2, callback=_positive_int)
@click.option("--eta", type=float, default=1.0, callback=_positive_float)
@click.option("--beta-norm", type=float, default=1.0, callback=_positive_float)
@click.option("--sigma", type=float, default=None, callback=_positive_float)
@click.option("--quad-order", type=int, default=100, callback=_positive_int)
@click.option("--tol", type=float, default=1e-10, callback=_positive_float)
@click.option("--out", type=click.Path(), default=".")
def cmd_landscape(d, eta, beta_norm, sigma, quad_order, tol, out):
    """Enumerate the five planar fixed points of the population EM."""
    if d < 2:
        raise click.BadParameter("landscape needs d >= 2")
    truth = _make_truth(d, eta, beta_norm, sigma)
    quad = default_quadrature(quad_order)
    bs = truth.norm
    orth = np.zeros(d)
    orth[1] = 1.0
    e_orth = find_fixed_point_E(0.0, bs, truth.sigma, quad, tol=tol)
    points = [
        ("origin", 0.0, 0.0),
        ("+beta_star", bs, 0.0),
        ("-beta_star", -bs, 0.0),
        ("+Ev", 0.0, e_orth),
        ("-Ev", 0.0, -e_orth),
    ]
    rows = []
    for name, c1, c2 in points:
        beta = c1 * truth.beta_star / bs + c2 * orth
        if name == "origin":
            residual = 0.0
            quadform = math.nan
        else:
            nxt, _ = apply_population_step(beta, truth.beta_star, truth.sigma,
                                           quad)
            residual = float(np.linalg.norm(nxt - beta))
            quadform = hessian_quadform_along_bstar(beta, truth, quad)
        loglik = population_loglik(beta, truth, quad)
        rows.append((name, c1, c2, residual, quadform, loglik))
    _echo_config(out, dict(command="landscape", d=d, eta=truth.snr(),
                           beta_norm=beta_norm, sigma=truth.sigma,
                           quad_order=quad_order, tol=tol))
    path = os.path.join(out, "fixed_points.csv")
    csvio.write_fixed_points(rows, path)
    click.echo(f"wrote {path}")


@dataclass(frozen=True)
class SweepConfig:
    """Grid specification for cmd_sweep."""

    d: tuple = (10,)
    eta: tuple = (2.0,)
    n: tuple = (100_000,)
    T: tuple = (20,)
    variant: tuple = ("em",)
    seeds_per_cell: int = 3
    beta_norm: float = 1.0
    tol: float = 1e-2
    quad_order: int = 100
    seed: int = 0
    out: str = "."

    def __post_init__(self):
        for name in ("d", "eta", "n", "T", "variant"):
            if not getattr(self, name):
                raise DomainError(f"sweep grid axis '{name}' is empty")
        if self.seeds_per_cell < 1:
            raise DomainError("seeds_per_cell must be >= 1")

    @classmethod
    def from_json(cls, path: str, **overrides) -> "SweepConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        raw.update({k: v for k, v in overrides.items() if v is not None})
        for axis in ("d", "eta", "n", "T", "variant"):
            if axis in raw and not isinstance(raw[axis], (list, tuple)):
                raw[axis] = [raw[axis]]
            if axis in raw:
                raw[axis] = tuple(raw[axis])
        return cls(**raw)


def _child_seed(root_seed: int, cell_idx: int, rep: int) -> int:
    digest = hashlib.sha256(
        f"{root_seed}:{cell_idx}:{rep}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def _iters_to(records, predicate):
    for r in records:
        if predicate(r):
            return r.iter
    return math.nan


def _run_sweep_cell(args):
    cfg_dict, cell_idx, cell = args
    cfg = SweepConfig(**cfg_dict)
    d, eta, n, T, variant = cell
    finals, it_pi3, it_pi8, it_tol = [], [], [], []
    passes = total = 0
    n_failed = 0
    for rep in range(cfg.seeds_per_cell):
        seed = _child_seed(cfg.seed, cell_idx, rep)
        try:
            truth = _make_truth(d, eta, cfg.beta_norm, None)
            beta0 = random_init(d, cfg.beta_norm, seed)
            if variant == "population":
                quad = default_quadrature(cfg.quad_order)
                records = run_population_trajectory(
                    beta0, truth, quad, max_iters=T, tol=cfg.tol)
                reports = check_trajectory(records, truth, "population")
            else:
                config = EmConfig(variant=variant, n=n, T=T, seed=seed)
                records = run_sample_splitting(config, truth, beta0)
                reports = check_trajectory(records, truth, "finite",
                                           eps_f=config.eps_f(d))
        except (NumericalError, DomainError):
            n_failed += 1
            continue
        finals.append(records[-1].l2_error)
        cos_pi3 = math.cos(math.pi / 3)
        cos_pi8 = math.cos(math.pi / 8)
        it_pi3.append(_iters_to(records, lambda r: r.cos_theta > cos_pi3))
        it_pi8.append(_iters_to(records, lambda r: r.cos_theta > cos_pi8))
        it_tol.append(_iters_to(records, lambda r: r.l2_error < cfg.tol))
        applicable = [r for r in reports if r.applicable]
        passes += sum(r.passed for r in applicable)
        total += len(applicable)

    def nanmean(vals):
        vals = [v for v in vals if not math.isnan(v)]
        return statistics.fmean(vals) if vals else math.nan

    row = dict(cell_id=cell_idx, d=d, eta=eta, n=n, T=T, variant=variant,
               seeds=cfg.seeds_per_cell, n_failed=n_failed,
               median_final_error=(statistics.median(finals) if finals
                                   else math.nan),
               mean_iters_to_pi3=nanmean(it_pi3),
               mean_iters_to_pi8=nanmean(it_pi8),
               mean_iters_to_tol=nanmean(it_tol),
               bound_pass_rate=(passes / total if total else math.nan))
    return row


SWEEP_COLUMNS = ("cell_id", "d", "eta", "n", "T", "variant", "seeds",
                 "n_failed", "median_final_error", "mean_iters_to_pi3",
                 "mean_iters_to_pi8", "mean_iters_to_tol", "bound_pass_rate")


@cli.command("sweep")
@click.option("--config", "config_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--jobs", type=int, default=1, callback=_positive_int)
@click.option("--seed", type=int, default=None)
@click.option("--quad-order", type=int, default=None)
def cmd_sweep(config_path, out, jobs, seed, quad_order):
    """Run a (d, eta, n, T, variant) grid and write one summary CSV."""
    try:
        cfg = SweepConfig.from_json(config_path, out=out, seed=seed,
                                    quad_order=quad_order)
    except (TypeError, ValueError, DomainError, KeyError) as exc:
        raise click.UsageError(f"bad sweep config: {exc}")
    cells = list(itertools.product(cfg.d, cfg.eta, cfg.n, cfg.T, cfg.variant))
    args = [(asdict(cfg), i, cell) for i, cell in enumerate(cells)]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_sweep_cell, args))
    else:
        rows = [_run_sweep_cell(a) for a in args]
    os.makedirs(cfg.out, exist_ok=True)
    _echo_config(cfg.out, dict(command="sweep", **asdict(cfg)))
    path = os.path.join(cfg.out, "summary.csv")
    tmp = path + ".tmp"
    csvio.write_sweep_summary(
        ([row[c] for c in SWEEP_COLUMNS] for row in rows), SWEEP_COLUMNS, tmp)
    os.replace(tmp, path)
    click.echo(f"wrote {path}")
    if rows and all(r["n_failed"] == r["seeds"] for r in rows):
        raise NumericalError("every sweep cell failed")


@cli.command("check")
@click.argument("trajectory", type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["population", "finite"]),
              required=True)
@click.option("--d", type=int, default=10, callback=_positive_int)
@click.option("--eta", type=float, default=2.0, callback=_positive_float)
@click.option("--beta-norm", type=float, default=1.0, callback=_positive_float)
@click.option("--sigma", type=float, default=None, callback=_positive_float)
@click.option("--n", type=int, default=100_000, callback=_positive_int)
@click.option("--t", "--T", "t_iters", type=int, default=20,
              callback=_positive_int)
@click.option("--out", type=click.Path(), default=".")
def cmd_check(trajectory, mode, d, eta, beta_norm, sigma, n, t_iters, out):
    """Re-run bound reports on an existing trajectory CSV."""
    truth = _make_truth(d, eta, beta_norm, sigma)
    if mode == "population":
        records = csvio.read_population_trajectory(trajectory)
        reports = check_trajectory(records, truth, "population")
    else:
        records = csvio.read_finite_trajectory(trajectory)
        config = EmConfig(variant="em", n=n, T=t_iters)
        reports = check_trajectory(records, truth, "finite",
                                   eps_f=config.eps_f(d))
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "bounds.csv")
    csvio.write_bound_reports(reports, path, run_id=os.path.basename(trajectory))
    click.echo(f"wrote {path}")


def main(argv=None) -> int:
    """Console entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.exceptions.Abort:
        return 1
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
