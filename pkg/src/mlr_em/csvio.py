"""Schema-stable CSV writers and readers for every artifact the CLI emits.

All files are UTF-8, comma-delimited, with a mandatory header row. Floats
are serialized with repr (shortest round-trip), so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import math

from .diagnostics import BoundReport
from .finite import TrajectoryRecord
from .population import PopulationRecord

POPULATION_COLUMNS = ("iter", "b1", "b1_star", "b2_star", "cos_theta",
                      "sin_theta", "l2_error", "S", "R")
FINITE_COLUMNS = ("iter", "variant", "cos_theta", "sin_theta", "l2_error",
                  "norm", "cond_number", "batch_start", "batch_end")
BOUNDS_COLUMNS = ("run_id", "iter", "theorem_id", "applicable", "lhs", "rhs",
                  "margin", "pass")
FIXED_POINTS_COLUMNS = ("name", "coord_bstar", "coord_orth", "residual",
                        "hessian_quadform", "loglik")
ORACLE_COLUMNS = ("case_id", "quantity", "mean", "std_error", "n_draws", "seed")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def _write(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _f(s: str) -> float:
    return float(s)


def write_population_trajectory(records, path) -> None:
    _write(path, POPULATION_COLUMNS,
           ((r.iter, r.b1, r.b1_star, r.b2_star, r.cos_theta, r.sin_theta,
             r.l2_error, r.S, r.R) for r in records))


def read_population_trajectory(path) -> list[PopulationRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [PopulationRecord(
            iter=int(row["iter"]), b1=_f(row["b1"]),
            b1_star=_f(row["b1_star"]), b2_star=_f(row["b2_star"]),
            cos_theta=_f(row["cos_theta"]), sin_theta=_f(row["sin_theta"]),
            l2_error=_f(row["l2_error"]), S=_f(row["S"]), R=_f(row["R"]))
            for row in reader]


def write_finite_trajectory(records, path) -> None:
    _write(path, FINITE_COLUMNS,
           ((r.iter, r.variant_used, r.cos_theta, r.sin_theta, r.l2_error,
             r.norm, r.cond_number, r.batch_start, r.batch_end)
            for r in records))


def read_finite_trajectory(path) -> list[TrajectoryRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [TrajectoryRecord(
            iter=int(row["iter"]), cos_theta=_f(row["cos_theta"]),
            sin_theta=_f(row["sin_theta"]), l2_error=_f(row["l2_error"]),
            norm=_f(row["norm"]), variant_used=row["variant"],
            cond_number=_f(row["cond_number"]),
            batch_start=int(row["batch_start"]),
            batch_end=int(row["batch_end"])) for row in reader]


def write_bound_reports(reports, path, run_id: str = "run") -> None:
    _write(path, BOUNDS_COLUMNS,
           ((run_id, r.iter, r.theorem_id, r.applicable, r.lhs, r.rhs,
             r.margin, r.passed) for r in reports))


def read_bound_reports(path) -> list[tuple[str, BoundReport]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            out.append((row["run_id"], BoundReport(
                theorem_id=row["theorem_id"], iter=int(row["iter"]),
                applicable=row["applicable"] == "True", lhs=_f(row["lhs"]),
                rhs=_f(row["rhs"]), margin=_f(row["margin"]),
                passed=row["pass"] == "True")))
        return out


def write_fixed_points(rows, path) -> None:
    """rows: iterable of (name, coord_bstar, coord_orth, residual,
    hessian_quadform, loglik)."""
    _write(path, FIXED_POINTS_COLUMNS, rows)


def read_fixed_points(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            parsed = dict(row)
            for key in ("coord_bstar", "coord_orth", "residual",
                        "hessian_quadform", "loglik"):
                parsed[key] = _f(row[key])
            out.append(parsed)
        return out


def write_oracle_fixtures(rows, path) -> None:
    """rows: iterable of (case_id, quantity, mean, std_error, n_draws, seed)."""
    _write(path, ORACLE_COLUMNS, rows)


def read_oracle_fixtures(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            out.append(dict(case_id=row["case_id"], quantity=row["quantity"],
                            mean=_f(row["mean"]),
                            std_error=_f(row["std_error"]),
                            n_draws=int(row["n_draws"]),
                            seed=int(row["seed"])))
        return out


def write_sweep_summary(rows, header, path) -> None:
    _write(path, header, rows)


def read_csv_dicts(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def is_nan(x: float) -> bool:
    return isinstance(x, float) and math.isnan(x)
