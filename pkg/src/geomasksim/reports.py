"""CSV emission/ingestion and the run manifest.

All emissions are deterministic for a fixed (seed, config, version): floats
are printed with 17 significant digits (shortest exact round-trip for IEEE
doubles), booleans as ``true``/``false``, missing values as empty cells;
rows are sorted; files end with a trailing newline and are UTF-8.

Schemas:

    records:    theta_star,rep,alpha_hat,beta_hat,se_beta,converged,
                iterations,significant_beta,outside_true_ci
    curve:      theta_star,mean_abs_beta,sd_beta,pct_outside_true_ci,
                pct_nonsignificant,convergence_rate,el_analytic,
                el_empirical,moment_variant
    efficiency: theta_star,info_true,info_masked_analytic,el_analytic,
                el_empirical,moment_formula
    points:     id,x,y[,choice]
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .efficiency import EfficiencyReport
from .experiments import AttenuationCurve, CurveRow, ReplicationRecord

RECORDS_HEADER = (
    "theta_star", "rep", "alpha_hat", "beta_hat", "se_beta",
    "converged", "iterations", "significant_beta", "outside_true_ci",
)
CURVE_HEADER = (
    "theta_star", "mean_abs_beta", "sd_beta", "pct_outside_true_ci",
    "pct_nonsignificant", "convergence_rate", "el_analytic", "el_empirical",
    "moment_variant",
)
EFFICIENCY_HEADER = (
    "theta_star", "info_true", "info_masked_analytic", "el_analytic",
    "el_empirical", "moment_formula",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_rows(path: str | Path, header: tuple[str, ...], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    return path


def write_records_csv(records: list[ReplicationRecord], path: str | Path) -> Path:
    """Replication records, sorted by (theta_star, rep)."""
    if not records:
        raise ValueError("no records to write")
    rows = sorted(records, key=lambda r: (r.theta_star, r.rep))
    return _write_rows(
        path,
        RECORDS_HEADER,
        (
            (r.theta_star, r.rep, r.alpha_hat, r.beta_hat, r.se_beta,
             r.converged, r.iterations, r.significant_beta, r.outside_true_ci)
            for r in rows
        ),
    )


def read_records_csv(path: str | Path) -> list[ReplicationRecord]:
    rows = _read_rows(path, RECORDS_HEADER)
    return [
        ReplicationRecord(
            theta_star=float(row["theta_star"]),
            rep=int(row["rep"]),
            alpha_hat=float(row["alpha_hat"]),
            beta_hat=float(row["beta_hat"]),
            se_beta=float(row["se_beta"]),
            converged=_parse_bool(row["converged"]),
            iterations=int(row["iterations"]),
            significant_beta=_parse_bool(row["significant_beta"]),
            outside_true_ci=_parse_bool(row["outside_true_ci"]),
        )
        for row in rows
    ]


def write_curve_csv(
    curve: AttenuationCurve,
    efficiency_reports: list[EfficiencyReport] | None,
    path: str | Path,
) -> Path:
    """One row per theta*; efficiency columns are empty when no reports are
    supplied (e.g. centroid runs). Reports, when given, must cover the same
    theta* grid in the same order."""
    reports: list[EfficiencyReport | None]
    if efficiency_reports is None:
        reports = [None] * len(curve.rows)
    else:
        if len(efficiency_reports) != len(curve.rows):
            raise ValueError(
                f"{len(efficiency_reports)} efficiency reports for {len(curve.rows)} curve rows"
            )
        for row, rep in zip(curve.rows, efficiency_reports):
            if abs(row.theta_star - rep.theta_star) > 1e-12:
                raise ValueError(f"report theta* {rep.theta_star} does not match row {row.theta_star}")
        reports = list(efficiency_reports)

    def cells():
        for row, rep in zip(curve.rows, reports):
            yield (
                row.theta_star, row.mean_abs_beta, row.sd_beta,
                row.pct_outside_true_ci, row.pct_nonsignificant, row.convergence_rate,
                None if rep is None else rep.el_analytic,
                None if rep is None else rep.el_empirical,
                "" if rep is None else rep.moment_formula,
            )

    return _write_rows(path, CURVE_HEADER, cells())


def read_curve_csv(path: str | Path) -> AttenuationCurve:
    rows = _read_rows(path, CURVE_HEADER)
    return AttenuationCurve(
        rows=tuple(
            CurveRow(
                theta_star=float(row["theta_star"]),
                mean_abs_beta=float(row["mean_abs_beta"]),
                sd_beta=float(row["sd_beta"]),
                pct_outside_true_ci=float(row["pct_outside_true_ci"]),
                pct_nonsignificant=float(row["pct_nonsignificant"]),
                convergence_rate=float(row["convergence_rate"]),
            )
            for row in rows
        )
    )


def write_efficiency_csv(reports: list[EfficiencyReport], path: str | Path) -> Path:
    if not reports:
        raise ValueError("no efficiency reports to write")
    rows = sorted(reports, key=lambda r: r.theta_star)
    return _write_rows(
        path,
        EFFICIENCY_HEADER,
        (
            (r.theta_star, r.info_true, r.info_masked_analytic, r.el_analytic,
             r.el_empirical, r.moment_formula)
            for r in rows
        ),
    )


def write_points_csv(
    xy: np.ndarray,
    path: str | Path,
    choices: np.ndarray | None = None,
    ids: np.ndarray | None = None,
) -> Path:
    """Point dataset as id,x,y[,choice]; ids default to 0..n-1."""
    xy = np.asarray(xy, dtype=np.float64)
    if xy.ndim != 2 or xy.shape[1] != 2:
        raise ValueError(f"xy must be (n, 2), got {xy.shape}")
    n = xy.shape[0]
    ids = np.arange(n) if ids is None else np.asarray(ids)
    if ids.shape != (n,):
        raise ValueError("ids length must match xy")
    header = ("id", "x", "y") if choices is None else ("id", "x", "y", "choice")
    if choices is None:
        rows = ((int(i), x, y) for i, (x, y) in zip(ids, xy))
    else:
        choices = np.asarray(choices)
        if choices.shape != (n,):
            raise ValueError("choices length must match xy")
        rows = ((int(i), x, y, int(c)) for i, (x, y), c in zip(ids, xy, choices))
    return _write_rows(path, header, rows)


def read_points_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Returns (ids, xy, choices-or-None)."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if tuple(header) not in (("id", "x", "y"), ("id", "x", "y", "choice")):
            raise ValueError(f"{path}: unexpected header {header}; expected id,x,y[,choice]")
        has_choice = len(header) == 4
        ids, xs, ys, cs = [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            ids.append(int(row[0]))
            xs.append(float(row[1]))
            ys.append(float(row[2]))
            if has_choice:
                c = int(row[3])
                if c not in (0, 1):
                    raise ValueError(f"{path}:{lineno}: choice must be 0 or 1, got {row[3]}")
                cs.append(c)
    if not ids:
        raise ValueError(f"{path}: no data rows")
    xy = np.column_stack([np.array(xs), np.array(ys)])
    return np.array(ids), xy, (np.array(cs, dtype=np.int64) if has_choice else None)


def _parse_bool(raw: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise ValueError(f"expected true/false, got {raw!r}")


def _read_rows(path: str | Path, header: tuple[str, ...]) -> list[dict[str, str]]:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != header:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}; expected {header}")
        return list(reader)


@dataclass
class RunManifest:
    """Provenance for one CLI run: what produced which files."""

    config_hash: str
    seed: int
    version: str
    started_at: str
    finished_at: str
    outputs: list[str]

    def to_json(self) -> str:
        return json.dumps(
            {
                "config_hash": self.config_hash,
                "seed": self.seed,
                "version": self.version,
                "started_at": self.started_at,
                "finished_at": self.finished_at,
                "outputs": self.outputs,
            },
            indent=2,
        ) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        return cls(
            config_hash=data["config_hash"],
            seed=data["seed"],
            version=data["version"],
            started_at=data["started_at"],
            finished_at=data["finished_at"],
            outputs=list(data["outputs"]),
        )


def write_manifest(manifest: RunManifest, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.to_json(), encoding="utf-8")
    return path
