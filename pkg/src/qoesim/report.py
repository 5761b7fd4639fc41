"""CSV reports for simulation runs.

Three report kinds: per-user rows (one per arrival, blocked users
included), run-level aggregates, and the admission-threshold trajectory.
All files are RFC-4180 CSV with a header row, UTF-8 encoded.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from qoesim.engine import RunResult
from qoesim.metrics import QualityTrace, ecdf2


def user_rows(result: RunResult, run_id: str, seed: int, ecdf_levels) -> list[dict]:
    """Per-user report rows; eCDF columns are empty for blocked users."""
    levels = np.asarray(ecdf_levels, dtype=float)
    rows = []
    for u in result.users:
        row = {
            "run_id": run_id,
            "seed": seed,
            "user_id": u.user_id,
            "kind": u.kind,
            "type_index": "" if u.type_index is None else u.type_index,
            "arrival_slot": u.arrival_slot,
            "sojourn": u.sojourn,
            "admitted": int(u.admitted),
            "est_quality": "" if u.est_quality is None else repr(u.est_quality),
            "satisfied": "" if u.satisfied is None else int(u.satisfied),
            "mean_quality": "" if u.mean_quality is None else repr(u.mean_quality),
        }
        if u.quality_values:
            vals = ecdf2(QualityTrace(u.quality_values), levels)
            for x, v in zip(levels, vals):
                row[f"ecdf2_at_{x:g}"] = repr(float(v))
        else:
            for x in levels:
                row[f"ecdf2_at_{x:g}"] = ""
        rows.append(row)
    return rows


def user_fieldnames(ecdf_levels) -> list[str]:
    base = ["run_id", "seed", "user_id", "kind", "type_index", "arrival_slot",
            "sojourn", "admitted", "est_quality", "satisfied", "mean_quality"]
    return base + [f"ecdf2_at_{float(x):g}" for x in ecdf_levels]


def write_user_report(path, result: RunResult, run_id: str, seed: int, ecdf_levels) -> None:
    _write_csv(path, user_fieldnames(ecdf_levels),
               user_rows(result, run_id, seed, ecdf_levels))


AGGREGATE_FIELDS = [
    "run_id", "seed", "gamma", "policy", "admission_mode", "slots",
    "overloaded_slots", "n_users", "satisfied_frac", "admitted_frac", "e_frac",
    "warm_n_users", "warm_satisfied_frac", "warm_admitted_frac", "warm_e_frac",
]


def aggregate_row(result: RunResult, run_id: str, seed: int, gamma: float,
                  policy: str, admission_mode: str) -> dict:
    row = {
        "run_id": run_id,
        "seed": seed,
        "gamma": gamma,
        "policy": policy,
        "admission_mode": admission_mode,
        "slots": result.slots,
        "overloaded_slots": result.overloaded_slots,
    }
    row.update({k: result.aggregates[k] for k in AGGREGATE_FIELDS if k in result.aggregates})
    return row


def write_aggregate_report(path, rows: list[dict]) -> None:
    _write_csv(path, AGGREGATE_FIELDS, rows)


THRESHOLD_FIELDS = ["run_id", "n", "component", "theta", "y", "m"]


def write_threshold_report(path, result: RunResult, run_id: str) -> None:
    rows = [
        {"run_id": run_id, "n": ev.n, "component": ev.component,
         "theta": repr(ev.theta), "y": ev.y, "m": ev.m}
        for ev in result.threshold_trajectory
    ]
    _write_csv(path, THRESHOLD_FIELDS, rows)


def _write_csv(path, fieldnames, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
