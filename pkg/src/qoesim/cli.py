"""Command-line front end: scenario configs, sweeps, and CSV reports.

Subcommands:

- ``run``       one scenario -> per-user / aggregate / threshold CSVs
- ``sweep``     a named experiment (grid of runs) -> CSVs + manifest.json
- ``validate``  check a config file, exit 0/2
- ``oracle``    brute-force solver oracle suite, exit 0/1

Configs are YAML mappings of ScenarioConfig fields (see ``demos/`` for
annotated examples); ``--gamma``, ``--policy``, ``--seed`` and ``--out``
override the file.  Sweeps never abort on a failed point: failures land in
the manifest and flip the exit code to 3.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import traceback
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from qoesim import report
from qoesim.engine import DEFAULT_GRID, RunResult, ScenarioConfig, run
from qoesim.metrics import CaseIConstraints, CaseIIConstraints
from qoesim.ratequality import SyntheticSource, TraceFileSource

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_PARTIAL = 3

SWEEP_GAMMAS = tuple(range(6, 17))
CASE2_CONSTRAINTS = CaseIIConstraints(gs=np.array([40.0, 60.0]), hs=np.array([1.0, 1.0]))
CASE2_TYPE_PROBS = (0.5, 0.5)
SCENARIOS = ("policy-compare", "theta-sweep", "tuner-trace", "admission-compare", "two-type-theta-grid", "two-type-tuner",
             "two-type-compare", "custom")

_CONFIG_FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig)}


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed config mapping."""
    if not isinstance(data, dict):
        raise ValueError("config root must be a mapping")
    kwargs = {}
    for key, value in data.items():
        if key == "constraints":
            kwargs[key] = _constraints_from_dict(value)
        elif key == "rq_source":
            kwargs[key] = _source_from_dict(value)
        elif key in ("theta", "type_probs", "hp_rate_range"):
            kwargs[key] = tuple(value) if isinstance(value, (list, tuple)) else value
        elif key in _CONFIG_FIELDS:
            kwargs[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    config = ScenarioConfig(**kwargs)
    config.validate()
    return config


def _constraints_from_dict(value):
    if not isinstance(value, dict) or "case" not in value:
        raise ValueError("constraints must be a mapping with a 'case' key")
    case = value["case"]
    if case == 1:
        return CaseIConstraints(xs=np.asarray(value["xs"], dtype=float),
                                hs=np.asarray(value["hs"], dtype=float))
    if case == 2:
        return CaseIIConstraints(gs=np.asarray(value["gs"], dtype=float),
                                 hs=np.asarray(value["hs"], dtype=float))
    raise ValueError("constraints case must be 1 or 2")


def _source_from_dict(value):
    if isinstance(value, dict) and "trace" in value:
        return TraceFileSource(value["trace"])
    if isinstance(value, dict):
        kwargs = {}
        for key in ("q_lo_range", "q_hi_range"):
            if key in value:
                kwargs[key] = tuple(value[key])
        return SyntheticSource(**kwargs)
    raise ValueError("rq_source must be a mapping ({trace: path} or quality ranges)")


def load_config(path: str | None, overrides: argparse.Namespace) -> ScenarioConfig:
    data = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    for flag in ("gamma", "policy", "seed"):
        value = getattr(overrides, flag, None)
        if value is not None:
            data[flag] = value
    if getattr(overrides, "arrivals", None) is not None:
        data["stop_arrivals"] = overrides.arrivals
    if getattr(overrides, "admission", None) is not None:
        data["admission_mode"] = overrides.admission
    return config_from_dict(data)


def _ecdf_levels(config: ScenarioConfig):
    c = config.constraints
    return c.xs if isinstance(c, CaseIConstraints) else c.gs


def case2_stats(result: RunResult) -> dict[str, float]:
    """Per-type admitted-but-violated fractions for two-type runs."""
    out = {}
    types = sorted({u.type_index for u in result.users if u.type_index is not None})
    for j in types:
        users = [u for u in result.users if u.type_index == j]
        bad = sum(1 for u in users if u.admitted and not u.satisfied)
        out[f"e_type{j}"] = bad / len(users) if users else 0.0
    return out


def write_run_outputs(out_dir: Path, run_id: str, config: ScenarioConfig,
                      result: RunResult) -> dict:
    """Write the three report files for one run; return its summary row."""
    report.write_user_report(out_dir / f"{run_id}_users.csv", result, run_id,
                             config.seed, _ecdf_levels(config))
    if result.threshold_trajectory:
        report.write_threshold_report(out_dir / f"{run_id}_thresholds.csv",
                                      result, run_id)
    row = report.aggregate_row(result, run_id, config.seed, config.gamma,
                               config.policy, config.admission_mode)
    row.update(case2_stats(result))
    return row


def _write_summary(path: Path, rows: list[dict]) -> None:
    fields = list(report.AGGREGATE_FIELDS)
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    report._write_csv(path, fields, rows)


# ---------------------------------------------------------------- scenarios

def scenario_points(name: str, seeds: list[int], base: dict) -> list[tuple[str, ScenarioConfig]]:
    """Expand a named experiment into (run_id, config) points.

    ``base`` holds config overrides applied to every point before the
    scenario's own fields.
    """
    if not seeds:
        raise ValueError("seeds list must be nonempty")

    def cfg(run_id: str, seed: int, **fields) -> tuple[str, ScenarioConfig]:
        data = dict(base)
        data.update(fields)
        data["seed"] = seed
        return run_id, config_from_dict(data)

    points: list[tuple[str, ScenarioConfig]] = []
    if name == "policy-compare":
        for gamma in (6.0, 9.0, 12.0):
            for policy in ("queue-case1", "avg-quality"):
                for seed in seeds:
                    points.append(cfg(f"policy_g{gamma:g}_{policy}_s{seed}", seed,
                                      gamma=gamma, policy=policy,
                                      admission_mode="off"))
    elif name == "theta-sweep":
        for theta in range(0, 71, 10):
            for seed in seeds:
                points.append(cfg(f"theta{theta}_s{seed}", seed,
                                  gamma=base.get("gamma", 6.0),
                                  policy="queue-case1",
                                  admission_mode="fixed", theta=float(theta)))
    elif name == "tuner-trace":
        for seed in seeds:
            points.append(cfg(f"tuner_s{seed}", seed,
                              gamma=base.get("gamma", 6.0), policy="queue-case1",
                              admission_mode="auto", stop_updates=400,
                              stop_arrivals=10_000_000))
    elif name == "admission-compare":
        variants = (("ac", "queue-case1", "auto"),
                    ("noac", "queue-case1", "off"),
                    ("baseline", "avg-quality", "off"))
        for gamma in SWEEP_GAMMAS:
            for tag, policy, mode in variants:
                for seed in seeds:
                    points.append(cfg(f"adm_g{gamma}_{tag}_s{seed}", seed,
                                      gamma=float(gamma), policy=policy,
                                      admission_mode=mode))
    elif name == "two-type-theta-grid":
        for t0 in (0.0, 20.0, 40.0, 60.0):
            for t1 in (0.0, 20.0, 40.0, 60.0):
                for seed in seeds:
                    points.append(cfg(
                        f"grid_t{t0:g}_{t1:g}_s{seed}", seed,
                        gamma=base.get("gamma", 6.0), policy="queue-case2",
                        admission_mode="fixed", theta=(t0, t1),
                        constraints={"case": 2, "gs": [40.0, 60.0], "hs": [1.0, 1.0]},
                        type_probs=CASE2_TYPE_PROBS))
    elif name == "two-type-tuner":
        for seed in seeds:
            points.append(cfg(
                f"twotuner_s{seed}", seed,
                gamma=base.get("gamma", 6.0), policy="queue-case2",
                admission_mode="auto", stop_updates=200,
                stop_arrivals=10_000_000,
                constraints={"case": 2, "gs": [40.0, 60.0], "hs": [1.0, 1.0]},
                type_probs=CASE2_TYPE_PROBS))
    elif name == "two-type-compare":
        variants = (("ac", "queue-case2", "auto"), ("baseline", "avg-quality", "off"))
        for gamma in SWEEP_GAMMAS:
            for tag, policy, mode in variants:
                for seed in seeds:
                    points.append(cfg(
                        f"twotype_g{gamma}_{tag}_s{seed}", seed,
                        gamma=float(gamma), policy=policy, admission_mode=mode,
                        constraints={"case": 2, "gs": [40.0, 60.0], "hs": [1.0, 1.0]},
                        type_probs=CASE2_TYPE_PROBS))
    elif name == "custom":
        for seed in seeds:
            points.append(cfg(f"custom_s{seed}", seed))
    else:
        raise ValueError(f"unknown scenario {name!r}")
    return points


# ------------------------------------------------------------- subcommands

def cmd_run(args) -> int:
    try:
        config = load_config(args.config, args)
    except (ValueError, KeyError, TypeError, yaml.YAMLError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out_dir = Path(args.out)
    try:
        result = run(config)
        row = write_run_outputs(out_dir, args.run_id, config, result)
        _write_summary(out_dir / "aggregate.csv", [row])
    except OSError as exc:
        print(f"I/O failure writing {out_dir}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for key in ("n_users", "satisfied_frac", "admitted_frac", "e_frac"):
        print(f"{key}: {result.aggregates[key]}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = {}
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = yaml.safe_load(fh) or {}
        except OSError as exc:
            print(f"cannot read config: {exc}", file=sys.stderr)
            return EXIT_ERROR
    if args.gamma is not None:
        base["gamma"] = args.gamma
    if args.scenario == "custom" and not base:
        print("custom scenario requires --config", file=sys.stderr)
        return EXIT_INVALID
    try:
        points = scenario_points(args.scenario, args.seeds, base)
    except (ValueError, KeyError, TypeError) as exc:
        print(f"invalid experiment spec: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out_dir = Path(args.out)
    runs_dir = out_dir / "runs"
    rows = []
    manifest_runs = []
    for run_id, config in points:
        try:
            result = run(config)
            rows.append(write_run_outputs(runs_dir, run_id, config, result))
            manifest_runs.append({"run_id": run_id, "status": "ok"})
            print(f"{run_id}: ok", flush=True)
        except Exception as exc:  # per-run failures must not abort the sweep
            manifest_runs.append({"run_id": run_id, "status": "failed",
                                  "error": f"{type(exc).__name__}: {exc}"})
            print(f"{run_id}: FAILED ({exc})", file=sys.stderr, flush=True)
            traceback.print_exc(file=sys.stderr)
    try:
        if rows:
            _write_summary(out_dir / "aggregate.csv", rows)
        manifest = {
            "scenario": args.scenario,
            "seeds": args.seeds,
            "created": datetime.now(timezone.utc).isoformat(),
            "runs": manifest_runs,
        }
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
    except OSError as exc:
        print(f"I/O failure writing {out_dir}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    failed = sum(1 for r in manifest_runs if r["status"] != "ok")
    print(f"sweep complete: {len(manifest_runs) - failed}/{len(manifest_runs)} runs ok")
    return EXIT_OK if failed == 0 else EXIT_PARTIAL


def cmd_validate(args) -> int:
    try:
        load_config(args.config, args)
    except (ValueError, KeyError, TypeError, yaml.YAMLError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print("ok")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from qoesim.oracles import run_oracle_suite

    rep = run_oracle_suite(instances=args.instances, seed=args.seed,
                           levels=args.levels)
    print(f"instances: {rep.instances}")
    print(f"max relative gap: {rep.max_rel_gap:.3e} (tolerance {rep.tolerance:g})")
    print(f"failures: {rep.failures}")
    return EXIT_OK if rep.passed else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qoesim",
                                     description="QoE-constrained streaming simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("--config", help="YAML scenario config")
    p_run.add_argument("--gamma", type=float)
    p_run.add_argument("--policy", choices=["queue-case1", "queue-case2", "avg-quality"])
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--arrivals", type=int, help="video arrivals before draining")
    p_run.add_argument("--admission", choices=["off", "fixed", "auto"])
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--run-id", default="run")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a named experiment grid")
    p_sweep.add_argument("--scenario", choices=SCENARIOS, required=True)
    p_sweep.add_argument("--config", help="YAML overrides (required for custom)")
    p_sweep.add_argument("--seeds", type=int, nargs="+", default=[1])
    p_sweep.add_argument("--gamma", type=float, help="override fixed-gamma scenarios")
    p_sweep.add_argument("--out", default="out", help="output directory")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=cmd_validate)

    p_orc = sub.add_parser("oracle", help="brute-force solver oracle suite")
    p_orc.add_argument("--instances", type=int, default=100)
    p_orc.add_argument("--seed", type=int, default=0)
    p_orc.add_argument("--levels", type=int, default=200)
    p_orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
