"""Command-line experiment runner.

    qsl <subcommand> --config <file> [--out <prefix>] [--format csv|json]

Subcommands: refute-ml, bd-gap, trajectory, alpha-table, validity-sweep.
Configs are flat JSON objects; the QSL_SEED environment variable overrides
the config seed. Exit codes: 0 success or claim verified, 1 claim violated
unexpectedly, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys as _sys

import numpy as np

from .bounds import alpha
from .counterexamples import (
    bd_pointwise_margin,
    build_coupling,
    build_ml_family,
    run_bd_nonsaturation,
    run_ml_refutation,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    DomainError,
    InsufficientLevels,
    NonHermitian,
    QslError,
)
from .evolution import RotatedHamiltonianSystem, Trajectory, sample_trajectory
from .linalg import HermitianOperator, PureState
from .sweeps import DEFAULT_DELTAS, validity_sweep

EXIT_OK = 0
EXIT_CLAIM_VIOLATED = 1
EXIT_INVALID_INPUT = 2
EXIT_NUMERICAL = 3

INVALID_INPUT_ERRORS = (ConfigError, DomainError, DimensionMismatch, NonHermitian, InsufficientLevels)

TRAJECTORY_COLUMNS = [
    "t",
    "fidelity",
    "exp_energy",
    "energy_uncertainty",
    "eps_min",
    "eps_max",
    "norm_energy",
    "dual_norm_energy",
    "bloch_x",
    "bloch_y",
    "bloch_z",
]

# Bloch vector (1/2, 0, sqrt(3)/2): polar angle 60 degrees from the x axis,
# in the x-z plane. Used when a config asks for the off-equator start.
OFF_EQUATOR_AMPLITUDES = (math.cos(math.pi / 6.0), math.sin(math.pi / 6.0))

SCHEMAS = {
    "refute-ml": {
        "required": {"delta", "L", "E"},
        "optional": {"margin", "samples"},
    },
    "bd-gap": {
        "required": {"delta"},
        "optional": {"levels", "amplitudes", "samples", "t_max"},
    },
    "trajectory": {
        "required": {"E", "theta_deg"},
        "optional": {"t_max", "samples", "frame", "initial"},
    },
    "alpha-table": {
        "required": set(),
        "optional": {"deltas", "grid_points"},
    },
    "validity-sweep": {
        "required": {"seed"},
        "optional": {"systems", "dim_min", "dim_max", "deltas", "samples", "isolated_fraction"},
    },
}

COMMON_KEYS = {"kind", "out", "format", "seed"}


def _fmt(value) -> str:
    """CSV cell serialization: 17 significant digits, empty for missing."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return format(float(value), ".17g")


def _load_config(path: str, kind: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if "kind" in cfg and cfg["kind"] != kind:
        raise ConfigError(f"config kind {cfg['kind']!r} does not match subcommand {kind!r}")
    schema = SCHEMAS[kind]
    allowed = schema["required"] | schema["optional"] | COMMON_KEYS
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = schema["required"] - set(cfg)
    if missing:
        raise ConfigError(f"missing required config keys: {sorted(missing)}")
    env_seed = os.environ.get("QSL_SEED")
    if env_seed is not None:
        try:
            cfg["seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"QSL_SEED must be an integer, got {env_seed!r}") from exc
    return cfg


def _number(cfg: dict, key: str, default=None, *, minimum=None, maximum=None) -> float:
    value = cfg.get(key, default)
    if value is None:
        raise ConfigError(f"missing numeric value for {key!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key!r} must be a number, got {value!r}")
    value = float(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key!r} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{key!r} must be <= {maximum}, got {value}")
    return value


def _integer(cfg: dict, key: str, default=None, *, minimum=None) -> int:
    value = cfg.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key!r} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key!r} must be >= {minimum}, got {value}")
    return value


def _number_list(cfg: dict, key: str, default=None) -> list[float]:
    values = cfg.get(key, default)
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{key!r} must be a non-empty array of numbers")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{key!r} must contain only numbers, got {v!r}")
        out.append(float(v))
    return out


def _choice(cfg: dict, key: str, options: tuple[str, ...], default: str) -> str:
    value = cfg.get(key, default)
    if value not in options:
        raise ConfigError(f"{key!r} must be one of {options}, got {value!r}")
    return value


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_table(prefix: str, name: str, fmt: str, columns: list[str], rows: list[list]) -> str:
    if fmt == "csv":
        path = f"{prefix}_{name}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(cell) if not isinstance(cell, str) else cell for cell in row])
    else:
        path = f"{prefix}_{name}.json"
        payload = {
            "columns": columns,
            "rows": [
                [cell if isinstance(cell, str) else (None if cell is None else float(cell)) for cell in row]
                for row in rows
            ],
        }
        _write_json(path, payload)
    return path


def _trajectory_rows(traj: Trajectory) -> list[list]:
    rows = []
    for i in range(traj.n_samples):
        row = [
            traj.times[i],
            traj.fidelity[i],
            traj.exp_energy[i],
            traj.energy_uncertainty[i],
            traj.eps_min[i],
            traj.eps_max[i],
            traj.norm_energy[i],
            traj.dual_norm_energy[i],
        ]
        if traj.bloch is not None:
            row.extend(traj.bloch[i])
        else:
            row.extend([None, None, None])
        rows.append(row)
    return rows


def cmd_refute_ml(cfg: dict, prefix: str, fmt: str) -> int:
    delta = _number(cfg, "delta")
    big_l = _number(cfg, "L")
    energy = _number(cfg, "E")
    margin = _number(cfg, "margin", 0.1)
    samples = _integer(cfg, "samples", 1000, minimum=2)

    report = run_ml_refutation(delta, big_l, energy, margin, samples=samples)
    payload = {"kind": "refute-ml", **report.to_dict()}
    ok = (
        report.violated
        and report.margins["mt_saturation"] <= 1e-8
        and report.max_energy_drift <= 1e-9
    )
    payload["claim_verified"] = ok
    _write_json(f"{prefix}_report.json", payload)
    _write_table(prefix, "trajectory", fmt, TRAJECTORY_COLUMNS, _trajectory_rows(report.trajectory))
    return EXIT_OK if ok else EXIT_CLAIM_VIOLATED


def cmd_bd_gap(cfg: dict, prefix: str, fmt: str) -> int:
    delta = _number(cfg, "delta")
    levels = _number_list(cfg, "levels", [0.0, 1.0, 2.0])
    amplitudes = _number_list(cfg, "amplitudes", [1.0] * len(levels))
    if len(amplitudes) != len(levels):
        raise ConfigError("'amplitudes' must have the same length as 'levels'")
    samples = _integer(cfg, "samples", 1000, minimum=2)
    t_max = _number(cfg, "t_max", None) if "t_max" in cfg else None

    hamiltonian = HermitianOperator.from_diagonal(levels)
    state = PureState.normalized(amplitudes)
    report = run_bd_nonsaturation(hamiltonian, state, delta, samples=samples, t_max=t_max)

    sys_ = RotatedHamiltonianSystem(hamiltonian, build_coupling(hamiltonian, state), state)
    traj = sample_trajectory(sys_, report.tau_actual, samples)
    margin = bd_pointwise_margin(traj)
    gap = report.mt_closed - report.bd_closed
    ok = (
        gap > 1e-6
        and margin > 0.0
        and abs(report.tau_actual - report.mt_closed) <= 1e-8
    )
    payload = {
        "kind": "bd-gap",
        "levels": levels,
        "report": report.to_dict(),
        "gap": gap,
        "min_pointwise_bd_margin": margin,
        "claim_verified": ok,
    }
    _write_json(f"{prefix}_report.json", payload)
    _write_table(prefix, "trajectory", fmt, TRAJECTORY_COLUMNS, _trajectory_rows(traj))
    return EXIT_OK if ok else EXIT_CLAIM_VIOLATED


def cmd_trajectory(cfg: dict, prefix: str, fmt: str) -> int:
    energy = _number(cfg, "E")
    theta = math.radians(_number(cfg, "theta_deg"))
    samples = _integer(cfg, "samples", 1000, minimum=2)
    frame = _choice(cfg, "frame", ("schrodinger", "rotating"), "schrodinger")
    initial = _choice(cfg, "initial", ("equator", "off_equator"), "equator")
    t_max = _number(cfg, "t_max", 1.0, minimum=0.0)
    if t_max <= 0:
        raise ConfigError("'t_max' must be positive")

    sys_ = build_ml_family(energy, theta)
    if initial == "off_equator":
        sys_ = RotatedHamiltonianSystem(sys_.H, sys_.A, PureState(OFF_EQUATOR_AMPLITUDES))
    traj = sample_trajectory(sys_, t_max, samples, frame=frame)
    payload = {
        "kind": "trajectory",
        "E": energy,
        "theta": theta,
        "frame": frame,
        "initial": initial,
        "t_max": t_max,
        "samples": samples,
        "energy_uncertainty": float(traj.energy_uncertainty[0]),
    }
    _write_json(f"{prefix}_report.json", payload)
    _write_table(prefix, "trajectory", fmt, TRAJECTORY_COLUMNS, _trajectory_rows(traj))
    return EXIT_OK


def cmd_alpha_table(cfg: dict, prefix: str, fmt: str) -> int:
    if "deltas" in cfg and "grid_points" in cfg:
        raise ConfigError("give either 'deltas' or 'grid_points', not both")
    if "deltas" in cfg:
        deltas = _number_list(cfg, "deltas")
    elif "grid_points" in cfg:
        n = _integer(cfg, "grid_points", minimum=1)
        deltas = list(np.linspace(0.0, 1.0, n))
    else:
        raise ConfigError("alpha-table needs 'deltas' or 'grid_points'")

    rows = []
    for delta in deltas:
        value = alpha(delta)  # validates the range before anything else
        rows.append(
            [
                delta,
                value,
                math.acos(math.sqrt(delta)),
                (1.0 - math.sqrt(delta)) * math.pi / 2.0,
            ]
        )
    values = [row[1] for row in rows]
    ordered = sorted(range(len(deltas)), key=lambda i: deltas[i])
    nonincreasing = all(
        values[ordered[i + 1]] <= values[ordered[i]] + 1e-12 for i in range(len(ordered) - 1)
    )
    below_endpoint = all(row[1] <= row[3] + 1e-12 for row in rows)
    strictly_below_arccos = all(
        row[1] < row[2] - 1e-12 for row in rows if 1e-3 <= row[0] <= 1.0 - 1e-3
    )
    ok = nonincreasing and below_endpoint and strictly_below_arccos
    payload = {
        "kind": "alpha-table",
        "n_deltas": len(deltas),
        "alpha_nonincreasing": nonincreasing,
        "below_endpoint_bound": below_endpoint,
        "strictly_below_arccos": strictly_below_arccos,
        "claim_verified": ok,
    }
    _write_json(f"{prefix}_report.json", payload)
    _write_table(prefix, "alpha", fmt, ["delta", "alpha", "arccos_sqrt_delta", "endpoint_value"], rows)
    return EXIT_OK if ok else EXIT_CLAIM_VIOLATED


def cmd_validity_sweep(cfg: dict, prefix: str, fmt: str) -> int:
    seed = _integer(cfg, "seed")
    n_systems = _integer(cfg, "systems", 200, minimum=1)
    dim_min = _integer(cfg, "dim_min", 2, minimum=2)
    dim_max = _integer(cfg, "dim_max", 6, minimum=dim_min)
    deltas = tuple(_number_list(cfg, "deltas", list(DEFAULT_DELTAS)))
    samples = _integer(cfg, "samples", 1000, minimum=2)
    isolated_fraction = _number(cfg, "isolated_fraction", 0.3, minimum=0.0, maximum=1.0)
    for delta in deltas:
        if not 0.0 <= delta <= 1.0:
            raise ConfigError(f"sweep deltas must lie in [0, 1], got {delta}")

    rows, violations = validity_sweep(
        n_systems=n_systems,
        dim_range=(dim_min, dim_max),
        deltas=deltas,
        seed=seed,
        isolated_fraction=isolated_fraction,
        samples=samples,
    )
    table = []
    for row in rows:
        rep = row.report
        table.append(
            [
                row.system,
                row.kind,
                row.dim,
                row.delta,
                row.reached,
                rep.tau_actual if rep else None,
                rep.mt if rep else None,
                (rep.ml if rep and rep.ml is not None else None),
                rep.bd if rep else None,
                rep.mt_closed if rep else None,
                rep.bd_closed if rep else None,
                row.worst_margin,
            ]
        )
    reached = sum(1 for row in rows if row.reached)
    payload = {
        "kind": "validity-sweep",
        "seed": seed,
        "systems": n_systems,
        "cells": len(rows),
        "reached_cells": reached,
        "violations": violations,
        "claim_verified": violations == 0,
    }
    _write_json(f"{prefix}_report.json", payload)
    _write_table(
        prefix,
        "sweep",
        fmt,
        ["system", "kind", "dim", "delta", "reached", "tau", "mt", "ml", "bd", "mt_closed", "bd_closed", "worst_margin"],
        table,
    )
    return EXIT_OK if violations == 0 else EXIT_CLAIM_VIOLATED


HANDLERS = {
    "refute-ml": cmd_refute_ml,
    "bd-gap": cmd_bd_gap,
    "trajectory": cmd_trajectory,
    "alpha-table": cmd_alpha_table,
    "validity-sweep": cmd_validity_sweep,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to a flat JSON config")
        cmd.add_argument("--out", default=None, help="output path prefix")
        cmd.add_argument("--format", default=None, choices=["csv", "json"], help="table format")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config, args.command)
        prefix = args.out or cfg.get("out") or "qsl_out"
        if not isinstance(prefix, str):
            raise ConfigError(f"'out' must be a string, got {prefix!r}")
        fmt = args.format or cfg.get("format") or "csv"
        if fmt not in ("csv", "json"):
            raise ConfigError(f"'format' must be csv or json, got {fmt!r}")
        return HANDLERS[args.command](cfg, prefix, fmt)
    except INVALID_INPUT_ERRORS as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        return EXIT_INVALID_INPUT
    except QslError as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        return EXIT_NUMERICAL


if __name__ == "__main__":
    _sys.exit(main())
