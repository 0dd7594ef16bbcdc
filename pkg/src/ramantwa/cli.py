"""Command-line entry point: single points, bandgap sweeps, oracle suites.

Outputs are plain CSV (stable, versioned column schema; one row per
scenario/bandgap/mode) plus a JSON manifest sidecar carrying the full
configuration snapshot, master seed, code version, timings, per-point
trajectory abort counts and output digests, so any result can be re-run
bit-identically.

Exit status: 0 all points completed with zero trajectory aborts;
2 completed partially (failed points or aborted trajectories, see
manifest); 1 usage, configuration or validation errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import RamanTwaError
from .workers import default_workers, set_workers

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "scenario", "omega0c", "k",
    "dV_E", "dV_E_err", "dV_Q", "dV_Q_err",
    "V_E_g", "V_E_0", "V_Q_g", "V_Q_0",
    "dV_E_th", "dV_Q_th", "dVp_Q_th",
    "mean_Q_re", "mean_Q_err",
    "theta_min", "V_min", "V_max",
    "annotation",
)
UNITS_NOTE = ("natural units hbar = 1, omega0_R = 1; variances in the "
              "X_k = z_k + conj(z_-k) convention (vacuum V = 1)")


def format_number(value) -> str:
    """Locale-independent decimal with 9 significant digits."""
    if value is None:
        return ""
    return format(float(value), ".9g")


def format_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return format_number(value)


def rows_to_csv(rows) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(format_field(getattr(row, col)) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[dict]:
    """Parse a schema CSV back into typed row dicts (round-trip safe)."""
    lines = text.splitlines()
    if not lines or tuple(lines[0].split(",")) != CSV_COLUMNS:
        raise RamanTwaError("CSV header does not match the versioned schema")
    out = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise RamanTwaError(f"CSV row has {len(parts)} fields, expected {len(CSV_COLUMNS)}")
        row = {}
        for col, raw in zip(CSV_COLUMNS, parts):
            if col in ("scenario", "annotation"):
                row[col] = raw
            elif raw == "":
                row[col] = None
            elif col == "k":
                row[col] = int(raw)
            else:
                row[col] = float(raw)
        out.append(row)
    return out


def serialize_parsed(rows: list[dict]) -> str:
    """Inverse of parse_csv; used by the round-trip guarantee."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        fields = []
        for col in CSV_COLUMNS:
            value = row[col]
            if col in ("scenario", "annotation"):
                fields.append(value)
            elif value is None:
                fields.append("")
            elif col == "k":
                fields.append(str(value))
            else:
                fields.append(format_number(value))
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def _check_collision(path: Path, force: bool):
    if path.exists() and not force:
        raise RamanTwaError(f"output {path} exists; pass --force to overwrite")


def write_outputs(csv_path: Path, rows, manifest: dict, force: bool) -> Path:
    manifest_path = csv_path.with_suffix("").with_suffix(".manifest.json") \
        if csv_path.suffix == ".csv" else Path(str(csv_path) + ".manifest.json")
    _check_collision(csv_path, force)
    _check_collision(manifest_path, force)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(rows_to_csv(rows), encoding="utf-8", newline="\n")
    manifest["outputs"] = [{
        "path": csv_path.name,
        "sha256": sha256_file(csv_path),
        "rows": len(rows),
    }]
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    return manifest_path


def base_manifest(cfg: dict, protocol, profile, workers: int) -> dict:
    return {
        "schema_version": CSV_SCHEMA_VERSION,
        "code_version": __version__,
        "config": cfg,
        "master_seed": protocol.master_seed,
        "trajectories": protocol.n_trajectories,
        "dt": protocol.dt,
        "profile": profile or "config",
        "workers": workers,
        "units": UNITS_NOTE,
        "csv_columns": list(CSV_COLUMNS),
        "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def _common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--scenario", help="scenario preset name (or 'all' for sweep)")
    parser.add_argument("--set", dest="overrides", action="append", metavar="KEY=VALUE",
                        help="override a config entry (dotted path or known alias)")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--trajectories", type=int, help="trajectory count override")
    parser.add_argument("--profile", choices=("paper", "ci"),
                        help="trajectory-count profile (paper=3500, ci=500)")
    parser.add_argument("--output", help="output CSV file (run) or directory (sweep)")
    parser.add_argument("--force", action="store_true", help="overwrite existing outputs")
    parser.add_argument("--workers", type=int, default=None,
                        help="integration worker threads (default: RAMANTWA_WORKERS or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ramantwa",
        description="Trajectory-ensemble simulator for multimode Raman-cavity hybrids")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single (scenario, bandgap) point")
    _common_arguments(p_run)

    p_sweep = sub.add_parser("sweep", help="run a photonic-bandgap sweep")
    _common_arguments(p_sweep)

    p_oracle = sub.add_parser("oracle", help="run independent verification oracles")
    p_oracle.add_argument("suite", choices=("drift", "fdt", "thermal", "squeezing", "all"))
    return parser


def _setup(args):
    from .config import assemble_config, build_protocol, build_scenario

    scenario_name = args.scenario if args.scenario not in (None, "all") else None
    cfg = assemble_config(config_path=args.config, scenario=scenario_name,
                          overrides=args.overrides)
    workers = set_workers(args.workers if args.workers else default_workers())
    protocol = build_protocol(cfg, trajectories=args.trajectories, seed=args.seed,
                              profile=args.profile)
    scenario = build_scenario(cfg)
    return cfg, protocol, scenario, workers


def cmd_run(args) -> int:
    from .sweep import run_point

    cfg, protocol, scenario, workers = _setup(args)
    omega0c = float(cfg["cavity"]["omega0"])
    rows, n_aborted, _, _ = run_point(scenario, omega0c, protocol)

    out = Path(args.output) if args.output else Path(
        f"run_{scenario.name}_{format_number(omega0c)}.csv")
    manifest = base_manifest(cfg, protocol, args.profile, workers)
    manifest["points"] = [{"omega0c": omega0c, "aborted_trajectories": n_aborted}]
    manifest["finished_utc"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    write_outputs(out, rows, manifest, args.force)
    print(f"wrote {out} ({len(rows)} rows)")
    return 0 if n_aborted == 0 else 2


def _sweep_one(scenario_name, args) -> tuple[int, Path]:
    from .config import assemble_config, bandgap_grid, build_protocol, build_scenario
    from .sweep import run_sweep

    cfg = assemble_config(config_path=args.config, scenario=scenario_name,
                          overrides=args.overrides)
    workers = set_workers(args.workers if args.workers else default_workers())
    protocol = build_protocol(cfg, trajectories=args.trajectories, seed=args.seed,
                              profile=args.profile)
    scenario = build_scenario(cfg)
    grid = bandgap_grid(cfg)

    result = run_sweep(scenario, grid, protocol)

    out_dir = Path(args.output) if args.output else Path("sweep_out")
    csv_path = out_dir / f"{scenario.name}.csv"
    manifest = base_manifest(cfg, protocol, args.profile, workers)
    manifest["points"] = [
        {"omega0c": float(w), "aborted_trajectories": result.abort_counts.get(float(w), 0)}
        for w in grid
    ]
    manifest["point_errors"] = [{"omega0c": w, "error": msg} for w, msg in result.point_errors]
    manifest["finished_utc"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    write_outputs(csv_path, result.rows, manifest, args.force)
    print(f"wrote {csv_path} ({len(result.rows)} rows, "
          f"{len(result.point_errors)} failed points, {result.n_aborted} aborts)")
    status = 0
    if result.point_errors or result.n_aborted:
        status = 2
    return status, csv_path


def _merge_singlemode(paths, out_dir, force) -> None:
    """Combine the two single-mode variants into one CSV file."""
    rows = []
    for path in paths:
        rows.extend(parse_csv(path.read_text(encoding="utf-8")))
    target = out_dir / "singlemode.csv"
    _check_collision(target, force)
    target.write_text(serialize_parsed(rows), encoding="utf-8", newline="\n")
    for path in paths:
        path.unlink()
        manifest = path.with_suffix("").with_suffix(".manifest.json")
        if manifest.exists():
            merged = out_dir / f"singlemode_{path.stem}.manifest.json"
            manifest.rename(merged)


def cmd_sweep(args) -> int:
    if args.scenario == "all":
        names = ("flatflat", "quadraman", "quadcavity", "thermalflatflat",
                 "singlemode_ref", "singlemode_eff")
        status = 0
        single_paths = []
        out_dir = Path(args.output) if args.output else Path("sweep_out")
        for name in names:
            sub_args = argparse.Namespace(**vars(args))
            sub_args.scenario = name
            code, path = _sweep_one(name, sub_args)
            status = max(status, code)
            if name.startswith("singlemode"):
                single_paths.append(path)
        _merge_singlemode(single_paths, out_dir, args.force)
        return status
    if not args.scenario and not args.config:
        raise RamanTwaError("sweep requires --scenario or --config")
    status, _ = _sweep_one(args.scenario, args)
    return status


def cmd_oracle(args) -> int:
    from .oracles import run_suite

    results = run_suite(args.suite)
    failed = 0
    for res in results:
        print(res.line())
        failed += 0 if res.passed else 1
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_oracle(args)
    except RamanTwaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
