"""Command-line front end wiring the pipeline end to end.

Subcommands: ingest (normalize + split), segment (scenarios + regimes),
analyze (per-trip metrics), report (figure CSVs), synth (oracle corpus),
verify (round-trip accuracy). Every output directory receives the
effective configuration as ``config.json``. Exit codes: 0 success,
1 usage, 2 schema, 3 data.
"""

from __future__ import annotations

import argparse
import glob as globmod
import json
import math
import sys
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import ingest as ing
from . import synth as syn
from .config import PipelineConfig, load_config
from .errors import DataError, TrajsegError, UsageError
from .metrics import detect_cut_ins, scenario_params, trip_metrics
from .model import REGIME_SCOPE, Scenario, ScenarioType, scenario_from_dict
from .regimes import isolate_regimes, regime_record
from .report import write_figure_data
from .segmentation import scenario_record, segment_trip


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if math.isnan(x) else x
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_jsonl(path, records) -> int:
    n = 0
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(_jsonable(rec), sort_keys=True))
            fh.write("\n")
            n += 1
    return n


def read_jsonl(path):
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def _trip_files(trips_dir):
    root = Path(trips_dir)
    files = sorted(root.glob("*.csv")) + sorted(root.glob("trips/*.csv"))
    if not files:
        raise DataError(f"no trips found under {trips_dir}")
    return files


def _pool_map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with get_context("fork").Pool(workers) as pool:
        return pool.map(fn, items, chunksize=max(1, len(items) // (workers * 4)))


# top-level workers (picklable)

def _segment_one(args):
    path, cfg_dict = args
    config = PipelineConfig(**cfg_dict)
    trip = ing.read_trip_csv(path)
    scenarios = segment_trip(trip, config)
    scen_records = [scenario_record(trip, s) for s in scenarios]
    reg_records = []
    for i, s in enumerate(scenarios):
        if s.stype not in REGIME_SCOPE:
            continue
        for reg in isolate_regimes(s, trip, config):
            reg_records.append(regime_record(trip, i, reg))
    return trip.vehicle_id, trip.trip_id, scen_records, reg_records


def _analyze_one(args):
    path, scen_dicts, cfg_dict = args
    config = PipelineConfig(**cfg_dict)
    trip = ing.read_trip_csv(path)
    scenarios = [scenario_from_dict(d) for d in scen_dicts]
    cut_ins = detect_cut_ins(trip, config)
    rate = 1.0 / trip.dt if trip.dt > 0 else float("nan")
    metrics_rec = trip_metrics(trip, scenarios, cut_ins, config).to_record(
        trip, sample_rate_hz=rate)
    sp_records = []
    avg = metrics_rec["avg_speed_mps"]
    for i, s in enumerate(scenarios):
        if s.stype not in (ScenarioType.B, ScenarioType.BNA, ScenarioType.BSNA):
            continue
        p = scenario_params(s, trip, config)
        rec = {"trip_id": trip.trip_id, "scenario_index": i,
               "type": s.stype.value, "trip_avg_speed_mps": avg}
        rec.update(p.to_dict())
        sp_records.append(rec)
    return trip.trip_id, metrics_rec, sp_records


def _verify_one(args):
    path, truth, cfg_dict = args
    config = PipelineConfig(**cfg_dict)
    trip = ing.read_trip_csv(path)
    scenarios = segment_trip(trip, config)
    got = [s.stype.value for s in scenarios]
    want = [s["type"] for s in truth["scenarios"]]
    seq_ok = got == want
    bounds_ok = seq_ok and all(
        s.k0 == w["k0"] and s.kf == w["kf"]
        for s, w in zip(scenarios, truth["scenarios"]))
    reg_total = reg_hit = 0
    if seq_ok:
        want_regs = {}
        for r in truth["regimes"]:
            want_regs.setdefault(r["scenario_index"], []).append(r)
        for i, s in enumerate(scenarios):
            want_here = want_regs.get(i, [])
            if s.stype not in REGIME_SCOPE:
                reg_total += len(want_here)
                continue
            got_regs = isolate_regimes(s, trip, config)
            reg_total += len(want_here)
            by_type = {r.rtype.value: r for r in got_regs}
            for w in want_here:
                r = by_type.get(w["type"])
                if r and abs(r.k0 - w["k0"]) <= 1 and abs(r.kf - w["kf"]) <= 1:
                    reg_hit += 1
    return seq_ok, bounds_ok, reg_hit, reg_total


# subcommands

def cmd_ingest(args, config):
    files = sorted(globmod.glob(args.input))
    if not files:
        raise DataError(f"no input files match {args.input!r}")
    cmap = (ing.load_column_map(args.schema) if args.schema
            else ing.canonical_column_map())
    out = Path(args.out)
    trips_dir = out / "trips"
    trips_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"files": [], "trips": 0, "dropped_short": 0, "diagnostics": []}
    for path in files:
        frame = ing.parse_telemetry(Path(path), cmap)
        stem = Path(path).stem
        trips, dropped = ing.split_trips(
            frame, min_duration_s=config.min_trip_duration_s,
            vehicle_id=stem, trip_prefix=stem)
        manifest["dropped_short"] += dropped
        manifest["diagnostics"].extend(
            f"{stem}: {d}" for d in frame.diagnostics)
        for trip in trips:
            trip = ing.derive_signals(trip, resample_1hz=config.resample_1hz)
            if args.emit_normalized:
                ing.write_trip_csv(trip, trips_dir / f"{trip.trip_id}.csv")
            manifest["trips"] += 1
        manifest["files"].append({"path": path, "trips": len(trips),
                                  "dropped": dropped})
    with open(out / "manifest.json", "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    config.echo(out)
    print(f"ingest: {manifest['trips']} trips from {len(files)} files "
          f"({manifest['dropped_short']} short runs dropped)")
    return 0


def cmd_segment(args, config):
    files = _trip_files(args.trips)
    results = _pool_map(_segment_one,
                        [(str(p), config.to_dict()) for p in files],
                        args.workers)
    results.sort(key=lambda r: (r[0], r[1]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n_s = write_jsonl(out / "scenarios.jsonl",
                      (rec for r in results for rec in r[2]))
    n_r = write_jsonl(out / "regimes.jsonl",
                      (rec for r in results for rec in r[3]))
    config.echo(out)
    print(f"segment: {n_s} scenarios, {n_r} regimes from {len(files)} trips")
    return 0


def cmd_analyze(args, config):
    files = _trip_files(args.trips)
    scen_rows = read_jsonl(Path(args.segments) / "scenarios.jsonl")
    reg_rows = read_jsonl(Path(args.segments) / "regimes.jsonl")
    by_trip = {}
    for row in scen_rows:
        by_trip.setdefault(row["trip_id"], []).append(row)
    tasks = []
    for p in files:
        tid = p.stem
        tasks.append((str(p), by_trip.get(tid, []), config.to_dict()))
    results = _pool_map(_analyze_one, tasks, args.workers)
    results.sort(key=lambda r: r[0])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "trip_metrics.jsonl", (r[1] for r in results))
    write_jsonl(out / "scenario_params.jsonl",
                (rec for r in results for rec in r[2]))
    # regimes enriched with their scenario type for downstream grouping
    type_of = {(row["trip_id"], i): row["type"]
               for tid, rows in by_trip.items()
               for i, row in enumerate(rows)}
    enriched = []
    for row in sorted(reg_rows, key=lambda r: (r["trip_id"], r["scenario_index"],
                                               r["t0"])):
        row = dict(row)
        row["scenario_type"] = type_of.get((row["trip_id"], row["scenario_index"]))
        enriched.append(row)
    write_jsonl(out / "regime_params.jsonl", enriched)
    config.echo(out)
    print(f"analyze: {len(results)} trips")
    return 0


def cmd_report(args, config):
    mdir = Path(args.metrics)
    metrics = read_jsonl(mdir / "trip_metrics.jsonl")
    scen = read_jsonl(mdir / "scenario_params.jsonl")
    regs = read_jsonl(mdir / "regime_params.jsonl")
    manifest = write_figure_data(metrics, scen, regs, args.out, config)
    config.echo(Path(args.out))
    print(f"report: {len(manifest['families'])} figure families -> {args.out}")
    return 0


def cmd_synth(args, config):
    out = Path(args.out)
    trips_dir = out / "trips"
    trips_dir.mkdir(parents=True, exist_ok=True)
    gcfg = syn.GeneratorConfig(noise_sigma=args.noise_mps)
    plans = []
    truths = []
    for i in range(args.plans):
        seed = args.seed + i
        plan = syn.random_plan(gcfg, seed=seed)
        plans.append(plan)
        trip_id = f"synth-{i:05d}"
        trip, scenarios, regimes, meta = syn.render_trip(
            plan, seed=seed, vehicle_id="synth", trip_id=trip_id)
        ing.write_trip_csv(trip, trips_dir / f"{trip_id}.csv")
        truths.append({
            "trip_id": trip_id,
            "seed": seed,
            "noise_sigma": plan.noise_sigma,
            "cutins": meta["cutins"],
            "scenarios": [{"k0": s.k0, "kf": s.kf, "type": s.stype.value}
                          for s in scenarios],
            "regimes": [{"scenario_index": i_s, "type": r.rtype.value,
                         "k0": r.k0, "kf": r.kf}
                        for i_s, r in regimes],
        })
    syn.save_plans(plans, out / "plans.json")
    write_jsonl(out / "ground_truth.jsonl", truths)
    config.echo(out)
    print(f"synth: {args.plans} trips -> {out}")
    return 0


def cmd_verify(args, config):
    corpus = Path(args.corpus)
    truths = {t["trip_id"]: t
              for t in read_jsonl(corpus / "ground_truth.jsonl")}
    files = _trip_files(corpus / "trips")
    tasks = []
    for p in files:
        tid = p.stem
        if tid not in truths:
            raise DataError(f"no ground truth for trip {tid}")
        tasks.append((str(p), truths[tid], config.to_dict()))
    results = _pool_map(_verify_one, tasks, args.workers)
    n = len(results)
    seq = sum(1 for r in results if r[0])
    bounds = sum(1 for r in results if r[1])
    reg_hit = sum(r[2] for r in results)
    reg_total = sum(r[3] for r in results)
    print(f"verify: {n} trips")
    print(f"  type-sequence accuracy: {seq}/{n} = {seq / n:.4f}")
    print(f"  exact-boundary rate:    {bounds}/{n} = {bounds / n:.4f}")
    if reg_total:
        print(f"  regime boundary hits (max 1 sample off): "
              f"{reg_hit}/{reg_total} = {reg_hit / reg_total:.4f}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="trajseg", description=__doc__)
    parser.add_argument("--config", help="JSON config file (or TRAJSEG_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize raw telemetry into trips")
    p.add_argument("--input", required=True, help="glob of raw CSV files")
    p.add_argument("--schema", help="column-map JSON (default: canonical)")
    p.add_argument("--resample-1hz", action="store_true", default=None)
    p.add_argument("--min-trip-s", type=float, default=None)
    p.add_argument("--emit-normalized", dest="emit_normalized",
                   action="store_true", default=True)
    p.add_argument("--no-emit-normalized", dest="emit_normalized",
                   action="store_false")
    p.add_argument("--out", required=True)

    p = sub.add_parser("segment", help="segment trips into scenarios/regimes")
    p.add_argument("--trips", required=True)
    p.add_argument("--threshold-mps", type=float, default=None)
    p.add_argument("--merge-gap-s", type=float, default=None)
    p.add_argument("--alg1-zero-guard", choices=("literal", "off"), default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("analyze", help="per-trip metric records")
    p.add_argument("--trips", required=True)
    p.add_argument("--segments", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="figure-data CSV exports")
    p.add_argument("--metrics", required=True)
    p.add_argument("--bin-width-mps", type=float, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="synthetic oracle corpus")
    p.add_argument("--plans", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-mps", type=float, default=0.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="oracle round-trip accuracy")
    p.add_argument("--corpus", required=True)
    p.add_argument("--threshold-mps", type=float, default=None)
    p.add_argument("--merge-gap-s", type=float, default=None)
    p.add_argument("--alg1-zero-guard", choices=("literal", "off"), default=None)
    p.add_argument("--workers", type=int, default=1)
    return parser


_CONFIG_FLAGS = {
    "threshold_mps": "threshold_mps",
    "merge_gap_s": "merge_gap_s",
    "alg1_zero_guard": "alg1_zero_guard",
    "bin_width_mps": "bin_width_mps",
    "min_trip_s": "min_trip_duration_s",
    "resample_1hz": "resample_1hz",
}

_COMMANDS = {
    "ingest": cmd_ingest, "segment": cmd_segment, "analyze": cmd_analyze,
    "report": cmd_report, "synth": cmd_synth, "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        overrides = {}
        for flag, key in _CONFIG_FLAGS.items():
            if getattr(args, flag, None) is not None:
                overrides[key] = getattr(args, flag)
        config = load_config(path=args.config, overrides=overrides)
        return _COMMANDS[args.command](args, config)
    except TrajsegError as e:
        report = {"error": {"type": type(e).__name__, "message": str(e),
                            "exit_code": e.exit_code}}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
