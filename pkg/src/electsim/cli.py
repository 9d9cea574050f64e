"""Command-line entry point: ``electsim {sweep,scenario,match,replay}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import ElectsimError
from .harness import (
    ObservedResult,
    csv_columns,
    find_closest_scenario,
    run_manifest,
    run_setting,
    run_sweep,
    summarize,
)
from .outputs import records_to_csv, write_outputs
from .population import write_electorate_csv
from .tally import write_score_table

log = logging.getLogger("electsim")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="JSON configuration file (or a manifest.json from an earlier run)")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--workers", type=int, help="worker processes for sweeps")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="electsim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="run every setting x run and write runs.csv, summary.json, manifest.json")
    sc = sub.add_parser("scenario", parents=[common], help="one scenario with a per-district dump")
    sc.add_argument("--setting", type=int, default=0)
    sc.add_argument("--run", type=int, default=0)
    m = sub.add_parser("match", parents=[common], help="find the simulated scenario closest to an observed result")
    m.add_argument("--observed", required=True, help="JSON with vote_shares, seat_counts, total_seats")
    m.add_argument("--pool-size", type=int)
    r = sub.add_parser("replay", parents=[common], help="re-run one (setting, run) and print its rows")
    r.add_argument("--setting", type=int, required=True)
    r.add_argument("--run", type=int, required=True)
    return p


def _resolve(args):
    rc = load_config(args.config)
    sweep = rc.sweep.with_overrides(seed=args.seed)
    workers = args.workers if args.workers is not None else rc.workers
    if workers < 1:
        raise ElectsimError("--workers must be at least 1")
    out = Path(args.out if args.out is not None else rc.out_dir)
    full = {**rc.to_dict(), **sweep.to_dict(), "workers": workers, "out_dir": str(out)}
    return sweep, workers, out, rc.formats, full


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def cmd_sweep(args) -> int:
    sweep, workers, out, formats, full = _resolve(args)
    progress = (lambda sid: log.info("finished run %s", sid)) if args.verbose else None
    result = run_sweep(sweep, workers=workers, progress=progress)
    manifest = run_manifest(full, result.scenarios)
    paths = write_outputs(result.records, result.summary, manifest, out, csv_columns(sweep), formats)
    for p in paths:
        print(p)
    return 0


def cmd_scenario(args) -> int:
    sweep, _, out, formats, full = _resolve(args)
    res = run_setting(sweep, args.setting, args.run)
    records = res.records(sweep)
    dump = out / f"scenario_{args.setting}-{args.run}"
    dump.mkdir(parents=True, exist_ok=True)
    write_electorate_csv(res.scenario.electorate, dump / "electorate.csv")
    reports = {}
    for policy in sweep.policies:
        write_score_table(res.outcomes[policy], dump / f"districts_{policy}.csv")
        _write_json(dump / f"outcome_{policy}.json", res.outcomes[policy].to_dict())
        reports[policy] = res.reports[policy].to_dict()
    _write_json(dump / "reports.json", reports)
    write_outputs(records, summarize(records, sweep), run_manifest(full, [res.manifest()]), out, csv_columns(sweep), formats)
    sys.stdout.write(records_to_csv(records, csv_columns(sweep)))
    return 0


def cmd_match(args) -> int:
    sweep, _, out, _, full = _resolve(args)
    path = Path(args.observed)
    if not path.is_file():
        raise ElectsimError(f"observed file not found: {path}")
    try:
        observed = ObservedResult.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise ElectsimError(f"observed file {path} is not valid JSON: {exc}") from exc
    result = find_closest_scenario(observed, sweep, args.pool_size)
    payload = {
        "setting": result.setting,
        "run": result.run,
        "seed": result.seed,
        "distance": result.distance,
        "vote_shares": result.vote_shares,
        "seat_counts": result.seat_counts,
        "scenario": result.manifest,
        "observed": {"vote_shares": list(observed.vote_shares), "seat_counts": list(observed.seat_counts), "total_seats": observed.total_seats},
        "config": full,
    }
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "match.json", payload)
    print(json.dumps({k: payload[k] for k in ("setting", "run", "seed", "distance", "vote_shares", "seat_counts")}))
    return 0


def cmd_replay(args) -> int:
    sweep, _, out, _, _ = _resolve(args)
    res = run_setting(sweep, args.setting, args.run)
    sys.stdout.write(records_to_csv(res.records(sweep), csv_columns(sweep)))
    return 0


COMMANDS = {"sweep": cmd_sweep, "scenario": cmd_scenario, "match": cmd_match, "replay": cmd_replay}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ElectsimError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
