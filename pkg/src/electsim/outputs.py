"""Atomic writers and readers for run outputs (runs.csv, runs.jsonl, summary.json, manifest.json)."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

from .errors import ElectsimError

TEXT_COLUMNS = ("scenario_id", "policy")


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([_cell(rec[c]) for c in columns])
    return buf.getvalue()


def records_to_jsonl(records, columns) -> str:
    return "".join(json.dumps({c: rec[c] for c in columns}) + "\n" for rec in records)


def _parse(col, text):
    if col in TEXT_COLUMNS:
        return text
    if col == "seed" or col.startswith("seats_"):
        return int(text)
    return float(text)


def read_runs_csv(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [{k: _parse(k, v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def write_outputs(records, summary, manifest, directory, columns, formats=("csv",)) -> list[Path]:
    """Write every output to a temp file first, then rename them all into place.

    If anything fails, no temp file is left behind and no destination file is
    touched.
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ElectsimError(f"cannot create output directory {directory}: {exc}") from exc
    payloads = {}
    if "csv" in formats:
        payloads["runs.csv"] = records_to_csv(records, columns)
    if "jsonl" in formats:
        payloads["runs.jsonl"] = records_to_jsonl(records, columns)
    payloads["summary.json"] = _dumps(summary)
    payloads["manifest.json"] = _dumps(manifest)

    staged = []
    try:
        for name, text in payloads.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=directory)
            staged.append((tmp, directory / name))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        for tmp, dest in staged:
            os.replace(tmp, dest)
    except OSError as exc:
        for tmp, _ in staged:
            try:
                os.unlink(tmp)
            except FileNotFoundError:
                pass
        raise ElectsimError(f"failed writing outputs to {directory}: {exc}") from exc
    return [dest for _, dest in staged]
