"""CSV and JSON output for experiment records."""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import subprocess
import typing
from pathlib import Path

from ..sketch import RNG_ID
from .experiment import ExperimentRecord

_HINTS = typing.get_type_hints(ExperimentRecord)


def build_stamp() -> str:
    """``git describe``-style identifier of the source tree, or the package version."""
    from .. import __version__

    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(name: str, text: str):
    if text == "":
        return None
    hint = _HINTS[name]
    if hint is str:
        return text
    if int in typing.get_args(hint) or hint is int:
        return int(text)
    return float(text)


def write_records_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ExperimentRecord.columns())
        for rec in records:
            w.writerow([_fmt(getattr(rec, c)) for c in ExperimentRecord.columns()])


def read_records_csv(path) -> list[ExperimentRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ExperimentRecord.columns():
            raise ValueError(f"{path}: unexpected columns {header}")
        return [ExperimentRecord(**{c: _parse(c, v) for c, v in zip(header, row)}) for row in reader]


def emit_report(records, out_dir, config: dict | None = None, failures=(), stem: str = "records"):
    """Write ``<stem>.csv`` (one row per record) and ``<stem>.json`` (config
    echo, RNG identifier, build stamp, records, failures) into ``out_dir``.

    Returns the two paths.  I/O errors are re-raised naming the path.
    """
    records = list(records)
    if not records:
        raise ValueError("emit_report needs at least one record")
    out_dir = Path(out_dir)
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_records_csv(csv_path, records)
        with open(json_path, "w") as fh:
            json.dump({
                "config": config,
                "rng": RNG_ID,
                "build": build_stamp(),
                "columns": ExperimentRecord.columns(),
                "records": [dataclasses.asdict(r) for r in records],
                "failures": list(failures),
            }, fh, indent=2, default=str)
    except OSError as exc:
        raise OSError(f"could not write report to {os.fspath(out_dir)}: {exc}") from exc
    return csv_path, json_path
