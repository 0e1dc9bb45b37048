"""Serialization of run records: line-delimited metrics, probes, summary.

Output is byte-deterministic for a fixed record: keys are sorted, floats
use Python's shortest-roundtrip repr, and line endings are fixed to \\n.
"""

from __future__ import annotations

import json
from pathlib import Path

from .runner import RunRecord

METRICS_FILE = "metrics.jsonl"
PROBES_FILE = "probes.jsonl"
SUMMARY_FILE = "summary.json"


def _dump_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def emit_metrics(record: RunRecord, out_dir) -> dict:
    """Write metrics.jsonl, probes.jsonl, and summary.json under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "metrics": out / METRICS_FILE,
        "probes": out / PROBES_FILE,
        "summary": out / SUMMARY_FILE,
    }
    with paths["metrics"].open("w", encoding="utf-8", newline="\n") as fh:
        for row in record.rows:
            fh.write(_dump_line(row))
    with paths["probes"].open("w", encoding="utf-8", newline="\n") as fh:
        for row in record.probes:
            fh.write(_dump_line(row))
    with paths["summary"].open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(record.summary, sort_keys=True, indent=2) + "\n")
    return paths


def read_jsonl(path) -> list:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
