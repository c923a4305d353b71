"""Flat, deterministic experiment reports.

Every inequality instance becomes one row {table, probe, scale, lhs, rhs,
verdict}. The wall-clock time is kept on the object but left out of the
serialized report so that equal seeds give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

COLUMNS = ("table", "probe", "scale", "lhs", "rhs", "verdict")


def plain(value):
    """JSON-safe scalar: floats stay floats, Fractions and non-finite values become strings."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(str(plain(v)) for v in np.asarray(value, dtype=object).ravel()) + "]"
    return str(value)


@dataclass
class Report:
    experiment: str
    command: str
    seed: int
    rows: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    started: float = field(default_factory=time.perf_counter)
    wall_clock: float | None = None

    def add(self, table: str, probe, scale, lhs, rhs, verdict) -> bool:
        verdict = bool(verdict)
        self.rows.append({"table": table, "probe": plain(probe), "scale": plain(scale),
                          "lhs": plain(lhs), "rhs": plain(rhs), "verdict": verdict})
        return verdict

    def note(self, key: str, value) -> None:
        self.info[key] = plain(value)

    @property
    def failures(self) -> list:
        return [r for r in self.rows if not r["verdict"]]

    @property
    def passed(self) -> bool:
        return not self.failures

    def finish(self) -> "Report":
        self.wall_clock = time.perf_counter() - self.started
        return self

    def summary(self) -> dict:
        tables = sorted({r["table"] for r in self.rows})
        return {
            "passed": self.passed,
            "rows": len(self.rows),
            "failed_rows": len(self.failures),
            "failed_tables": sorted({r["table"] for r in self.failures}),
            "tables": tables,
        }

    def to_json(self) -> str:
        doc = {"experiment": self.experiment, "command": self.command, "seed": self.seed,
               "info": self.info, "summary": self.summary(), "rows": self.rows}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        return buf.getvalue()

    def render(self, fmt: str = "json") -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}")
