"""Reports: rows with error estimates, tolerance checks and deterministic output."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = ("Ns", "Nt", "value_re", "value_im", "residual", "error_estimate", "ratio")


def encode(value):
    """JSON-ready form of numbers and arrays (complex as ``{re, im}``)."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    arr = np.asarray(value)
    if arr.ndim == 0:
        v = arr.item()
        if isinstance(v, complex) or np.iscomplexobj(arr):
            return {"re": _float(v.real), "im": _float(v.imag)}
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            return int(v)
        return _float(v)
    if np.iscomplexobj(arr):
        return {"re": [encode(x) for x in arr.real.tolist()],
                "im": [encode(x) for x in arr.imag.tolist()]}
    return [encode(x) for x in arr.tolist()]


def _float(v):
    v = float(v)
    return v if math.isfinite(v) else None


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    comparison: str = "<="        # "<=", ">=", "in"
    upper: float | None = None

    @property
    def passed(self) -> bool:
        if self.value is None or not math.isfinite(self.value):
            return False
        if self.comparison == "<=":
            return self.value <= self.tolerance
        if self.comparison == ">=":
            return self.value >= self.tolerance
        return self.tolerance <= self.value <= self.upper

    def to_dict(self):
        out = {"name": self.name, "value": _float(self.value), "tolerance": self.tolerance,
               "comparison": self.comparison, "passed": self.passed}
        if self.upper is not None:
            out["upper"] = self.upper
        return out


@dataclass
class Report:
    experiment: str
    config_hash: str
    code_version: str
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    wall_clock: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, timing: bool = False) -> dict:
        out = {"experiment": self.experiment,
               "provenance": {"config_hash": self.config_hash, "code_version": self.code_version},
               "passed": self.passed,
               "checks": [c.to_dict() for c in self.checks],
               "rows": encode(self.rows),
               "meta": encode(self.meta)}
        if timing:
            out["wall_clock_s"] = self.wall_clock
        return out

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            val = complex(row.get("value", float("nan")))
            w.writerow([row.get("Ns", ""), row.get("Nt", ""), repr(val.real), repr(val.imag),
                        _cell(row.get("residual")), _cell(row.get("error_estimate")),
                        _cell(row.get("ratio"))])
        return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    return repr(float(v))


def add_ratios(rows, key="residual"):
    """Convergence ratios ``r_{i-1} / r_i``; only filled in with three or more levels."""
    for row in rows:
        row["ratio"] = None
    if len(rows) < 3:
        return rows
    for prev, row in zip(rows, rows[1:]):
        a, b = prev.get(key), row.get(key)
        if a is not None and b not in (None, 0.0) and math.isfinite(a) and math.isfinite(b):
            row["ratio"] = float(a / b)
    return rows


def emit(report: Report, out_dir, fmt: str = "json", timing: bool = False) -> list:
    """Write ``report.json`` and/or ``report.csv`` into ``out_dir``."""
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir!r}: {exc}") from None
    written = []
    if fmt in ("json", "both"):
        path = os.path.join(out_dir, "report.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report.to_json(timing))
        written.append(path)
    if fmt in ("csv", "both"):
        path = os.path.join(out_dir, "report.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
        written.append(path)
    return written
