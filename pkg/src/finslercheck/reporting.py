"""Structured run reports: versioned JSON schema and a CSV twin.

JSON and CSV encode the same check records field-for-field.  Numbers are
serialized with 17 significant digits; reports are deterministic for a
fixed (config, seed, scheme) apart from the ``generated_at`` timestamp,
which is excluded from the determinism contract.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import __version__

SCHEMA_VERSION = 1


@dataclass
class CheckRecord:
    name: str
    max_residual: float = None
    tolerance: float = None
    passed: bool = True
    sample_count: int = 0
    seed: int = None
    notes: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "name": self.name,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "notes": self.notes,
        }


@dataclass
class Report:
    command: str
    config: dict
    checks: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    data: dict = None
    generated_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def add(self, record):
        self.checks.append(record)
        return record

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def as_dict(self):
        out = {
            "schema": SCHEMA_VERSION,
            "tool": f"finslercheck {__version__}",
            "generated_at": self.generated_at,
            "command": self.command,
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "verdicts": self.verdicts,
            "pass": self.passed,
        }
        if self.data is not None:
            out["data"] = self.data
        return out

    def to_json(self):
        return dumps(self.as_dict()) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        fields = ["name", "max_residual", "tolerance", "pass",
                  "sample_count", "seed", "notes"]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fields)
        for c in self.checks:
            d = c.as_dict()
            writer.writerow([
                d["name"], _fmt_number(d["max_residual"]),
                _fmt_number(d["tolerance"]), str(d["pass"]).lower(),
                d["sample_count"],
                "" if d["seed"] is None else d["seed"],
                dumps(d["notes"]),
            ])
        return buf.getvalue()


def _fmt_number(v):
    if v is None:
        return ""
    return format(float(v), ".17g")


def dumps(obj, indent=2):
    """JSON with floats at 17 significant digits, insertion-ordered keys."""
    out = []
    _write(obj, out, indent, 0)
    return "".join(out)


def _write(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format(obj, ".17g") if math.isfinite(obj)
                   else json.dumps(str(obj)))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(k))}: ")
            _write(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(closing + "}")
    elif isinstance(obj, (list, tuple)):
        if not len(obj):
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _write(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(closing + "]")
    else:
        # numpy scalars and similar
        try:
            _write(float(obj), out, indent, level)
        except (TypeError, ValueError):
            out.append(json.dumps(str(obj)))
