"""Report records and deterministic serialization.

Every check in the library returns a ``VerificationReport`` carrying a
pass flag, the worst margin seen and a witness for it.  Scenario runs
assemble these into a single JSON document whose bytes depend only on
the effective config and seed: keys are sorted, floats use repr
round-tripping, and no timestamps enter the payload.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["VerificationReport", "config_hash", "dump_report", "table", "write_csv"]

SCHEMA_VERSION = 1


@dataclass
class VerificationReport:
    name: str
    passed: bool
    worst_margin: float = float("inf")
    witness: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    items_checked: int = 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "worst_margin": _jsonable(self.worst_margin),
            "witness": _jsonable(self.witness),
            "details": _jsonable(self.details),
            "items_checked": int(self.items_checked),
        }

    def require(self) -> "VerificationReport":
        if not self.passed:
            raise AssertionError(f"verification {self.name!r} failed: {self.to_dict()}")
        return self


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if v != v:
            return "nan"
        if v == float("inf"):
            return "inf"
        if v == float("-inf"):
            return "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(payload: dict) -> bytes:
    return json.dumps(_jsonable(payload), sort_keys=True, separators=(",", ":")).encode()


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config)).hexdigest()


def table(columns: list[str], rows: list[list]) -> dict:
    return {"columns": list(columns), "rows": [_jsonable(list(r)) for r in rows]}


def dump_report(report: dict) -> bytes:
    return json.dumps(_jsonable(report), sort_keys=True, indent=1).encode()


def write_csv(path, tbl: dict) -> None:
    """Fixed column order, 17 significant digits for reproducibility."""
    lines = [",".join(tbl["columns"])]
    for row in tbl["rows"]:
        cells = []
        for v in row:
            if isinstance(v, float):
                cells.append(format(v, ".17g"))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
