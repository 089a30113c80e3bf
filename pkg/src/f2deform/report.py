"""Machine-readable verification report.

Everything except the ``wall_time`` fields is a deterministic function of the
inputs: checks are sorted by id and JSON keys are sorted.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

SCHEMA_VERSION = "1"
STATUSES = ("PASS", "FAIL", "SOLVABLE", "OBSTRUCTED", "WARN")


@dataclass
class Check:
    id: str
    status: str
    details: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def failed(self) -> bool:
        return self.status == "FAIL"

    def to_json(self) -> dict:
        return {"id": self.id, "status": self.status, "details": self.details,
                "wall_time": round(self.wall_time, 4)}


@dataclass
class VerificationReport:
    tool_version: str
    command: str = ""
    checks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def add(self, check_id: str, status, details: dict | None = None,
            wall_time: float = 0.0) -> Check:
        if isinstance(status, bool):
            status = "PASS" if status else "FAIL"
        c = Check(check_id, status, details or {}, wall_time)
        self.checks.append(c)
        return c

    @contextmanager
    def timed(self, check_id: str):
        """Collect status/details inside the block; timing is filled in."""
        box = {"status": "PASS", "details": {}}
        start = time.perf_counter()
        yield box
        self.add(check_id, box["status"], box["details"], time.perf_counter() - start)

    def merge(self, other: "VerificationReport") -> None:
        self.checks.extend(other.checks)
        self.warnings.extend(other.warnings)

    def get(self, check_id: str) -> Check | None:
        return next((c for c in self.checks if c.id == check_id), None)

    @property
    def failed(self) -> list:
        return [c for c in self.checks if c.failed]

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool_version": self.tool_version,
            "command": self.command,
            "checks": [c.to_json() for c in sorted(self.checks, key=lambda c: c.id)],
            "warnings": sorted(self.warnings),
            "failed": sorted(c.id for c in self.failed),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def summary_lines(self) -> list:
        lines = [f"{c.status:<10} {c.id}" for c in sorted(self.checks, key=lambda c: c.id)]
        lines += [f"WARNING    {w}" for w in sorted(self.warnings)]
        return lines


def strip_timing(data):
    """Drop ``wall_time`` fields recursively (for reproducibility comparisons)."""
    if isinstance(data, dict):
        return {k: strip_timing(v) for k, v in data.items() if k != "wall_time"}
    if isinstance(data, list):
        return [strip_timing(x) for x in data]
    return data
