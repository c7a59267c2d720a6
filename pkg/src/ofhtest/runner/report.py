"""Campaign reports.

One run produces one directory: a canonical machine-readable document, a
human table in the catalog's own style, and per-case evidence files. The
document separates everything inherently volatile (run id, wall-clock
stamps) under a single key so that two runs of the same profile, seed, and
selection can be compared byte for byte on the rest. Durations inside case
records are simulated nanoseconds, which repeat exactly; wall seconds live
with the volatile data.
"""

from __future__ import annotations

import json
import platform
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy

REPORT_FORMAT = 1
STRUCTURED_NAME = "report.json"
HUMAN_NAME = "report.txt"


@dataclass
class CaseRecord:
    case_id: str
    title: str
    plane: str
    category: str
    expected: str
    verdict: str
    sim_duration_ns: int
    metrics: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    blocked_reason: str | None = None
    evidence: dict[str, bytes] = field(default_factory=dict)

    def to_doc(self) -> dict:
        return {
            "id": self.case_id,
            "title": self.title,
            "plane": self.plane,
            "category": self.category,
            "expected": self.expected,
            "verdict": self.verdict,
            "sim_duration_ns": self.sim_duration_ns,
            "metrics": self.metrics,
            "notes": list(self.notes),
            "blocked_reason": self.blocked_reason,
            "evidence": [f"evidence/{self.case_id}/{name}" for name in sorted(self.evidence)],
        }


@dataclass
class TestReport:
    profile_doc: dict
    records: list[CaseRecord]
    run_id: str
    started_utc: str
    finished_utc: str
    wall_seconds: float

    def summary(self) -> dict:
        counts = {"PASS": 0, "FAIL": 0, "BLOCKED": 0}
        for record in self.records:
            counts[record.verdict] += 1
        counts["total"] = len(self.records)
        return counts

    def to_doc(self) -> dict:
        return {
            "report_format": REPORT_FORMAT,
            "profile": self.profile_doc,
            "summary": self.summary(),
            "cases": [record.to_doc() for record in self.records],
            "environment": {
                "python": platform.python_version(),
                "numpy": numpy.__version__,
                "platform": platform.system(),
            },
            "volatile": {
                "run_id": self.run_id,
                "started_utc": self.started_utc,
                "finished_utc": self.finished_utc,
                "wall_seconds": self.wall_seconds,
            },
        }


def new_run_id() -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    return f"run-{stamp}-{uuid.uuid4().hex[:8]}"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def render_structured(doc: dict) -> bytes:
    """Canonical bytes: stable key order, stable layout, trailing newline.
    Rendering a parsed document again reproduces the bytes exactly."""
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()


def stable_body(doc: dict) -> bytes:
    """The repeatable portion: everything except per-run identity and the
    host fingerprint."""
    body = {k: v for k, v in doc.items() if k not in ("volatile", "environment")}
    return render_structured(body)


def render_human(doc: dict) -> str:
    """The catalog-shaped table: id, description, verdict."""
    cases = doc["cases"]
    id_width = max([len(c["id"]) for c in cases] + [len("Test case")])
    title_width = max([len(c["title"]) for c in cases] + [len("Description")])

    lines = []
    volatile = doc.get("volatile", {})
    if volatile.get("run_id"):
        lines.append(f"Run: {volatile['run_id']}")
    lines.append(f"Profile: {doc['profile'].get('name', '?')}  seed={doc['profile'].get('seed', '?')}")
    lines.append("")
    lines.append(f"{'Test case':<{id_width}}  {'Description':<{title_width}}  Verdict")
    lines.append(f"{'-' * id_width}  {'-' * title_width}  -------")
    for case in cases:
        verdict = case["verdict"].capitalize()
        lines.append(f"{case['id']:<{id_width}}  {case['title']:<{title_width}}  {verdict}")
        if case["verdict"] == "BLOCKED" and case.get("blocked_reason"):
            lines.append(f"{'':<{id_width}}  > {case['blocked_reason']}")
    lines.append("")
    summary = doc["summary"]
    lines.append(
        f"{summary['total']} cases: {summary['PASS']} pass, "
        f"{summary['FAIL']} fail, {summary['BLOCKED']} blocked"
    )
    return "\n".join(lines) + "\n"


def exit_code_for(doc: dict) -> int:
    summary = doc["summary"]
    return 0 if summary["FAIL"] == 0 and summary["BLOCKED"] == 0 else 1


def write_run_dir(report: TestReport, out_root: str | Path) -> Path:
    """Persist one run: structured + human reports and the evidence tree."""
    run_dir = Path(out_root) / report.run_id
    run_dir.mkdir(parents=True, exist_ok=False)
    doc = report.to_doc()
    (run_dir / STRUCTURED_NAME).write_bytes(render_structured(doc))
    (run_dir / HUMAN_NAME).write_text(render_human(doc))
    for record in report.records:
        if not record.evidence:
            continue
        case_dir = run_dir / "evidence" / record.case_id
        case_dir.mkdir(parents=True, exist_ok=True)
        for name, blob in record.evidence.items():
            (case_dir / name).write_bytes(blob)
    return run_dir


def load_report(run_dir: str | Path) -> dict:
    path = Path(run_dir) / STRUCTURED_NAME
    return json.loads(path.read_text())
