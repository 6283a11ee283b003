import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

SCHEMA = "dgg-kit/1"

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_FALSIFIED = "certificate falsified"
STATUS_CUTOFF_REJECTED = "cutoff rejected"

# worse statuses win when reports are merged
STATUS_RANK = {STATUS_PASS: 0, STATUS_FAIL: 1, STATUS_CUTOFF_REJECTED: 2, STATUS_FALSIFIED: 3}


@dataclass
class Margin:
    """
    One evaluated inequality LHS <= RHS.

    margin is RHS - LHS (nonnegative means the inequality holds); `passed`
    applies the owning check's tolerance rule.
    """
    label: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    context: Dict[str, Any] = field(default_factory=dict)


@dataclass
class VerificationReport:
    check: str
    params: Dict[str, Any] = field(default_factory=dict)
    grid: Dict[str, Any] = field(default_factory=dict)
    entries: List[Margin] = field(default_factory=list)
    status: Optional[str] = None
    notes: List[str] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)

    def add(
        self,
        label: str,
        lhs: float,
        rhs: float,
        passed: Optional[bool] = None,
        **context: Any,
    ) -> Margin:
        margin = rhs - lhs
        if math.isnan(margin):
            # inf - inf: both sides infinite, nothing violated
            margin = 0.0 if lhs == rhs else -math.inf
        entry = Margin(
            label=label,
            lhs=float(lhs),
            rhs=float(rhs),
            margin=float(margin),
            passed=(margin >= 0) if passed is None else bool(passed),
            context=context,
        )
        self.entries.append(entry)
        return entry

    @property
    def passed(self) -> bool:
        if self.status is not None and self.status != STATUS_PASS:
            return False
        return all(e.passed for e in self.entries)

    @property
    def margins(self) -> List[float]:
        return [e.margin for e in self.entries]

    @property
    def worst(self) -> Optional[Margin]:
        """Entry with the smallest margin; the first one wins ties."""
        worst: Optional[Margin] = None
        for e in self.entries:
            if worst is None or e.margin < worst.margin:
                worst = e
        return worst

    @property
    def failures(self) -> List[Margin]:
        return [e for e in self.entries if not e.passed]

    def effective_status(self) -> str:
        if self.status is not None:
            return self.status
        return STATUS_PASS if self.passed else STATUS_FAIL

    def to_dict(self) -> Dict[str, Any]:
        worst = self.worst
        worst_dict: Optional[Dict[str, Any]] = None
        if worst is not None:
            worst_dict = {
                "label": worst.label,
                "t": worst.context.get("t"),
                "value": worst.margin,
            }
        return _jsonable({
            "schema": SCHEMA,
            "check": self.check,
            "params": self.params,
            "grid": self.grid,
            "margins": self.margins,
            "worst": worst_dict,
            "pass": self.passed,
            "status": self.effective_status(),
            "notes": self.notes,
            "entries": [
                {
                    "label": e.label,
                    "lhs": e.lhs,
                    "rhs": e.rhs,
                    "margin": e.margin,
                    "passed": e.passed,
                    **e.context,
                }
                for e in self.entries
            ],
            **({"extra": self.extra} if self.extra else {}),
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        """One row per entry; context keys become extra columns (sorted)."""
        context_keys = sorted({k for e in self.entries for k in e.context})
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["label", "lhs", "rhs", "margin", "passed", *context_keys])
        for e in self.entries:
            writer.writerow([
                e.label, _fmt(e.lhs), _fmt(e.rhs), _fmt(e.margin), e.passed,
                *(_fmt(e.context.get(k, "")) for k in context_keys),
            ])
        return buffer.getvalue()


def _fmt(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value


def _jsonable(value: Any) -> Any:
    """
    Recursively convert numpy scalars/arrays and non-finite floats into
    JSON-safe values ("inf", "-inf", "nan" strings).
    """
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist") and not isinstance(value, (str, bytes)):
        return _jsonable(value.tolist())
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return str(value)


def _dedupe_by_label(entries: List[Margin]) -> List[Margin]:
    """
    For each label keep only the entry with the smallest margin. If margins
    tie, keep the first one seen. Output follows first-seen order.
    """
    best: Dict[str, Margin] = {}
    for e in entries:
        existing = best.get(e.label)
        if existing is None or e.margin < existing.margin:
            best[e.label] = e
    return list(best.values())


def merge_reports(
    reports: Iterable[VerificationReport],
    check: Optional[str] = None,
) -> VerificationReport:
    """
    Merge reports in the given order (grid order for per-t pieces).

    Entries sharing a label collapse to the worst one; params and grid of
    the first report are kept; the worst status wins.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to merge")
    merged = VerificationReport(
        check=check or reports[0].check,
        params=dict(reports[0].params),
        grid=dict(reports[0].grid),
    )
    entries: List[Margin] = []
    statuses = []
    for r in reports:
        entries.extend(r.entries)
        merged.notes.extend(n for n in r.notes if n not in merged.notes)
        if r.status is not None:
            statuses.append(r.status)
    merged.entries = _dedupe_by_label(entries)
    if statuses:
        merged.status = max(statuses, key=lambda s: STATUS_RANK.get(s, 1))
    return merged
