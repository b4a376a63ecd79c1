"""Named pass/fail check lists with signed margins."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"


@dataclass
class CheckItem:
    """One named condition.

    ``value`` is the measured quantity (a residual norm, an eigenvalue, a
    radius) and ``bound`` the threshold it is compared against. ``margin``
    is signed so that negative numbers are violations: ``bound - value`` for
    upper bounds and ``value - bound`` for lower bounds.
    """

    name: str
    status: str
    margin: float
    value: float | None = None
    bound: float | None = None
    witness: dict[str, Any] | None = None
    note: str | None = None

    def to_dict(self):
        out = {"name": self.name, "status": self.status, "margin": float(self.margin)}
        if self.value is not None:
            out["value"] = float(self.value)
        if self.bound is not None:
            out["bound"] = float(self.bound)
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        if self.note is not None:
            out["note"] = self.note
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(
            name=data["name"],
            status=data["status"],
            margin=data["margin"],
            value=data.get("value"),
            bound=data.get("bound"),
            witness=data.get("witness"),
            note=data.get("note"),
        )


@dataclass
class CheckReport:
    title: str
    items: list[CheckItem] = field(default_factory=list)
    options_used: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def overall(self):
        active = [it for it in self.items if it.status != SKIPPED]
        return PASS if all(it.status == PASS for it in active) else FAIL

    @property
    def passed(self):
        return self.overall == PASS

    def upper(self, name, value, bound, witness=None, note=None):
        """Record ``value <= bound``."""
        value = float(value)
        margin = bound - value
        self.items.append(CheckItem(name, PASS if margin >= 0 else FAIL, margin,
                                    value, bound, witness, note))
        return self.items[-1]

    def lower(self, name, value, bound, witness=None, note=None):
        """Record ``value >= bound``."""
        value = float(value)
        margin = value - bound
        self.items.append(CheckItem(name, PASS if margin >= 0 else FAIL, margin,
                                    value, bound, witness, note))
        return self.items[-1]

    def skip(self, name, note):
        self.items.append(CheckItem(name, SKIPPED, 0.0, note=note))
        return self.items[-1]

    def extend(self, other: "CheckReport", prefix=""):
        for it in other.items:
            self.items.append(CheckItem(prefix + it.name, it.status, it.margin, it.value,
                                        it.bound, it.witness, it.note))
        self.notes.extend(other.notes)

    def item(self, name):
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    def failures(self):
        return [it for it in self.items if it.status == FAIL]

    def worst_margin(self):
        active = [it.margin for it in self.items if it.status != SKIPPED]
        return min(active) if active else 0.0

    def to_dict(self):
        return {
            "title": self.title,
            "overall": self.overall,
            "worst_margin": float(self.worst_margin()),
            "items": [it.to_dict() for it in self.items],
            "options_used": _jsonable(self.options_used),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data):
        rep = cls(data["title"], [CheckItem.from_dict(d) for d in data["items"]],
                  dict(data.get("options_used", {})), list(data.get("notes", [])))
        return rep

    def to_text(self):
        lines = [f"{self.title}: {self.overall} (worst margin {self.worst_margin():.3e})"]
        for it in self.items:
            val = "" if it.value is None else f" value={it.value:.3e}"
            lines.append(f"  [{it.status:>7}] {it.name}: margin={it.margin:.3e}{val}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        return "\n".join(lines)

    def __str__(self):
        return self.to_text()


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
