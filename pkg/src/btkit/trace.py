"""Trace events recorded while a tree executes."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Optional

from .model import Status, status_from_name

ENTER = "enter"
EXIT = "exit"
HALTED = "halted"


@dataclass(frozen=True)
class TraceEvent:
    """One record of a node entering, exiting, or being halted.

    ``status`` is set on exit events only; ``delta`` lists blackboard writes
    performed while the node ran, as (key, old, new) with old ``None`` when
    the key was previously absent.
    """

    tick: int
    node: str
    phase: str
    status: Optional[Status] = None
    delta: Optional[tuple[tuple[str, Any, Any], ...]] = None

    def to_obj(self) -> dict[str, Any]:
        obj: dict[str, Any] = {"tick": self.tick, "node": self.node, "phase": self.phase}
        if self.status is not None:
            obj["status"] = self.status.value
        if self.delta:
            obj["delta"] = [{"key": k, "old": old, "new": new} for k, old, new in self.delta]
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True)

    @classmethod
    def from_obj(cls, obj: dict[str, Any]) -> "TraceEvent":
        delta = None
        if "delta" in obj:
            delta = tuple((d["key"], d.get("old"), d.get("new")) for d in obj["delta"])
        status = status_from_name(obj["status"]) if "status" in obj else None
        return cls(tick=obj["tick"], node=obj["node"], phase=obj["phase"], status=status, delta=delta)


def dump_trace(events: list[TraceEvent]) -> str:
    """One JSON object per line, in event order."""
    return "\n".join(e.to_json() for e in events) + ("\n" if events else "")
