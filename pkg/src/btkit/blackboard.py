"""Typed key-value store shared by the nodes of a running tree."""

from __future__ import annotations

from typing import Any, Optional

from .errors import BlackboardError, ContractViolationError
from .model import Tree

_MISSING = object()


class Blackboard:
    """Schema-checked store. Reads of absent keys raise; writes must match the
    declared type and only declared keys may be written."""

    def __init__(
        self,
        schema: Optional[dict[str, str]] = None,
        values: Optional[dict[str, Any]] = None,
    ):
        self.schema = dict(schema or {})
        self.entries: dict[str, Any] = {}
        self._delta: Optional[list[tuple[str, Any, Any]]] = None
        for key, value in (values or {}).items():
            self.set(key, value)

    @classmethod
    def from_tree(cls, tree: Tree, initial: Optional[dict[str, Any]] = None) -> "Blackboard":
        """Blackboard seeded from the tree's schema defaults, then ``initial``."""
        bb = cls(tree.blackboard_schema)
        for key, value in tree.blackboard_defaults.items():
            bb.set(key, value)
        for key, value in (initial or {}).items():
            bb.set(key, value)
        return bb

    def has(self, key: str) -> bool:
        return key in self.entries

    def get(self, key: str) -> Any:
        if key not in self.entries:
            raise BlackboardError(f"blackboard key {key!r} is absent", key=key)
        value = self.entries[key]
        return list(value) if isinstance(value, list) else value

    def set(self, key: str, value: Any) -> None:
        checked = self._check(key, value)
        old = self.entries.get(key, _MISSING)
        self.entries[key] = checked
        if self._delta is not None:
            self._delta.append((key, None if old is _MISSING else old, checked))

    def push(self, key: str, item: str) -> None:
        """Append to a string-list key, creating the list if the key is absent."""
        if self.schema.get(key) != "string_list":
            raise BlackboardError(f"key {key!r} is not declared as string_list", key=key)
        if not isinstance(item, str):
            raise BlackboardError(f"can only push strings onto {key!r}", key=key)
        current = self.entries.get(key)
        new = (list(current) if current else []) + [item]
        old = self.entries.get(key, _MISSING)
        self.entries[key] = new
        if self._delta is not None:
            self._delta.append((key, None if old is _MISSING else list(old), list(new)))

    def coerce(self, key: str, raw: str) -> Any:
        """Parse a raw literal against the key's declared type."""
        type_name = self._declared(key)
        try:
            if type_name == "bool":
                if raw in ("true", "false"):
                    return raw == "true"
                raise ValueError(raw)
            if type_name == "int":
                return int(raw)
            if type_name == "real":
                return float(raw)
            if type_name in ("string", "string_list"):
                return raw
        except ValueError:
            raise BlackboardError(
                f"cannot read {raw!r} as {type_name} for key {key!r}", key=key
            ) from None
        raise BlackboardError(f"key {key!r} has unknown type {type_name!r}", key=key)

    def as_dict(self) -> dict[str, Any]:
        return {k: (list(v) if isinstance(v, list) else v) for k, v in self.entries.items()}

    # -- delta recording (used by the engine to fill trace events) --------

    def begin_delta(self) -> None:
        self._delta = []

    def end_delta(self) -> list[tuple[str, Any, Any]]:
        delta, self._delta = self._delta or [], None
        return delta

    # ----------------------------------------------------------------------

    def _declared(self, key: str) -> str:
        type_name = self.schema.get(key)
        if type_name is None:
            raise BlackboardError(f"blackboard key {key!r} is not declared in the schema", key=key)
        return type_name

    def _check(self, key: str, value: Any) -> Any:
        type_name = self._declared(key)
        if type_name == "bool":
            if isinstance(value, bool):
                return value
        elif type_name == "int":
            if isinstance(value, int) and not isinstance(value, bool):
                return value
        elif type_name == "real":
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                return float(value)
        elif type_name == "string":
            if isinstance(value, str):
                return value
        elif type_name == "string_list":
            if isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
                return list(value)
        else:
            raise BlackboardError(f"key {key!r} has unknown type {type_name!r}", key=key)
        raise BlackboardError(
            f"value {value!r} does not match declared type {type_name} of key {key!r}", key=key
        )


class ReadOnlyBlackboard:
    """View handed to condition resolvers; any write attempt is a contract violation."""

    def __init__(self, inner: Blackboard):
        self._inner = inner

    @property
    def schema(self) -> dict[str, str]:
        return dict(self._inner.schema)

    def has(self, key: str) -> bool:
        return self._inner.has(key)

    def get(self, key: str) -> Any:
        return self._inner.get(key)

    def as_dict(self) -> dict[str, Any]:
        return self._inner.as_dict()

    def set(self, key: str, value: Any) -> None:
        raise ContractViolationError(
            f"condition resolvers must not write to the blackboard (attempted {key!r})"
        )

    def push(self, key: str, item: str) -> None:
        raise ContractViolationError(
            f"condition resolvers must not write to the blackboard (attempted {key!r})"
        )
