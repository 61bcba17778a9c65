"""Behavior-tree data model: statuses, node kinds, trees, and structural validation.

Pure data; the tick semantics live in :mod:`btkit.engine`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Optional, Union


class Status(Enum):
    """Tri-state tick result.

    Leaves resolved instantaneously return only SUCCESS or FAILURE; RUNNING
    comes from leaves declared long-running or awaiting human input, and from
    composites whose work spans ticks.
    """

    SUCCESS = "success"
    FAILURE = "failure"
    RUNNING = "running"

    def __str__(self) -> str:
        return self.value


SUCCESS = Status.SUCCESS
FAILURE = Status.FAILURE
RUNNING = Status.RUNNING

_STATUS_BY_NAME = {s.value: s for s in Status}


def status_from_name(name: str) -> Status:
    try:
        return _STATUS_BY_NAME[name.lower()]
    except KeyError:
        raise ValueError(f"unknown status {name!r} (expected success/failure/running)") from None


class NodeKind(Enum):
    ROOT = "root"
    SEQUENCE = "sequence"
    SELECTOR = "selector"
    PARALLEL = "parallel"
    RETRY = "retry"
    REPEAT = "repeat"
    INVERT = "invert"
    RECOVERY = "recovery"
    ACTION = "action"
    CONDITION = "condition"
    SELECT = "select"

    def __str__(self) -> str:
        return self.value


COMPOSITE_KINDS = frozenset(
    {NodeKind.SEQUENCE, NodeKind.SELECTOR, NodeKind.PARALLEL, NodeKind.RECOVERY}
)
DECORATOR_KINDS = frozenset({NodeKind.RETRY, NodeKind.REPEAT, NodeKind.INVERT})
LEAF_KINDS = frozenset({NodeKind.ACTION, NodeKind.CONDITION, NodeKind.SELECT})

#: Literal value allowed in predicates and blackboard defaults.
Literal = Union[bool, int, float, str]


@dataclass(frozen=True)
class Predicate:
    """Comparison of a blackboard key against a literal: ``key (=|<|>) value``."""

    key: str
    op: str  # one of "=", "<", ">"
    value: Literal

    def text(self) -> str:
        return f"{self.key} {self.op} {format_literal(self.value)}"


@dataclass(frozen=True)
class Effect:
    """Declarative blackboard write attached to an action leaf.

    ``raw_value`` is kept verbatim and coerced against the declared schema
    type when the effect is applied.
    """

    key: str
    raw_value: str

    def text(self) -> str:
        return f"{self.key}={self.raw_value}"


def format_literal(value: Literal) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    # Prefer barewords where the lexer can read them back unambiguously.
    if _BAREWORD_OK(value):
        return value
    return quote_string(value)


def _BAREWORD_OK(s: str) -> bool:
    if not s or not (s[0].isalpha() or s[0] == "_"):
        return False
    if s in ("true", "false"):
        return False
    return all(c.isalnum() or c == "_" for c in s)


def quote_string(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


@dataclass
class Node:
    """One vertex of a behavior tree.

    ``params`` is a kind-specific map:

    * retry: ``attempts`` (int)
    * repeat: ``count`` (int) or ``until`` (Predicate)
    * parallel: ``m`` and ``n`` success/failure thresholds (int)
    * action: optional ``mode``, ``long_running``, ``set``/``push`` (Effect)
    * condition: optional ``mode``, ``long_running``, ``check`` (Predicate)
    * select: ``options_key`` and ``into_key`` (str)
    """

    id: str
    kind: NodeKind
    label: str = ""
    children: list["Node"] = field(default_factory=list)
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return self.kind in LEAF_KINDS

    @property
    def is_composite(self) -> bool:
        return self.kind in COMPOSITE_KINDS

    @property
    def is_decorator(self) -> bool:
        return self.kind in DECORATOR_KINDS

    def walk(self) -> Iterator["Node"]:
        """Pre-order traversal of this node and its descendants."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


#: Blackboard value type names accepted by the DSL schema block.
BLACKBOARD_TYPES = ("bool", "int", "real", "string", "string_list")


@dataclass
class Tree:
    """A named behavior tree. ``root`` is a dedicated single-child root node."""

    name: str
    root: Node
    blackboard_schema: dict[str, str] = field(default_factory=dict)
    blackboard_defaults: dict[str, Any] = field(default_factory=dict)

    @property
    def root_child(self) -> Node:
        return self.root.children[0]

    def walk(self) -> Iterator[Node]:
        return self.root.walk()

    def node(self, node_id: str) -> Node:
        for node in self.walk():
            if node.id == node_id:
                return node
        raise KeyError(f"no node with id {node_id!r}")

    def has_node(self, node_id: str) -> bool:
        return any(node.id == node_id for node in self.walk())


@dataclass(frozen=True)
class Violation:
    """One broken structural rule, attributed to a node."""

    node_id: str
    rule: str
    message: str


def _violation(node: Node, rule: str, message: str) -> Violation:
    return Violation(node.id, rule, message)


def validate(tree: Tree) -> list[Violation]:
    """Check every structural invariant; an empty list means the tree is well formed."""
    out: list[Violation] = []
    root = tree.root

    if root.kind is not NodeKind.ROOT:
        out.append(_violation(root, "root-kind", "tree root must be a root node"))
    if len(root.children) != 1:
        out.append(_violation(root, "root-single-child", "root must have exactly one child"))

    seen: dict[str, int] = {}
    for node in tree.walk():
        seen[node.id] = seen.get(node.id, 0) + 1
    for node_id, count in seen.items():
        if count > 1:
            out.append(Violation(node_id, "duplicate-id", f"id {node_id!r} used by {count} nodes"))

    for node in tree.walk():
        if node is root:
            continue
        out.extend(_validate_node(node))
    for key, type_name in tree.blackboard_schema.items():
        if type_name not in BLACKBOARD_TYPES:
            out.append(Violation(key, "schema-type", f"unknown blackboard type {type_name!r} for key {key!r}"))
    return out


def _validate_node(node: Node) -> list[Violation]:
    out: list[Violation] = []
    kind = node.kind
    nchildren = len(node.children)

    if kind is NodeKind.ROOT:
        out.append(_violation(node, "nested-root", "root node may only appear at the top of a tree"))
        return out

    if kind in (NodeKind.SEQUENCE, NodeKind.SELECTOR, NodeKind.PARALLEL):
        if nchildren < 1:
            out.append(_violation(node, "composite-arity", "composite requires at least one child"))
    if kind is NodeKind.RECOVERY and nchildren != 2:
        out.append(
            _violation(node, "recovery-arity", "recovery requires exactly two children (main, fallback)")
        )
    if kind in DECORATOR_KINDS and nchildren != 1:
        out.append(_violation(node, "decorator-arity", "decorator requires exactly one child"))
    if kind in LEAF_KINDS and nchildren != 0:
        out.append(_violation(node, "leaf-no-children", "leaf must not have children"))

    if kind is NodeKind.PARALLEL and nchildren >= 1:
        m = node.params.get("m")
        n = node.params.get("n")
        if not isinstance(m, int) or not (1 <= m <= nchildren):
            out.append(
                _violation(node, "parallel-thresholds", f"success threshold m must be in 1..{nchildren}")
            )
        if not isinstance(n, int) or not (1 <= n <= nchildren):
            out.append(
                _violation(node, "parallel-thresholds", f"failure threshold n must be in 1..{nchildren}")
            )
    if kind is NodeKind.RETRY:
        attempts = node.params.get("attempts")
        if not isinstance(attempts, int) or attempts < 1:
            out.append(_violation(node, "retry-bound", "retry requires a positive integer attempt bound"))
    if kind is NodeKind.REPEAT:
        count = node.params.get("count")
        until = node.params.get("until")
        if until is None and (not isinstance(count, int) or count < 1):
            out.append(
                _violation(node, "repeat-bound", "repeat requires a positive bound or an until-predicate")
            )
        if until is not None and not isinstance(until, Predicate):
            out.append(_violation(node, "repeat-bound", "repeat until-predicate is malformed"))
    if kind is NodeKind.SELECT:
        if not node.params.get("options_key") or not node.params.get("into_key"):
            out.append(
                _violation(node, "select-keys", "select requires an options key and an into key")
            )
    return out


def subtree(tree: Tree, node_id: str, name: Optional[str] = None) -> Tree:
    """New tree whose root child is a deep copy of ``node_id``'s subtree.

    The blackboard schema and defaults are carried over unchanged so that
    predicates and effects keep working.
    """
    node = tree.node(node_id)
    if node.kind is NodeKind.ROOT:
        node = node.children[0]
    copied = _copy_node(node)
    root = Node(id="root", kind=NodeKind.ROOT, label="", children=[copied])
    return Tree(
        name=name or f"{tree.name}.{node_id}",
        root=root,
        blackboard_schema=dict(tree.blackboard_schema),
        blackboard_defaults=dict(tree.blackboard_defaults),
    )


def _copy_node(node: Node) -> Node:
    return Node(
        id=node.id,
        kind=node.kind,
        label=node.label,
        children=[_copy_node(c) for c in node.children],
        params=dict(node.params),
    )


def attempt_bounds(tree: Tree) -> dict[str, Optional[int]]:
    """Max times each leaf can be ticked in one run, from decorator bounds.

    ``None`` marks a leaf under a repeat-until decorator, whose attempt count
    is unbounded.
    """
    bounds: dict[str, Optional[int]] = {}

    def visit(node: Node, factor: Optional[int]) -> None:
        if node.is_leaf:
            bounds[node.id] = factor
            return
        child_factor = factor
        if node.kind is NodeKind.RETRY:
            child_factor = None if factor is None else factor * node.params["attempts"]
        elif node.kind is NodeKind.REPEAT:
            if node.params.get("until") is not None:
                child_factor = None
            elif factor is not None:
                child_factor = factor * node.params["count"]
        for child in node.children:
            visit(child, child_factor)

    visit(tree.root, 1)
    return bounds
