"""Tick semantics for every node kind.

Single-threaded and pure: parallel composites interleave their children
deterministically within one tick, they never spawn threads. Composites
restart from their leftmost child on every fresh activation, but a child
left RUNNING by the previous tick is resumed where it stood (its position
is kept in the context's per-node memory).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .blackboard import Blackboard, ReadOnlyBlackboard
from .errors import ExecutionError, TreeInvalidError
from .model import (
    FAILURE,
    LEAF_KINDS,
    Node,
    NodeKind,
    Predicate,
    RUNNING,
    SUCCESS,
    Status,
    Tree,
    validate,
)
from .trace import ENTER, EXIT, HALTED, TraceEvent


class LeafResolver(ABC):
    """Maps a leaf that is due to run onto an outcome.

    Condition resolvers receive a read-only blackboard view; action resolvers
    may write. Select resolvers return the chosen option index, or ``None``
    while the choice is still pending.
    """

    @abstractmethod
    def resolve_action(self, node: Node, blackboard: Blackboard) -> Status:
        ...

    @abstractmethod
    def resolve_condition(self, node: Node, blackboard: ReadOnlyBlackboard) -> Status:
        ...

    @abstractmethod
    def resolve_select(
        self, node: Node, options: list[str], blackboard: ReadOnlyBlackboard
    ) -> Optional[int]:
        ...


@dataclass
class TickContext:
    """Everything one running tree instance needs between ticks.

    ``memory`` holds per-node resume state (retry counters, running child
    indices); it is empty at tree start and after :func:`reset`. Never share
    a context across threads.
    """

    blackboard: Blackboard
    resolver: LeafResolver
    memory: dict[str, Any] = field(default_factory=dict)
    trace: Optional[list[TraceEvent]] = None
    tick_index: int = 0
    leaf_observer: Optional[Callable[[Node], None]] = None

    def __post_init__(self) -> None:
        self.readonly = ReadOnlyBlackboard(self.blackboard)


def tick(tree: Tree, ctx: TickContext) -> Status:
    """One top-down pass; returns the root child's status."""
    root = tree.root
    trace = ctx.trace
    if trace is not None:
        trace.append(TraceEvent(ctx.tick_index, root.id, ENTER))
    status = _tick(root.children[0], ctx)
    if trace is not None:
        trace.append(TraceEvent(ctx.tick_index, root.id, EXIT, status))
    return status


def reset(tree: Tree, ctx: TickContext) -> None:
    """Clear all per-node memory; the blackboard is left untouched."""
    ctx.memory.clear()
    ctx.tick_index = 0


def require_valid(tree: Tree) -> None:
    violations = validate(tree)
    if violations:
        raise TreeInvalidError(violations)


def evaluate_predicate(pred: Predicate, blackboard) -> bool:
    value = blackboard.get(pred.key)
    lit = pred.value
    if pred.op == "=":
        if isinstance(value, bool) or isinstance(lit, bool):
            if isinstance(value, bool) and isinstance(lit, bool):
                return value == lit
        elif isinstance(value, (int, float)) and isinstance(lit, (int, float)):
            return value == lit
        elif isinstance(value, str) and isinstance(lit, str):
            return value == lit
        raise ExecutionError(
            f"predicate {pred.text()!r}: cannot compare {type(value).__name__} with "
            f"{type(lit).__name__}"
        )
    if (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and isinstance(lit, (int, float))
        and not isinstance(lit, bool)
    ):
        return value < lit if pred.op == "<" else value > lit
    raise ExecutionError(f"predicate {pred.text()!r}: ordering requires numeric operands")


# ---------------------------------------------------------------------------


def _tick(node: Node, ctx: TickContext) -> Status:
    if node.kind in LEAF_KINDS:
        return _tick_leaf(node, ctx)
    trace = ctx.trace
    if trace is not None:
        trace.append(TraceEvent(ctx.tick_index, node.id, ENTER))
    status = _INNER[node.kind](node, ctx)
    if trace is not None:
        trace.append(TraceEvent(ctx.tick_index, node.id, EXIT, status))
    return status


def _tick_sequence(node: Node, ctx: TickContext) -> Status:
    children = node.children
    start = ctx.memory.get(node.id, 0)
    for i in range(start, len(children)):
        status = _tick(children[i], ctx)
        if status is RUNNING:
            ctx.memory[node.id] = i
            return RUNNING
        if status is FAILURE:
            ctx.memory.pop(node.id, None)
            return FAILURE
    ctx.memory.pop(node.id, None)
    return SUCCESS


def _tick_selector(node: Node, ctx: TickContext) -> Status:
    children = node.children
    start = ctx.memory.get(node.id, 0)
    for i in range(start, len(children)):
        status = _tick(children[i], ctx)
        if status is RUNNING:
            ctx.memory[node.id] = i
            return RUNNING
        if status is SUCCESS:
            ctx.memory.pop(node.id, None)
            return SUCCESS
    ctx.memory.pop(node.id, None)
    return FAILURE


def _tick_parallel(node: Node, ctx: TickContext) -> Status:
    done: dict[int, Status] = ctx.memory.get(node.id) or {}
    for i, child in enumerate(node.children):
        if i in done:
            continue
        status = _tick(child, ctx)
        if status is not RUNNING:
            done[i] = status
    successes = sum(1 for s in done.values() if s is SUCCESS)
    failures = len(done) - successes
    if successes >= node.params["m"]:
        _halt_running_children(node, done, ctx, record=False)
        ctx.memory.pop(node.id, None)
        return SUCCESS
    if failures >= node.params["n"]:
        # The failure threshold interrupts still-running siblings: they are
        # halted, their memory cleared, and the halt is recorded in the trace.
        _halt_running_children(node, done, ctx, record=True)
        ctx.memory.pop(node.id, None)
        return FAILURE
    ctx.memory[node.id] = done
    return RUNNING


def _halt_running_children(
    node: Node, done: dict[int, Status], ctx: TickContext, record: bool
) -> None:
    trace = ctx.trace if record else None
    for i, child in enumerate(node.children):
        if i in done:
            continue
        for sub in child.walk():
            had_memory = ctx.memory.pop(sub.id, None) is not None
            if trace is not None and (had_memory or sub is child):
                trace.append(TraceEvent(ctx.tick_index, sub.id, HALTED))


def _tick_recovery(node: Node, ctx: TickContext) -> Status:
    main, fallback = node.children
    if ctx.memory.get(node.id, 0) == 0:
        status = _tick(main, ctx)
        if status is RUNNING:
            ctx.memory[node.id] = 0
            return RUNNING
        if status is SUCCESS:
            ctx.memory.pop(node.id, None)
            return SUCCESS
        # main failed: fall back within the same tick; the recovery node
        # reports whatever the fallback reports.
    status = _tick(fallback, ctx)
    if status is RUNNING:
        ctx.memory[node.id] = 1
        return RUNNING
    ctx.memory.pop(node.id, None)
    return status


def _tick_retry(node: Node, ctx: TickContext) -> Status:
    child = node.children[0]
    bound = node.params["attempts"]
    attempts = ctx.memory.get(node.id, 0)
    while True:
        status = _tick(child, ctx)
        if status is RUNNING:
            ctx.memory[node.id] = attempts
            return RUNNING
        if status is SUCCESS:
            ctx.memory.pop(node.id, None)
            return SUCCESS
        attempts += 1
        if attempts >= bound:
            ctx.memory.pop(node.id, None)
            return FAILURE


def _tick_repeat(node: Node, ctx: TickContext) -> Status:
    child = node.children[0]
    until = node.params.get("until")
    if until is not None:
        # One iteration per engine tick, so sampling predicates (monitors)
        # observe the world once per tick rather than spinning in place.
        mid_iteration = ctx.memory.get(node.id, False)
        if not mid_iteration and evaluate_predicate(until, ctx.blackboard):
            return SUCCESS
        status = _tick(child, ctx)
        if status is RUNNING:
            ctx.memory[node.id] = True
            return RUNNING
        ctx.memory.pop(node.id, None)
        if status is FAILURE:
            return FAILURE
        return SUCCESS if evaluate_predicate(until, ctx.blackboard) else RUNNING

    bound = node.params["count"]
    count = ctx.memory.get(node.id, 0)
    status = _tick(child, ctx)
    if status is RUNNING:
        ctx.memory[node.id] = count
        return RUNNING
    if status is FAILURE:
        ctx.memory.pop(node.id, None)
        return FAILURE
    count += 1
    if count >= bound:
        ctx.memory.pop(node.id, None)
        return SUCCESS
    ctx.memory[node.id] = count
    return RUNNING


def _tick_invert(node: Node, ctx: TickContext) -> Status:
    status = _tick(node.children[0], ctx)
    if status is SUCCESS:
        return FAILURE
    if status is FAILURE:
        return SUCCESS
    return RUNNING


_INNER = {
    NodeKind.SEQUENCE: _tick_sequence,
    NodeKind.SELECTOR: _tick_selector,
    NodeKind.PARALLEL: _tick_parallel,
    NodeKind.RECOVERY: _tick_recovery,
    NodeKind.RETRY: _tick_retry,
    NodeKind.REPEAT: _tick_repeat,
    NodeKind.INVERT: _tick_invert,
}


# ---------------------------------------------------------------------------


def _tick_leaf(node: Node, ctx: TickContext) -> Status:
    trace = ctx.trace
    if trace is not None:
        trace.append(TraceEvent(ctx.tick_index, node.id, ENTER))
        ctx.blackboard.begin_delta()
    if ctx.leaf_observer is not None:
        ctx.leaf_observer(node)
    try:
        status = _resolve_leaf(node, ctx)
    except BaseException:
        if trace is not None:
            ctx.blackboard.end_delta()
        raise
    if status is RUNNING:
        ctx.memory[node.id] = True
    else:
        ctx.memory.pop(node.id, None)
    if trace is not None:
        delta = tuple(ctx.blackboard.end_delta())
        trace.append(TraceEvent(ctx.tick_index, node.id, EXIT, status, delta or None))
    return status


def _resolve_leaf(node: Node, ctx: TickContext) -> Status:
    kind = node.kind
    if kind is NodeKind.CONDITION:
        check = node.params.get("check")
        if check is not None:
            return SUCCESS if evaluate_predicate(check, ctx.blackboard) else FAILURE
        status = ctx.resolver.resolve_condition(node, ctx.readonly)
        return _checked_status(status, node)

    if kind is NodeKind.ACTION:
        status = _checked_status(ctx.resolver.resolve_action(node, ctx.blackboard), node)
        if status is SUCCESS:
            _apply_effects(node, ctx.blackboard)
        return status

    # select
    options_key = node.params["options_key"]
    options = ctx.blackboard.get(options_key)
    if not isinstance(options, list):
        raise ExecutionError(
            f"select leaf {node.id!r}: key {options_key!r} does not hold a string list",
            leaf_id=node.id,
        )
    if len(options) < 2:
        raise ExecutionError(
            f"select leaf {node.id!r}: needs at least 2 options, found {len(options)}",
            leaf_id=node.id,
        )
    choice = ctx.resolver.resolve_select(node, options, ctx.readonly)
    if choice is None:
        return RUNNING
    if not isinstance(choice, int) or not (0 <= choice < len(options)):
        raise ExecutionError(
            f"select leaf {node.id!r}: choice {choice!r} is out of range 0..{len(options) - 1}",
            leaf_id=node.id,
        )
    ctx.blackboard.set(node.params["into_key"], options[choice])
    return SUCCESS


def _checked_status(status: Any, node: Node) -> Status:
    if not isinstance(status, Status):
        raise ExecutionError(
            f"unresolved leaf {node.id!r}: resolver returned {status!r}", leaf_id=node.id
        )
    return status


def _apply_effects(node: Node, blackboard: Blackboard) -> None:
    eff = node.params.get("set")
    if eff is not None:
        blackboard.set(eff.key, blackboard.coerce(eff.key, eff.raw_value))
    eff = node.params.get("push")
    if eff is not None:
        blackboard.push(eff.key, eff.raw_value)
