"""Lowering trees to explicit finite state machines and ordering analysis.

The FSM is a configuration automaton: each state means "this leaf is about to
be ticked, with these decorator counters", transitions are labeled by
(leaf, outcome) symbols, and the two accepting states carry the tree's final
status. Parallel nodes and unbounded repeats are out of scope for lowering;
the corpus analysis that matters (last-resort ordering) lives in sequential
branches.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

from .engine import require_valid
from .errors import BtkitError, UnknownLeafError, UnsupportedNodeError
from .execution import ResolutionScript, RunResult, run_scripted
from .model import (
    DECORATOR_KINDS,
    FAILURE,
    Node,
    NodeKind,
    SUCCESS,
    Status,
    Tree,
    attempt_bounds,
)

_SUCCESS_ID = "SUCCESS"
_FAILURE_ID = "FAILURE"
_MAX_FSM_SLOTS = 50_000


@dataclass(frozen=True)
class FsmState:
    id: str
    label: str


@dataclass(frozen=True)
class FsmTransition:
    src: str
    leaf: str
    outcome: Status
    dst: str


@dataclass
class Fsm:
    states: list[FsmState]
    initial: str
    accepting: dict[str, Status]
    transitions: list[FsmTransition]

    def __post_init__(self) -> None:
        self.delta: dict[tuple[str, str, Status], str] = {}
        self.state_leaf: dict[str, str] = {}
        for t in self.transitions:
            key = (t.src, t.leaf, t.outcome)
            if key in self.delta:
                raise BtkitError(f"nondeterministic transition on {key}")
            self.delta[key] = t.dst
            self.state_leaf.setdefault(t.src, t.leaf)

    def leaves(self) -> set[str]:
        return {t.leaf for t in self.transitions}


def to_fsm(tree: Tree) -> Fsm:
    """Configuration automaton equivalent to scripted execution of the tree."""
    require_valid(tree)
    for node in tree.walk():
        if node.kind is NodeKind.PARALLEL:
            raise UnsupportedNodeError(
                f"parallel node {node.id!r} cannot be lowered to an FSM", node.id
            )
        if node.kind is NodeKind.REPEAT and node.params.get("until") is not None:
            raise UnsupportedNodeError(
                f"repeat-until node {node.id!r} has unbounded iterations", node.id
            )
    bounds = attempt_bounds(tree)
    total_slots = sum(b for b in bounds.values() if b is not None)
    if total_slots > _MAX_FSM_SLOTS:
        raise BtkitError(f"tree unrolls to {total_slots} attempt slots; refusing to build the FSM")

    labels: dict[str, str] = {}
    transitions: list[FsmTransition] = []
    counter = [0]

    def new_state(label: str) -> str:
        sid = f"q{counter[0]}"
        counter[0] += 1
        labels[sid] = label
        return sid

    def build(node: Node, succ: str, fail: str, ctx: str) -> str:
        kind = node.kind
        if kind is NodeKind.ACTION or kind is NodeKind.CONDITION:
            sid = new_state(f"at {node.id}{ctx}")
            transitions.append(FsmTransition(sid, node.id, SUCCESS, succ))
            transitions.append(FsmTransition(sid, node.id, FAILURE, fail))
            return sid
        if kind is NodeKind.SELECT:
            sid = new_state(f"at {node.id}{ctx}")
            transitions.append(FsmTransition(sid, node.id, SUCCESS, succ))
            return sid
        if kind is NodeKind.SEQUENCE:
            nxt = succ
            for child in reversed(node.children):
                nxt = build(child, nxt, fail, ctx)
            return nxt
        if kind is NodeKind.SELECTOR:
            nxt = fail
            for child in reversed(node.children):
                nxt = build(child, succ, nxt, ctx)
            return nxt
        if kind is NodeKind.INVERT:
            return build(node.children[0], fail, succ, ctx)
        if kind is NodeKind.RETRY:
            bound = node.params["attempts"]
            nxt = fail
            for i in reversed(range(bound)):
                nxt = build(node.children[0], succ, nxt, f"{ctx} [attempt {i + 1}/{bound}]")
            return nxt
        if kind is NodeKind.REPEAT:
            bound = node.params["count"]
            nxt = succ
            for i in reversed(range(bound)):
                nxt = build(node.children[0], nxt, fail, f"{ctx} [iteration {i + 1}/{bound}]")
            return nxt
        if kind is NodeKind.RECOVERY:
            main, fallback = node.children
            fb_entry = build(fallback, succ, fail, f"{ctx} [recovery]")
            return build(main, succ, fb_entry, ctx)
        raise UnsupportedNodeError(f"cannot lower node kind {kind}", node.id)

    initial = build(tree.root_child, _SUCCESS_ID, _FAILURE_ID, "")
    return _canonicalize(initial, labels, transitions)


def _canonicalize(initial: str, labels: dict[str, str], transitions: list[FsmTransition]) -> Fsm:
    """Renumber states in BFS order from the initial state and drop dead ones."""
    out_edges: dict[str, list[FsmTransition]] = {}
    for t in transitions:
        out_edges.setdefault(t.src, []).append(t)
    order: list[str] = []
    seen = {initial}
    queue = [initial]
    while queue:
        sid = queue.pop(0)
        order.append(sid)
        for t in out_edges.get(sid, []):
            if t.dst not in seen:
                seen.add(t.dst)
                queue.append(t.dst)

    rename: dict[str, str] = {}
    states: list[FsmState] = []
    accepting: dict[str, Status] = {}
    for sid in order:
        if sid == _SUCCESS_ID:
            rename[sid] = _SUCCESS_ID
            states.append(FsmState(_SUCCESS_ID, "SUCCESS"))
            accepting[_SUCCESS_ID] = SUCCESS
        elif sid == _FAILURE_ID:
            rename[sid] = _FAILURE_ID
            states.append(FsmState(_FAILURE_ID, "FAILURE"))
            accepting[_FAILURE_ID] = FAILURE
        else:
            rename[sid] = f"s{len(rename) - len(accepting)}"
            states.append(FsmState(rename[sid], labels[sid]))
    new_transitions = [
        FsmTransition(rename[t.src], t.leaf, t.outcome, rename[t.dst])
        for t in transitions
        if t.src in rename and t.dst in rename
    ]
    return Fsm(states=states, initial=rename[initial], accepting=accepting,
               transitions=new_transitions)


def run_fsm(fsm: Fsm, next_outcome: Callable[[str], Status], max_steps: int = 1_000_000) -> Status:
    """Drive the FSM by asking ``next_outcome`` for each due leaf's result."""
    state = fsm.initial
    for _ in range(max_steps):
        if state in fsm.accepting:
            return fsm.accepting[state]
        leaf = fsm.state_leaf[state]
        outcome = next_outcome(leaf)
        dst = fsm.delta.get((state, leaf, outcome))
        if dst is None:
            raise BtkitError(f"no transition from {state} on ({leaf}, {outcome})")
        state = dst
    raise BtkitError("FSM did not reach an accepting state")


# --------------------------------------------------------------------------
# Reachability
# --------------------------------------------------------------------------

Symbol = tuple[str, Status]


@dataclass
class ReachabilityAnswer:
    reachable: bool
    witness: Optional[tuple[Symbol, ...]]
    min_prior_failures: Optional[int]


def reachability(fsm: Fsm, target_leaf: str) -> ReachabilityAnswer:
    """Shortest outcome sequence that brings the FSM to the target leaf.

    Among equal-length witnesses the one with fewest failures wins, and
    ``min_prior_failures`` counts the failure symbols in that witness.
    """
    if target_leaf not in fsm.leaves():
        raise UnknownLeafError(f"leaf {target_leaf!r} does not appear in the FSM")
    targets = {sid for sid, leaf in fsm.state_leaf.items() if leaf == target_leaf}

    heap: list[tuple[int, int, int, str, tuple[Symbol, ...]]] = [(0, 0, 0, fsm.initial, ())]
    best: dict[str, tuple[int, int]] = {}
    tie = 0
    while heap:
        length, failures, _, state, path = heapq.heappop(heap)
        if state in targets:
            return ReachabilityAnswer(True, path, failures)
        if state in best and best[state] <= (length, failures):
            continue
        best[state] = (length, failures)
        if state in fsm.accepting:
            continue
        leaf = fsm.state_leaf[state]
        for outcome in (SUCCESS, FAILURE):
            dst = fsm.delta.get((state, leaf, outcome))
            if dst is None:
                continue
            tie += 1
            heapq.heappush(heap, (
                length + 1,
                failures + (1 if outcome is FAILURE else 0),
                tie,
                dst,
                path + ((leaf, outcome),),
            ))
    return ReachabilityAnswer(False, None, None)


def witness_to_script(tree: Tree, witness: tuple[Symbol, ...]) -> ResolutionScript:
    """Script that replays a witness: witness outcomes first, then successes.

    Padding every leaf with successes up to its attempt bound lets the run
    finish normally after the target has been reached.
    """
    outcomes: dict[str, list] = {}
    for leaf, status in witness:
        outcomes.setdefault(leaf, []).append(status)
    bounds = attempt_bounds(tree)
    choices: dict[str, int] = {}
    for node in tree.walk():
        if not node.is_leaf:
            continue
        if node.kind is NodeKind.SELECT:
            choices[node.id] = 0
            continue
        bound = bounds[node.id] or 0
        seq = outcomes.setdefault(node.id, [])
        while len(seq) < bound:
            seq.append(SUCCESS)
    return ResolutionScript(outcomes=outcomes, choices=choices)


# --------------------------------------------------------------------------
# Exhaustive enumeration and the last-resort ordering check
# --------------------------------------------------------------------------


def free_attempt_slots(tree: Tree, max_total: int = 20) -> list[tuple[str, int]]:
    """Leaves whose outcomes are free to vary, with their attempt bounds.

    Predicate-gated conditions and select leaves are excluded: their results
    are fixed by the blackboard, not by a resolver.
    """
    bounds = attempt_bounds(tree)
    slots: list[tuple[str, int]] = []
    for node in tree.walk():
        if not node.is_leaf or node.kind is NodeKind.SELECT:
            continue
        if node.kind is NodeKind.CONDITION and node.params.get("check") is not None:
            continue
        bound = bounds[node.id]
        if bound is None:
            raise BtkitError(
                f"leaf {node.id!r} has unbounded attempts; exhaustive enumeration is impossible"
            )
        slots.append((node.id, bound))
    total = sum(b for _, b in slots)
    if total > max_total:
        raise BtkitError(
            f"{total} attempt slots exceed the enumeration limit of {max_total}"
        )
    return slots


def enumerate_scripts(tree: Tree, max_total: int = 20) -> Iterator[ResolutionScript]:
    """Every total outcome assignment over the tree's free attempt slots."""
    slots = free_attempt_slots(tree, max_total)
    select_choices = {
        node.id: 0 for node in tree.walk() if node.kind is NodeKind.SELECT
    }
    total = sum(b for _, b in slots)
    for bits in range(1 << total):
        outcomes: dict[str, list] = {}
        i = 0
        for leaf, bound in slots:
            seq = []
            for _ in range(bound):
                seq.append(SUCCESS if (bits >> i) & 1 else FAILURE)
                i += 1
            outcomes[leaf] = seq
        yield ResolutionScript(outcomes=outcomes, choices=dict(select_choices))


@dataclass
class LastResortReport:
    holds: bool
    assignments: int
    failures: list[str]


def check_last_resort(
    tree: Tree,
    target: str,
    prerequisites: list[str],
    max_total: int = 20,
) -> LastResortReport:
    """Exhaustively verify: the target runs iff every prerequisite leaf
    exhausted all its attempts in failure, and those failures precede it."""
    leaf_ids = {node.id for node in tree.walk() if node.is_leaf}
    for leaf in [target, *prerequisites]:
        if leaf not in leaf_ids:
            raise UnknownLeafError(f"leaf {leaf!r} does not exist in tree {tree.name!r}")
    bounds = attempt_bounds(tree)

    failures: list[str] = []
    assignments = 0
    for script in enumerate_scripts(tree, max_total):
        assignments += 1
        result = run_scripted(tree, script)
        problem = _last_resort_violation(result, target, prerequisites, bounds)
        if problem and len(failures) < 5:
            failures.append(problem)
    return LastResortReport(holds=not failures, assignments=assignments, failures=failures)


def _last_resort_violation(
    result: RunResult, target: str, prerequisites: list[str], bounds: dict[str, Optional[int]]
) -> Optional[str]:
    target_enter = None
    prereq_exits: dict[str, list[tuple[int, Status]]] = {p: [] for p in prerequisites}
    for i, event in enumerate(result.trace):
        if event.node == target and event.phase == "enter" and target_enter is None:
            target_enter = i
        if event.node in prereq_exits and event.phase == "exit":
            prereq_exits[event.node].append((i, event.status))

    def exhausted_in_failure(upto: Optional[int]) -> bool:
        for leaf in prerequisites:
            exits = [e for e in prereq_exits[leaf] if upto is None or e[0] < upto]
            if len(exits) != bounds[leaf]:
                return False
            if any(status is not FAILURE for _, status in exits):
                return False
        return True

    if target_enter is not None:
        if not exhausted_in_failure(target_enter):
            return (
                f"{target} ran without all prerequisites exhausted in failure first "
                f"(scripted statuses: { {p: [s.value for _, s in prereq_exits[p]] for p in prerequisites} })"
            )
    else:
        if exhausted_in_failure(None):
            return f"all prerequisites exhausted in failure but {target} never ran"
    return None


# --------------------------------------------------------------------------
# DOT export
# --------------------------------------------------------------------------

_GLYPHS = {
    NodeKind.ROOT: "Φ",
    NodeKind.SEQUENCE: "→",
    NodeKind.SELECTOR: "?",
    NodeKind.PARALLEL: "⇉",
    NodeKind.RECOVERY: "R",
}

_LEAF_STYLE = {
    NodeKind.CONDITION: ("ellipse", "yellow"),
    NodeKind.ACTION: ("box", "green"),
    NodeKind.SELECT: ("box", "lightblue"),
}


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def export_dot(subject: Union[Tree, Fsm]) -> str:
    if isinstance(subject, Fsm):
        return _fsm_dot(subject)
    return _tree_dot(subject)


def _tree_dot(tree: Tree) -> str:
    lines = ["digraph bt {", "  rankdir=TB;"]
    for node in tree.walk():
        name = _dot_quote(node.id)
        kind = node.kind
        if kind in _LEAF_STYLE:
            shape, color = _LEAF_STYLE[kind]
            lines.append(
                f"  {name} [label={_dot_quote(node.label or node.id)} shape={shape} "
                f'style=filled fillcolor="{color}"];'
            )
        elif kind in DECORATOR_KINDS:
            if kind is NodeKind.RETRY:
                text = f"retry({node.params['attempts']})"
            elif kind is NodeKind.REPEAT:
                until = node.params.get("until")
                text = f"repeat(until {until.text()})" if until else f"repeat({node.params['count']})"
            else:
                text = "invert"
            lines.append(f"  {name} [label={_dot_quote(text)} shape=diamond];")
        else:
            glyph = _GLYPHS[kind]
            shape = "circle" if kind is NodeKind.ROOT else "box"
            lines.append(f"  {name} [label={_dot_quote(glyph)} shape={shape}];")
    for node in tree.walk():
        for child in node.children:
            lines.append(f"  {_dot_quote(node.id)} -> {_dot_quote(child.id)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _fsm_dot(fsm: Fsm) -> str:
    lines = ["digraph fsm {", "  rankdir=LR;"]
    for state in fsm.states:
        shape = "doublecircle" if state.id in fsm.accepting else "ellipse"
        lines.append(f"  {_dot_quote(state.id)} [label={_dot_quote(state.label)} shape={shape}];")
    for t in fsm.transitions:
        letter = "S" if t.outcome is SUCCESS else "F"
        lines.append(
            f"  {_dot_quote(t.src)} -> {_dot_quote(t.dst)} [label={_dot_quote(f'{t.leaf}:{letter}')}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
