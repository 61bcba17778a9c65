"""Drivers that run trees against the three resolver backends.

* :func:`run_scripted` replays predetermined leaf outcomes and records a full
  trace — the workhorse for deterministic tests and exhaustive enumeration.
* :func:`simulate` draws leaf outcomes from per-leaf success probabilities and
  aggregates a reproducible report (fixed RNG algorithm, fixed seed).
* :class:`Session` advances a tree prompt by prompt so a human can resolve
  condition/action/select leaves interactively.
"""

from __future__ import annotations

import json
import random
import uuid
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .blackboard import Blackboard, ReadOnlyBlackboard
from .engine import LeafResolver, TickContext, require_valid, tick
from .errors import (
    ContractViolationError,
    ExecutionError,
    ScriptUnderrunError,
    SessionProtocolError,
)
from .model import FAILURE, Node, NodeKind, RUNNING, SUCCESS, Status, Tree, status_from_name
from .trace import TraceEvent

DEFAULT_TICK_BUDGET = 10_000

#: Algorithm identifier recorded in every simulation report. CPython's
#: ``random`` module is a Mersenne Twister with a stable cross-platform
#: stream for a given seed.
RNG_ALGORITHM = "mt19937"


# --------------------------------------------------------------------------
# Scripted execution
# --------------------------------------------------------------------------

#: One scripted outcome: a bare status, or (status, blackboard writes) for
#: actions that should also write.
ScriptEntry = Union[Status, tuple[Status, dict[str, Any]]]


@dataclass
class ResolutionScript:
    """Predetermined outcomes, consumed one per leaf attempt.

    ``outcomes`` maps leaf id to its ordered attempt results; asking for more
    attempts than scripted is an error. ``choices`` maps select-leaf ids to
    the option index they resolve to.
    """

    outcomes: dict[str, list[ScriptEntry]] = field(default_factory=dict)
    choices: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_obj(cls, obj: dict[str, Any]) -> "ResolutionScript":
        outcomes: dict[str, list[ScriptEntry]] = {}
        for leaf, entries in (obj.get("outcomes") or {}).items():
            parsed: list[ScriptEntry] = []
            for entry in entries:
                if isinstance(entry, str):
                    parsed.append(status_from_name(entry))
                elif isinstance(entry, dict):
                    status = status_from_name(entry["status"])
                    writes = entry.get("set") or {}
                    parsed.append((status, dict(writes)))
                else:
                    raise ValueError(f"bad script entry {entry!r} for leaf {leaf!r}")
            outcomes[leaf] = parsed
        choices = {leaf: int(idx) for leaf, idx in (obj.get("choices") or {}).items()}
        return cls(outcomes=outcomes, choices=choices)

    @classmethod
    def from_json(cls, text: str) -> "ResolutionScript":
        return cls.from_obj(json.loads(text))


def _may_run_long(node: Node) -> bool:
    return bool(node.params.get("long_running")) or node.params.get("mode") == "interactive"


class ScriptedResolver(LeafResolver):
    def __init__(self, script: ResolutionScript):
        self.script = script
        self._positions: dict[str, int] = {}

    def _next(self, node: Node) -> tuple[Status, Optional[dict[str, Any]]]:
        leaf = node.id
        pos = self._positions.get(leaf, 0)
        entries = self.script.outcomes.get(leaf)
        if entries is None or pos >= len(entries):
            raise ScriptUnderrunError(
                f"script underrun: no outcome for attempt {pos + 1} of leaf {leaf!r}",
                leaf_id=leaf,
            )
        self._positions[leaf] = pos + 1
        entry = entries[pos]
        if isinstance(entry, tuple):
            status, writes = entry
        else:
            status, writes = entry, None
        if status is RUNNING and not _may_run_long(node):
            raise ExecutionError(
                f"leaf {leaf!r} is scripted to run long but is not declared long_running",
                leaf_id=leaf,
            )
        return status, writes

    def resolve_action(self, node: Node, blackboard: Blackboard) -> Status:
        status, writes = self._next(node)
        for key, value in (writes or {}).items():
            blackboard.set(key, value)
        return status

    def resolve_condition(self, node: Node, blackboard: ReadOnlyBlackboard) -> Status:
        status, writes = self._next(node)
        if writes:
            raise ContractViolationError(
                f"condition {node.id!r} script entries must not carry blackboard writes",
                leaf_id=node.id,
            )
        return status

    def resolve_select(self, node: Node, options: list[str], blackboard) -> Optional[int]:
        if node.id not in self.script.choices:
            raise ScriptUnderrunError(
                f"script underrun: no choice for select leaf {node.id!r}", leaf_id=node.id
            )
        return self.script.choices[node.id]


@dataclass
class RunResult:
    final_status: Status
    ticks_used: int
    trace: list[TraceEvent]
    final_blackboard: Blackboard
    budget_exhausted: bool = False

    @property
    def outcome(self) -> str:
        return "budget_exhausted" if self.budget_exhausted else self.final_status.value

    def entered(self, node_id: str) -> bool:
        return any(e.node == node_id and e.phase == "enter" for e in self.trace)


def run_scripted(
    tree: Tree,
    script: ResolutionScript,
    max_ticks: int = DEFAULT_TICK_BUDGET,
    initial_blackboard: Optional[dict[str, Any]] = None,
) -> RunResult:
    """Tick until the tree settles or the budget runs out; fully deterministic."""
    require_valid(tree)
    if max_ticks < 1:
        raise ValueError("max_ticks must be at least 1")
    blackboard = Blackboard.from_tree(tree, initial_blackboard)
    ctx = TickContext(blackboard, ScriptedResolver(script), trace=[])
    status = RUNNING
    ticks = 0
    while ticks < max_ticks:
        ctx.tick_index = ticks
        status = tick(tree, ctx)
        ticks += 1
        if status is not RUNNING:
            break
    return RunResult(
        final_status=status,
        ticks_used=ticks,
        trace=ctx.trace,
        final_blackboard=blackboard,
        budget_exhausted=status is RUNNING,
    )


# --------------------------------------------------------------------------
# Stochastic simulation
# --------------------------------------------------------------------------


@dataclass
class StochasticModel:
    """Per-leaf success probabilities plus a seed; selects choose uniformly."""

    seed: int
    default_p: float = 1.0
    leaf_p: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for leaf, p in {"<default>": self.default_p, **self.leaf_p}.items():
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability for {leaf} must be in [0, 1], got {p}")

    def probability(self, leaf_id: str) -> float:
        return self.leaf_p.get(leaf_id, self.default_p)


class StochasticResolver(LeafResolver):
    def __init__(self, model: StochasticModel, tree: Tree):
        self.rng = random.Random(model.seed)
        self.p = {
            node.id: model.probability(node.id) for node in tree.walk() if node.is_leaf
        }

    def _draw(self, node: Node) -> Status:
        return SUCCESS if self.rng.random() < self.p[node.id] else FAILURE

    def resolve_action(self, node: Node, blackboard: Blackboard) -> Status:
        return self._draw(node)

    def resolve_condition(self, node: Node, blackboard: ReadOnlyBlackboard) -> Status:
        return self._draw(node)

    def resolve_select(self, node: Node, options: list[str], blackboard) -> Optional[int]:
        return self.rng.randrange(len(options))


@dataclass
class LeafStats:
    attempts: int
    ticked_fraction: float


@dataclass
class SimulationReport:
    tree: str
    seed: int
    runs: int
    rng: str
    success_rate: float
    mean_ticks: float
    leaf_stats: dict[str, LeafStats]

    def to_obj(self) -> dict[str, Any]:
        return {
            "tree": self.tree,
            "seed": self.seed,
            "runs": self.runs,
            "rng": self.rng,
            "success_rate": self.success_rate,
            "mean_ticks": self.mean_ticks,
            "leaf_stats": {
                leaf: {"attempts": s.attempts, "ticked_fraction": s.ticked_fraction}
                for leaf, s in sorted(self.leaf_stats.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True, indent=2) + "\n"


def simulate(
    tree: Tree,
    model: StochasticModel,
    runs: int,
    max_ticks: int = DEFAULT_TICK_BUDGET,
) -> SimulationReport:
    """Repeated runs under the stochastic model; deterministic for a fixed seed."""
    require_valid(tree)
    if runs < 1:
        raise ValueError("runs must be at least 1")

    resolver = StochasticResolver(model, tree)
    leaf_ids = [node.id for node in tree.walk() if node.is_leaf]
    attempts = {leaf: 0 for leaf in leaf_ids}
    runs_ticked = {leaf: 0 for leaf in leaf_ids}
    last_run_seen: dict[str, int] = {leaf: -1 for leaf in leaf_ids}
    run_index = 0

    def observe(node: Node) -> None:
        leaf = node.id
        attempts[leaf] += 1
        if last_run_seen[leaf] != run_index:
            last_run_seen[leaf] = run_index
            runs_ticked[leaf] += 1

    template = Blackboard.from_tree(tree)
    entries_template = dict(template.entries)
    ctx = TickContext(template, resolver, leaf_observer=observe)

    successes = 0
    total_ticks = 0
    while run_index < runs:
        template.entries.clear()
        template.entries.update(entries_template)
        ctx.memory.clear()
        status = RUNNING
        ticks = 0
        while ticks < max_ticks:
            ctx.tick_index = ticks
            status = tick(tree, ctx)
            ticks += 1
            if status is not RUNNING:
                break
        if status is SUCCESS:
            successes += 1
        total_ticks += ticks
        run_index += 1

    return SimulationReport(
        tree=tree.name,
        seed=model.seed,
        runs=runs,
        rng=RNG_ALGORITHM,
        success_rate=successes / runs,
        mean_ticks=total_ticks / runs,
        leaf_stats={
            leaf: LeafStats(attempts[leaf], runs_ticked[leaf] / runs) for leaf in leaf_ids
        },
    )


# --------------------------------------------------------------------------
# Interactive sessions
# --------------------------------------------------------------------------


@dataclass
class Prompt:
    leaf_id: str
    kind: str  # "action" | "condition" | "select"
    label: str
    options: Optional[list[str]] = None

    def to_obj(self) -> dict[str, Any]:
        obj: dict[str, Any] = {"leaf": self.leaf_id, "kind": self.kind, "label": self.label}
        if self.options is not None:
            obj["options"] = list(self.options)
        return obj


@dataclass
class Answer:
    leaf_id: str
    status: Optional[Status] = None
    option: Optional[int] = None

    @classmethod
    def from_obj(cls, obj: dict[str, Any]) -> "Answer":
        status = status_from_name(obj["status"]) if "status" in obj else None
        option = obj.get("option")
        return cls(leaf_id=obj["leaf"], status=status, option=option)


@dataclass
class SessionUpdate:
    events: list[TraceEvent]
    prompt: Optional[Prompt]
    final_status: Optional[Status]


class Session:
    """One interactive execution. Steps must be serialized by the caller;
    distinct sessions are fully independent."""

    def __init__(
        self,
        tree: Tree,
        initial_blackboard: Optional[dict[str, Any]] = None,
        script: Optional[ResolutionScript] = None,
        session_id: Optional[str] = None,
        max_ticks_per_step: int = DEFAULT_TICK_BUDGET,
    ):
        require_valid(tree)
        self.session_id = session_id or uuid.uuid4().hex[:12]
        self.tree = tree
        self.pending_prompt: Optional[Prompt] = None
        self.finished = False
        self.final_status: Optional[Status] = None
        self.ticks = 0
        self.max_ticks_per_step = max_ticks_per_step
        self._answer: Optional[Answer] = None
        self._captured_prompt: Optional[Prompt] = None
        self._scripted = ScriptedResolver(script) if script is not None else None
        blackboard = Blackboard.from_tree(tree, initial_blackboard)
        self.ctx = TickContext(blackboard, _SessionResolver(self), trace=[])

    @property
    def events(self) -> list[TraceEvent]:
        return self.ctx.trace or []

    @property
    def blackboard(self) -> Blackboard:
        return self.ctx.blackboard


class _SessionResolver(LeafResolver):
    """Prompts the human for every leaf, except leaves marked mode=scripted,
    which consume the session's script."""

    def __init__(self, session: Session):
        self.session = session

    def _take_answer(self, node: Node) -> Optional[Answer]:
        ans = self.session._answer
        if ans is not None and ans.leaf_id == node.id:
            self.session._answer = None
            return ans
        return None

    def _request(self, node: Node, kind: str, options: Optional[list[str]] = None) -> None:
        s = self.session
        if s.pending_prompt is None and s._captured_prompt is None:
            s._captured_prompt = Prompt(node.id, kind, node.label, options)

    def _resolve_basic(self, node: Node, kind: str) -> Status:
        ans = self._take_answer(node)
        if ans is not None:
            return ans.status  # validated by session_step
        self._request(node, kind)
        return RUNNING

    def resolve_action(self, node: Node, blackboard: Blackboard) -> Status:
        if node.params.get("mode") == "scripted":
            return self._require_script(node).resolve_action(node, blackboard)
        return self._resolve_basic(node, "action")

    def resolve_condition(self, node: Node, blackboard: ReadOnlyBlackboard) -> Status:
        if node.params.get("mode") == "scripted":
            return self._require_script(node).resolve_condition(node, blackboard)
        return self._resolve_basic(node, "condition")

    def resolve_select(self, node: Node, options: list[str], blackboard) -> Optional[int]:
        if node.params.get("mode") == "scripted":
            return self._require_script(node).resolve_select(node, options, blackboard)
        ans = self._take_answer(node)
        if ans is not None:
            return ans.option
        self._request(node, "select", list(options))
        return None

    def _require_script(self, node: Node) -> ScriptedResolver:
        script = self.session._scripted
        if script is None:
            raise ExecutionError(
                f"leaf {node.id!r} has mode=scripted but the session carries no script",
                leaf_id=node.id,
            )
        return script


def session_start(
    tree: Tree,
    initial_blackboard: Optional[dict[str, Any]] = None,
    script: Optional[ResolutionScript] = None,
    session_id: Optional[str] = None,
) -> Session:
    """Fresh session at tick 0 with no pending prompt."""
    return Session(tree, initial_blackboard, script, session_id)


def session_step(session: Session, answer: Optional[Answer] = None) -> SessionUpdate:
    """Advance to the next prompt or to termination.

    If a prompt is pending the answer must address it; with no pending prompt
    the answer must be absent.
    """
    if session.finished:
        raise SessionProtocolError("session already finished")
    if answer is not None:
        if session.pending_prompt is None:
            raise SessionProtocolError("no pending prompt")
        _validate_answer(session.pending_prompt, answer)
        session._answer = answer
        session.pending_prompt = None
    elif session.pending_prompt is not None:
        raise SessionProtocolError(
            f"prompt pending for leaf {session.pending_prompt.leaf_id!r}; an answer is required"
        )

    ctx = session.ctx
    first_new_event = len(ctx.trace)
    final: Optional[Status] = None
    for _ in range(session.max_ticks_per_step):
        ctx.tick_index = session.ticks
        status = tick(session.tree, ctx)
        session.ticks += 1
        if status is not RUNNING:
            session.finished = True
            session.final_status = status
            session._captured_prompt = None
            final = status
            break
        if session._captured_prompt is not None:
            session.pending_prompt = session._captured_prompt
            session._captured_prompt = None
            break
    else:
        raise ExecutionError("session exceeded its tick budget without prompting or finishing")

    session._answer = None
    return SessionUpdate(
        events=list(ctx.trace[first_new_event:]),
        prompt=session.pending_prompt,
        final_status=final,
    )


def _validate_answer(prompt: Prompt, answer: Answer) -> None:
    if answer.leaf_id != prompt.leaf_id:
        raise SessionProtocolError(
            f"answer for wrong leaf id: prompt is for {prompt.leaf_id!r}, "
            f"answer names {answer.leaf_id!r}"
        )
    if prompt.kind == "select":
        if answer.option is None:
            raise SessionProtocolError("select prompts are answered with an option index")
        count = len(prompt.options or [])
        if not (0 <= answer.option < count):
            raise SessionProtocolError(
                f"option {answer.option} out of range 0..{count - 1}"
            )
    else:
        if answer.status not in (SUCCESS, FAILURE):
            raise SessionProtocolError(
                f"{prompt.kind} prompts are answered with success or failure"
            )
