"""btkit: a behavior-tree engine and toolkit for stepwise procedures.

Author trees in a textual DSL, validate them, tick-execute them against
scripted, stochastic, or human-in-the-loop resolvers, and analyze them by
lowering to finite state machines.
"""

from .blackboard import Blackboard, ReadOnlyBlackboard
from .dsl import (
    ParseDiagnostic,
    ParseError,
    ParseResult,
    SourceSpan,
    parse,
    parse_tree,
    serialize,
)
from .engine import LeafResolver, TickContext, evaluate_predicate, reset, tick
from .errors import (
    BlackboardError,
    BtkitError,
    ContractViolationError,
    ExecutionError,
    ScriptUnderrunError,
    SessionProtocolError,
    TreeInvalidError,
    UnknownLeafError,
    UnsupportedNodeError,
)
from .execution import (
    Answer,
    Prompt,
    ResolutionScript,
    RunResult,
    Session,
    SessionUpdate,
    SimulationReport,
    StochasticModel,
    run_scripted,
    session_start,
    session_step,
    simulate,
)
from .analysis import (
    Fsm,
    ReachabilityAnswer,
    check_last_resort,
    enumerate_scripts,
    export_dot,
    reachability,
    run_fsm,
    to_fsm,
    witness_to_script,
)
from .model import (
    FAILURE,
    Node,
    NodeKind,
    Predicate,
    RUNNING,
    SUCCESS,
    Status,
    Tree,
    Violation,
    attempt_bounds,
    subtree,
    validate,
)
from .trace import TraceEvent, dump_trace

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "Blackboard",
    "BlackboardError",
    "BtkitError",
    "ContractViolationError",
    "ExecutionError",
    "FAILURE",
    "Fsm",
    "LeafResolver",
    "Node",
    "NodeKind",
    "ParseDiagnostic",
    "ParseError",
    "ParseResult",
    "Predicate",
    "Prompt",
    "RUNNING",
    "ReachabilityAnswer",
    "ReadOnlyBlackboard",
    "ResolutionScript",
    "RunResult",
    "SUCCESS",
    "ScriptUnderrunError",
    "Session",
    "SessionProtocolError",
    "SessionUpdate",
    "SimulationReport",
    "SourceSpan",
    "Status",
    "StochasticModel",
    "TickContext",
    "TraceEvent",
    "Tree",
    "TreeInvalidError",
    "UnknownLeafError",
    "UnsupportedNodeError",
    "Violation",
    "attempt_bounds",
    "check_last_resort",
    "dump_trace",
    "enumerate_scripts",
    "evaluate_predicate",
    "export_dot",
    "parse",
    "parse_tree",
    "reachability",
    "reset",
    "run_fsm",
    "run_scripted",
    "serialize",
    "session_start",
    "session_step",
    "simulate",
    "subtree",
    "tick",
    "to_fsm",
    "validate",
    "witness_to_script",
]
