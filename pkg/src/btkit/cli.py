"""Command-line entry point.

Exit codes are stable: 0 success, 1 validation/parse problems (including
missing files and unknown leaves), 2 execution errors, 3 a property check
that ran cleanly but does not hold. Human summaries go to stdout; machine
artifacts (traces, reports, DOT) only to the paths given by flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import corpus
from .analysis import check_last_resort, export_dot, to_fsm
from .dsl import parse
from .errors import (
    BtkitError,
    UnknownLeafError,
    UnsupportedNodeError,
)
from .execution import (
    DEFAULT_TICK_BUDGET,
    ResolutionScript,
    StochasticModel,
    run_scripted,
    simulate,
)
from .model import Tree, subtree
from .trace import dump_trace

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_EXECUTION = 2
EXIT_PROPERTY = 3


def _load(path_or_name: str) -> tuple[Optional[Tree], Optional[corpus.CorpusEntry]]:
    """Resolve a corpus name or a .bt file path; prints diagnostics itself."""
    if path_or_name in corpus.CORPUS_NAMES:
        entry = corpus.load_example(path_or_name)
        return entry.tree, entry
    path = Path(path_or_name)
    try:
        text = path.read_text(encoding="utf-8", errors="replace")
    except OSError as e:
        print(f"error: cannot read {path_or_name}: {e.strerror or e}")
        return None, None
    result = parse(text)
    for diag in result.diagnostics:
        print(f"{path_or_name}:{diag}")
    return result.tree, None


def _narrow(tree: Tree, entry: Optional[corpus.CorpusEntry], selector: Optional[str]) -> Tree:
    if not selector:
        return tree
    if entry is not None:
        return entry.subtree(selector)
    return subtree(tree, selector)


def _add_tree_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("tree", help="path to a .bt file, or a corpus name "
                               f"({', '.join(corpus.CORPUS_NAMES)})")


def _add_subtree_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--subtree", metavar="NODE",
                   help="restrict to a subtree by node id (or corpus landmark)")


def cmd_validate(args: argparse.Namespace) -> int:
    if args.tree in corpus.CORPUS_NAMES:
        corpus.load_example(args.tree)  # raises on breakage; corpus is pre-validated
        print(f"{args.tree}: ok")
        return EXIT_OK
    tree, _ = _load(args.tree)
    if tree is None:
        return EXIT_INVALID
    print(f"{args.tree}: ok")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    tree, entry = _load(args.tree)
    if tree is None:
        return EXIT_INVALID
    tree = _narrow(tree, entry, args.subtree)
    try:
        script = ResolutionScript.from_json(Path(args.script).read_text(encoding="utf-8"))
    except OSError as e:
        print(f"error: cannot read {args.script}: {e.strerror or e}")
        return EXIT_INVALID
    except (ValueError, KeyError) as e:
        print(f"error: bad script file: {e}")
        return EXIT_INVALID
    result = run_scripted(tree, script, max_ticks=args.max_ticks)
    if args.trace:
        Path(args.trace).write_text(dump_trace(result.trace), encoding="utf-8")
        print(f"trace: {args.trace} ({len(result.trace)} events)")
    print(f"outcome: {result.outcome} after {result.ticks_used} tick(s)")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    tree, entry = _load(args.tree)
    if tree is None:
        return EXIT_INVALID
    tree = _narrow(tree, entry, args.subtree)
    leaf_p = {}
    for override in args.p or []:
        leaf, sep, value = override.partition("=")
        if not sep:
            print(f"error: --p expects leaf=probability, got {override!r}")
            return EXIT_INVALID
        try:
            leaf_p[leaf] = float(value)
        except ValueError:
            print(f"error: bad probability {value!r} for leaf {leaf!r}")
            return EXIT_INVALID
    try:
        model = StochasticModel(seed=args.seed, default_p=args.p_default, leaf_p=leaf_p)
    except ValueError as e:
        print(f"error: {e}")
        return EXIT_INVALID
    report = simulate(tree, model, runs=args.runs, max_ticks=args.max_ticks)
    if args.report:
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
        print(f"report: {args.report}")
    print(
        f"runs: {report.runs}  success_rate: {report.success_rate:.6f}  "
        f"mean_ticks: {report.mean_ticks:.3f}  rng: {report.rng}  seed: {report.seed}"
    )
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    tree, entry = _load(args.tree)
    if tree is None:
        return EXIT_INVALID
    tree = _narrow(tree, entry, args.subtree)
    if args.format == "dot":
        text = export_dot(tree)
    else:  # fsm-dot
        text = export_dot(to_fsm(tree))
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {args.format} for {tree.name!r} to {args.out}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    tree, entry = _load(args.tree)
    if tree is None:
        return EXIT_INVALID
    tree = _narrow(tree, entry, args.subtree)
    target, sep, prereq_text = args.require_before.partition("=")
    prerequisites = [p for p in prereq_text.split(",") if p]
    if not sep or not target or not prerequisites:
        print("error: --require-before expects target=leafA,leafB,...")
        return EXIT_INVALID
    if entry is not None:
        target = entry.landmark(target)
        prerequisites = [entry.landmark(p) for p in prerequisites]
    report = check_last_resort(tree, target, prerequisites)
    if report.holds:
        print(
            f"ok: {target} runs only after {', '.join(prerequisites)} exhaust all "
            f"attempts in failure ({report.assignments} assignments checked)"
        )
        return EXIT_OK
    print(f"property violated ({report.assignments} assignments checked):")
    for line in report.failures:
        print(f"  {line}")
    return EXIT_PROPERTY


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve  # deferred: keeps batch commands import-light

    tree, entry = _load(args.tree)
    if tree is None:
        return EXIT_INVALID
    ui_dir = Path(args.ui_dir) if args.ui_dir else _default_ui_dir()
    return serve(tree, host=args.host, port=args.port, ui_dir=ui_dir)


def _default_ui_dir() -> Optional[Path]:
    candidate = Path.cwd() / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="btkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a tree and report diagnostics")
    _add_tree_arg(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("run", help="replay a tree against a resolution script")
    _add_tree_arg(p)
    p.add_argument("script", help="JSON script: outcomes per leaf, choices per select")
    p.add_argument("--max-ticks", type=int, default=DEFAULT_TICK_BUDGET)
    p.add_argument("--trace", metavar="PATH", help="write the event trace here (one JSON per line)")
    _add_subtree_flag(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("simulate", help="Monte-Carlo runs under per-leaf success probabilities")
    _add_tree_arg(p)
    p.add_argument("--p-default", type=float, default=1.0, help="success probability for leaves without an override")
    p.add_argument("--p", action="append", metavar="LEAF=P", help="per-leaf probability override (repeatable)")
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-ticks", type=int, default=DEFAULT_TICK_BUDGET)
    p.add_argument("--report", metavar="PATH", help="write the JSON report here")
    _add_subtree_flag(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("export", help="export a tree (or its FSM) as Graphviz DOT")
    _add_tree_arg(p)
    p.add_argument("--format", choices=("dot", "fsm-dot"), default="dot")
    p.add_argument("--out", required=True, metavar="PATH")
    _add_subtree_flag(p)
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("check", help="exhaustively verify a last-resort ordering property")
    _add_tree_arg(p)
    p.add_argument("--require-before", required=True, metavar="TARGET=LEAF,LEAF",
                   help="target leaf and the leaves that must exhaust all attempts in failure first")
    _add_subtree_flag(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("serve", help="serve interactive sessions (and the UI) over HTTP")
    _add_tree_arg(p)
    p.add_argument("--port", type=int, default=8733)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", metavar="DIR", help="static UI bundle (default: ./frontend/dist if present)")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (UnknownLeafError,) as e:
        print(f"error: {e}")
        return EXIT_INVALID
    except UnsupportedNodeError as e:
        print(f"error: {e}")
        return EXIT_EXECUTION
    except BtkitError as e:
        print(f"error: {e}")
        return EXIT_EXECUTION
    except KeyError as e:
        print(f"error: unknown node {e}")
        return EXIT_INVALID


def entrypoint() -> None:  # console_scripts hook
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
