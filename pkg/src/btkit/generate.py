"""Seeded random tree generation for property and equivalence testing.

Three profiles:

* :func:`oracle_tree` / :func:`fsm_tree` — executable trees (no parallel, no
  repeat-until, resolver-driven leaves only) with a cap on total attempt
  slots so outcome assignments stay exhaustively enumerable.
* :func:`roundtrip_tree` — full grammar coverage (parallel thresholds,
  schemas, predicates, effects, selects, awkward labels) for
  parse/serialize round-trip testing; these trees are not meant to run.
"""

from __future__ import annotations

import random
from typing import Optional

from .dsl import slugify
from .model import Effect, Node, NodeKind, Predicate, Tree, attempt_bounds, validate

_WORDS = (
    "check", "move", "scan", "probe", "align", "clamp", "flush",
    "signal", "verify", "prepare", "record", "measure", "hold", "drain",
)

_WEIRD_LABELS = (
    "",
    "  spaced  out  ",
    'quote " inside',
    "back\\slash",
    "tab\there",
    "line\nbreak",
    "unicode · λ → ✓",
    "retry",  # collides with a keyword on purpose; labels are free-form
)


class _Gen:
    def __init__(
        self,
        rng: random.Random,
        max_depth: int,
        max_leaves: int,
        max_slots: Optional[int],
        full_grammar: bool,
    ):
        self.rng = rng
        self.max_depth = max_depth
        self.leaf_budget = max_leaves
        self.slot_budget = max_slots if max_slots is not None else 10**9
        self.full = full_grammar
        self.n = 0
        self.schema: dict[str, str] = {}
        self.defaults: dict[str, object] = {}
        if full_grammar and rng.random() < 0.8:
            self._make_schema()

    def _make_schema(self) -> None:
        rng = self.rng
        for i in range(rng.randint(1, 4)):
            type_name = rng.choice(("bool", "int", "real", "string", "string_list"))
            key = f"k{i}_{type_name}"
            self.schema[key] = type_name
            if type_name != "string_list" and rng.random() < 0.6:
                self.defaults[key] = {
                    "bool": rng.random() < 0.5,
                    "int": rng.randint(-5, 20),
                    "real": round(rng.uniform(-3, 30), 3),
                    "string": rng.choice(("alpha", "beta", "gamma")),
                }[type_name]

    def _fresh(self) -> int:
        self.n += 1
        return self.n

    def _label(self) -> tuple[str, Optional[str]]:
        """(label, explicit_id). Awkward labels always get an explicit id."""
        n = self._fresh()
        if self.full and self.rng.random() < 0.25:
            return self.rng.choice(_WEIRD_LABELS), f"leaf_{n}"
        label = f"{self.rng.choice(_WORDS)} {n}"
        if self.full and self.rng.random() < 0.3:
            return label, f"leaf_{n}"
        return label, None

    def _keys_of(self, type_name: str) -> list[str]:
        return [k for k, t in self.schema.items() if t == type_name]

    def leaf(self, factor: int) -> Node:
        rng = self.rng
        self.leaf_budget -= 1
        self.slot_budget -= factor
        label, explicit = self._label()

        if self.full and rng.random() < 0.1:
            lists = self._keys_of("string_list")
            strings = self._keys_of("string")
            if lists and strings:
                node = Node(
                    id="", kind=NodeKind.SELECT, label=label,
                    params={"options_key": rng.choice(lists), "into_key": rng.choice(strings)},
                )
                self._finish_leaf(node, explicit)
                return node

        kind = NodeKind.CONDITION if rng.random() < 0.4 else NodeKind.ACTION
        node = Node(id="", kind=kind, label=label)
        if self.full:
            if kind is NodeKind.CONDITION and self.schema and rng.random() < 0.3:
                pred = self._predicate()
                if pred is not None:
                    node.params["check"] = pred
            if kind is NodeKind.ACTION and rng.random() < 0.3:
                eff = self._effect()
                if eff is not None:
                    name, effect = eff
                    node.params[name] = effect
            if rng.random() < 0.2:
                node.params["mode"] = rng.choice(("scripted", "interactive"))
            if rng.random() < 0.15:
                node.params["long_running"] = True
        self._finish_leaf(node, explicit)
        return node

    def _finish_leaf(self, node: Node, explicit: Optional[str]) -> None:
        node.id = explicit or slugify(node.label) or f"leaf_{self.n}"

    def _predicate(self) -> Optional[Predicate]:
        rng = self.rng
        candidates = [(k, t) for k, t in self.schema.items() if t != "string_list"]
        if not candidates:
            return None
        key, type_name = rng.choice(candidates)
        if type_name == "bool":
            return Predicate(key, "=", rng.random() < 0.5)
        if type_name == "string":
            return Predicate(key, "=", rng.choice(("alpha", "beta", "with space")))
        op = rng.choice(("=", "<", ">"))
        value = rng.randint(-5, 20) if type_name == "int" else round(rng.uniform(-3, 30), 3)
        return Predicate(key, op, value)

    def _effect(self) -> Optional[tuple[str, Effect]]:
        rng = self.rng
        lists = self._keys_of("string_list")
        if lists and rng.random() < 0.4:
            return "push", Effect(rng.choice(lists), rng.choice(("plan a", "plan b", "x")))
        scalars = [(k, t) for k, t in self.schema.items() if t != "string_list"]
        if not scalars:
            return None
        key, type_name = rng.choice(scalars)
        raw = {
            "bool": rng.choice(("true", "false")),
            "int": str(rng.randint(-5, 20)),
            "real": repr(round(rng.uniform(-3, 30), 3)),
            "string": rng.choice(("done", "pending")),
        }[type_name]
        return "set", Effect(key, raw)

    def node(self, depth: int, factor: int) -> Node:
        rng = self.rng
        if depth >= self.max_depth or self.leaf_budget <= 1 or self.slot_budget < 2 * factor:
            return self.leaf(factor)
        roll = rng.random()
        if roll < 0.35:
            return self.leaf(factor)
        if roll < 0.70:
            kind = rng.choice((NodeKind.SEQUENCE, NodeKind.SELECTOR))
            if self.full and rng.random() < 0.15:
                kind = NodeKind.PARALLEL
            children = [self.node(depth + 1, factor)]
            while (
                len(children) < 4
                and self.leaf_budget > 0
                and self.slot_budget >= factor
                and rng.random() < 0.6
            ):
                children.append(self.node(depth + 1, factor))
            params: dict = {}
            if kind is NodeKind.PARALLEL:
                params = {"m": rng.randint(1, len(children)), "n": rng.randint(1, len(children))}
            return self._inner(kind, children, params)
        if roll < 0.88:
            kind = rng.choice((NodeKind.RETRY, NodeKind.REPEAT, NodeKind.INVERT))
            if kind is NodeKind.INVERT:
                return self._inner(kind, [self.node(depth + 1, factor)], {})
            max_bound = max(1, min(3, self.slot_budget // factor))
            bound = rng.randint(1, max_bound)
            if kind is NodeKind.REPEAT and self.full and rng.random() < 0.25:
                pred = self._predicate()
                if pred is not None:
                    return self._inner(kind, [self.node(depth + 1, factor)], {"until": pred})
            params = {"attempts": bound} if kind is NodeKind.RETRY else {"count": bound}
            return self._inner(kind, [self.node(depth + 1, factor * bound)], params)
        # recovery wants room for both branches
        if self.leaf_budget >= 2 and self.slot_budget >= 2 * factor:
            main = self.node(depth + 1, factor)
            fallback = self.node(depth + 1, factor)
            return self._inner(NodeKind.RECOVERY, [main, fallback], {})
        return self.leaf(factor)

    def _inner(self, kind: NodeKind, children: list[Node], params: dict) -> Node:
        node = Node(id="", kind=kind, children=children, params=params)
        node.id = f"{kind.value}_{self._fresh()}"
        return node


def _build(gen: _Gen, name: str) -> Tree:
    top = gen.node(0, 1)
    root = Node(id="root", kind=NodeKind.ROOT, children=[top])
    return Tree(
        name=name,
        root=root,
        blackboard_schema=gen.schema,
        blackboard_defaults=gen.defaults,
    )


def _executable(rng: random.Random, prefix: str, max_leaves: int, max_slots: int) -> Tree:
    # Slot budgets can overdraw slightly through recovery branches; rebuild
    # until the cap genuinely holds so exhaustive enumeration stays cheap.
    while True:
        gen = _Gen(rng, max_depth=4, max_leaves=max_leaves, max_slots=max_slots,
                   full_grammar=False)
        tree = _build(gen, f"{prefix}_{rng.randint(0, 10**9)}")
        if validate(tree):
            continue
        total = sum(b for b in attempt_bounds(tree).values() if b is not None)
        leaves = sum(1 for node in tree.walk() if node.is_leaf)
        if total <= max_slots and leaves <= max_leaves:
            return tree


def oracle_tree(rng: random.Random) -> Tree:
    """Executable tree for engine-versus-reference checks: depth <= 4,
    <= 10 leaves, <= 10 total attempt slots, statuses decided by scripts."""
    return _executable(rng, "gen_oracle", max_leaves=10, max_slots=10)


def fsm_tree(rng: random.Random) -> Tree:
    """Executable tree small enough to enumerate all outcome sequences
    against its FSM (<= 12 attempt slots)."""
    return _executable(rng, "gen_fsm", max_leaves=12, max_slots=12)


def roundtrip_tree(rng: random.Random) -> Tree:
    """Tree exercising the whole grammar for serializer round-trip tests."""
    while True:
        gen = _Gen(rng, max_depth=5, max_leaves=14, max_slots=None, full_grammar=True)
        name = rng.choice((f"suite {rng.randint(0, 999)}", 'tricky "name"', "line\nbreak", "t"))
        tree = _build(gen, name)
        if not validate(tree):
            return tree
