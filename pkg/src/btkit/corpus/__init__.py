"""Checked-in procedure trees with named structural landmarks.

Each entry ships as a ``.bt`` source file plus a sidecar JSON mapping
landmark names (stable test handles like ``surgical_airway``) to node ids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from ..dsl import parse_tree
from ..errors import BtkitError, UnknownLeafError
from ..model import Tree, subtree

CORPUS_NAMES = ("blood_draw", "airway", "tumor_ablation")


@dataclass
class CorpusEntry:
    name: str
    source: str
    tree: Tree
    landmarks: dict[str, str]

    def landmark(self, name: str) -> str:
        """Node id behind a landmark name; raw node ids pass through."""
        if name in self.landmarks:
            return self.landmarks[name]
        if self.tree.has_node(name):
            return name
        raise UnknownLeafError(
            f"{name!r} is neither a landmark nor a node id of {self.name!r}"
        )

    def subtree(self, name: str) -> Tree:
        return subtree(self.tree, self.landmark(name))


def _data(filename: str) -> str:
    return resources.files(__package__).joinpath("data", filename).read_text(encoding="utf-8")


def load_example(name: str) -> CorpusEntry:
    if name not in CORPUS_NAMES:
        raise BtkitError(f"unknown corpus entry {name!r}; pick one of {', '.join(CORPUS_NAMES)}")
    source = _data(f"{name}.bt")
    tree = parse_tree(source)
    sidecar = json.loads(_data(f"{name}.landmarks.json"))
    landmarks = dict(sidecar["landmarks"])
    for landmark, node_id in landmarks.items():
        if not tree.has_node(node_id):
            raise BtkitError(
                f"landmark {landmark!r} of {name!r} points at missing node {node_id!r}"
            )
    return CorpusEntry(name=name, source=source, tree=tree, landmarks=landmarks)
