import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from btkit import Answer, ResolutionScript, session_start, session_step
from btkit import corpus
from btkit.model import NodeKind, Tree


@pytest.fixture(scope="session")
def blood_draw():
    return corpus.load_example("blood_draw")


@pytest.fixture(scope="session")
def airway():
    return corpus.load_example("airway")


@pytest.fixture(scope="session")
def ablation():
    return corpus.load_example("tumor_ablation")


def parent_map(tree: Tree) -> dict[str, str]:
    parents = {}
    for node in tree.walk():
        for child in node.children:
            parents[child.id] = node.id
    return parents


def assert_trace_nested(tree: Tree, trace) -> None:
    """Enter/exit events must nest per the tree structure, tick by tick."""
    parents = parent_map(tree)
    ancestors: dict[str, set] = {}
    for node in tree.walk():
        chain = set()
        cur = node.id
        while cur in parents:
            cur = parents[cur]
            chain.add(cur)
        ancestors[node.id] = chain

    stack: list[str] = []
    current_tick = None
    for event in trace:
        if event.tick != current_tick:
            assert not stack, f"tick boundary with open nodes: {stack}"
            current_tick = event.tick
        if event.phase == "enter":
            if stack:
                assert stack[-1] in ancestors[event.node], (
                    f"{event.node} entered under {stack[-1]}, not its ancestor"
                )
            else:
                assert event.node == tree.root.id
            stack.append(event.node)
        elif event.phase == "exit":
            assert stack and stack[-1] == event.node, (
                f"exit of {event.node} but stack top is {stack[-1] if stack else None}"
            )
            stack.pop()
        else:  # halted
            assert any(s in ancestors[event.node] for s in stack), (
                f"halted {event.node} outside its ancestors"
            )
    assert not stack, f"trace ended with open nodes: {stack}"


def drive_session_with_script(tree: Tree, script: ResolutionScript, initial_blackboard=None):
    """Answer every session prompt from the script, in consumption order."""
    session = session_start(tree, initial_blackboard=initial_blackboard)
    positions: dict[str, int] = {}
    update = session_step(session)
    while update.final_status is None:
        prompt = update.prompt
        assert prompt is not None
        if prompt.kind == "select":
            answer = Answer(prompt.leaf_id, option=script.choices[prompt.leaf_id])
        else:
            i = positions.get(prompt.leaf_id, 0)
            positions[prompt.leaf_id] = i + 1
            entry = script.outcomes[prompt.leaf_id][i]
            status = entry[0] if isinstance(entry, tuple) else entry
            answer = Answer(prompt.leaf_id, status=status)
        update = session_step(session, answer)
    return session, update


def leaf_ids(tree: Tree) -> list[str]:
    return [n.id for n in tree.walk() if n.is_leaf]
