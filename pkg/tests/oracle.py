"""Independent reference interpreter used as the ground truth in tests.

Deliberately written without ticks, per-node memory, or resume state: plain
recursion that consumes one scripted outcome per leaf attempt. If the engine
and this function ever disagree on a final status, the engine is wrong.
"""

from btkit.model import FAILURE, NodeKind, SUCCESS, Status, Tree


def reference_status(tree: Tree, outcomes: dict[str, list[Status]]) -> Status:
    positions: dict[str, int] = {}

    def next_outcome(leaf: str) -> Status:
        i = positions.get(leaf, 0)
        positions[leaf] = i + 1
        return outcomes[leaf][i]

    def ev(node) -> Status:
        kind = node.kind
        if kind in (NodeKind.ACTION, NodeKind.CONDITION):
            return next_outcome(node.id)
        if kind is NodeKind.SEQUENCE:
            for child in node.children:
                if ev(child) is FAILURE:
                    return FAILURE
            return SUCCESS
        if kind is NodeKind.SELECTOR:
            for child in node.children:
                if ev(child) is SUCCESS:
                    return SUCCESS
            return FAILURE
        if kind is NodeKind.INVERT:
            return SUCCESS if ev(node.children[0]) is FAILURE else FAILURE
        if kind is NodeKind.RETRY:
            for _ in range(node.params["attempts"]):
                if ev(node.children[0]) is SUCCESS:
                    return SUCCESS
            return FAILURE
        if kind is NodeKind.REPEAT:
            for _ in range(node.params["count"]):
                if ev(node.children[0]) is FAILURE:
                    return FAILURE
            return SUCCESS
        if kind is NodeKind.RECOVERY:
            main, fallback = node.children
            if ev(main) is SUCCESS:
                return SUCCESS
            return ev(fallback)
        raise AssertionError(f"reference interpreter does not model {kind}")

    return ev(tree.root_child)
