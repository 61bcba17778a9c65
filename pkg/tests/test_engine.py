"""Tick-semantics tests for every node kind, driven through scripts or
hand-rolled resolvers."""

import pytest

from btkit import (
    Blackboard,
    ContractViolationError,
    ExecutionError,
    LeafResolver,
    ResolutionScript,
    TickContext,
    parse_tree,
    reset,
    run_scripted,
    tick,
)
from btkit.model import FAILURE, RUNNING, SUCCESS

from conftest import assert_trace_nested

S, F, R = SUCCESS, FAILURE, RUNNING


def run(text: str, outcomes: dict, choices: dict | None = None, **kw):
    tree = parse_tree(text)
    script = ResolutionScript(outcomes=outcomes, choices=choices or {})
    return run_scripted(tree, script, **kw)


def exits(result, node_id):
    return [e.status for e in result.trace if e.node == node_id and e.phase == "exit"]


# -- sequence / selector ----------------------------------------------------

SEQ3 = 'tree "t" { sequence { action "a" action "b" action "c" } }'


def test_sequence_all_success():
    result = run(SEQ3, {"a": [S], "b": [S], "c": [S]})
    assert result.final_status is S


def test_sequence_stops_at_first_failure_without_ticking_the_rest():
    result = run(SEQ3, {"a": [S], "b": [F], "c": [S]})
    assert result.final_status is F
    assert not result.entered("c")


def test_selector_all_fail():
    result = run('tree "t" { selector { condition "a" condition "b" } }',
                 {"a": [F], "b": [F]})
    assert result.final_status is F


def test_selector_failure_then_success_ticks_in_order():
    result = run('tree "t" { selector { condition "a" action "b" } }',
                 {"a": [F], "b": [S]})
    assert result.final_status is S
    enters = [e.node for e in result.trace if e.phase == "enter" and e.node in "ab"]
    assert enters == ["a", "b"]


def test_selector_short_circuits_after_success():
    result = run('tree "t" { selector { condition "a" action "b" } }', {"a": [S]})
    assert result.final_status is S
    assert not result.entered("b")


def test_strictly_increasing_child_order_no_gaps():
    result = run(SEQ3, {"a": [S], "b": [S], "c": [F]})
    order = [e.node for e in result.trace if e.phase == "enter" and e.node in "abc"]
    assert order == ["a", "b", "c"]


def test_degenerate_single_child_composite_behaves_as_child():
    for text, outcome in [
        ('tree "t" { sequence { action "a" } }', F),
        ('tree "t" { selector { action "a" } }', F),
    ]:
        assert run(text, {"a": [F]}).final_status is outcome


# -- parallel ---------------------------------------------------------------


def test_parallel_all_success():
    result = run('tree "t" { parallel(m=2, n=1) { condition "a" action "b" } }',
                 {"a": [S], "b": [S]})
    assert result.final_status is S


def test_parallel_failure_threshold_halts_running_sibling():
    text = '''tree "t" {
      blackboard { done: int = 0 }
      parallel(m=2, n=1) {
        repeat(until done > 0) { condition "mon" }
        action "work" long_running=true
      }
    }'''
    result = run(text, {"mon": [S, F], "work": [R, R]})
    assert result.final_status is F
    halted = [e for e in result.trace if e.phase == "halted"]
    assert [e.node for e in halted] == ["work"]
    parallel_exit = max(i for i, e in enumerate(result.trace)
                        if e.node == "parallel" and e.phase == "exit")
    assert all(result.trace.index(e) < parallel_exit for e in halted)


def test_parallel_success_threshold_drops_running_sibling_silently():
    text = '''tree "t" {
      parallel(m=1, n=2) {
        action "fast"
        action "slow" long_running=true
      }
    }'''
    result = run(text, {"fast": [S], "slow": [R]})
    assert result.final_status is S
    assert not any(e.phase == "halted" for e in result.trace)


def test_parallel_halt_clears_descendant_memory():
    text = '''tree "t" {
      blackboard { done: int = 0 }
      parallel(m=2, n=1) {
        repeat(until done > 0) { condition "mon" }
        sequence { action "w1" long_running=true action "w2" }
      }
    }'''
    tree = parse_tree(text)
    script = ResolutionScript(outcomes={"mon": [S, F], "w1": [R, R]})
    result = run_scripted(tree, script)
    assert result.final_status is F
    halted_nodes = {e.node for e in result.trace if e.phase == "halted"}
    assert halted_nodes == {"sequence", "w1"}


def test_parallel_with_unreachable_thresholds_stays_running():
    # m=2 and n=2 over two settled children (one success, one failure) can
    # never meet either threshold; the composite reports running until the
    # budget stops the run.
    text = 'tree "t" { parallel(m=2, n=2) { action "a" action "b" } }'
    result = run(text, {"a": [S], "b": [F]}, max_ticks=5)
    assert result.budget_exhausted
    assert exits(result, "a") == [S]  # settled children are never re-ticked


def test_parallel_ticks_every_unfinished_child_each_tick():
    text = '''tree "t" {
      parallel(m=3, n=3) { action "a" action "b" long_running=true action "c" }
    }'''
    result = run(text, {"a": [S], "b": [R, S], "c": [S]})
    assert result.final_status is S
    assert exits(result, "a") == [S]          # finished children are not re-ticked
    assert exits(result, "b") == [R, S]


# -- decorators ---------------------------------------------------------------


def test_retry_succeeds_on_third_attempt():
    result = run('tree "t" { retry(3) { action "a" } }', {"a": [F, F, S]})
    assert result.final_status is S
    assert exits(result, "a") == [F, F, S]
    assert result.ticks_used == 1


def test_retry_two_attempts_exhausted():
    result = run('tree "t" { retry(2) { action "a" } }', {"a": [F, F]})
    assert result.final_status is F
    assert exits(result, "a") == [F, F]


def test_retry_attempt_bound_holds_for_any_script():
    # even with more failures on offer, the child is never ticked a 4th time
    result = run('tree "t" { retry(3) { action "a" } }', {"a": [F] * 10})
    assert len(exits(result, "a")) == 3


def test_retry_counter_persists_across_ticks():
    text = 'tree "t" { retry(2) { action "a" long_running=true } }'
    result = run(text, {"a": [R, F, R, F]})
    assert result.final_status is F
    assert exits(result, "a") == [R, F, R, F]


def test_repeat_bounded_runs_child_n_times():
    result = run('tree "t" { repeat(3) { action "a" } }', {"a": [S, S, S]})
    assert result.final_status is S
    assert exits(result, "a") == [S, S, S]


def test_repeat_propagates_child_failure():
    result = run('tree "t" { repeat(3) { action "a" } }', {"a": [S, F]})
    assert result.final_status is F


def test_repeat_until_predicate_stops_after_write():
    text = '''tree "t" {
      blackboard { x: int = 0 }
      repeat(until x > 0) { action "bump" set="x=1" }
    }'''
    result = run(text, {"bump": [S]})
    assert result.final_status is S
    assert exits(result, "bump") == [S]
    assert result.final_blackboard.get("x") == 1


def test_repeat_until_true_at_start_skips_the_child():
    text = '''tree "t" {
      blackboard { x: int = 1 }
      repeat(until x > 0) { action "bump" }
    }'''
    result = run(text, {})
    assert result.final_status is S
    assert not result.entered("bump")


def test_repeat_until_iterates_once_per_tick():
    text = '''tree "t" {
      blackboard { x: int = 0 }
      repeat(until x > 0) { action "sample" }
    }'''
    result = run(text, {"sample": [S, S, S]}, max_ticks=3)
    assert result.budget_exhausted
    assert result.outcome == "budget_exhausted"
    assert exits(result, "sample") == [S, S, S]  # exactly one sample per tick


def test_repeat_until_missing_key_is_an_execution_error():
    text = 'tree "t" { repeat(until ghost > 0) { action "a" } }'
    with pytest.raises(ExecutionError):
        run(text, {"a": [S]})


def test_invert_swaps_success_and_failure():
    assert run('tree "t" { invert { action "a" } }', {"a": [S]}).final_status is F
    assert run('tree "t" { invert { action "a" } }', {"a": [F]}).final_status is S


def test_invert_passes_running_through():
    result = run('tree "t" { invert { action "a" long_running=true } }', {"a": [R, F]})
    assert result.final_status is S
    assert result.ticks_used == 2


# -- recovery -----------------------------------------------------------------


def test_recovery_failure_falls_back_same_tick():
    text = 'tree "t" { recovery { action "main" action "fb" } }'
    result = run(text, {"main": [F], "fb": [S]})
    assert result.final_status is S
    assert exits(result, "fb") == [S]
    assert result.ticks_used == 1


def test_recovery_reports_fallback_failure():
    result = run('tree "t" { recovery { action "main" action "fb" } }',
                 {"main": [F], "fb": [F]})
    assert result.final_status is F


def test_recovery_success_skips_fallback():
    result = run('tree "t" { recovery { action "main" action "fb" } }', {"main": [S]})
    assert result.final_status is S
    assert not result.entered("fb")


def test_recovery_resumes_running_fallback_without_reticking_main():
    text = 'tree "t" { recovery { action "main" action "fb" long_running=true } }'
    result = run(text, {"main": [F], "fb": [R, S]})
    assert result.final_status is S
    assert exits(result, "main") == [F]   # main not re-attempted on tick 2
    assert exits(result, "fb") == [R, S]


# -- failure propagation and traces --------------------------------------------


def test_failure_propagates_to_the_root(blood_draw):
    script = ResolutionScript(outcomes={
        "secure_equipment": [S], "secure_paperwork": [S], "patient_ready": [S],
        "left_arm_vein_suitable": [F], "right_arm_vein_suitable": [F],
    })
    result = run_scripted(blood_draw.tree, script)
    assert result.final_status is F
    root_exits = [e.status for e in result.trace if e.node == "root" and e.phase == "exit"]
    assert root_exits == [F]


def test_traces_nest_properly(airway):
    script = ResolutionScript(outcomes={
        "spo2_above_93": [S],
        "laryngoscopy": [F, F, S],
        "ventilation_confirmed": [S],
        "secure_airway": [S],
    })
    result = run_scripted(airway.tree, script)
    assert_trace_nested(airway.tree, result.trace)


def test_determinism_same_script_same_trace():
    outcomes = {"a": [F, F, S]}
    r1 = run('tree "t" { retry(3) { action "a" } }', outcomes)
    r2 = run('tree "t" { retry(3) { action "a" } }', outcomes)
    assert r1.final_status is r2.final_status
    assert r1.trace == r2.trace


# -- leaves and resolver contracts ---------------------------------------------


class _FnResolver(LeafResolver):
    def __init__(self, action=None, condition=None, select=None):
        self._action, self._condition, self._select = action, condition, select

    def resolve_action(self, node, blackboard):
        return self._action(node, blackboard)

    def resolve_condition(self, node, blackboard):
        return self._condition(node, blackboard)

    def resolve_select(self, node, options, blackboard):
        return self._select(node, options, blackboard)


def _ctx_for(tree, resolver, initial=None):
    return TickContext(Blackboard.from_tree(tree, initial), resolver, trace=[])


def test_condition_purity_blackboard_unchanged():
    tree = parse_tree('tree "t" { blackboard { x: int = 5 } condition "ready" }')
    ctx = _ctx_for(tree, _FnResolver(condition=lambda n, bb: S))
    before = ctx.blackboard.as_dict()
    assert tick(tree, ctx) is S
    assert ctx.blackboard.as_dict() == before


def test_condition_resolver_cannot_write():
    tree = parse_tree('tree "t" { blackboard { x: int = 5 } condition "ready" }')

    def naughty(node, bb):
        bb.set("x", 6)
        return S

    ctx = _ctx_for(tree, _FnResolver(condition=naughty))
    with pytest.raises(ContractViolationError):
        tick(tree, ctx)


def test_unresolved_leaf_names_the_leaf():
    tree = parse_tree('tree "t" { action "do it" }')
    ctx = _ctx_for(tree, _FnResolver(action=lambda n, bb: None))
    with pytest.raises(ExecutionError) as err:
        tick(tree, ctx)
    assert "do_it" in str(err.value)


def test_scripted_running_requires_long_running_declaration():
    with pytest.raises(ExecutionError) as err:
        run('tree "t" { action "a" }', {"a": [R]})
    assert "long_running" in str(err.value)


SELECT_TREE = '''tree "t" {
  blackboard { plans: string_list  chosen: string }
  sequence {
    action "fill" push="plans=first"
    action "fill2" push="plans=second"
    select "pick" options=plans into chosen
  }
}'''


def test_select_writes_the_chosen_option():
    result = run(SELECT_TREE, {"fill": [S], "fill2": [S]}, choices={"pick": 1})
    assert result.final_status is S
    assert result.final_blackboard.get("chosen") == "second"


def test_select_pending_returns_running():
    tree = parse_tree(SELECT_TREE)
    scripted = {"fill": [S], "fill2": [S]}

    class Mixed(LeafResolver):
        def resolve_action(self, node, bb):
            return scripted[node.id].pop(0)

        def resolve_condition(self, node, bb):
            raise AssertionError

        def resolve_select(self, node, options, bb):
            return None

    ctx = _ctx_for(tree, Mixed())
    assert tick(tree, ctx) is R


def test_select_choice_out_of_range_is_an_error():
    with pytest.raises(ExecutionError):
        run(SELECT_TREE, {"fill": [S], "fill2": [S]}, choices={"pick": 5})


def test_select_needs_at_least_two_options():
    text = SELECT_TREE.replace('action "fill2" push="plans=second"', 'action "fill2"')
    with pytest.raises(ExecutionError) as err:
        run(text, {"fill": [S], "fill2": [S]}, choices={"pick": 0})
    assert "at least 2" in str(err.value)


def test_action_effects_apply_only_on_success():
    text = '''tree "t" {
      blackboard { x: int = 0 }
      sequence { action "a" set="x=7" }
    }'''
    assert run(text, {"a": [F]}).final_blackboard.get("x") == 0
    assert run(text, {"a": [S]}).final_blackboard.get("x") == 7


# -- reset ----------------------------------------------------------------------


def test_reset_restarts_retry_counter():
    tree = parse_tree('tree "t" { retry(3) { action "a" long_running=true } }')
    script = ResolutionScript(outcomes={"a": [F, R, S, F, F, F]})
    ctx = TickContext(Blackboard.from_tree(tree), __import__("btkit").execution.ScriptedResolver(script), trace=[])
    assert tick(tree, ctx) is R   # one failure consumed, then running
    reset(tree, ctx)
    assert ctx.memory == {}
    # after reset the retry gets a full budget of 3 again: S on first attempt
    assert tick(tree, ctx) is S


def test_reset_is_idempotent_and_leaves_blackboard():
    tree = parse_tree('tree "t" { blackboard { x: int = 3 } action "a" }')
    ctx = _ctx_for(tree, _FnResolver(action=lambda n, bb: S))
    reset(tree, ctx)
    reset(tree, ctx)
    assert ctx.memory == {}
    assert ctx.blackboard.get("x") == 3


def test_conditions_never_write_across_random_runs():
    """Purity sweep: across many random scripted runs, no condition exit
    event ever carries a blackboard delta."""
    import random as _random
    from btkit.generate import oracle_tree
    from btkit.model import NodeKind, attempt_bounds

    rng = _random.Random(424242)
    for _ in range(50):
        tree = oracle_tree(rng)
        bounds = attempt_bounds(tree)
        condition_ids = {n.id for n in tree.walk() if n.kind is NodeKind.CONDITION}
        script = ResolutionScript(outcomes={
            n.id: [rng.choice((S, F)) for _ in range(bounds[n.id])]
            for n in tree.walk() if n.is_leaf
        })
        result = run_scripted(tree, script)
        for event in result.trace:
            if event.node in condition_ids and event.phase == "exit":
                assert not event.delta


def test_memory_empty_after_terminal_tick(airway):
    script = ResolutionScript(outcomes={
        "spo2_above_93": [S],
        "laryngoscopy": [F, F, F],
        "intubating_sga": [F, F],
        "surgical_airway": [F],
    })
    result = run_scripted(airway.tree, script)
    assert result.final_status is F
