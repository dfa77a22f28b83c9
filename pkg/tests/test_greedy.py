import itertools
import random

import pytest

from eosplan.exact import brute_force, solve_clique
from eosplan.greedy import greedy_trace, solve_greedy
from eosplan.model import Plan, is_feasible, make_instance

from helpers import conflict_free_instance, random_instance, small_generated


def test_tiny_a(tiny_a):
    res = solve_greedy(tiny_a)
    assert res.plan.selected == {(0, 0), (1, 1)}
    assert res.objective == -2.0
    _, steps, aborted = greedy_trace(tiny_a)
    assert not aborted
    assert [(s.request, s.inserted, s.attempt) for s in steps] == [(0, True, 0), (1, True, 1)]


def test_all_requests_mutually_exclusive():
    inst = make_instance([[0, 1], [0.5, 1.5], [0.2, 1.2]], acq_duration=10.0, manoeuvre=10.0)
    res = solve_greedy(inst)
    assert len(res.plan) == 1
    assert res.plan.selected == {(0, 0)}


def test_conflict_free_takes_first_attempts():
    inst = conflict_free_instance(5, 3)
    res = solve_greedy(inst)
    assert res.plan.selected == {(r, 0) for r in range(5)}
    assert res.objective == -5.0


def test_higher_score_goes_first():
    inst = make_instance([[0], [2]], acq_duration=5.0, manoeuvre=5.0, scores=[1.0, 2.0])
    assert solve_greedy(inst).plan.selected == {(1, 0)}


def test_repair_moves_blocker():
    # r0 (score 2) goes first at t=0; r1 (score 1) only fits at t=0..4, so r0 moves to t=20
    inst = make_instance([[0, 20], [1]], acq_duration=5.0, manoeuvre=5.0, scores=[2.0, 1.0])
    assert brute_force(inst).objective == -3.0
    _, steps, _ = greedy_trace(inst)
    assert steps[1].inserted and steps[1].moves == ((0, 0, 1),)


def test_repair_keeps_chronology():
    # moving r0 from t=0 to t=40 would put it behind r1 (t=20): not allowed
    inst = make_instance([[0, 40], [20], [1]], acq_duration=5.0, manoeuvre=5.0, scores=[3.0, 2.0, 1.0])
    _, steps, _ = greedy_trace(inst)
    assert [s.inserted for s in steps] == [True, True, False]


def test_time_budget_abort():
    inst = small_generated(1, max_n=30)[0]
    assignment, _, aborted = greedy_trace(inst, time_budget=-1.0)
    assert aborted and assignment == {}
    assert solve_greedy(inst, time_budget=-1.0).objective == 0.0


def _discard_is_justified(inst, assignment, r):
    """Replay oracle: no attempt of r fits even after moving each blocker once."""
    keys_planned = {s: a for s, a in assignment.items()}
    order = sorted(keys_planned, key=lambda s: (inst.requests[s].attempts[keys_planned[s]].start_time, s))
    others = sorted(keys_planned)
    for a in range(len(inst.requests[r].attempts)):
        for combo in itertools.product(*(range(len(inst.requests[s].attempts)) for s in others)):
            trial = dict(zip(others, combo))
            moved = [s for s in others if trial[s] != keys_planned[s]]
            plan = Plan([(r, a), *trial.items()])
            if not is_feasible(inst, plan)[0]:
                continue
            # only requests conflicting with (r, a) in their old slot may move
            blockers = {s for s in others
                        if not is_feasible(inst, Plan([(r, a), (s, keys_planned[s])]))[0]}
            if not set(moved) <= blockers:
                continue
            new_order = sorted(others, key=lambda s: (inst.requests[s].attempts[trial[s]].start_time, s))
            if new_order == order:
                return False
    return True


@pytest.mark.parametrize("seed", range(30))
def test_discards_are_final_and_justified(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, n_requests=rng.randint(2, 5), max_attempts=3, horizon=30.0, scores=True)
    assignment = {}
    _, steps, _ = greedy_trace(inst)
    for step in steps:
        if not step.inserted:
            assert _discard_is_justified(inst, assignment, step.request)
        else:
            for b, _, k in step.moves:
                assignment[b] = k
            assignment[step.request] = step.attempt


@pytest.mark.parametrize("inst", small_generated(20, max_n=22, first_seed=100), ids=lambda i: f"N{i.n_vars}")
def test_feasible_and_ratio_bounds(inst):
    res = solve_greedy(inst)
    assert is_feasible(inst, res.plan)[0]
    opt = solve_clique(inst).objective
    assert 0 < res.objective / opt <= 1


def test_deterministic():
    for inst in small_generated(5, max_n=60, dt=10.0):
        assert solve_greedy(inst).plan == solve_greedy(inst).plan
