"""Operational-style greedy insertion heuristic.

Requests are considered once each, by decreasing score. A request is
inserted at its earliest attempt that fits; if every attempt clashes, the
planned requests blocking an attempt may each be moved to another of their
own attempts (one level deep, no cascades, no removals) as long as the
chronological order of the planned requests is unchanged. A request that
cannot be placed is dropped for good.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .exact import SolveResult
from .model import Plan, ProblemInstance, cost


@dataclass(frozen=True)
class GreedyStep:
    request: int
    inserted: bool
    attempt: int | None
    moves: tuple[tuple[int, int, int], ...] = ()  # (request, from_attempt, to_attempt)


def _chronology(instance: ProblemInstance, assignment: dict[int, int], requests) -> list[int]:
    return sorted(requests, key=lambda r: (instance.requests[r].attempts[assignment[r]].start_time, r))


def _place(instance: ProblemInstance, assignment: dict[int, int], r: int):
    """First feasible (attempt, moves) for request ``r`` or ``None``."""
    g = instance.graph
    off = instance.offsets
    adj = g.adjacency
    n_att = [len(req.attempts) for req in instance.requests]
    planned = list(assignment)
    order_before = _chronology(instance, assignment, planned)
    position = {s: k for k, s in enumerate(order_before)}

    for a in range(n_att[r]):
        va = off[r] + a
        blockers = [s for s in planned if (adj[va] >> (off[s] + assignment[s])) & 1]
        if not blockers:
            return a, ()
        fixed_mask = 0
        for s in planned:
            if s not in blockers:
                fixed_mask |= 1 << (off[s] + assignment[s])
        options = []
        for b in sorted(blockers, key=position.__getitem__):
            alts = [
                k
                for k in range(n_att[b])
                if k != assignment[b]
                and not (adj[va] >> (off[b] + k)) & 1
                and not adj[off[b] + k] & fixed_mask
            ]
            if not alts:
                break
            options.append((b, alts))
        else:
            found = _first_combination(instance, assignment, options, order_before)
            if found is not None:
                return a, found
    return None


def _first_combination(instance, assignment, options, order_before):
    adj = instance.graph.adjacency
    off = instance.offsets
    chosen: list[tuple[int, int]] = []

    def dfs(depth: int, mask: int):
        if depth == len(options):
            trial = dict(assignment)
            for b, k in chosen:
                trial[b] = k
            if _chronology(instance, trial, list(assignment)) == order_before:
                return tuple((b, assignment[b], k) for b, k in chosen)
            return None
        b, alts = options[depth]
        for k in alts:
            v = off[b] + k
            if adj[v] & mask:
                continue
            chosen.append((b, k))
            hit = dfs(depth + 1, mask | (1 << v))
            if hit is not None:
                return hit
            chosen.pop()
        return None

    return dfs(0, 0)


def greedy_trace(instance: ProblemInstance, time_budget: float | None = None):
    """Run the heuristic; return ``(assignment, steps, aborted)``.

    The conflict graph is built before the budget clock starts.
    """
    instance.graph
    t0 = time.perf_counter()
    order = sorted(range(len(instance.requests)), key=lambda r: (-instance.requests[r].score, r))
    assignment: dict[int, int] = {}
    steps: list[GreedyStep] = []
    aborted = False
    for r in order:
        if time_budget is not None and time.perf_counter() - t0 > time_budget:
            aborted = True
            break
        placed = _place(instance, assignment, r)
        if placed is None:
            steps.append(GreedyStep(r, False, None))
            continue
        a, moves = placed
        for b, _, k in moves:
            assignment[b] = k
        assignment[r] = a
        steps.append(GreedyStep(r, True, a, moves))
    return assignment, steps, aborted


def solve_greedy(instance: ProblemInstance, time_budget: float | None = None) -> SolveResult:
    """Greedy plan; ``time_budget`` (seconds) stops early and keeps what is planned."""
    t0 = time.perf_counter()
    assignment, _, _ = greedy_trace(instance, time_budget)
    plan = Plan(assignment.items())
    return SolveResult(plan, cost(instance, plan), len(instance.requests), time.perf_counter() - t0, False, "greedy")
