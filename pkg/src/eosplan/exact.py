"""Exact solvers over the conflict graph.

Feasible plans are exactly the independent sets of the conflict graph, so
minimising the negative revenue is a maximum-weight independent set problem.
Two branch-and-bound variants differ only in their upper bound:

* ``solve_pairwise`` partitions the remaining candidates into cliques
  greedily from the pairwise edges at every node;
* ``solve_clique`` covers them with the precomputed maximal cliques.

Among equal-cost optima every solver returns the same plan: the one that
contains the smallest flat index on which two optimal plans differ (the
lexicographically smallest index set when no optimum contains another, which
is always the case with positive scores).
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import ConflictGraph, ModelError, Plan, ProblemInstance, cost

EPS = 1e-9
BRUTE_FORCE_MAX_VARS = 30


class CapacityError(ModelError):
    pass


@dataclass(frozen=True)
class CliqueCover:
    cliques: tuple[tuple[int, ...], ...]
    source_graph_fingerprint: str


@dataclass(frozen=True)
class SolveResult:
    plan: Plan
    objective: float
    nodes_explored: int
    wall_time: float
    proven_optimal: bool
    method: str = ""


def graph_fingerprint(graph: ConflictGraph) -> str:
    h = hashlib.sha256(str(graph.vertex_count).encode())
    for u, v in sorted(graph.edges):
        h.update(f",{u}-{v}".encode())
    return h.hexdigest()[:16]


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def enumerate_maximal_cliques(graph: ConflictGraph, deadline: float | None = None) -> CliqueCover:
    """All maximal cliques (Bron-Kerbosch with Tomita pivoting).

    Past ``deadline`` (a ``time.perf_counter`` value) the enumeration stops
    and the cliques found so far are returned.
    """
    n = graph.vertex_count
    if n < 1:
        raise ModelError("graph has no vertices")
    adj = graph.adjacency
    found: list[tuple[int, ...]] = []
    limit = float("inf") if deadline is None else deadline

    def expand(r: int, p: int, x: int) -> None:
        if not p and not x:
            found.append(tuple(_bits(r)))
            return
        if time.perf_counter() > limit:
            return
        pivot, best = -1, -1
        for u in _bits(p | x):
            c = (p & adj[u]).bit_count()
            if c > best:
                pivot, best = u, c
        for v in _bits(p & ~adj[pivot]):
            bit = 1 << v
            expand(r | bit, p & adj[v], x & adj[v])
            p &= ~bit
            x |= bit

    expand(0, (1 << n) - 1, 0)
    return CliqueCover(tuple(sorted(found)), graph_fingerprint(graph))


class _Search:
    """Depth-first branch-and-bound for maximum-weight independent sets.

    Vertex ``v`` lives at bit ``n - 1 - v`` so that, among sets of equal
    weight, the numerically larger mask is the preferred one.
    """

    def __init__(self, graph: ConflictGraph, weights, bound: str, cover: CliqueCover | None, deadline: float):
        n = graph.vertex_count
        self.n = n
        self.w = [float(x) for x in reversed(list(weights))]
        self.adj = [0] * n
        for v in range(n):
            m = 0
            for u in _bits(graph.adjacency[v]):
                m |= 1 << (n - 1 - u)
            self.adj[n - 1 - v] = m
        self.uniform = len(set(self.w)) <= 1
        # candidates in bound order: decreasing weight, then increasing flat index
        self.order = sorted(range(n), key=lambda p: (-self.w[p], -p))
        if bound == "pairwise":
            self.bound: Callable[[int], float] = self._partition_bound
        else:
            assert cover is not None
            rev = []
            for clique in cover.cliques:
                m = 0
                for v in clique:
                    m |= 1 << (n - 1 - v)
                rev.append(m)
            self.cliques = rev
            self.bound = self._cover_bound
        self.deadline = deadline
        self.nodes = 0
        self.timed_out = False
        self.best_mask = 0
        self.best_w = 0.0

    def _max_weight(self, mask: int) -> float:
        if self.uniform:
            return self.w[0] if mask else 0.0
        return max(self.w[p] for p in _bits(mask))

    def _partition_bound(self, cand: int) -> float:
        adj, w = self.adj, self.w
        members: list[int] = []
        total = 0.0
        for p in self.order:
            if not (cand >> p) & 1:
                continue
            a = adj[p]
            for k, m in enumerate(members):
                if m & ~a == 0:
                    members[k] = m | (1 << p)
                    break
            else:
                members.append(1 << p)
                total += w[p]
        return total

    def _cover_bound(self, cand: int) -> float:
        live = [c for c in self.cliques if c & cand]
        remaining = cand
        total = 0.0
        while remaining:
            best, best_count = 0, 1
            for c in live:
                k = (c & remaining).bit_count()
                if k > best_count:
                    best, best_count = c, k
            if not best:
                # no remaining pair is adjacent
                total += sum(self.w[p] for p in _bits(remaining))
                break
            part = best & remaining
            total += self._max_weight(part)
            remaining &= ~part
        return total

    def _offer(self, mask: int, weight: float) -> None:
        if weight > self.best_w + EPS or (weight >= self.best_w - EPS and mask > self.best_mask):
            self.best_mask, self.best_w = mask, weight

    def run(self) -> None:
        self._node((1 << self.n) - 1, 0, 0.0)

    def _node(self, cand: int, cur: int, cur_w: float) -> None:
        self.nodes += 1
        if self.timed_out or time.perf_counter() > self.deadline:
            self.timed_out = True
            return
        adj, w = self.adj, self.w
        # candidates with no conflicting candidate are always taken
        branch, branch_deg, min_deg = -1, 0, self.n
        for p in _bits(cand):
            d = (adj[p] & cand).bit_count()
            if d == 0:
                cur |= 1 << p
                cur_w += w[p]
                continue
            min_deg = min(min_deg, d)
            if d > branch_deg or (d == branch_deg and p > branch):
                branch, branch_deg = p, d
        cand &= ~cur
        self._offer(cur, cur_w)
        if not cand:
            return
        if min_deg == cand.bit_count() - 1:
            # remaining candidates form a clique: exactly one of them can join
            pick = max(_bits(cand), key=lambda p: (w[p], p))
            self._offer(cur | (1 << pick), cur_w + w[pick])
            return
        ub = cur_w + self.bound(cand)
        if ub < self.best_w - EPS or (ub <= self.best_w + EPS and (cur | cand) <= self.best_mask):
            return
        bit = 1 << branch
        self._node(cand & ~adj[branch] & ~bit, cur | bit, cur_w + w[branch])
        self._node(cand & ~bit, cur, cur_w)

    def selected(self) -> list[int]:
        return sorted(self.n - 1 - p for p in _bits(self.best_mask))


def _solve(instance: ProblemInstance, bound: str, time_limit: float | None, method: str) -> SolveResult:
    t0 = time.perf_counter()
    graph = instance.graph
    deadline = t0 + time_limit if time_limit is not None else float("inf")
    # a partial cover (enumeration cut short) still yields a valid, weaker bound
    cover = enumerate_maximal_cliques(graph, deadline) if bound == "cover" else None
    search = _Search(graph, instance.scores, bound, cover, deadline)
    search.run()
    plan = Plan.from_flat(instance, search.selected())
    return SolveResult(
        plan, cost(instance, plan), search.nodes, time.perf_counter() - t0, not search.timed_out, method
    )


def solve_pairwise(instance: ProblemInstance, time_limit: float | None = None) -> SolveResult:
    """Branch-and-bound on the pairwise formulation."""
    return _solve(instance, "pairwise", time_limit, "exact-pairwise")


def solve_clique(instance: ProblemInstance, time_limit: float | None = None) -> SolveResult:
    """Branch-and-bound on the maximal-clique (set packing) formulation."""
    return _solve(instance, "cover", time_limit, "exact-clique")


def independent_set_masks(graph: ConflictGraph, chunk: int = 1 << 20):
    """Yield ``(masks, feasible)`` chunks over all ``2**n`` assignments (bit v = vertex v)."""
    n = graph.vertex_count
    edges = np.array(sorted(graph.edges), dtype=np.int64).reshape(-1, 2)
    for start in range(0, 1 << n, chunk):
        m = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        ok = np.ones(len(m), dtype=bool)
        for u, v in edges:
            ok &= ((m >> u) & (m >> v) & 1) == 0
        yield m, ok


def brute_force(instance: ProblemInstance) -> SolveResult:
    """Exhaustive scan of every assignment; test oracle for small instances."""
    n = instance.n_vars
    if n > BRUTE_FORCE_MAX_VARS:
        raise CapacityError(f"brute force limited to {BRUTE_FORCE_MAX_VARS} variables, got {n}")
    t0 = time.perf_counter()
    w = instance.scores
    best_w = -np.inf
    ties: list[int] = []
    for m, ok in independent_set_masks(instance.graph):
        total = np.zeros(len(m))
        for v in range(n):
            total += ((m >> v) & 1) * w[v]
        total[~ok] = -np.inf
        top = total.max()
        if top > best_w + EPS:
            best_w = top
            ties = []
        if top >= best_w - EPS:
            ties += m[total >= best_w - EPS].tolist()
            best_w = max(best_w, top)

    def preference(mask: int) -> int:
        return int(format(mask, f"0{n}b")[::-1], 2) if n else 0

    # recheck against the final optimum, earlier chunks may hold stale ties
    final = []
    for t in ties:
        tw = sum(w[v] for v in range(n) if (t >> v) & 1)
        if tw >= best_w - EPS:
            final.append(t)
    winner = max(final, key=preference)
    plan = Plan.from_flat(instance, [v for v in range(n) if (winner >> v) & 1])
    return SolveResult(plan, cost(instance, plan), 1 << n, time.perf_counter() - t0, True, "bruteforce")


SOLVERS = {
    "bruteforce": lambda inst, time_limit=None: brute_force(inst),
    "exact-pairwise": solve_pairwise,
    "exact-clique": solve_clique,
}
