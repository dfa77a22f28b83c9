"""Shared instance factories and brute-force oracles for the tests."""

import itertools
import random

import numpy as np

from eosplan.model import ConflictGraph, make_instance
from eosplan.scenario import GenerationParams, generate_instance


def small_generated(count, max_n=22, dt=15.0, lam=2.0, first_seed=0):
    """``count`` generated instances with at most ``max_n`` attempts, seeds spread out."""
    out = []
    seed = first_seed
    while len(out) < count:
        n_req = 1 + seed % 4
        inst = generate_instance(GenerationParams(n_req, dt, lam, 7919 * seed + 13))
        if inst.n_vars <= max_n:
            out.append(inst)
        seed += 1
    return out


def random_instance(rng: random.Random, n_requests=None, max_attempts=4, horizon=60.0, scores=False):
    n_requests = n_requests or rng.randint(1, 5)
    times = []
    for _ in range(n_requests):
        k = rng.randint(1, max_attempts)
        start = rng.uniform(0, horizon)
        step = rng.choice([3.0, 5.0, 8.0])
        times.append([start + step * i for i in range(k)])
    w = [rng.choice([1.0, 2.0, 3.0]) for _ in times] if scores else None
    return make_instance(times, acq_duration=rng.choice([2.0, 5.0]), manoeuvre=rng.choice([1.0, 4.0]), scores=w)


def conflict_free_instance(n_requests=4, attempts=3):
    times = [[100.0 * r + 10.0 * i for i in range(attempts)] for r in range(n_requests)]
    return make_instance(times, acq_duration=2.0, manoeuvre=2.0)


def random_graph(rng: random.Random, n, p):
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return ConflictGraph.from_edges(n, edges)


def maximal_cliques_oracle(graph: ConflictGraph):
    """Every vertex subset that is a clique and cannot be extended."""
    n = graph.vertex_count
    edges = graph.edges
    cliques = []
    for k in range(1, n + 1):
        for subset in itertools.combinations(range(n), k):
            if all((a, b) in edges for a, b in itertools.combinations(subset, 2)):
                cliques.append(set(subset))
    maximal = [c for c in cliques if not any(c < d for d in cliques)]
    return sorted(tuple(sorted(c)) for c in maximal)


def all_assignments(n):
    codes = np.arange(1 << n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.uint8)
