"""QUBO samplers (uniform random, simulated annealing) and their analytics.

Read ``k`` of a run with seed ``s`` always draws from the stream derived from
``(s, k)``, so any prefix of reads is reproducible on its own and chunked or
parallel execution matches a sequential run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .embedding import ChimeraGraph, Embedding, apply_embedding, majority_vote_unembed
from .model import ModelError, Plan, ProblemInstance, cost
from .qubo import IsingModel, Qubo, ising_to_qubo, qubo_to_ising

T_ANNEAL = 20e-6
_CHUNK = 1024


@dataclass(frozen=True)
class AnnealConfig:
    n_reads: int = 1000
    sweeps_per_read: int = 1000
    beta_hot: float = 0.1
    beta_cold: float = 10.0
    seed: int = 0
    time_per_read: float = T_ANNEAL

    def __post_init__(self):
        if self.n_reads < 1 or self.sweeps_per_read < 1:
            raise ModelError("n_reads and sweeps_per_read must be >= 1")
        if not 0 < self.beta_hot <= self.beta_cold:
            raise ModelError("need 0 < beta_hot <= beta_cold")
        if self.seed < 0:
            raise ModelError("seed must be >= 0")

    def betas(self) -> np.ndarray:
        return np.geomspace(self.beta_hot, self.beta_cold, self.sweeps_per_read)


@dataclass(frozen=True)
class SampleSet:
    assignments: np.ndarray
    energies: np.ndarray
    sampler_config: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def reads(self) -> int:
        return len(self.energies)

    def head(self, n_reads: int) -> "SampleSet":
        """The first ``n_reads`` reads (what a shorter run with the same seed returns)."""
        cfg = dict(self.sampler_config, n_reads=n_reads)
        return SampleSet(self.assignments[:n_reads], self.energies[:n_reads], cfg, self.wall_time)

    @property
    def accounted_time(self) -> float:
        return self.reads * self.sampler_config.get("time_per_read", T_ANNEAL)


def random_sample(q: Qubo, n_reads: int, seed: int, time_per_read: float = T_ANNEAL) -> SampleSet:
    """i.i.d. uniform assignments."""
    if n_reads < 1:
        raise ModelError("n_reads must be >= 1")
    t0 = time.perf_counter()
    k = kernels.get()
    states = np.concatenate(
        [k.random_states(min(_CHUNK, n_reads - s), q.n, seed, s) for s in range(0, n_reads, _CHUNK)]
    )
    cfg = {"kind": "random", "seed": seed, "n_reads": n_reads, "time_per_read": time_per_read}
    return SampleSet(states, q.energies(states), cfg, time.perf_counter() - t0)


def simulated_anneal(q: Qubo, cfg: AnnealConfig = AnnealConfig()) -> SampleSet:
    """Metropolis single-flip annealing, geometric inverse-temperature schedule.

    Each read starts from a uniform random state and keeps the lowest-energy
    state it visits.
    """
    t0 = time.perf_counter()
    k = kernels.get()
    lin, _, _, _ = q.arrays()
    indptr, indices, data = q.csr()
    betas = cfg.betas()
    chunks = []
    for s in range(0, cfg.n_reads, _CHUNK):
        chunks.append(k.anneal(lin, indptr, indices, data, betas, min(_CHUNK, cfg.n_reads - s), cfg.seed, s))
    states = np.concatenate(chunks)
    config = {
        "kind": "sa",
        "seed": cfg.seed,
        "n_reads": cfg.n_reads,
        "sweeps": cfg.sweeps_per_read,
        "schedule": "geometric",
        "beta_hot": cfg.beta_hot,
        "beta_cold": cfg.beta_cold,
        "time_per_read": cfg.time_per_read,
        "backend": kernels.backend(),
    }
    return SampleSet(states, q.energies(states), config, time.perf_counter() - t0)


def sample_embedded(
    q: Qubo, embedding: Embedding, chimera: ChimeraGraph, chain_coupling: float, cfg: AnnealConfig = AnnealConfig()
) -> SampleSet:
    """Anneal the embedded physical model, then majority-vote back to logical bits."""
    t0 = time.perf_counter()
    physical = apply_embedding(qubo_to_ising(q), embedding, chimera, chain_coupling)
    nodes = embedding.physical_nodes
    relabel = {p: i for i, p in enumerate(nodes)}
    compact = IsingModel(
        {relabel[p]: c for p, c in physical.h.items()},
        {(relabel[a], relabel[b]): c for (a, b), c in physical.J.items()},
        physical.offset,
    )
    raw = simulated_anneal(ising_to_qubo(compact, len(nodes)), cfg)
    logical = np.zeros((raw.reads, q.n), dtype=np.uint8)
    broken = 0
    for r, bits in enumerate(raw.assignments):
        sample = {p: 2 * int(bits[relabel[p]]) - 1 for p in nodes}
        spins = majority_vote_unembed(sample, embedding)
        logical[r] = [(s + 1) // 2 for s in spins]
        broken += any(len({sample[p] for p in chain}) > 1 for chain in embedding.chains.values())
    config = dict(raw.sampler_config, kind="sa-embedded", chain_coupling=chain_coupling,
                  broken_read_fraction=broken / raw.reads)
    return SampleSet(logical, q.energies(logical), config, time.perf_counter() - t0)


def success_probability(s: SampleSet, optimal_energy: float, tol: float = 1e-9) -> float:
    if s.reads < 1:
        raise ModelError("empty sample set")
    return float(np.count_nonzero(s.energies <= optimal_energy + tol)) / s.reads


def t99(p: float, t_anneal: float = T_ANNEAL) -> float:
    """Time to see the optimum at least once with 99 % confidence."""
    if not 0.0 <= p <= 1.0:
        raise ModelError(f"probability out of range: {p}")
    if p == 0.0:
        return math.inf
    if p >= 0.99:
        return t_anneal
    return math.log(1 - 0.99) / math.log(1 - p) * t_anneal


def optimize_sampler_parameter(
    q: Qubo, grid: list[AnnealConfig], optimal_energy: float, evaluation_seed: int | None = 0
):
    """Pick the grid point with the highest success probability.

    Every point is run with ``evaluation_seed`` (unless ``None``). Returns
    ``(best_config, [(config, probability), ...])``; ties keep grid order.
    """
    if not grid:
        raise ModelError("empty parameter grid")
    curve = []
    for cfg in grid:
        if evaluation_seed is not None:
            cfg = replace(cfg, seed=evaluation_seed)
        curve.append((cfg, success_probability(simulated_anneal(q, cfg), optimal_energy)))
    best = max(range(len(curve)), key=lambda i: (curve[i][1], -i))
    return curve[best][0], curve


def energy_histogram(energies, bins: int) -> list[tuple[float, float, int]]:
    counts, edges = np.histogram(np.asarray(energies, dtype=float), bins=bins)
    return [(float(edges[i]), float(edges[i + 1]), int(c)) for i, c in enumerate(counts)]


def repair_plan(instance: ProblemInstance, bits) -> tuple[Plan, bool]:
    """Drop violating attempts until feasible; return ``(plan, was_feasible)``.

    Each round removes, among attempts in a violated pair, the lowest-score
    one (then the one in most violations, then the highest flat index).
    """
    adj = instance.graph.adjacency
    w = instance.scores
    chosen = 0
    for v, b in enumerate(bits):
        if b:
            chosen |= 1 << v
    raw_ok = True
    while True:
        worst, worst_key = -1, None
        v_mask = chosen
        while v_mask:
            low = v_mask & -v_mask
            v = low.bit_length() - 1
            v_mask ^= low
            clashes = (adj[v] & chosen).bit_count()
            if clashes:
                key = (w[v], -clashes, -v)
                if worst_key is None or key < worst_key:
                    worst, worst_key = v, key
        if worst < 0:
            break
        raw_ok = False
        chosen &= ~(1 << worst)
    selected = [v for v in range(instance.n_vars) if (chosen >> v) & 1]
    return Plan.from_flat(instance, selected), raw_ok


def best_repaired(instance: ProblemInstance, s: SampleSet):
    """Best plan over all reads after repair: ``(plan, objective, raw_feasible_fraction)``."""
    best_plan, best_obj, n_ok = Plan(), 0.0, 0
    seen: dict[bytes, tuple[Plan, bool]] = {}
    for row in s.assignments:
        key = row.tobytes()
        if key not in seen:
            seen[key] = repair_plan(instance, row)
        plan, ok = seen[key]
        n_ok += ok
        obj = cost(instance, plan)
        if obj < best_obj - 1e-9:
            best_plan, best_obj = plan, obj
    return best_plan, best_obj, n_ok / max(s.reads, 1)
