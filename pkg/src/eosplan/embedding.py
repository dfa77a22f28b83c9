"""Chimera topology, minor-embedding checks, chain couplings and unembedding.

Node numbering follows the usual linear Chimera index
``((row * n + col) * 2 + shore) * t + k``. Shore 0 qubits couple vertically
to the same qubit in the cell below, shore 1 qubits horizontally to the cell
on the right.

Finding embeddings is not done here; they are read from JSON of the form
``{"chains": {"<logical>": [physical, ...]}}``.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ModelError
from .qubo import IsingModel


class EmbeddingError(ModelError):
    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


@dataclass(frozen=True)
class ChimeraGraph:
    m: int
    n: int
    t: int
    edges: frozenset[tuple[int, int]]

    @property
    def node_count(self) -> int:
        return self.m * self.n * 2 * self.t

    @property
    def nodes(self) -> range:
        return range(self.node_count)

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = defaultdict(set)
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def linear_index(self, row: int, col: int, shore: int, k: int) -> int:
        return ((row * self.n + col) * 2 + shore) * self.t + k


def chimera_graph(m: int, n: int, t: int) -> ChimeraGraph:
    if min(m, n, t) < 1:
        raise ModelError("chimera dimensions must be >= 1")

    def idx(row, col, shore, k):
        return ((row * n + col) * 2 + shore) * t + k

    edges = set()
    for row in range(m):
        for col in range(n):
            for a in range(t):
                for b in range(t):
                    edges.add((idx(row, col, 0, a), idx(row, col, 1, b)))
                if row + 1 < m:
                    edges.add((idx(row, col, 0, a), idx(row + 1, col, 0, a)))
                if col + 1 < n:
                    edges.add((idx(row, col, 1, a), idx(row, col + 1, 1, a)))
    return ChimeraGraph(m, n, t, frozenset((min(e), max(e)) for e in edges))


@dataclass(frozen=True)
class Embedding:
    chains: dict[int, tuple[int, ...]]

    def __post_init__(self):
        object.__setattr__(
            self, "chains", {int(k): tuple(sorted(int(q) for q in v)) for k, v in sorted(self.chains.items())}
        )

    @property
    def physical_nodes(self) -> list[int]:
        return sorted(q for chain in self.chains.values() for q in chain)


def _connected(nodes: tuple[int, ...], adj: dict[int, set[int]]) -> bool:
    if not nodes:
        return False
    members = set(nodes)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        u = stack.pop()
        for v in adj.get(u, ()):
            if v in members and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen == members


def verify_embedding(g: ChimeraGraph, e: Embedding, logical_edges) -> tuple[bool, list[str]]:
    """Check disjointness, chain connectivity and edge coverage; return ``(ok, diagnostics)``."""
    diags = []
    adj = g.adjacency()
    owner: dict[int, int] = {}
    for var, chain in e.chains.items():
        if not chain:
            diags.append(f"empty chain for logical {var}")
        for q in chain:
            if not 0 <= q < g.node_count:
                diags.append(f"chain {var}: node {q} not in graph")
            if q in owner:
                diags.append(f"overlap: node {q} in chains {owner[q]} and {var}")
            owner.setdefault(q, var)
        if chain and not _connected(chain, adj):
            diags.append(f"disconnected: chain {var}")
    for u, v in sorted((min(a, b), max(a, b)) for a, b in logical_edges):
        if u not in e.chains or v not in e.chains:
            diags.append(f"missing chain for logical edge ({u}, {v})")
            continue
        cv = set(e.chains[v])
        if not any(adj.get(q, set()) & cv for q in e.chains[u]):
            diags.append(f"no coupler for logical edge ({u}, {v})")
    return not diags, diags


def chain_edges(g: ChimeraGraph, e: Embedding) -> dict[int, list[tuple[int, int]]]:
    out = {}
    for var, chain in e.chains.items():
        members = set(chain)
        out[var] = sorted((u, v) for u, v in g.edges if u in members and v in members)
    return out


def apply_embedding(m: IsingModel, e: Embedding, g: ChimeraGraph, chain_coupling: float) -> IsingModel:
    """Spread a logical Ising model over its chains; intra-chain edges get ``chain_coupling``."""
    if not chain_coupling < 0:
        raise EmbeddingError("chain coupling must be negative (ferromagnetic)")
    ok, diags = verify_embedding(g, e, m.J.keys())
    missing = [v for v in m.h if v not in e.chains]
    if missing:
        ok = False
        diags.append(f"no chain for logical variables {missing}")
    if not ok:
        raise EmbeddingError("invalid embedding: " + "; ".join(diags), diags)
    adj = g.adjacency()
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    for var, c in m.h.items():
        chain = e.chains[var]
        for q in chain:
            h[q] = h.get(q, 0.0) + c / len(chain)
    for (u, v), c in m.J.items():
        cv = set(e.chains[v])
        couplers = sorted((min(p, q), max(p, q)) for p in e.chains[u] for q in adj[p] & cv)
        for key in couplers:
            J[key] = J.get(key, 0.0) + c / len(couplers)
    for edges in chain_edges(g, e).values():
        for key in edges:
            J[key] = J.get(key, 0.0) + chain_coupling
    return IsingModel(h, J, m.offset)


def embed_state(logical: dict[int, int] | list[int], e: Embedding) -> dict[int, int]:
    """Copy each logical spin onto every qubit of its chain."""
    out = {}
    for var, chain in e.chains.items():
        for q in chain:
            out[q] = int(logical[var])
    return out


def majority_vote_unembed(physical_sample, e: Embedding) -> list[int]:
    """Per-chain majority of a physical spin sample; ties go to -1.

    Returns logical spins ordered by logical index.
    """
    out = []
    for _, chain in sorted(e.chains.items()):
        total = sum(int(physical_sample[q]) for q in chain)
        out.append(1 if total > 0 else -1)
    return out


def broken_chain_fraction(physical_sample, e: Embedding) -> float:
    broken = sum(len({int(physical_sample[q]) for q in chain}) > 1 for chain in e.chains.values())
    return broken / max(len(e.chains), 1)


def ground_states(m: IsingModel, nodes: list[int] | None = None, tol: float = 1e-9):
    """Exhaustive minimisation over at most 24 spins; returns ``(energy, [spin dicts])``."""
    nodes = sorted(nodes if nodes is not None else m.variables)
    k = len(nodes)
    if k > 24:
        raise ModelError("exhaustive spin search limited to 24 spins")
    pos = {q: i for i, q in enumerate(nodes)}
    codes = np.arange(1 << k, dtype=np.int64)
    spins = 2 * ((codes[:, None] >> np.arange(k)) & 1) - 1
    energy = np.full(len(codes), m.offset)
    for q, c in m.h.items():
        energy += c * spins[:, pos[q]]
    for (a, b), c in m.J.items():
        energy += c * spins[:, pos[a]] * spins[:, pos[b]]
    best = energy.min()
    rows = np.flatnonzero(energy <= best + tol)
    return float(best), [dict(zip(nodes, spins[r].tolist())) for r in rows]


def load_embedding(path) -> Embedding:
    data = json.loads(Path(path).read_text())
    try:
        return Embedding({int(k): v for k, v in data["chains"].items()})
    except (KeyError, TypeError, ValueError) as exc:
        raise EmbeddingError(f"malformed embedding JSON: {exc!r}") from exc


def embedding_to_dict(e: Embedding) -> dict:
    return {"chains": {str(k): list(v) for k, v in e.chains.items()}}
