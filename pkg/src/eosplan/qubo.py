"""Penalty QUBO for the planning problem, its Ising form and precision measures.

    Q(x) = -sum w_v x_v + lambda_u * sum_{same request} x_u x_v
                        + lambda_t * sum_{forbidden} x_u x_v

Spins follow ``x = (1 + s) / 2``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import AttemptKey, ModelError, ProblemInstance

DEFAULT_LAMBDA_FACTOR = 1.1
ZERO_TOL = 1e-12


class PenaltyWarning(UserWarning):
    pass


def _clean(d: dict) -> dict:
    return {k: float(v) for k, v in sorted(d.items()) if abs(v) >= ZERO_TOL}


@dataclass(frozen=True)
class Qubo:
    n: int
    linear: dict[int, float]
    quadratic: dict[tuple[int, int], float]
    offset: float = 0.0
    var_map: tuple[AttemptKey, ...] = ()
    warnings: tuple[str, ...] = ()
    _arrays: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        quad = {}
        for (i, j), c in self.quadratic.items():
            if i == j:
                raise ModelError("diagonal quadratic term; put it in linear")
            key = (min(i, j), max(i, j))
            quad[key] = quad.get(key, 0.0) + c
        for i, j in quad:
            if not (0 <= i < j < self.n):
                raise ModelError(f"quadratic index out of range: {(i, j)}")
        for i in self.linear:
            if not 0 <= i < self.n:
                raise ModelError(f"linear index out of range: {i}")
        object.__setattr__(self, "linear", _clean(self.linear))
        object.__setattr__(self, "quadratic", _clean(quad))

    def arrays(self):
        """Dense linear vector and pair arrays ``(lin, pi, pj, pc)`` in sorted pair order."""
        if "pairs" not in self._arrays:
            lin = np.zeros(self.n)
            for i, c in self.linear.items():
                lin[i] = c
            keys = list(self.quadratic)
            pi = np.array([k[0] for k in keys], dtype=np.int64)
            pj = np.array([k[1] for k in keys], dtype=np.int64)
            pc = np.array([self.quadratic[k] for k in keys], dtype=np.float64)
            self._arrays["pairs"] = (lin, pi, pj, pc)
        return self._arrays["pairs"]

    def csr(self):
        """Symmetric neighbour lists ``(indptr, indices, data)``, neighbours ascending."""
        if "csr" not in self._arrays:
            nbrs: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
            for (i, j), c in self.quadratic.items():
                nbrs[i].append((j, c))
                nbrs[j].append((i, c))
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            indices, data = [], []
            for i, row in enumerate(nbrs):
                row.sort()
                indices += [j for j, _ in row]
                data += [c for _, c in row]
                indptr[i + 1] = len(indices)
            self._arrays["csr"] = (indptr, np.array(indices, dtype=np.int64), np.array(data, dtype=np.float64))
        return self._arrays["csr"]

    def energies(self, states) -> np.ndarray:
        states = np.ascontiguousarray(np.asarray(states, dtype=np.uint8).reshape(-1, self.n))
        lin, pi, pj, pc = self.arrays()
        return kernels.get().qubo_energies(states, lin, pi, pj, pc, float(self.offset))


@dataclass(frozen=True)
class IsingModel:
    h: dict[int, float]
    J: dict[tuple[int, int], float]
    offset: float = 0.0

    def __post_init__(self):
        couplings = {}
        for (i, j), c in self.J.items():
            if i == j:
                raise ModelError("self-coupling")
            key = (min(i, j), max(i, j))
            couplings[key] = couplings.get(key, 0.0) + c
        object.__setattr__(self, "h", _clean(self.h))
        object.__setattr__(self, "J", _clean(couplings))

    @property
    def variables(self) -> list[int]:
        vs = set(self.h)
        for i, j in self.J:
            vs.update((i, j))
        return sorted(vs)

    def energy(self, spins) -> float:
        """Energy of ``spins`` given as a mapping or a sequence indexed by variable."""
        e = self.offset
        for i, c in self.h.items():
            e += c * spins[i]
        for (i, j), c in self.J.items():
            e += c * spins[i] * spins[j]
        return e


def penalty_bound(instance: ProblemInstance) -> float:
    """Largest attempt score; penalties strictly above it keep minimisers feasible."""
    return float(instance.scores.max())


def build_qubo(
    instance: ProblemInstance, lambda_u: float | None = None, lambda_t: float | None = None
) -> Qubo:
    bound = penalty_bound(instance)
    if lambda_u is None:
        lambda_u = DEFAULT_LAMBDA_FACTOR * bound
    if lambda_t is None:
        lambda_t = DEFAULT_LAMBDA_FACTOR * bound
    notes = []
    for name, lam in (("lambda_u", lambda_u), ("lambda_t", lambda_t)):
        if not lam > bound:
            msg = f"{name}={lam} does not exceed the score bound {bound}; minimisers may be infeasible"
            notes.append(msg)
            warnings.warn(msg, PenaltyWarning, stacklevel=2)
    g = instance.graph
    linear = {v: -float(w) for v, w in enumerate(instance.scores)}
    quadratic = {e: (lambda_u if kind == "one_attempt" else lambda_t) for e, kind in g.edge_kind.items()}
    return Qubo(instance.n_vars, linear, quadratic, 0.0, instance.attempt_keys, tuple(notes))


def qubo_for_factor(instance: ProblemInstance, factor: float = DEFAULT_LAMBDA_FACTOR) -> Qubo:
    lam = factor * penalty_bound(instance)
    return build_qubo(instance, lam, lam)


def evaluate_qubo(q: Qubo, assignment) -> float:
    x = np.asarray(assignment)
    if x.shape != (q.n,):
        raise ModelError(f"assignment length {x.size} does not match {q.n} variables")
    return float(q.energies(x[None, :])[0])


def violation_counts(instance: ProblemInstance, assignment) -> tuple[int, int]:
    """Number of violated same-request pairs and forbidden pairs."""
    chosen = {v for v, bit in enumerate(assignment) if bit}
    v_u = v_t = 0
    for (i, j), kind in instance.graph.edge_kind.items():
        if i in chosen and j in chosen:
            if kind == "one_attempt":
                v_u += 1
            else:
                v_t += 1
    return v_u, v_t


def qubo_to_ising(q: Qubo) -> IsingModel:
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    offset = q.offset
    for i, a in q.linear.items():
        h[i] = h.get(i, 0.0) + a / 2
        offset += a / 2
    for (i, j), b in q.quadratic.items():
        J[(i, j)] = J.get((i, j), 0.0) + b / 4
        h[i] = h.get(i, 0.0) + b / 4
        h[j] = h.get(j, 0.0) + b / 4
        offset += b / 4
    return IsingModel(h, J, offset)


def ising_to_qubo(m: IsingModel, n: int | None = None) -> Qubo:
    """Inverse map with ``s = 2x - 1``; ``n`` defaults to ``max index + 1``."""
    if n is None:
        n = max(m.variables, default=-1) + 1
    linear: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    offset = m.offset
    for i, c in m.h.items():
        linear[i] = linear.get(i, 0.0) + 2 * c
        offset -= c
    for (i, j), c in m.J.items():
        quad[(i, j)] = quad.get((i, j), 0.0) + 4 * c
        linear[i] = linear.get(i, 0.0) - 2 * c
        linear[j] = linear.get(j, 0.0) - 2 * c
        offset += c
    return Qubo(n, linear, quad, offset)


def max_coefficient_ratio(m: IsingModel, chain_coupling: float | None = None) -> float:
    """max(max|h|/min|h|, max|J|/min|J|) over nonzero coefficients.

    A supplied ``chain_coupling`` joins the coupling magnitudes, standing in
    for the chain couplers of an embedded model.
    """
    hs = [abs(c) for c in m.h.values() if abs(c) >= ZERO_TOL]
    js = [abs(c) for c in m.J.values() if abs(c) >= ZERO_TOL]
    if chain_coupling is not None and abs(chain_coupling) >= ZERO_TOL:
        js.append(abs(chain_coupling))
    if not hs and not js:
        raise ModelError("coefficient ratio undefined: all coefficients are zero")
    ratio_h = max(hs) / min(hs) if hs else 1.0
    ratio_j = max(js) / min(js) if js else 1.0
    return max(ratio_h, ratio_j)


def chain_coupling_worst_case(m: IsingModel) -> float:
    """Minus the largest coefficient magnitude of the logical model."""
    mags = [abs(c) for c in m.h.values()] + [abs(c) for c in m.J.values()]
    if not mags:
        raise ModelError("empty Ising model")
    return -max(mags)


# --- JSON ------------------------------------------------------------------

def qubo_to_dict(q: Qubo) -> dict:
    return {
        "n": q.n,
        "linear": {str(i): c for i, c in q.linear.items()},
        "quadratic": {f"{i},{j}": c for (i, j), c in q.quadratic.items()},
        "offset": q.offset,
    }


def qubo_from_dict(d: dict) -> Qubo:
    quad = {}
    for k, c in d["quadratic"].items():
        i, j = (int(x) for x in k.split(","))
        quad[(i, j)] = float(c)
    return Qubo(int(d["n"]), {int(i): float(c) for i, c in d["linear"].items()}, quad, float(d.get("offset", 0.0)))


def ising_to_dict(m: IsingModel, n: int | None = None) -> dict:
    out = {
        "h": {str(i): c for i, c in m.h.items()},
        "J": {f"{i},{j}": c for (i, j), c in m.J.items()},
        "offset": m.offset,
    }
    if n is not None:
        out = {"n": n, **out}
    return out


def ising_from_dict(d: dict) -> IsingModel:
    J = {}
    for k, c in d["J"].items():
        i, j = (int(x) for x in k.split(","))
        J[(i, j)] = float(c)
    return IsingModel({int(i): float(c) for i, c in d["h"].items()}, J, float(d.get("offset", 0.0)))
