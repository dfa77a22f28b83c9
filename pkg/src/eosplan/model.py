"""Problem data model: requests, imaging attempts, conflicts, plans.

A request ``r`` owns an ordered list of imaging attempts; the decision
variable ``x[r, i]`` selects attempt ``i`` of request ``r``. Attempts are
addressed throughout the package either as ``(request_index, attempt_index)``
pairs or by their flat index (requests in order, attempts in order).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

AttemptKey = tuple[int, int]
Pair = tuple[AttemptKey, AttemptKey]


class ModelError(ValueError):
    """Malformed instance or plan."""


@dataclass(frozen=True)
class ImagingAttempt:
    request_id: str
    attempt_index: int
    start_time: float
    acq_duration: float
    score: float = 1.0
    roll_start: float = 0.0
    pitch_start: float = 0.0
    roll_end: float = 0.0
    pitch_end: float = 0.0

    def __post_init__(self):
        if not self.acq_duration > 0:
            raise ModelError(f"attempt {self.request_id}/{self.attempt_index}: acq_duration must be > 0")
        if self.attempt_index < 0:
            raise ModelError("attempt_index must be >= 0")
        if self.score < 0:
            raise ModelError("score must be >= 0")


@dataclass(frozen=True)
class AcquisitionRequest:
    id: str
    latitude: float
    longitude: float
    score: float
    attempts: tuple[ImagingAttempt, ...]

    def __post_init__(self):
        object.__setattr__(self, "attempts", tuple(self.attempts))
        if not self.attempts:
            raise ModelError(f"request {self.id} has no imaging attempts")
        times = []
        for k, a in enumerate(self.attempts):
            if a.request_id != self.id:
                raise ModelError(f"attempt {k} of request {self.id} carries request_id {a.request_id}")
            if a.attempt_index != k:
                raise ModelError(f"request {self.id}: attempt_index {a.attempt_index} at position {k}")
            times.append(a.start_time)
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise ModelError(f"request {self.id}: attempt start times not strictly increasing")
        if len(steps) > 1 and not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-9):
            raise ModelError(f"request {self.id}: attempt start times not equidistant")


@dataclass(frozen=True)
class InstanceMetadata:
    n_requests: int
    delta_t: float
    latitude_range: float
    seed: int


@dataclass(frozen=True)
class ProblemInstance:
    """The full constrained selection problem.

    ``forbidden_pairs`` holds ordered pairs ``((r, i), (s, j))`` meaning
    attempt ``j`` of ``s`` cannot start within acquisition plus manoeuvre
    time after attempt ``i`` of ``r``. ``manoeuvre`` is the dense flat-index
    table of manoeuvre durations when the instance was generated here; it is
    not serialized.
    """

    requests: tuple[AcquisitionRequest, ...]
    forbidden_pairs: frozenset[Pair]
    metadata: InstanceMetadata
    manoeuvre: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(self.requests))
        object.__setattr__(self, "forbidden_pairs", frozenset(self.forbidden_pairs))
        if not self.requests:
            raise ModelError("instance has no requests")
        for (r, i), (s, j) in self.forbidden_pairs:
            if r == s:
                raise ModelError(f"forbidden pair within request {r}")
            self.flat_index((r, i))
            self.flat_index((s, j))

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out = [0]
        for req in self.requests:
            out.append(out[-1] + len(req.attempts))
        return tuple(out)

    @property
    def n_vars(self) -> int:
        return self.offsets[-1]

    @cached_property
    def attempt_keys(self) -> tuple[AttemptKey, ...]:
        return tuple((r, i) for r, req in enumerate(self.requests) for i in range(len(req.attempts)))

    @cached_property
    def scores(self) -> np.ndarray:
        w = np.array([a.score for req in self.requests for a in req.attempts], dtype=float)
        w.flags.writeable = False
        return w

    @cached_property
    def request_of(self) -> tuple[int, ...]:
        return tuple(r for r, _ in self.attempt_keys)

    def attempt(self, key: AttemptKey) -> ImagingAttempt:
        r, i = key
        return self.requests[r].attempts[i]

    def flat_index(self, key: AttemptKey) -> int:
        r, i = key
        if not (0 <= r < len(self.requests)) or not (0 <= i < len(self.requests[r].attempts)):
            raise ModelError(f"unknown attempt {key}")
        return self.offsets[r] + i

    @cached_property
    def graph(self) -> "ConflictGraph":
        return build_conflict_graph(self)


@dataclass(frozen=True)
class Plan:
    selected: frozenset[AttemptKey]

    def __init__(self, selected: Iterable[AttemptKey] = ()):
        object.__setattr__(self, "selected", frozenset((int(r), int(i)) for r, i in selected))

    @classmethod
    def from_flat(cls, instance: ProblemInstance, indices: Iterable[int]) -> "Plan":
        keys = instance.attempt_keys
        return cls(keys[int(v)] for v in indices)

    def flat(self, instance: ProblemInstance) -> list[int]:
        return sorted(instance.flat_index(k) for k in self.selected)

    def __len__(self):
        return len(self.selected)


@dataclass(frozen=True)
class ConflictGraph:
    """Vertices are attempts (flat indices); edges are all pairwise exclusions.

    ``adjacency[v]`` is an int bitmask of the neighbours of ``v``.
    ``edge_kind`` tags each edge ``(u, v)``, ``u < v``, as ``"one_attempt"``
    or ``"manoeuvre"``.
    """

    vertex_count: int
    vertex_map: tuple[AttemptKey, ...]
    edges: frozenset[tuple[int, int]]
    edge_kind: dict = field(compare=False, repr=False)
    adjacency: tuple[int, ...] = field(compare=False, repr=False)

    @property
    def n_constraints(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> list[int]:
        m = self.adjacency[v]
        out = []
        while m:
            low = m & -m
            out.append(low.bit_length() - 1)
            m ^= low
        return out

    def degree(self, v: int) -> int:
        return self.adjacency[v].bit_count()

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], kind: str = "edge") -> "ConflictGraph":
        norm = set()
        for u, v in edges:
            if u == v:
                raise ModelError("self-loop")
            norm.add((min(u, v), max(u, v)))
        adj = [0] * n
        for u, v in norm:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, tuple((v, 0) for v in range(n)), frozenset(norm), {e: kind for e in norm}, tuple(adj))


def forbidden_pairs(
    r: AcquisitionRequest,
    s: AcquisitionRequest,
    manoeuvre: Callable[[ImagingAttempt, ImagingAttempt], float],
) -> set[tuple[int, int]]:
    """Attempt-index pairs ``(i, j)`` of ``r`` x ``s`` that cannot both be planned.

    ``(i, j)`` is forbidden when ``s`` would start attempt ``j`` no earlier
    than ``r`` starts ``i`` but before ``r`` has finished acquiring and
    manoeuvred: ``t_i <= t_j < t_i + d_acq_i + d_man(i -> j)``.
    """
    if r.id == s.id:
        raise ModelError("forbidden_pairs needs two distinct requests")
    out = set()
    for a in r.attempts:
        for b in s.attempts:
            if a.start_time <= b.start_time < a.start_time + a.acq_duration + manoeuvre(a, b):
                out.add((a.attempt_index, b.attempt_index))
    return out


def build_conflict_graph(instance: ProblemInstance) -> ConflictGraph:
    n = instance.n_vars
    kinds: dict[tuple[int, int], str] = {}
    off = instance.offsets
    for r, req in enumerate(instance.requests):
        k = len(req.attempts)
        for i in range(k):
            for j in range(i + 1, k):
                kinds[(off[r] + i, off[r] + j)] = "one_attempt"
    for a, b in instance.forbidden_pairs:
        u, v = instance.flat_index(a), instance.flat_index(b)
        kinds.setdefault((min(u, v), max(u, v)), "manoeuvre")
    adj = [0] * n
    for u, v in kinds:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return ConflictGraph(n, instance.attempt_keys, frozenset(kinds), kinds, tuple(adj))


def cost(instance: ProblemInstance, plan: Plan) -> float:
    """Negative total score of the selected attempts (feasibility not checked)."""
    total = 0.0
    for key in sorted(plan.selected):
        total -= instance.attempt(key).score
    return total


def is_feasible(instance: ProblemInstance, plan: Plan) -> tuple[bool, list[tuple[str, Pair]]]:
    """Check both constraint families; return ``(ok, violations)``.

    Each violation is ``(kind, (a, b))`` with ``kind`` in
    ``{"one_attempt", "manoeuvre"}`` and ``a < b`` as attempt keys.
    """
    for key in plan.selected:
        instance.flat_index(key)
    g = instance.graph
    flat = sorted(instance.flat_index(k) for k in plan.selected)
    chosen = 0
    for v in flat:
        chosen |= 1 << v
    violations = []
    keys = instance.attempt_keys
    for u in flat:
        clash = g.adjacency[u] & chosen & ~((1 << (u + 1)) - 1)
        while clash:
            low = clash & -clash
            v = low.bit_length() - 1
            clash ^= low
            violations.append((g.edge_kind[(u, v)], (keys[u], keys[v])))
    return not violations, violations


def constraint_ratio(instance: ProblemInstance) -> float:
    """Pairwise constraints as a percentage of all attempt pairs."""
    n = instance.n_vars
    if n < 2:
        raise ModelError("constraint ratio undefined for fewer than two attempts")
    return 100.0 * 2 * instance.graph.n_constraints / (n * (n - 1))


def instance_summary(instance: ProblemInstance) -> dict:
    g = instance.graph
    n = instance.n_vars
    return {
        "N": n,
        "N_R": len(instance.requests),
        "delta_t": instance.metadata.delta_t,
        "latitude_range": instance.metadata.latitude_range,
        "N_C": g.n_constraints,
        "n_C": constraint_ratio(instance) if n >= 2 else 0.0,
    }


# --- JSON interchange -------------------------------------------------------

def instance_to_dict(instance: ProblemInstance) -> dict:
    md = instance.metadata
    return {
        "metadata": {
            "n_requests": md.n_requests,
            "delta_t_s": float(md.delta_t),
            "latitude_range_deg": float(md.latitude_range),
            "seed": md.seed,
        },
        "requests": [
            {
                "id": req.id,
                "lat_deg": float(req.latitude),
                "lon_deg": float(req.longitude),
                "score": float(req.score),
                "attempts": [
                    {
                        "t_s": float(a.start_time),
                        "d_acq_s": float(a.acq_duration),
                        "roll_start_deg": float(a.roll_start),
                        "pitch_start_deg": float(a.pitch_start),
                        "roll_end_deg": float(a.roll_end),
                        "pitch_end_deg": float(a.pitch_end),
                    }
                    for a in req.attempts
                ],
            }
            for req in instance.requests
        ],
        "forbidden_pairs": [[list(a), list(b)] for a, b in sorted(instance.forbidden_pairs)],
    }


def instance_from_dict(data: dict) -> ProblemInstance:
    try:
        md = data["metadata"]
        requests = []
        for r in data["requests"]:
            rid = str(r["id"])
            score = float(r["score"])
            attempts = tuple(
                ImagingAttempt(
                    request_id=rid,
                    attempt_index=k,
                    start_time=float(a["t_s"]),
                    acq_duration=float(a["d_acq_s"]),
                    score=float(a.get("score", score)),
                    roll_start=float(a["roll_start_deg"]),
                    pitch_start=float(a["pitch_start_deg"]),
                    roll_end=float(a["roll_end_deg"]),
                    pitch_end=float(a["pitch_end_deg"]),
                )
                for k, a in enumerate(r["attempts"])
            )
            requests.append(AcquisitionRequest(rid, float(r["lat_deg"]), float(r["lon_deg"]), score, attempts))
        pairs = frozenset(
            ((int(a[0]), int(a[1])), (int(b[0]), int(b[1]))) for a, b in data.get("forbidden_pairs", [])
        )
        meta = InstanceMetadata(
            int(md["n_requests"]), float(md["delta_t_s"]), float(md["latitude_range_deg"]), int(md["seed"])
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ModelError(f"malformed instance JSON: {exc!r}") from exc
    return ProblemInstance(tuple(requests), pairs, meta)


def dumps_instance(instance: ProblemInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=1) + "\n"


def save_instance(instance: ProblemInstance, path) -> None:
    Path(path).write_text(dumps_instance(instance))


def load_instance(path) -> ProblemInstance:
    return instance_from_dict(json.loads(Path(path).read_text()))


def make_instance(
    request_times: list[list[float]],
    acq_duration: float | list[float] = 5.0,
    manoeuvre: float | Callable[[ImagingAttempt, ImagingAttempt], float] = 5.0,
    scores: list[float] | None = None,
    delta_t: float = 0.0,
) -> ProblemInstance:
    """Build a small instance from raw start times (handy for fixtures).

    ``manoeuvre`` is either a constant duration or a callable on attempt pairs.
    """
    if not callable(manoeuvre):
        const = float(manoeuvre)
        manoeuvre = lambda a, b: const  # noqa: E731
    durations = acq_duration if isinstance(acq_duration, list) else [acq_duration] * len(request_times)
    scores = scores or [1.0] * len(request_times)
    reqs = []
    for r, times in enumerate(request_times):
        rid = f"r{r}"
        attempts = tuple(
            ImagingAttempt(rid, k, float(t), float(durations[r]), float(scores[r])) for k, t in enumerate(times)
        )
        reqs.append(AcquisitionRequest(rid, 0.0, 0.0, float(scores[r]), attempts))
    pairs = set()
    for r, a in enumerate(reqs):
        for s, b in enumerate(reqs):
            if r != s:
                pairs |= {((r, i), (s, j)) for i, j in forbidden_pairs(a, b, manoeuvre)}
    return ProblemInstance(tuple(reqs), frozenset(pairs), InstanceMetadata(len(reqs), delta_t, 0.0, 0))
