"""Benchmark protocols: time to exact solution, quality at fixed time, instance statistics.

Sampler time is accounted as ``reads * t_anneal`` rather than measured; the
measured wall time is kept alongside for transparency.
"""

from __future__ import annotations

import csv
import math
import statistics
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

from .exact import SOLVERS, solve_clique
from .greedy import solve_greedy
from .model import ProblemInstance, constraint_ratio, load_instance
from .qubo import qubo_for_factor
from .sampler import (
    T_ANNEAL,
    AnnealConfig,
    best_repaired,
    random_sample,
    simulated_anneal,
    success_probability,
    t99,
)

EXACT_METHODS = ("bruteforce", "exact-pairwise", "exact-clique")
SAMPLER_METHODS = ("sa", "random")
GREEDY_CAP = 2e-3


@dataclass
class BenchRecord:
    instance_id: str
    N: int
    N_R: int
    delta_t: float
    latitude_range: float
    n_C: float
    method: str
    objective: float
    optimal_objective: float | None
    approximation_ratio: float | None
    proven_optimal: bool
    time_budget: float | None
    accounted_time: float | None
    wall_time: float | None
    success_probability: float | None
    t99: float | None
    seed: int | None
    n_reads: int | None = None
    nodes: int | None = None
    raw_feasible_fraction: float | None = None
    flag: str = ""


COLUMNS = [f.name for f in fields(BenchRecord)]
_TYPES = {
    "instance_id": str, "method": str, "flag": str,
    "N": int, "N_R": int, "seed": int, "n_reads": int, "nodes": int,
    "proven_optimal": bool,
}


def _base(instance_id: str, inst: ProblemInstance) -> dict:
    return dict(
        instance_id=instance_id,
        N=inst.n_vars,
        N_R=len(inst.requests),
        delta_t=inst.metadata.delta_t,
        latitude_range=inst.metadata.latitude_range,
        n_C=constraint_ratio(inst) if inst.n_vars >= 2 else 0.0,
    )


def _ratio(objective: float, optimum: float | None) -> float | None:
    if optimum is None or optimum == 0:
        return None
    return objective / optimum


def reference_optimum(inst: ProblemInstance, time_limit: float | None) -> tuple[float, bool]:
    res = solve_clique(inst, time_limit)
    return res.objective, res.proven_optimal


def _sample(method: str, inst: ProblemInstance, n_reads: int, seed: int, anneal: AnnealConfig, t_anneal: float):
    q = qubo_for_factor(inst)
    if method == "sa":
        cfg = AnnealConfig(n_reads, anneal.sweeps_per_read, anneal.beta_hot, anneal.beta_cold, seed, t_anneal)
        return simulated_anneal(q, cfg)
    if method == "random":
        return random_sample(q, n_reads, seed, t_anneal)
    raise ValueError(f"unknown sampler {method!r}")


def runtime_benchmark(
    instances: Sequence[tuple[str, ProblemInstance]],
    methods: Sequence[str],
    t_anneal: float = T_ANNEAL,
    n_reads: int = 1000,
    seed: int = 0,
    anneal: AnnealConfig = AnnealConfig(),
    time_limit: float | None = 600.0,
) -> list[BenchRecord]:
    """Exact methods: measured time. Samplers: success probability and T99 (accounted)."""
    out = []
    for iid, inst in instances:
        base = _base(iid, inst)
        optimum, proven = reference_optimum(inst, time_limit)
        flag = "" if proven else "optimum_unproven"
        for method in methods:
            if method in EXACT_METHODS or method == "greedy":
                res = solve_greedy(inst) if method == "greedy" else SOLVERS[method](inst, time_limit=time_limit)
                out.append(BenchRecord(
                    **base, method=method, objective=res.objective, optimal_objective=optimum,
                    approximation_ratio=_ratio(res.objective, optimum), proven_optimal=res.proven_optimal,
                    time_budget=time_limit if method != "greedy" else None, accounted_time=res.wall_time,
                    wall_time=res.wall_time, success_probability=None, t99=None, seed=None,
                    nodes=res.nodes_explored, flag=flag,
                ))
            elif method in SAMPLER_METHODS:
                ss = _sample(method, inst, n_reads, seed, anneal, t_anneal)
                p = success_probability(ss, optimum)
                _, obj, ok_frac = best_repaired(inst, ss)
                t = t99(p, t_anneal)
                rec_flag = ";".join(x for x in (flag, "" if p > 0 else "never_optimal") if x)
                out.append(BenchRecord(
                    **base, method=method, objective=obj, optimal_objective=optimum,
                    approximation_ratio=_ratio(obj, optimum), proven_optimal=False,
                    time_budget=None, accounted_time=t, wall_time=ss.wall_time,
                    success_probability=p, t99=t, seed=seed, n_reads=n_reads,
                    raw_feasible_fraction=ok_frac, flag=rec_flag,
                ))
            else:
                raise ValueError(f"unknown method {method!r}")
    return out


def reads_for_budget(budget: float, t_anneal: float = T_ANNEAL) -> int:
    return math.floor(budget / t_anneal * (1 + 1e-12))


def quality_benchmark(
    instances: Sequence[tuple[str, ProblemInstance]],
    budgets: Sequence[float],
    methods: Sequence[str],
    t_anneal: float = T_ANNEAL,
    seed: int = 0,
    anneal: AnnealConfig = AnnealConfig(),
    greedy_cap: float = GREEDY_CAP,
    time_limit: float | None = 600.0,
) -> list[BenchRecord]:
    """Best feasible objective reachable within each time budget.

    Sampler budgets translate to ``floor(budget / t_anneal)`` reads; every
    budget uses a prefix of one shared read stream, so larger budgets never
    do worse. Sampled reads are repaired before scoring.
    """
    out = []
    for iid, inst in instances:
        base = _base(iid, inst)
        optimum, proven = reference_optimum(inst, time_limit)
        flag = "" if proven else "optimum_unproven"
        for method in methods:
            if method == "greedy":
                res = solve_greedy(inst, greedy_cap)
                out.append(BenchRecord(
                    **base, method=method, objective=res.objective, optimal_objective=optimum,
                    approximation_ratio=_ratio(res.objective, optimum), proven_optimal=False,
                    time_budget=greedy_cap, accounted_time=res.wall_time, wall_time=res.wall_time,
                    success_probability=None, t99=None, seed=None, flag=flag,
                ))
                continue
            if method not in SAMPLER_METHODS:
                raise ValueError(f"unknown method {method!r}")
            most = max((reads_for_budget(b, t_anneal) for b in budgets), default=0)
            full = _sample(method, inst, most, seed, anneal, t_anneal) if most > 0 else None
            for budget in budgets:
                n = reads_for_budget(budget, t_anneal)
                if n == 0:
                    out.append(BenchRecord(
                        **base, method=method, objective=0.0, optimal_objective=optimum,
                        approximation_ratio=0.0, proven_optimal=False, time_budget=budget,
                        accounted_time=0.0, wall_time=0.0, success_probability=None, t99=None,
                        seed=seed, n_reads=0, flag=";".join(x for x in (flag, "budget_below_one_read") if x),
                    ))
                    continue
                ss = full.head(n)
                _, obj, ok_frac = best_repaired(inst, ss)
                out.append(BenchRecord(
                    **base, method=method, objective=obj, optimal_objective=optimum,
                    approximation_ratio=_ratio(obj, optimum), proven_optimal=False, time_budget=budget,
                    accounted_time=n * t_anneal, wall_time=full.wall_time * n / full.reads,
                    success_probability=success_probability(ss, optimum), t99=None, seed=seed,
                    n_reads=n, raw_feasible_fraction=ok_frac, flag=flag,
                ))
    return out


def summarize(records: Iterable[BenchRecord]) -> list[dict]:
    """Mean and standard deviation per (method, time_budget, N), skipping flagged/infinite values."""
    groups: dict[tuple, list[BenchRecord]] = defaultdict(list)
    for r in records:
        groups[(r.method, r.time_budget, r.N)].append(r)
    rows = []
    for (method, budget, n), recs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1] or 0.0, kv[0][2])):
        row = {"method": method, "time_budget": budget, "N": n, "count": len(recs)}
        for col in ("approximation_ratio", "accounted_time", "wall_time", "success_probability"):
            vals = [
                getattr(r, col) for r in recs
                if getattr(r, col) is not None and math.isfinite(getattr(r, col)) and "unproven" not in r.flag
            ]
            row[f"{col}_mean"] = statistics.fmean(vals) if vals else None
            row[f"{col}_std"] = statistics.pstdev(vals) if len(vals) > 1 else (0.0 if vals else None)
        rows.append(row)
    return rows


def instance_statistics(instances: Iterable[ProblemInstance]) -> list[tuple[str, str, int]]:
    """Counts per parameter value; constraint ratio in 10 % bins."""
    counters: dict[str, Counter] = {k: Counter() for k in ("N", "N_R", "delta_t", "latitude_range", "n_C")}
    for inst in instances:
        counters["N"][inst.n_vars] += 1
        counters["N_R"][len(inst.requests)] += 1
        counters["delta_t"][inst.metadata.delta_t] += 1
        counters["latitude_range"][inst.metadata.latitude_range] += 1
        nc = constraint_ratio(inst) if inst.n_vars >= 2 else 0.0
        lo = min(int(nc // 10) * 10, 90)
        counters["n_C"][lo] += 1
    rows = []
    for param, counter in counters.items():
        for value in sorted(counter):
            label = f"[{value},{value + 10})" if param == "n_C" else _fmt(value)
            rows.append((param, label, counter[value]))
    return rows


# --- CSV -------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _parse(col: str, s: str):
    kind = _TYPES.get(col, float)
    if kind is str:
        return s
    if s == "":
        return None
    if kind is bool:
        return s == "true"
    return kind(s)


def export_csv(records: Sequence[BenchRecord], path, timings: bool = True) -> None:
    """One header row, ``BenchRecord`` column order, floats at 17 significant digits.

    With ``timings=False`` the measured wall-clock columns are left empty so
    the file depends only on the inputs and seeds.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in records if timings else strip_timings(records):
            d = asdict(r)
            w.writerow([_fmt(d[c]) for c in COLUMNS])


def strip_timings(records: Iterable[BenchRecord]) -> list[BenchRecord]:
    """Drop measured clock values; sampler accounted time is nominal and kept."""
    out = []
    for r in records:
        measured = r.method in EXACT_METHODS or r.method == "greedy"
        out.append(replace(r, wall_time=None, accounted_time=None if measured else r.accounted_time))
    return out


def read_csv(path) -> list[BenchRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [BenchRecord(**{c: _parse(c, row[c]) for c in COLUMNS}) for row in rows]


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def load_instance_dir(directory) -> list[tuple[str, ProblemInstance]]:
    paths = sorted(Path(directory).glob("*.json"))
    return [(p.stem, load_instance(p)) for p in paths]


__all__ = [
    "BenchRecord", "runtime_benchmark", "quality_benchmark", "instance_statistics", "summarize", "strip_timings",
    "export_csv", "read_csv", "reads_for_budget", "load_instance_dir",
]
