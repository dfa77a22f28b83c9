"""Command-line entry point: ``eosplan <command> ...``.

Exit status: 0 success, 1 usage error, 2 domain error (bad input data,
capacity exceeded, invalid embedding).
"""

from __future__ import annotations

import argparse
import json
import sys
from functools import partial
from pathlib import Path

from . import __version__, bench
from .embedding import (
    Embedding,
    apply_embedding,
    chimera_graph,
    load_embedding,
    majority_vote_unembed,
)
from .exact import SOLVERS
from .greedy import solve_greedy
from .model import (
    ModelError,
    Plan,
    ProblemInstance,
    instance_summary,
    load_instance,
    save_instance,
)
from .qubo import (
    DEFAULT_LAMBDA_FACTOR,
    chain_coupling_worst_case,
    ising_from_dict,
    ising_to_dict,
    max_coefficient_ratio,
    qubo_for_factor,
    qubo_to_dict,
    qubo_to_ising,
)
from .sampler import (
    AnnealConfig,
    best_repaired,
    energy_histogram,
    random_sample,
    simulated_anneal,
)
from .scenario import (
    GenerationParams,
    KinematicsConfig,
    generate_instance,
    preset_names,
)

METHODS = ("bruteforce", "exact-pairwise", "exact-clique", "greedy", "sa", "random")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def _add_anneal_args(p) -> None:
    p.add_argument("--reads", type=_positive_int, default=1000)
    p.add_argument("--sweeps", type=_positive_int, default=AnnealConfig.sweeps_per_read)
    p.add_argument("--beta-hot", type=_positive_float, default=AnnealConfig.beta_hot)
    p.add_argument("--beta-cold", type=_positive_float, default=AnnealConfig.beta_cold)
    p.add_argument("--t-anneal-us", type=_positive_float, default=20.0, help="accounted time per read")
    p.add_argument("--seed", type=_nonneg_int)


def _anneal_config(args, seed: int) -> AnnealConfig:
    if args.beta_cold < args.beta_hot:
        raise UsageError("--beta-cold must be >= --beta-hot")
    return AnnealConfig(args.reads, args.sweeps, args.beta_hot, args.beta_cold, seed, args.t_anneal_us * 1e-6)


def _require_seed(args, what: str) -> int:
    if args.seed is None:
        raise UsageError(f"--seed is required for {what}")
    return args.seed


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eosplan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"eosplan {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("generate", help="generate instances")
    g.add_argument("--requests", type=_positive_int)
    g.add_argument("--dt", type=_positive_float)
    g.add_argument("--latitude-range", type=_positive_float)
    g.add_argument("--seed", type=_nonneg_int)
    g.add_argument("--kinematics", help="JSON file overriding kinematic defaults")
    g.add_argument("--preset", choices=("p-hard", "p-broad"))
    g.add_argument("--out", required=True, help="instance file, or directory with --preset")

    s = sub.add_parser("stats", help="instance statistics")
    s.add_argument("--instances", required=True, help="directory of instance JSON files")
    s.add_argument("--out")

    so = sub.add_parser("solve", help="solve one instance")
    so.add_argument("--method", choices=METHODS, required=True)
    so.add_argument("--in", dest="inp", required=True)
    so.add_argument("--out")
    so.add_argument("--time-limit-s", type=_positive_float)
    so.add_argument("--time-budget-ms", type=_positive_float, default=2.0, help="greedy only")
    so.add_argument("--lambda-factor", type=_positive_float, default=DEFAULT_LAMBDA_FACTOR)
    so.add_argument("--timings", action="store_true", help="write measured wall time to the output file")
    _add_anneal_args(so)

    qp = sub.add_parser("qubo", help="export the penalty QUBO or its Ising form")
    qp.add_argument("--in", dest="inp", required=True)
    qp.add_argument("--lambda-factor", type=_positive_float, default=DEFAULT_LAMBDA_FACTOR)
    qp.add_argument("--format", choices=("qubo-json", "ising-json"), default="qubo-json")
    qp.add_argument("--out", required=True)

    e = sub.add_parser("embed", help="apply a minor embedding to a logical Ising model")
    e.add_argument("--ising", required=True)
    e.add_argument("--embedding", required=True)
    e.add_argument("--chimera", default="16,16,4", help="m,n,t")
    e.add_argument("--chain-coupling", type=float, help="default: worst-case value of the logical model")
    e.add_argument("--out", required=True)

    u = sub.add_parser("unembed", help="majority-vote physical samples back to logical spins")
    u.add_argument("--samples", required=True)
    u.add_argument("--embedding", required=True)
    u.add_argument("--out")

    h = sub.add_parser("hist", help="energy histogram of sampled QUBO energies")
    h.add_argument("--in", dest="inp", required=True)
    h.add_argument("--method", choices=("sa", "random"), required=True)
    h.add_argument("--bins", type=_positive_int, default=50)
    h.add_argument("--lambda-factor", type=_positive_float, default=DEFAULT_LAMBDA_FACTOR)
    h.add_argument("--out", required=True)
    _add_anneal_args(h)

    b = sub.add_parser("bench", help="benchmark protocols")
    bsub = b.add_subparsers(dest="protocol", parser_class=_Parser)
    for name in ("runtime", "quality"):
        bp = bsub.add_parser(name)
        bp.add_argument("--instances", required=True)
        bp.add_argument("--out", required=True)
        bp.add_argument("--jobs", type=_positive_int, default=1)
        bp.add_argument("--time-limit-s", type=_positive_float, default=600.0)
        bp.add_argument("--timings", action="store_true", help="write measured wall times")
        _add_anneal_args(bp)
        if name == "runtime":
            bp.add_argument("--methods", default="exact-pairwise,exact-clique,sa")
        else:
            bp.add_argument("--methods", default="greedy,sa,random")
            bp.add_argument("--budgets-ms", type=_float_list, default=[0.02, 0.2, 2.0, 20.0])
    return parser


# --- commands ----------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.preset:
        seed = _require_seed(args, "generate")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        named = preset_names(args.preset, seed)
        for name, inst in named:
            save_instance(inst, out / f"{name}.json")
        print(f"wrote {len(named)} instances to {out}")
        return 0
    missing = [f for f, v in (("--requests", args.requests), ("--dt", args.dt),
                              ("--latitude-range", args.latitude_range), ("--seed", args.seed)) if v is None]
    if missing:
        raise UsageError("generate needs " + ", ".join(missing))
    kin = KinematicsConfig()
    if args.kinematics:
        kin = KinematicsConfig(**json.loads(Path(args.kinematics).read_text()))
    inst = generate_instance(GenerationParams(args.requests, args.dt, args.latitude_range, args.seed, kin))
    save_instance(inst, args.out)
    s = instance_summary(inst)
    print(f"N={s['N']} N_R={s['N_R']} N_C={s['N_C']} n_C={s['n_C']:.2f}% -> {args.out}")
    return 0


def cmd_stats(args) -> int:
    named = bench.load_instance_dir(args.instances)
    rows = bench.instance_statistics(inst for _, inst in named)
    if args.out:
        bench.write_rows(args.out, ("parameter", "bin", "count"), rows)
    for param, label, count in rows:
        print(f"{param:15s} {label:>12s} {count}")
    return 0


def _plan_json(instance: ProblemInstance, plan: Plan, objective: float, proven: bool, nodes: int, wall):
    return {
        "selected": [list(k) for k in sorted(plan.selected)],
        "objective": objective,
        "proven_optimal": proven,
        "nodes": nodes,
        "wall_time_s": wall,
    }


def cmd_solve(args) -> int:
    inst = load_instance(args.inp)
    if args.method in ("sa", "random"):
        seed = _require_seed(args, f"--method {args.method}")
        q = qubo_for_factor(inst, args.lambda_factor)
        if args.method == "sa":
            ss = simulated_anneal(q, _anneal_config(args, seed))
        else:
            ss = random_sample(q, args.reads, seed, args.t_anneal_us * 1e-6)
        plan, obj, ok_frac = best_repaired(inst, ss)
        result = _plan_json(inst, plan, obj, False, ss.reads, ss.wall_time if args.timings else None)
        print(f"method={args.method} reads={ss.reads} min_energy={ss.energies.min():.6g} "
              f"raw_feasible={ok_frac:.3f}")
    else:
        if args.method == "greedy":
            res = solve_greedy(inst, args.time_budget_ms * 1e-3)
        else:
            res = SOLVERS[args.method](inst, time_limit=args.time_limit_s)
        result = _plan_json(inst, res.plan, res.objective, res.proven_optimal, res.nodes_explored,
                            res.wall_time if args.timings else None)
        label = " (operational-style heuristic)" if args.method == "greedy" else ""
        print(f"method={args.method}{label} nodes={res.nodes_explored} proven_optimal={res.proven_optimal}")
    print(f"objective {result['objective']:g} ({len(result['selected'])} acquisitions)")
    if args.out:
        _write_json(args.out, result)
    return 0


def cmd_qubo(args) -> int:
    inst = load_instance(args.inp)
    q = qubo_for_factor(inst, args.lambda_factor)
    if args.format == "qubo-json":
        _write_json(args.out, qubo_to_dict(q))
    else:
        m = qubo_to_ising(q)
        _write_json(args.out, ising_to_dict(m, q.n))
        print(f"C_Ising={max_coefficient_ratio(m):.6g} worst-case J_C={chain_coupling_worst_case(m):.6g}")
    print(f"n={q.n} linear={len(q.linear)} quadratic={len(q.quadratic)} -> {args.out}")
    return 0


def _parse_chimera(text: str):
    try:
        m, n, t = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--chimera expects m,n,t, got {text!r}") from exc
    return chimera_graph(m, n, t)


def cmd_embed(args) -> int:
    logical = ising_from_dict(json.loads(Path(args.ising).read_text()))
    emb = load_embedding(args.embedding)
    g = _parse_chimera(args.chimera)
    jc = args.chain_coupling if args.chain_coupling is not None else chain_coupling_worst_case(logical)
    physical = apply_embedding(logical, emb, g, jc)
    _write_json(args.out, ising_to_dict(physical, g.node_count))
    print(f"physical qubits={len(emb.physical_nodes)} J_C={jc:g} "
          f"C_Ising={max_coefficient_ratio(physical):.6g} -> {args.out}")
    return 0


def _read_samples(path) -> list[dict[int, int]]:
    data = json.loads(Path(path).read_text())
    rows = data["samples"] if isinstance(data, dict) else data
    out = []
    for row in rows:
        if isinstance(row, dict):
            out.append({int(k): int(v) for k, v in row.items()})
        else:
            out.append(dict(enumerate(int(v) for v in row)))
    return out


def cmd_unembed(args) -> int:
    emb: Embedding = load_embedding(args.embedding)
    try:
        logical = [majority_vote_unembed(s, emb) for s in _read_samples(args.samples)]
    except KeyError as exc:
        raise ModelError(f"sample does not cover chain node {exc}") from exc
    result = {"variables": sorted(emb.chains), "samples": logical}
    if args.out:
        _write_json(args.out, result)
    else:
        print(json.dumps(result))
    return 0


def cmd_hist(args) -> int:
    seed = _require_seed(args, "hist")
    inst = load_instance(args.inp)
    q = qubo_for_factor(inst, args.lambda_factor)
    if args.method == "sa":
        ss = simulated_anneal(q, _anneal_config(args, seed))
    else:
        ss = random_sample(q, args.reads, seed)
    rows = energy_histogram(ss.energies, args.bins)
    bench.write_rows(args.out, ("bin_low", "bin_high", "count"), rows)
    print(f"{args.method}: reads={ss.reads} mean={ss.energies.mean():.6g} min={ss.energies.min():.6g} -> {args.out}")
    return 0


def _bench_one(path: str, args_dict: dict) -> list:
    inst = load_instance(path)
    named = [(Path(path).stem, inst)]
    anneal = AnnealConfig(1, args_dict["sweeps"], args_dict["beta_hot"], args_dict["beta_cold"])
    t_anneal = args_dict["t_anneal_us"] * 1e-6
    methods = args_dict["methods"]
    if args_dict["protocol"] == "runtime":
        return bench.runtime_benchmark(named, methods, t_anneal, args_dict["reads"], args_dict["seed"],
                                       anneal, args_dict["time_limit_s"])
    budgets = [b * 1e-3 for b in args_dict["budgets_ms"]]
    return bench.quality_benchmark(named, budgets, methods, t_anneal, args_dict["seed"], anneal,
                                   time_limit=args_dict["time_limit_s"])


def cmd_bench(args) -> int:
    if args.protocol is None:
        raise UsageError("bench needs a protocol: runtime or quality")
    methods = [m for m in args.methods.split(",") if m]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise UsageError(f"unknown methods: {', '.join(bad)}")
    if any(m in ("sa", "random") for m in methods):
        _require_seed(args, "sampling methods")
    if args.beta_cold < args.beta_hot:
        raise UsageError("--beta-cold must be >= --beta-hot")
    paths = [str(p) for p in sorted(Path(args.instances).glob("*.json"))]
    opts = dict(vars(args), methods=methods, seed=args.seed or 0)
    opts.pop("func", None)
    worker = partial(_bench_one, args_dict=opts)
    if args.jobs > 1:
        from multiprocessing import Pool

        with Pool(args.jobs) as pool:
            chunks = pool.map(worker, paths)
    else:
        chunks = [worker(p) for p in paths]
    records = [r for chunk in chunks for r in chunk]
    bench.export_csv(records, args.out, timings=args.timings)
    summary = bench.summarize(records if args.timings else bench.strip_timings(records))
    if summary:
        summary_path = Path(args.out).with_suffix(".summary.csv")
        header = list(summary[0])
        bench.write_rows(summary_path, header, ([row[c] for c in header] for row in summary))
    for row in summary:
        ratio = row["approximation_ratio_mean"]
        print(f"{row['method']:15s} N={row['N']:4d} budget={row['time_budget']} "
              f"ratio={'-' if ratio is None else f'{ratio:.4f}'} n={row['count']}")
    if "greedy" in methods:
        print("greedy rows: operational-style heuristic")
    print(f"{len(records)} records -> {args.out}")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "stats": cmd_stats,
    "solve": cmd_solve,
    "qubo": cmd_qubo,
    "embed": cmd_embed,
    "unembed": cmd_unembed,
    "hist": cmd_hist,
    "bench": cmd_bench,
}


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"eosplan {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (ModelError, OSError, json.JSONDecodeError) as exc:
        print(f"eosplan {args.command}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
