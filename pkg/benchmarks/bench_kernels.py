"""Time the compiled and pure-Python sampling kernels on the same inputs.

    python benchmarks/bench_kernels.py [--n-vars 70] [--reads 50] [--sweeps 200]
"""

import argparse
import time

import numpy as np

from eosplan import kernels
from eosplan.qubo import qubo_for_factor
from eosplan.sampler import AnnealConfig
from eosplan.scenario import GenerationParams, _search_requests


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-vars", type=int, default=70)
    ap.add_argument("--reads", type=int, default=50)
    ap.add_argument("--sweeps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    inst = _search_requests(GenerationParams(1, 15.0, 2.0, 1), args.n_vars)
    q = qubo_for_factor(inst, 1.1)
    lin, pi, pj, pc = q.arrays()
    indptr, indices, data = q.csr()
    betas = AnnealConfig(sweeps_per_read=args.sweeps).betas()
    n = q.n
    print(f"instance N={n}, {len(pc)} couplings; {args.reads} reads x {args.sweeps} sweeps")

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python backend is available")
    results = {}
    for name in backends:
        k = kernels.get(name)
        t_anneal, states = _best_of(lambda: np.asarray(k.anneal(lin, indptr, indices, data, betas, args.reads, 7)),
                                    args.repeat)
        t_rand, rand = _best_of(lambda: np.asarray(k.random_states(args.reads * 100, n, 7)), args.repeat)
        t_energy, energies = _best_of(lambda: np.asarray(k.qubo_energies(rand, lin, pi, pj, pc, q.offset)),
                                      args.repeat)
        results[name] = {"anneal": t_anneal, "random_states": t_rand, "qubo_energies": t_energy}
        results[name]["_check"] = (states.tobytes(), energies.tobytes())

    if len(results) == 2:
        same = results["cython"]["_check"] == results["python"]["_check"]
        print(f"outputs identical across backends: {same}")
    print(f"{'kernel':15s}" + "".join(f"{b:>12s}" for b in results) + ("     speedup" if len(results) == 2 else ""))
    for kernel in ("anneal", "random_states", "qubo_energies"):
        row = f"{kernel:15s}" + "".join(f"{results[b][kernel]:11.4f}s" for b in results)
        if len(results) == 2:
            row += f"{results['python'][kernel] / results['cython'][kernel]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
