"""Pure-Python twin of ``_ckernels``.

Same draws, same operation order, same results, only slower. Used when the
extension is not built, and as the reference in the parity tests.
"""

import math

import numpy as np

from .rng import GOLDEN_GAMMA, MASK64, mix64, substream_seed

_INV_2_53 = 1.0 / 9007199254740992.0


def random_states(n_reads, n, seed, read_offset=0):
    out = np.empty((n_reads, n), dtype=np.uint8)
    for k in range(n_reads):
        state = substream_seed(seed, k + read_offset)
        row = []
        for _ in range(n):
            state = (state + GOLDEN_GAMMA) & MASK64
            row.append(mix64(state) >> 63)
        out[k] = row
    return out


def anneal(linear, indptr, indices, data, betas, n_reads, seed, read_offset=0):
    linear = [float(v) for v in linear]
    n = len(linear)
    nbrs = [
        list(zip(indices[indptr[i]:indptr[i + 1]].tolist(), data[indptr[i]:indptr[i + 1]].tolist()))
        for i in range(n)
    ]
    betas = [float(b) for b in betas]
    exp = math.exp
    out = np.zeros((n_reads, n), dtype=np.uint8)
    for k in range(n_reads):
        state = substream_seed(seed, k + read_offset)
        x = []
        for _ in range(n):
            state = (state + GOLDEN_GAMMA) & MASK64
            x.append(mix64(state) >> 63)
        field = []
        for i in range(n):
            f = linear[i]
            for j, c in nbrs[i]:
                if x[j]:
                    f += c
            field.append(f)
        energy = 0.0
        for i in range(n):
            if x[i]:
                energy += linear[i]
                for j, c in nbrs[i]:
                    if j > i and x[j]:
                        energy += c
        best_energy = energy
        best = list(x)
        for beta in betas:
            for i in range(n):
                de = -field[i] if x[i] else field[i]
                if de > 0.0:
                    state = (state + GOLDEN_GAMMA) & MASK64
                    u = (mix64(state) >> 11) * _INV_2_53
                    if u >= exp(-beta * de):
                        continue
                x[i] ^= 1
                energy += de
                if x[i]:
                    for j, c in nbrs[i]:
                        field[j] += c
                else:
                    for j, c in nbrs[i]:
                        field[j] -= c
                if energy < best_energy:
                    best_energy = energy
                    best = list(x)
        out[k] = best
    return out


def qubo_energies(states, linear, pair_i, pair_j, pair_c, offset):
    linear = linear.tolist()
    pairs = list(zip(pair_i.tolist(), pair_j.tolist(), pair_c.tolist()))
    out = np.empty(len(states), dtype=np.float64)
    for k, row in enumerate(states.tolist()):
        acc = float(offset)
        for i, v in enumerate(linear):
            if row[i]:
                acc += v
        for i, j, c in pairs:
            if row[i] and row[j]:
                acc += c
        out[k] = acc
    return out
