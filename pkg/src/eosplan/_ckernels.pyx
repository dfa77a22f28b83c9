# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampling kernels.

Arithmetic and draw order mirror ``_pykernels`` exactly, so both backends
return bit-identical states and energies for the same seed.
"""

import numpy as np

from libc.math cimport exp
from libc.stdint cimport int64_t, uint8_t, uint64_t
from libc.string cimport memcpy


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _next(uint64_t* state) noexcept nogil:
    state[0] += 0x9E3779B97F4A7C15ULL
    return _mix64(state[0])


cdef inline double _uniform(uint64_t* state) noexcept nogil:
    return <double>(_next(state) >> 11) * (1.0 / 9007199254740992.0)


cdef inline uint64_t _substream(uint64_t seed, uint64_t index) noexcept nogil:
    return _mix64(_mix64(seed) ^ (index * 0xD1B54A32D192ED03ULL))


def random_states(Py_ssize_t n_reads, Py_ssize_t n, uint64_t seed, Py_ssize_t read_offset=0):
    out = np.empty((n_reads, n), dtype=np.uint8)
    cdef uint8_t[:, ::1] x = out
    cdef Py_ssize_t k, i
    cdef uint64_t state
    with nogil:
        for k in range(n_reads):
            state = _substream(seed, <uint64_t>(k + read_offset))
            for i in range(n):
                x[k, i] = <uint8_t>(_next(&state) >> 63)
    return out


def anneal(
    const double[::1] linear,
    const int64_t[::1] indptr,
    const int64_t[::1] indices,
    const double[::1] data,
    const double[::1] betas,
    Py_ssize_t n_reads,
    uint64_t seed,
    Py_ssize_t read_offset=0,
):
    cdef Py_ssize_t n = linear.shape[0]
    cdef Py_ssize_t n_sweeps = betas.shape[0]
    out = np.zeros((n_reads, n), dtype=np.uint8)
    cdef uint8_t[:, ::1] best = out
    x_buf = np.zeros(n, dtype=np.uint8)
    f_buf = np.zeros(n, dtype=np.float64)
    cdef uint8_t[::1] x = x_buf
    cdef double[::1] field = f_buf
    cdef Py_ssize_t k, s, i, p
    cdef uint64_t state
    cdef double energy, best_energy, de, beta, c

    with nogil:
        for k in range(n_reads):
            state = _substream(seed, <uint64_t>(k + read_offset))
            for i in range(n):
                x[i] = <uint8_t>(_next(&state) >> 63)
            energy = 0.0
            for i in range(n):
                field[i] = linear[i]
                for p in range(indptr[i], indptr[i + 1]):
                    if x[indices[p]]:
                        field[i] += data[p]
            for i in range(n):
                if x[i]:
                    energy += linear[i]
                    for p in range(indptr[i], indptr[i + 1]):
                        if indices[p] > i and x[indices[p]]:
                            energy += data[p]
            best_energy = energy
            memcpy(&best[k, 0], &x[0], n)
            for s in range(n_sweeps):
                beta = betas[s]
                for i in range(n):
                    if x[i]:
                        de = -field[i]
                    else:
                        de = field[i]
                    if de > 0.0:
                        if _uniform(&state) >= exp(-beta * de):
                            continue
                    x[i] ^= 1
                    energy += de
                    if x[i]:
                        for p in range(indptr[i], indptr[i + 1]):
                            field[indices[p]] += data[p]
                    else:
                        for p in range(indptr[i], indptr[i + 1]):
                            field[indices[p]] -= data[p]
                    if energy < best_energy:
                        best_energy = energy
                        memcpy(&best[k, 0], &x[0], n)
    return out


def qubo_energies(
    const uint8_t[:, ::1] states,
    const double[::1] linear,
    const int64_t[::1] pair_i,
    const int64_t[::1] pair_j,
    const double[::1] pair_c,
    double offset,
):
    cdef Py_ssize_t n_rows = states.shape[0]
    cdef Py_ssize_t n = linear.shape[0]
    cdef Py_ssize_t m = pair_c.shape[0]
    out = np.empty(n_rows, dtype=np.float64)
    cdef double[::1] e = out
    cdef Py_ssize_t k, i, p
    cdef double acc
    with nogil:
        for k in range(n_rows):
            acc = offset
            for i in range(n):
                if states[k, i]:
                    acc += linear[i]
            for p in range(m):
                if states[k, pair_i[p]] and states[k, pair_j[p]]:
                    acc += pair_c[p]
            e[k] = acc
    return out
