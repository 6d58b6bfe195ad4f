# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backtracking kernel for powers of Hamiltonian cycles.

Same algorithm as ``_kernel_py`` (candidate order, pruning, node counting),
on ``uint64`` adjacency rows, so graphs are limited to 64 vertices.
"""

from libc.stdint cimport uint64_t, int64_t
from libc.string cimport memcpy

import time

FOUND = 1
NOT_FOUND = 0
TIMEOUT = -1

MAX_N = 64

cdef int CHECK_EVERY = 1024


cdef extern from *:
    int popcount "__builtin_popcountll"(uint64_t x) nogil
    int ctz "__builtin_ctzll"(uint64_t x) nogil


cdef struct State:
    int n
    int m
    uint64_t rows[64]
    uint64_t twin[64]
    int order[64]
    int64_t nodes
    int64_t max_nodes
    double deadline
    int stopped


cdef double now():
    return time.perf_counter()


cdef bint find_clique(uint64_t* rows, uint64_t avail, int size, int* out) noexcept nogil:
    cdef uint64_t rest = avail
    cdef uint64_t low
    cdef int v
    if size == 0:
        return True
    while rest:
        low = rest & (~rest + 1)
        v = ctz(low)
        rest ^= low
        if find_clique(rows, rows[v] & rest, size - 1, out + 1):
            out[0] = v
            return True
    return False


cdef bint window_bound_fails(uint64_t* rows, uint64_t avail, int m, int windows) noexcept nogil:
    cdef uint64_t local[64]
    cdef int clique[65]
    cdef int capacity = 0
    cdef int64_t best_num, best_den, kills, den
    cdef int best_a, best_b, a, b, x, y
    cdef uint64_t nb, rest, low
    memcpy(local, rows, 64 * sizeof(uint64_t))
    while capacity < windows:
        if not find_clique(local, avail, m + 1, clique):
            return True
        best_num = -1
        best_den = 1
        best_a = -1
        best_b = -1
        den = 2 * (m + 1)
        for x in range(m + 1):
            a = clique[x]
            nb = local[a] & avail
            kills = 0
            rest = nb
            while rest:
                low = rest & (~rest + 1)
                kills += popcount(local[ctz(low)] & nb)
                rest ^= low
            if kills * best_den > best_num * den:
                best_num = kills
                best_den = den
                best_a = a
                best_b = -1
        for x in range(m + 1):
            for y in range(x + 1, m + 1):
                a = clique[x]
                b = clique[y]
                kills = popcount(local[a] & local[b] & avail)
                if kills * best_den > best_num * m:
                    best_num = kills
                    best_den = m
                    best_a = a
                    best_b = b
        if best_b < 0:
            avail &= ~((<uint64_t>1) << best_a)
            capacity += m + 1
        else:
            local[best_a] &= ~((<uint64_t>1) << best_b)
            local[best_b] &= ~((<uint64_t>1) << best_a)
            capacity += m
    return False


cdef inline uint64_t bit(int v) noexcept nogil:
    return (<uint64_t>1) << v


cdef bint feasible(State* s, int i, uint64_t unused) noexcept nogil:
    cdef int n = s.n
    cdef int m = s.m
    cdef int left = n - 1 - i
    cdef int need = 2 * m
    cdef int j, u, pending, lo
    cdef uint64_t open_mask, rest, low
    if left - m > 0 and window_bound_fails(s.rows, unused, m, left - m):
        return False
    open_mask = unused
    lo = i - m + 1
    if lo < 0:
        lo = 0
    for j in range(lo, i + 1):
        open_mask |= bit(s.order[j])
    for j in range(min(m, i + 1)):
        open_mask |= bit(s.order[j])
    rest = unused
    while rest:
        low = rest & (~rest + 1)
        u = ctz(low)
        if popcount(s.rows[u] & open_mask) < need:
            return False
        rest ^= low
    for j in range(lo, i + 1):
        pending = min(j + m, n - 1) - i
        if pending > 0 and popcount(s.rows[s.order[j]] & unused) < pending:
            return False
    for j in range(min(m, i + 1)):
        pending = min(m - j, left)
        if pending > 0 and popcount(s.rows[s.order[j]] & unused) < pending:
            return False
    return True


cdef bint extend(State* s, int i, uint64_t unused):
    cdef int n = s.n
    cdef int m = s.m
    cdef int j, c, count, a, lo
    cdef uint64_t cand, rest, low, after
    cdef int keys[64]
    cdef int key
    s.nodes += 1
    if s.nodes > s.max_nodes:
        s.stopped = 1
        return False
    if s.nodes % CHECK_EVERY == 0 and now() > s.deadline:
        s.stopped = 1
        return False
    cand = unused
    lo = i - m
    if lo < 0:
        lo = 0
    for j in range(lo, i):
        cand &= s.rows[s.order[j]]
    for j in range(0, i + m - n + 1):
        cand &= s.rows[s.order[j]]
    if i == n - 1:
        cand &= ~((bit(s.order[1]) << 1) - 1)
    count = 0
    rest = cand
    while rest:
        low = rest & (~rest + 1)
        c = ctz(low)
        rest ^= low
        if s.twin[c] & unused & (low - 1):
            continue
        # (remaining degree, id) packed into one int; insertion sort
        key = (popcount(s.rows[c] & unused & ~low) << 8) | c
        a = count
        while a > 0 and keys[a - 1] > key:
            keys[a] = keys[a - 1]
            a -= 1
        keys[a] = key
        count += 1
    for a in range(count):
        c = keys[a] & 0xFF
        s.order[i] = c
        if i == n - 1:
            return True
        after = unused & ~bit(c)
        if feasible(s, i, after):
            if extend(s, i + 1, after):
                return True
            if s.stopped:
                return False
    return False


def search_power_cycle(rows, int n, int m, twin, max_nodes, double max_seconds):
    """See ``_kernel_py.search_power_cycle``; ``n`` must be at most 64."""
    cdef State s
    cdef int v
    cdef uint64_t full
    cdef bint found
    if n > MAX_N:
        raise ValueError(f"compiled kernel handles at most {MAX_N} vertices, got {n}")
    s.n = n
    s.m = m
    for v in range(64):
        s.rows[v] = 0
        s.twin[v] = 0
        s.order[v] = 0
    for v in range(n):
        s.rows[v] = rows[v]
        s.twin[v] = twin[v]
    s.nodes = 0
    s.max_nodes = max_nodes
    s.deadline = now() + max_seconds
    s.stopped = 0
    full = ((<uint64_t>1) << n) - 1 if n < 64 else ~(<uint64_t>0)
    if window_bound_fails(s.rows, full, m, n) or not feasible(&s, 0, full & ~(<uint64_t>1)):
        return NOT_FOUND, None, 0
    found = extend(&s, 1, full & ~(<uint64_t>1))
    if s.stopped:
        return TIMEOUT, None, s.nodes
    if found:
        return FOUND, [s.order[v] for v in range(n)], s.nodes
    return NOT_FOUND, None, s.nodes
