"""Pure-Python backtracking kernel for powers of Hamiltonian cycles.

Mirrors ``_kernel.pyx`` move for move (same candidate order, same pruning,
same node accounting), so both backends return identical outcomes whenever
the wall-clock limit is not the one that stops the search.  Adjacency rows
are Python ints; the compiled kernel uses ``uint64`` and is limited to 64
vertices, this one is not.
"""

from __future__ import annotations

import time

FOUND = 1
NOT_FOUND = 0
TIMEOUT = -1

CHECK_EVERY = 1024


class _Stop(Exception):
    pass


def find_clique(rows, avail, size):
    """Lexicographically first clique of ``size`` vertices inside ``avail``."""
    if size == 0:
        return []
    rest = avail
    while rest:
        low = rest & -rest
        v = low.bit_length() - 1
        rest ^= low
        sub = find_clique(rows, rows[v] & rest, size - 1)
        if sub is not None:
            return [v] + sub
    return None


def window_bound_fails(rows, avail, m, windows):
    """True when ``windows`` consecutive-position cliques cannot fit in ``avail``.

    Greedily hits every ``K_{m+1}`` of ``H[avail]`` with vertices and edges.
    A vertex lies in at most ``m + 1`` windows of ``m + 1`` consecutive
    positions and an edge in at most ``m``; if the hitting set is complete
    while its total capacity is below ``windows``, the windows cannot all be
    cliques.  Each step removes the element of the lexicographically first
    remaining clique with the best kills-per-capacity ratio.
    """
    local = list(rows)
    capacity = 0
    while capacity < windows:
        clique = find_clique(local, avail, m + 1)
        if clique is None:
            return True
        # scores are fractions num/den; vertex kills are counted twice
        best_num, best_den, best_a, best_b = -1, 1, -1, -1
        for a in clique:
            nb = local[a] & avail
            kills = 0
            rest = nb
            while rest:
                low = rest & -rest
                kills += (local[low.bit_length() - 1] & nb).bit_count()
                rest ^= low
            den = 2 * (m + 1)
            if kills * best_den > best_num * den:
                best_num, best_den, best_a, best_b = kills, den, a, -1
        for x in range(m + 1):
            for y in range(x + 1, m + 1):
                a, b = clique[x], clique[y]
                kills = (local[a] & local[b] & avail).bit_count()
                if kills * best_den > best_num * m:
                    best_num, best_den, best_a, best_b = kills, m, a, b
        if best_b < 0:
            avail &= ~(1 << best_a)
            capacity += m + 1
        else:
            local[best_a] &= ~(1 << best_b)
            local[best_b] &= ~(1 << best_a)
            capacity += m
    return False


def search_power_cycle(rows, n, m, twin, max_nodes, max_seconds):
    """Search for an ordering ``v_0..v_{n-1}`` with ``v_0 = 0`` in which every
    two vertices at cyclic distance ``<= m`` are adjacent.

    ``twin[v]`` is the bitmask of the twin class of ``v``; only the smallest
    unused member of a class is tried at any position.  Requires
    ``n >= 2m + 2``.  Returns ``(status, order, nodes)``.
    """
    full = (1 << n) - 1
    order = [0] * n
    deadline = time.perf_counter() + max_seconds
    need = 2 * m
    nodes = 0

    def feasible(i, unused):
        # positions 0..i are filled, ``unused`` is what is left
        left = n - 1 - i
        if left - m > 0 and window_bound_fails(rows, unused, m, left - m):
            return False
        open_mask = unused
        for j in range(max(0, i - m + 1), i + 1):
            open_mask |= 1 << order[j]
        for j in range(min(m, i + 1)):
            open_mask |= 1 << order[j]
        rest = unused
        while rest:
            low = rest & -rest
            u = low.bit_length() - 1
            if (rows[u] & open_mask).bit_count() < need:
                return False
            rest ^= low
        for j in range(max(0, i - m + 1), i + 1):
            pending = min(j + m, n - 1) - i
            if pending > 0 and (rows[order[j]] & unused).bit_count() < pending:
                return False
        for j in range(min(m, i + 1)):
            pending = min(m - j, left)
            if pending > 0 and (rows[order[j]] & unused).bit_count() < pending:
                return False
        return True

    def extend(i, unused):
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise _Stop
        if nodes % CHECK_EVERY == 0 and time.perf_counter() > deadline:
            raise _Stop
        cand = unused
        for j in range(max(0, i - m), i):
            cand &= rows[order[j]]
        for j in range(0, i + m - n + 1):
            cand &= rows[order[j]]
        if i == n - 1:
            cand &= ~((2 << order[1]) - 1)
        choices = []
        rest = cand
        while rest:
            low = rest & -rest
            c = low.bit_length() - 1
            rest ^= low
            if twin[c] & unused & (low - 1):
                continue
            choices.append(((rows[c] & unused & ~low).bit_count(), c))
        choices.sort()
        for _, c in choices:
            order[i] = c
            if i == n - 1:
                return True
            after = unused & ~(1 << c)
            if feasible(i, after) and extend(i + 1, after):
                return True
        return False

    if window_bound_fails(rows, full, m, n) or not feasible(0, full & ~1):
        return NOT_FOUND, None, 0
    try:
        found = extend(1, full & ~1)
    except _Stop:
        return TIMEOUT, None, nodes
    if found:
        return FOUND, list(order), nodes
    return NOT_FOUND, None, nodes
