"""Immutable simple graphs backed by per-vertex adjacency bitmasks.

Vertex ids are ``0..n-1``.  Row ``v`` of the adjacency is a Python int whose
bit ``u`` is set iff ``{u, v}`` is an edge, so neighbourhood intersections are
single ``&`` operations.  Vertex sets are plain int bitmasks throughout the
package.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

MAX_VERTICES = 10_000


class GraphError(ValueError):
    """Raised for malformed graph input (bad endpoints, loops, size mismatch)."""


@dataclass(frozen=True, eq=True)
class Graph:
    n: int
    rows: tuple[int, ...]
    edge_count: int

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def neighbors(self, v: int) -> int:
        return self.rows[v]

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def degrees(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        for u, row in enumerate(self.rows):
            higher = row >> (u + 1)
            while higher:
                low = higher & -higher
                yield u, u + low.bit_length()
                higher ^= low

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges())

    def induced_edge_count(self, mask: int) -> int:
        total = 0
        for v in members(mask):
            total += (self.rows[v] & mask).bit_count()
        return total // 2

    def induced(self, vertices: Sequence[int]) -> "Graph":
        """Subgraph induced on ``vertices``, relabelled ``vertices[i] -> i``."""
        index = {v: i for i, v in enumerate(vertices)}
        if len(index) != len(vertices):
            raise GraphError("induced: repeated vertex")
        rows = []
        for v in vertices:
            row = 0
            for u in members(self.rows[v]):
                j = index.get(u)
                if j is not None:
                    row |= 1 << j
            rows.append(row)
        return _from_rows(len(vertices), rows)

    def shifted(self, offset: int, n: int) -> "Graph":
        """Copy of this graph on ids ``offset..offset+self.n-1`` of an ``n``-vertex host."""
        if offset < 0 or offset + self.n > n:
            raise GraphError("shifted: copy does not fit in host")
        rows = [0] * n
        for v, row in enumerate(self.rows):
            rows[v + offset] = row << offset
        return Graph(n, tuple(rows), self.edge_count)

    def is_subgraph_of(self, other: "Graph") -> bool:
        if self.n != other.n:
            return False
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def adjacency_matrix(self) -> np.ndarray:
        mat = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            mat[u, v] = mat[v, u] = True
        return mat


def members(mask: int) -> Iterator[int]:
    """Ascending ids of the set bits of ``mask``."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def vertex_set(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def _from_rows(n: int, rows: Sequence[int]) -> Graph:
    total = sum(r.bit_count() for r in rows)
    return Graph(n, tuple(rows), total // 2)


def make_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Build a graph on ``n`` vertices; duplicate edges collapse silently."""
    if n < 0 or n > MAX_VERTICES:
        raise GraphError(f"vertex count {n} outside [0, {MAX_VERTICES}]")
    rows = [0] * n
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
        if u == v:
            raise GraphError(f"loop at vertex {u}")
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return _from_rows(n, rows)


def from_adjacency(mat: np.ndarray) -> Graph:
    """Graph from a symmetric boolean matrix; the diagonal must be empty."""
    mat = np.asarray(mat, dtype=bool)
    n = mat.shape[0]
    if mat.shape != (n, n) or not np.array_equal(mat, mat.T):
        raise GraphError("adjacency matrix must be square and symmetric")
    if mat.diagonal().any():
        raise GraphError("adjacency matrix has loops")
    if n == 0:
        return Graph(0, (), 0)
    # little-endian bit packing turns row v into the int with bit u = mat[v, u]
    packed = np.packbits(mat, axis=1, bitorder="little")
    rows = [int.from_bytes(packed[v].tobytes(), "little") for v in range(n)]
    return _from_rows(n, rows)


def empty_graph(n: int) -> Graph:
    return Graph(n, (0,) * n, 0)


def complete_graph(n: int) -> Graph:
    full = (1 << n) - 1
    return Graph(n, tuple(full ^ (1 << v) for v in range(n)), n * (n - 1) // 2)


def union(g1: Graph, g2: Graph) -> Graph:
    if g1.n != g2.n:
        raise GraphError(f"union of graphs on {g1.n} and {g2.n} vertices")
    return _from_rows(g1.n, [a | b for a, b in zip(g1.rows, g2.rows)])


def difference(g1: Graph, g2: Graph) -> Graph:
    """Edges of ``g1`` that are not edges of ``g2``."""
    if g1.n != g2.n:
        raise GraphError(f"difference of graphs on {g1.n} and {g2.n} vertices")
    return _from_rows(g1.n, [a & ~b for a, b in zip(g1.rows, g2.rows)])


def remove_edges(g: Graph, edges: Iterable[tuple[int, int]]) -> Graph:
    rows = list(g.rows)
    for u, v in edges:
        rows[u] &= ~(1 << v)
        rows[v] &= ~(1 << u)
    return _from_rows(g.n, rows)


def add_edges(g: Graph, edges: Iterable[tuple[int, int]]) -> Graph:
    return union(g, make_graph(g.n, edges))


def power_path(s: int, m: int) -> Graph:
    """The ``m``-th power of the path ``0 - 1 - ... - (s-1)``."""
    if s < 1 or m < 1:
        raise GraphError("power_path needs s >= 1 and m >= 1")
    return make_graph(s, ((i, j) for i in range(s) for j in range(i + 1, min(s, i + m + 1))))


def power_cycle(n: int, m: int) -> Graph:
    """The ``m``-th power of the cycle ``0 - 1 - ... - (n-1) - 0``."""
    if n < 3 or m < 1:
        raise GraphError("power_cycle needs n >= 3 and m >= 1")
    return make_graph(
        n, ((i, j) for i in range(n) for j in range(i + 1, n) if min(j - i, n - j + i) <= m)
    )


def power_path_edge_count(s: int, m: int) -> int:
    if s >= m + 1:
        return m * s - m * (m + 1) // 2
    return s * (s - 1) // 2


def power_cycle_edge_count(n: int, m: int) -> int:
    return n * m if n >= 2 * m + 1 else n * (n - 1) // 2


def joint_neighborhood(g: Graph, j: int) -> int:
    """Common neighbourhood of the vertex set ``j`` (a bitmask)."""
    if not j:
        raise GraphError("joint neighbourhood of the empty set")
    out = g.full_mask
    for v in members(j):
        out &= g.rows[v]
    return out


def min_degree(g: Graph) -> int:
    if g.n < 1:
        raise GraphError("min_degree of the null graph")
    return min(r.bit_count() for r in g.rows)


def check_tuple(g: Graph, seq: Sequence[int], length: int | None = None, what: str = "tuple") -> None:
    if length is not None and len(seq) != length:
        raise GraphError(f"{what} has length {len(seq)}, expected {length}")
    if len(set(seq)) != len(seq):
        raise GraphError(f"{what} has repeated vertices")
    for v in seq:
        if not 0 <= v < g.n:
            raise GraphError(f"{what} vertex {v} outside 0..{g.n - 1}")


def joint_neighborhood_bound(n: int, k: int, eps: Fraction, j: int) -> Fraction:
    """Lower bound ``((k+1-j)/(k+1) + j*eps) * n`` on ``|N(J)|`` for ``|J| = j``,
    valid when the minimum degree is at least ``(k/(k+1) + eps) * n``."""
    return (Fraction(k + 1 - j, k + 1) + j * Fraction(eps)) * n


def worst_joint_neighborhoods(g: Graph, max_size: int) -> dict[int, tuple[int, int]]:
    """For each ``j <= max_size``: the smallest ``|N(J)|`` over ``j``-sets and
    the lexicographically first set (bitmask) attaining it.  Exhaustive."""
    out: dict[int, tuple[int, int]] = {}
    for j in range(1, max_size + 1):
        best: tuple[int, int] | None = None
        for combo in combinations(range(g.n), j):
            mask = vertex_set(combo)
            size = joint_neighborhood(g, mask).bit_count()
            if best is None or size < best[0]:
                best = (size, mask)
        if best is not None:
            out[j] = best
    return out


# --- text edge-list format -------------------------------------------------


def write_edge_list(g: Graph, fh: TextIO) -> None:
    fh.write(f"{g.n} {g.edge_count}\n")
    for u, v in g.edges():
        fh.write(f"{u} {v}\n")


def dumps_edge_list(g: Graph) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf)
    return buf.getvalue()


def read_edge_list(fh: TextIO, strict: bool = True) -> Graph:
    """Parse the ``n e`` header plus ``e`` lines of ``u v``.

    Strict mode rejects duplicate edges, loops and a wrong edge count; lenient
    mode drops loops and duplicates.
    """
    lines = [ln.strip() for ln in fh.read().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GraphError("edge list is empty")
    try:
        n, e = (int(x) for x in lines[0].split())
    except ValueError:
        raise GraphError(f"bad header line {lines[0]!r}") from None
    seen: set[tuple[int, int]] = set()
    edges = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer vertex in {ln!r}") from None
        if u == v:
            if strict:
                raise GraphError(f"line {lineno}: loop at {u}")
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            if strict:
                raise GraphError(f"line {lineno}: duplicate edge {key}")
            continue
        seen.add(key)
        edges.append(key)
    if strict and len(edges) != e:
        raise GraphError(f"header promises {e} edges, found {len(edges)}")
    return make_graph(n, edges)


def loads_edge_list(text: str, strict: bool = True) -> Graph:
    return read_edge_list(io.StringIO(text), strict=strict)


def ceil_fraction(x: Fraction) -> int:
    return math.ceil(Fraction(x))


# --- labelled gadgets and blow-ups ------------------------------------------


@dataclass(frozen=True)
class Label:
    role: str
    segment: int
    position: int


@dataclass(frozen=True)
class LabeledGadget:
    """A graph plus one :class:`Label` per vertex."""

    graph: Graph
    labels: tuple[Label, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != self.graph.n:
            raise GraphError(f"{len(self.labels)} labels for {self.graph.n} vertices")

    @property
    def n(self) -> int:
        return self.graph.n

    def vertices_with(self, role: str | None = None, segment: int | None = None) -> list[int]:
        return [
            v
            for v, lab in enumerate(self.labels)
            if (role is None or lab.role == role) and (segment is None or lab.segment == segment)
        ]

    def dumps_labels(self) -> str:
        return "".join(f"{v} {lab.role} {lab.segment} {lab.position}\n" for v, lab in enumerate(self.labels))


def loads_labels(text: str) -> tuple[Label, ...]:
    labels = []
    for lineno, ln in enumerate((ln for ln in text.splitlines() if ln.strip()), start=1):
        v, role, seg, pos = ln.split()
        if int(v) != lineno - 1:
            raise GraphError(f"label line {lineno}: vertex {v} out of order")
        labels.append(Label(role, int(seg), int(pos)))
    return tuple(labels)


def blow_up(f: Graph, sizes: Sequence[int], role: str = "class") -> LabeledGadget:
    """Replace vertex ``i`` of ``f`` by an independent block ``U_i`` of
    ``sizes[i]`` consecutive ids and every edge by a complete bipartite graph."""
    if len(sizes) != f.n:
        raise GraphError(f"blow_up: {len(sizes)} sizes for {f.n} vertices")
    if any(s < 0 for s in sizes):
        raise GraphError("blow_up: negative class size")
    starts = [0]
    for s in sizes:
        starts.append(starts[-1] + s)
    total = starts[-1]
    block = [((1 << sizes[i]) - 1) << starts[i] for i in range(f.n)]
    rows = [0] * total
    labels = []
    for i in range(f.n):
        row = 0
        for j in members(f.rows[i]):
            row |= block[j]
        for pos in range(sizes[i]):
            rows[starts[i] + pos] = row
            labels.append(Label(role, i, pos))
    return LabeledGadget(_from_rows(total, rows), tuple(labels))
