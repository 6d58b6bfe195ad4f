"""Named graph families: braids, bridges, the B-minus gadget and the extremal
lower-bound graphs ``G_alpha``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .graph import (
    Graph,
    GraphError,
    Label,
    LabeledGadget,
    _from_rows,
    check_tuple,
    members,
)


class ParameterError(ValueError):
    """Raised when (k, l, r, t, ...) fall outside a constructor's domain."""


@dataclass(frozen=True)
class ProblemParams:
    """The tuple ``(k, l, r)`` with ``m = k*l + r``.

    ``r = 0`` is accepted (it is the natural split of e.g. ``m = 2`` at
    ``k = 1``); constructors built from bridges reject it.
    """

    k: int
    l: int
    r: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.l < 2:
            raise ParameterError(f"l must be >= 2, got {self.l}")
        if not 0 <= self.r <= self.l:
            raise ParameterError(f"r must lie in [0, l], got r={self.r}, l={self.l}")

    @property
    def m(self) -> int:
        return self.k * self.l + self.r

    @property
    def strong_regime(self) -> bool:
        return self.l >= self.r * (self.r + 1)

    @classmethod
    def from_flags(cls, k: int, l: int | None = None, r: int | None = None, m: int | None = None) -> "ProblemParams":
        """Resolve ``(k, l, r, m)`` with any one of ``l``, ``r``, ``m`` derivable.

        Given only ``k`` and ``m``, picks the smallest ``l`` whose split
        satisfies ``l >= r(r+1)``, falling back to the smallest ``l`` with
        ``r <= l``.
        """
        if l is not None and r is not None:
            p = cls(k, l, r)
            if m is not None and m != p.m:
                raise ParameterError(f"inconsistent flags: k*l + r = {p.m} but m = {m}")
            return p
        if m is None:
            raise ParameterError("need either (l, r) or m")
        if l is not None:
            return cls(k, l, m - k * l)
        if r is not None:
            if (m - r) % k:
                raise ParameterError(f"m - r = {m - r} not divisible by k = {k}")
            return cls(k, (m - r) // k, r)
        splits = [cls(k, l_, m - k * l_) for l_ in range(2, m // k + 1) if m - k * l_ <= l_]
        if not splits:
            raise ParameterError(f"m = {m} has no split k*l + r with l >= 2 for k = {k}")
        strong = [p for p in splits if p.strong_regime]
        return (strong or splits)[0]


def _check_braid_params(l: int, r: int, t: int) -> None:
    if t < 1 or l < 2 or not 1 <= r <= l:
        raise ParameterError(f"braid needs t >= 1, l >= 2, 1 <= r <= l; got l={l}, r={r}, t={t}")


def bridge_edges(v: Sequence[int], u: Sequence[int]) -> list[tuple[int, int]]:
    """Edges of the r-bridge between ``v`` and ``u``: ``v[a]`` meets ``u[0..a]``."""
    return [(v[a], u[b]) for a in range(len(v)) for b in range(a + 1)]


def _clique_edges(vs: Sequence[int]) -> list[tuple[int, int]]:
    return [(vs[i], vs[j]) for i in range(len(vs)) for j in range(i + 1, len(vs))]


def braid_edges(segments: Sequence[Sequence[int]], r: int) -> list[tuple[int, int]]:
    """Edges of a braid laid on ordered ``segments`` (each of length ``l``)."""
    edges = []
    for i, seg in enumerate(segments):
        edges.extend(_clique_edges(seg))
        if i + 1 < len(segments):
            nxt = segments[i + 1]
            edges.extend(bridge_edges(seg[len(seg) - r :], nxt[:r]))
    return edges


def _graph_from_edges(n: int, edges) -> Graph:
    rows = [0] * n
    for a, b in edges:
        rows[a] |= 1 << b
        rows[b] |= 1 << a
    return _from_rows(n, rows)


def braid(l: int, r: int, t: int) -> LabeledGadget:
    """``B(l, r, t)``: ``t`` cliques ``K_l`` on consecutive id blocks, each
    consecutive pair joined by an ``r``-bridge."""
    _check_braid_params(l, r, t)
    segments = [list(range(i * l, (i + 1) * l)) for i in range(t)]
    g = _graph_from_edges(t * l, braid_edges(segments, r))
    labels = tuple(Label("braid0", i, j) for i in range(t) for j in range(l))
    return LabeledGadget(g, labels)


def braid_edge_count(l: int, r: int, t: int) -> int:
    return t * math.comb(l, 2) + (t - 1) * math.comb(r + 1, 2)


def multi_braid(s: int, l: int, r: int, t: int) -> LabeledGadget:
    """``s`` vertex-disjoint copies of ``B(l, r, t)``; copy ``c`` has role ``braid{c}``."""
    if s < 1:
        raise ParameterError(f"multi_braid needs s >= 1, got {s}")
    one = braid(l, r, t)
    size = one.n
    n = s * size
    rows = [0] * n
    labels = []
    for c in range(s):
        for v, row in enumerate(one.graph.rows):
            rows[c * size + v] = row << (c * size)
        labels.extend(Label(f"braid{c}", lab.segment, lab.position) for lab in one.labels)
    return LabeledGadget(_from_rows(n, rows), tuple(labels))


def check_r_bridge(g: Graph, v: Sequence[int], u: Sequence[int], r: int) -> bool:
    """Whether ``v`` and ``u`` are ``r``-bridged in ``g``.

    Both formulations are evaluated: ``v_i ~ u_1..u_i`` for all ``i`` and
    ``u_i ~ v_i..v_r`` for all ``i``; they must agree.
    """
    if len(v) != r or len(u) != r:
        raise GraphError(f"bridge tuples must have length r={r}, got {len(v)} and {len(u)}")
    check_tuple(g, list(v) + list(u), what="bridge tuples")
    forward = all(g.has_edge(v[i], u[j]) for i in range(r) for j in range(i + 1))
    backward = all(g.has_edge(u[i], v[j]) for i in range(r) for j in range(i, r))
    if forward != backward:  # pragma: no cover - the two sets of pairs coincide
        raise AssertionError("r-bridge formulations disagree")
    return forward


def b_minus_support(params: ProblemParams) -> list[int]:
    """Ids of ``B = (k+1) B(l, r, 2)`` kept in ``B^-``.

    Copies ``0`` and ``k`` lose the last ``l - r`` vertices of their second
    clique; the bridge into that clique uses only its first ``r`` vertices and
    survives intact.
    """
    k, l, r = params.k, params.l, params.r
    if r < 1:
        raise ParameterError("B^- needs r >= 1")
    keep = []
    for c in range(k + 1):
        base = c * 2 * l
        keep.extend(range(base, base + l))
        second = l if c not in (0, k) else r
        keep.extend(range(base + l, base + l + second))
    return keep


def b_minus(params: ProblemParams) -> LabeledGadget:
    """The gadget ``B^-`` on ``2m`` vertices (see :func:`b_minus_support`)."""
    full = multi_braid(params.k + 1, params.l, params.r, 2)
    keep = b_minus_support(params)
    g = full.graph.induced(keep)
    return LabeledGadget(g, tuple(full.labels[v] for v in keep))


def b_minus_edge_count(params: ProblemParams) -> int:
    k, l, r = params.k, params.l, params.r
    return 2 * k * math.comb(l, 2) + 2 * math.comb(r, 2) + (k + 1) * math.comb(r + 1, 2)


@dataclass(frozen=True)
class LowerBoundSpec:
    """Parameters of ``G_alpha``: ``n`` vertices, ``k + 1`` parts, ``W_i`` of
    size ``ceil(eps * n)`` at the front of each part.

    ``n`` need not be divisible by ``k + 1``; the first ``n mod (k+1)`` parts
    get one extra vertex.  ``m`` is optional and only feeds
    :attr:`below_recommended_n`.
    """

    n: int
    k: int
    eps: Fraction
    m: int | None = None
    part_sizes: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.n < self.k + 1:
            raise ParameterError(f"n = {self.n} < k + 1 = {self.k + 1}")
        if self.eps < 0:
            raise ParameterError("eps must be non-negative")
        q, rem = divmod(self.n, self.k + 1)
        sizes = tuple(q + (1 if i < rem else 0) for i in range(self.k + 1))
        object.__setattr__(self, "part_sizes", sizes)
        if self.w_size > min(sizes):
            raise ParameterError(f"|W_i| = {self.w_size} exceeds the smallest part {min(sizes)}")

    @property
    def w_size(self) -> int:
        return math.ceil(self.eps * self.n)

    @property
    def eps0(self) -> Fraction | None:
        if self.m is None:
            return None
        return Fraction(1, 2 * (self.m + 1) * (self.k + 1))

    @property
    def below_recommended_n(self) -> bool:
        return self.m is not None and self.n < 4 * (self.k + 2) * (self.m + 1)

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.k, self.k + 1) + self.eps

    def parts(self) -> list[range]:
        out, start = [], 0
        for s in self.part_sizes:
            out.append(range(start, start + s))
            start += s
        return out

    def w_sets(self) -> list[range]:
        return [range(p.start, p.start + self.w_size) for p in self.parts()]

    def w_mask(self) -> int:
        mask = 0
        for w in self.w_sets():
            for v in w:
                mask |= 1 << v
        return mask

    def part_of(self) -> list[int]:
        out = []
        for i, p in enumerate(self.parts()):
            out.extend([i] * len(p))
        return out


def lower_bound_gadget(spec: LowerBoundSpec) -> LabeledGadget:
    """``G_alpha`` with labels ``W``/``V`` (segment = part index)."""
    n = spec.n
    full = (1 << n) - 1
    rows = [0] * n
    labels = []
    for i, (part, w) in enumerate(zip(spec.parts(), spec.w_sets())):
        part_mask = ((1 << len(part)) - 1) << part.start
        w_mask = ((1 << len(w)) - 1) << w.start
        rest_mask = part_mask & ~w_mask
        for pos, v in enumerate(part):
            outside = full & ~part_mask
            if w_mask >> v & 1:
                rows[v] = outside | rest_mask
                labels.append(Label("W", i, pos))
            else:
                rows[v] = outside | w_mask
                labels.append(Label("V", i, pos))
    return LabeledGadget(_from_rows(n, rows), tuple(labels))


def lower_bound_graph(spec: LowerBoundSpec) -> Graph:
    """Complete ``(k+1)``-partite graph plus ``W_i``-to-``(V_i \\ W_i)`` bicliques."""
    return lower_bound_gadget(spec).graph


def lower_bound_min_degree_target(spec: LowerBoundSpec) -> int:
    """``ceil((k/(k+1) + eps) * n)`` - the degree the construction aims for."""
    return math.ceil(spec.alpha * spec.n)


def intra_part_edges(g: Graph, spec: LowerBoundSpec) -> list[tuple[int, int]]:
    part = spec.part_of()
    return [(u, v) for u, v in g.edges() if part[u] == part[v]]


__all__ = [
    "ParameterError",
    "ProblemParams",
    "LowerBoundSpec",
    "braid",
    "braid_edges",
    "braid_edge_count",
    "bridge_edges",
    "multi_braid",
    "check_r_bridge",
    "b_minus",
    "b_minus_support",
    "b_minus_edge_count",
    "lower_bound_gadget",
    "lower_bound_graph",
    "lower_bound_min_degree_target",
    "intra_part_edges",
    "members",
]
