"""Embeddings of ``P^m_{l(k+1)t}`` into a blown-up ``k``-th power plus
``k+1`` braids, with a verifier.

Vertices are laid out as ``(k+1)t`` segments of ``l`` consecutive host
positions.  Braid copy ``i`` lives on segments ``i, i+k+1, i+2(k+1), ...``;
two segments ``k+1`` apart are never adjacent in the base, and the braid's
bridge supplies exactly the pairs at distance ``<= m`` between them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .gadgets import ParameterError, ProblemParams, braid_edges
from .graph import (
    Graph,
    Label,
    LabeledGadget,
    _from_rows,
    blow_up,
    power_cycle,
    power_path,
    power_path_edge_count,
)


@dataclass(frozen=True)
class Decomposition:
    params: ProblemParams
    t: int
    cycle: bool
    host_order: tuple[int, ...]
    segments: tuple[tuple[int, ...], ...]
    base: LabeledGadget
    braids: LabeledGadget

    @property
    def target_m(self) -> int:
        return self.params.m

    @property
    def n(self) -> int:
        return len(self.host_order)

    def braid_vertex_sets(self) -> list[int]:
        """Bitmask of the vertices carried by each braid copy."""
        k1 = self.params.k + 1
        out = [0] * k1
        for j, seg in enumerate(self.segments):
            for v in seg:
                out[j % k1] |= 1 << v
        return out

    def with_braids(self, g: Graph) -> "Decomposition":
        """Same decomposition with the braid graph swapped (for mutation tests)."""
        return replace(self, braids=LabeledGadget(g, self.braids.labels))


@dataclass(frozen=True)
class VerificationReport:
    edge_disjoint: bool
    covers_m_path: bool
    first_failure: tuple[int, int] | None
    braid_edges_used: int
    base_edges: int
    braid_edges: int
    target_edges: int

    @property
    def ok(self) -> bool:
        return self.edge_disjoint and self.covers_m_path

    @property
    def exact_edge_count(self) -> bool:
        return self.base_edges + self.braid_edges == self.target_edges

    def to_json(self) -> dict:
        return {
            "edge_disjoint": self.edge_disjoint,
            "covers_m_path": self.covers_m_path,
            "first_failure": list(self.first_failure) if self.first_failure else None,
            "braid_edges_used": self.braid_edges_used,
            "base_edges": self.base_edges,
            "braid_edges": self.braid_edges,
            "target_edges": self.target_edges,
            "exact_edge_count": self.exact_edge_count,
        }


def _check(params: ProblemParams, t: int) -> None:
    if t < 1:
        raise ParameterError(f"t must be >= 1, got {t}")
    if params.r < 1:
        raise ParameterError("the braid bridges need r >= 1")


def _braid_gadget(n: int, segments, params: ProblemParams) -> LabeledGadget:
    k1 = params.k + 1
    rows = [0] * n
    labels: list[Label | None] = [None] * n
    for i in range(k1):
        mine = [list(seg) for seg in segments[i::k1]]
        for a, b in braid_edges(mine, params.r):
            rows[a] |= 1 << b
            rows[b] |= 1 << a
        for s, seg in enumerate(mine):
            for pos, v in enumerate(seg):
                labels[v] = Label(f"braid{i}", s, pos)
    return LabeledGadget(_from_rows(n, rows), tuple(labels))


def decompose_path(params: ProblemParams, t: int) -> Decomposition:
    """``P^m_{l(k+1)t}`` inside ``P^k_{(k+1)t}(l)`` plus ``(k+1) B(l, r, t)``,
    under the identity host order."""
    _check(params, t)
    k, l = params.k, params.l
    s = (k + 1) * t
    base = blow_up(power_path(s, k), [l] * s)
    n = base.n
    segments = tuple(tuple(range(j * l, (j + 1) * l)) for j in range(s))
    return Decomposition(params, t, False, tuple(range(n)), segments, base, _braid_gadget(n, segments, params))


def decompose_cycle(params: ProblemParams, t: int) -> Decomposition:
    """The same path inside ``C^k_{2k+2}(lt/2)``.

    Class ``W_c`` (ids ``c*lt/2 ..``) is cut into ``t/2`` blocks of ``l``
    ascending ids; host segment ``j`` (0-based) is block ``j // (2k+2)`` of
    class ``j mod (2k+2)``, so the path winds ``t/2`` times round the cycle
    and braid copy ``i`` only touches the antipodal classes ``i`` and
    ``i+k+1``.
    """
    _check(params, t)
    if t % 2:
        raise ParameterError(f"the cycle variant needs even t, got {t}")
    k, l = params.k, params.l
    classes = 2 * k + 2
    size = l * t // 2
    base = blow_up(power_cycle(classes, k), [size] * classes)
    segments = []
    for j in range(classes * t // 2):
        c, block = j % classes, j // classes
        start = c * size + block * l
        segments.append(tuple(range(start, start + l)))
    segments = tuple(segments)
    order = tuple(v for seg in segments for v in seg)
    return Decomposition(params, t, True, order, segments, base, _braid_gadget(base.n, segments, params))


def verify_decomposition(d: Decomposition) -> VerificationReport:
    """Check edge-disjointness and that every host position is adjacent in
    the union to the next ``m`` positions (no wrap-around)."""
    base, braids = d.base.graph, d.braids.graph
    disjoint = all((b & r) == 0 for b, r in zip(base.rows, braids.rows))
    order = d.host_order
    m = d.target_m
    failure = None
    used = 0
    for i, u in enumerate(order):
        for off in range(1, m + 1):
            if i + off >= len(order):
                break
            v = order[i + off]
            if base.has_edge(u, v):
                continue
            if braids.has_edge(u, v):
                used += 1
                continue
            if failure is None:
                failure = (i, off)
    return VerificationReport(
        edge_disjoint=disjoint,
        covers_m_path=failure is None,
        first_failure=failure,
        braid_edges_used=used,
        base_edges=base.edge_count,
        braid_edges=braids.edge_count,
        target_edges=power_path_edge_count(len(order), m),
    )


__all__ = ["Decomposition", "VerificationReport", "decompose_path", "decompose_cycle", "verify_decomposition"]
