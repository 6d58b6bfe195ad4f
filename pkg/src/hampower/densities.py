"""Expected-count scales ``Psi``/``Phi``, densities ``d``/``m`` and the
Janson-type lower-tail bound.

``Psi`` and ``Phi`` live in the log domain (natural log), since ``n**v``
overflows long before the graphs get interesting.  Densities are exact
:class:`~fractions.Fraction` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .gadgets import ParameterError, multi_braid
from .graph import Graph, GraphError

EXHAUSTIVE_CAP = 16

NEG_INF = float("-inf")


class DensityError(ValueError):
    """Domain errors: edgeless input to ``phi``, or the subset cap exceeded."""


@dataclass(frozen=True)
class RandomModel:
    """``G(n, p)`` with ``p`` given directly or as ``C * n**exponent``."""

    n: int
    p: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DensityError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise DensityError(f"p = {self.p} outside [0, 1]")

    @classmethod
    def scaled(cls, n: int, c: float, exponent: float) -> "RandomModel":
        if c < 0:
            raise DensityError("C must be non-negative")
        return cls(n, min(1.0, c * n**exponent))

    @property
    def log_n(self) -> float:
        return math.log(self.n)

    @property
    def log_p(self) -> float:
        return math.log(self.p) if self.p > 0 else NEG_INF


def psi(v: int, e: int, model: RandomModel) -> float:
    """``log(n**v * p**e)``; ``-inf`` when ``p = 0`` and ``e > 0``."""
    if v < 1:
        raise DensityError("psi needs v >= 1")
    if e == 0:
        return v * model.log_n
    return v * model.log_n + e * model.log_p


def density(v: int, e: int) -> Fraction:
    """``e / (v - 1)``, with the single vertex given density 0."""
    if v <= 1:
        return Fraction(0)
    return Fraction(e, v - 1)


def _subset_tables(g: Graph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For every vertex subset (as an index): vertex count, induced edge
    count, and whether the induced graph has an isolated vertex."""
    n = g.n
    if n > EXHAUSTIVE_CAP:
        raise DensityError(f"{n} vertices exceeds the exhaustive cap of {EXHAUSTIVE_CAP}")
    masks = np.arange(1 << n, dtype=np.uint32)
    sizes = np.bitwise_count(masks).astype(np.int64)
    twice_edges = np.zeros(1 << n, dtype=np.int64)
    isolated = np.zeros(1 << n, dtype=bool)
    for v in range(n):
        inside = (masks >> np.uint32(v)) & np.uint32(1)
        deg = np.bitwise_count(masks & np.uint32(g.rows[v])).astype(np.int64)
        twice_edges += inside * deg
        isolated |= (inside == 1) & (deg == 0)
    return sizes, twice_edges // 2, isolated


def phi(g: Graph, model: RandomModel) -> tuple[float, int]:
    """``log Phi_G`` and the vertex subset (bitmask) attaining it.

    The minimum of ``Psi`` over subgraphs with at least one edge is attained
    by an induced subgraph without isolated vertices, so only those are
    scanned.  Ties go to the smallest bitmask.
    """
    if g.edge_count == 0:
        raise DensityError("Phi is undefined for an edgeless graph")
    sizes, edges, isolated = _subset_tables(g)
    ok = (edges > 0) & ~isolated
    if model.p == 0:
        idx = int(np.flatnonzero(ok)[0])
        return NEG_INF, idx
    logs = np.where(ok, sizes * model.log_n + edges * model.log_p, np.inf)
    best = logs.min()
    # near-ties between different (v, e) shapes come from rounding only
    idx = int(np.flatnonzero(logs <= best + 1e-9 * max(1.0, abs(best)))[0])
    return float(best), idx


def max_density_m(g: Graph, connected_only: bool = False) -> tuple[Fraction, int]:
    """``m_G``: the largest ``e(S) / (|S| - 1)`` over vertex subsets with
    ``|S| >= 2``, exactly, with the smallest maximising bitmask."""
    if g.n < 2:
        return Fraction(0), (1 << g.n) - 1
    sizes, edges, _ = _subset_tables(g)
    cand = sizes >= 2
    if connected_only:
        cand &= _connected_table(g)
    ratio = np.where(cand, edges / np.maximum(sizes - 1, 1), -1.0)
    top = ratio.max()
    best: tuple[Fraction, int] | None = None
    for idx in np.flatnonzero(ratio >= top - 1e-9):
        val = Fraction(int(edges[idx]), int(sizes[idx]) - 1)
        if best is None or val > best[0]:
            best = (val, int(idx))
    assert best is not None
    return best


def _connected_table(g: Graph) -> np.ndarray:
    out = np.zeros(1 << g.n, dtype=bool)
    for mask in range(1, 1 << g.n):
        low = mask & -mask
        seen, frontier = low, low
        while frontier:
            nxt = 0
            rest = frontier
            while rest:
                b = rest & -rest
                nxt |= g.rows[b.bit_length() - 1]
                rest ^= b
            frontier = nxt & mask & ~seen
            seen |= frontier
        out[mask] = seen == mask
    return out


def braid_m_closed_form(l: int, r: int, t: int) -> Fraction | None:
    """Closed-form ``m_B`` for ``B(l, r, t)``, or ``None`` when none is known.

    ``l/2`` whenever ``l >= r(r+1)``; ``(6t-3)/(3t-1)`` for ``(l, r) = (3, 2)``.
    """
    if t < 1 or l < 2 or not 1 <= r <= l:
        raise ParameterError(f"invalid braid parameters l={l}, r={r}, t={t}")
    if l >= r * (r + 1):
        return Fraction(l, 2)
    if (l, r) == (3, 2):
        return Fraction(6 * t - 3, 3 * t - 1)
    return None


def janson_upper_bound(tau: float, g: Graph, model: RandomModel) -> float:
    """``exp(-tau^2 * 4^(-e_G) * Phi_G / 8)``, clamped to ``[0, 1]``."""
    if not 0 < tau <= 1:
        raise DensityError(f"tau must lie in (0, 1], got {tau}")
    log_phi, _ = phi(g, model)
    if log_phi == NEG_INF:
        return 1.0
    log_rate = 2 * math.log(tau) - g.edge_count * math.log(4) + log_phi - math.log(8)
    if log_rate > 700:
        return 0.0
    return min(1.0, max(0.0, math.exp(-math.exp(log_rate))))


def braid_phi_scale(k: int, l: int, r: int, n: int, c: float, t: int = 2) -> tuple[float, float]:
    """``(log Phi_B, log(C n))`` for ``B = (k+1) B(l, r, t)`` at ``p = C n^(-2/l)``."""
    g = multi_braid(k + 1, l, r, t).graph
    model = RandomModel.scaled(n, c, -2 / l)
    return phi(g, model)[0], math.log(c * n)


@dataclass(frozen=True)
class DensityProfile:
    v: int
    e: int
    d: Fraction
    m: Fraction
    psi: float
    phi: float
    argmin_subgraph: int
    argmax_subgraph: int

    def to_json(self) -> dict:
        def num(x: float):
            if math.isinf(x):
                return "-inf" if x < 0 else "inf"
            return x

        return {
            "v": self.v,
            "e": self.e,
            "d": str(self.d),
            "m": str(self.m),
            "log_psi": num(self.psi),
            "log_phi": num(self.phi),
            "argmin_subgraph": _mask_list(self.argmin_subgraph),
            "argmax_subgraph": _mask_list(self.argmax_subgraph),
        }


def _mask_list(mask: int) -> list[int]:
    return [v for v in range(mask.bit_length()) if mask >> v & 1]


def density_profile(g: Graph, model: RandomModel) -> DensityProfile:
    if g.edge_count == 0:
        raise GraphError("density profile needs at least one edge")
    m_val, arg_m = max_density_m(g)
    log_phi, arg_phi = phi(g, model)
    return DensityProfile(
        v=g.n,
        e=g.edge_count,
        d=density(g.n, g.edge_count),
        m=m_val,
        psi=psi(g.n, g.edge_count, model),
        phi=log_phi,
        argmin_subgraph=arg_phi,
        argmax_subgraph=arg_m,
    )
