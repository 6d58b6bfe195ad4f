"""Monte-Carlo harness: sample ``G(n, p)``, add it to a base graph, search for
``C_n^m``, and summarise; plus the lower-bound counting audits.

Randomness is counter-based.  The seed of trial ``i`` at grid point
``(n, p_index)`` is derived from ``SeedSequence(master, spawn_key=(n,
p_index, i))`` and drives a Philox stream that decides the pairs of ``[n]``
in row-major upper-triangle order.  Records therefore do not depend on the
order in which trials run, and the JSONL output is the same for any number
of workers.  Wall-clock times are left out of the records unless asked for,
since they are the one thing that is not reproducible.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy.stats import binomtest, linregress

from . import __version__
from .densities import RandomModel
from .gadgets import LowerBoundSpec, ParameterError, ProblemParams, lower_bound_graph
from .graph import Graph, complete_graph, empty_graph, from_adjacency, read_edge_list, union
from .search import (
    FOUND,
    NOT_FOUND,
    TIMEOUT,
    SearchBudget,
    contains_power_ham_cycle,
    count_cliques,
    iter_cliques,
)

BUILD_ID = f"hampower-{__version__}"
SEARCH_N_CAP = 64


class ExperimentError(ValueError):
    """Bad configuration or an experiment that cannot produce an answer."""


class NonStraddlingError(ExperimentError):
    """The bisection bracket does not have rates on both sides of 1/2."""


class ExcessiveTimeoutError(ExperimentError):
    """More than the allowed share of trials at a probe timed out."""


# -- randomness -------------------------------------------------------------


def trial_seed(master: int, n: int, p_index: int, trial: int) -> int:
    """64-bit seed for one trial, independent of every other trial."""
    ss = np.random.SeedSequence(master, spawn_key=(n, p_index, trial))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | int(hi) << 32


def sample_gnp(n: int, p: float, seed: int) -> Graph:
    """``G(n, p)``: pair ``k`` (row-major upper triangle) is kept iff the
    ``k``-th Philox double is below ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ExperimentError(f"p = {p} outside [0, 1]")
    if n < 2 or p == 0.0:
        return empty_graph(n)
    if p == 1.0:
        return complete_graph(n)
    gen = np.random.Generator(np.random.Philox(seed))
    u = gen.random(n * (n - 1) // 2)
    iu = np.triu_indices(n, 1)
    mat = np.zeros((n, n), dtype=bool)
    mat[iu] = u < p
    return from_adjacency(mat | mat.T)


# -- configuration ----------------------------------------------------------


@dataclass(frozen=True)
class BaseSpec:
    kind: str = "lower_bound"  # lower_bound | empty | complete | file
    eps: Fraction = Fraction(1, 16)
    path: str = ""

    def build(self, n: int, params: ProblemParams) -> Graph:
        if self.kind == "lower_bound":
            return lower_bound_graph(LowerBoundSpec(n, params.k, self.eps, params.m))
        if self.kind == "empty":
            return empty_graph(n)
        if self.kind == "complete":
            return complete_graph(n)
        if self.kind == "file":
            with open(self.path) as fh:
                g = read_edge_list(fh)
            if g.n != n:
                raise ExperimentError(f"base graph file has {g.n} vertices, grid asks for {n}")
            return g
        raise ExperimentError(f"unknown base kind {self.kind!r}")


@dataclass(frozen=True)
class BisectionSpec:
    lo: float | None = None
    hi: float | None = None
    lo_c: float | None = None
    hi_c: float | None = None
    exponent: float = -1.0
    rel_width: float = 0.1
    max_probes: int = 24
    max_timeout_rate: float = 0.2

    def bracket(self, n: int) -> tuple[float, float]:
        if self.lo_c is not None and self.hi_c is not None:
            return min(1.0, self.lo_c * n**self.exponent), min(1.0, self.hi_c * n**self.exponent)
        return (0.0 if self.lo is None else self.lo), (1.0 if self.hi is None else self.hi)


@dataclass(frozen=True)
class ExperimentConfig:
    params: ProblemParams
    n_values: tuple[int, ...]
    p_values: tuple[float, ...] = ()
    c_values: tuple[float, ...] = ()
    exponent: float = -1.0
    trials: int = 100
    master_seed: int = 1
    budget: SearchBudget = field(default_factory=SearchBudget)
    base: BaseSpec = field(default_factory=BaseSpec)
    bisection: BisectionSpec = field(default_factory=BisectionSpec)
    clique_audit: bool = False
    name: str = "experiment"
    n_cap: int = SEARCH_N_CAP

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ExperimentError("trials must be >= 1")
        if not self.n_values:
            raise ExperimentError("the n grid is empty")
        if not 0 <= self.master_seed < 2**64:
            raise ExperimentError("master_seed must be a 64-bit unsigned integer")
        for n in self.n_values:
            if n > self.n_cap:
                raise ExperimentError(f"n = {n} exceeds the search cap {self.n_cap}")
            if n < self.params.m + 2:
                raise ExperimentError(f"n = {n} < m + 2")

    def p_grid(self, n: int) -> list[float]:
        if self.p_values:
            return list(self.p_values)
        return [min(1.0, c * n**self.exponent) for c in self.c_values]

    def as_dict(self) -> dict:
        d = asdict(self)
        d["base"]["eps"] = str(self.base.eps)
        return d

    def config_hash(self) -> str:
        blob = json.dumps({"build": BUILD_ID, "config": self.as_dict()}, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(Fraction(x.strip())) for x in text.split(",") if x.strip())


def _opt_float(sec, key):
    v = sec.get(key, "").strip()
    return float(Fraction(v)) if v else None


def parse_config(text: str) -> ExperimentConfig:
    """Read the INI-style config (sections ``experiment``, ``params``,
    ``base``, ``grid``, ``budget``, ``bisection``, ``audit``)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.read_string(text)
    for s in ("params", "grid"):
        if not cp.has_section(s):
            raise ExperimentError(f"config is missing section [{s}]")
    exp = cp["experiment"] if cp.has_section("experiment") else {}
    par = cp["params"]

    def opt_int(sec, key):
        v = sec.get(key, "").strip()
        return int(v) if v else None

    try:
        params = ProblemParams.from_flags(int(par["k"]), opt_int(par, "l"), opt_int(par, "r"), opt_int(par, "m"))
        grid = cp["grid"]
        base = cp["base"] if cp.has_section("base") else {}
        bud = cp["budget"] if cp.has_section("budget") else {}
        bis = cp["bisection"] if cp.has_section("bisection") else {}
        audit = cp["audit"] if cp.has_section("audit") else {}
        return ExperimentConfig(
            params=params,
            n_values=tuple(int(x) for x in grid["n"].split(",") if x.strip()),
            p_values=_floats(grid.get("p", "")),
            c_values=_floats(grid.get("c", "")),
            exponent=float(Fraction(grid.get("exponent", "-1"))),
            trials=int(exp.get("trials", "100")),
            master_seed=int(exp.get("master_seed", "1")),
            name=exp.get("name", "experiment"),
            n_cap=int(exp.get("n_cap", str(SEARCH_N_CAP))),
            budget=SearchBudget(int(bud.get("max_nodes", "2000000")), int(bud.get("max_millis", "60000"))),
            base=BaseSpec(
                base.get("kind", "lower_bound"),
                Fraction(base.get("eps", "1/16")),
                base.get("path", ""),
            ),
            bisection=BisectionSpec(
                lo=_opt_float(bis, "lo"),
                hi=_opt_float(bis, "hi"),
                lo_c=_opt_float(bis, "lo_c"),
                hi_c=_opt_float(bis, "hi_c"),
                exponent=float(Fraction(bis.get("exponent", "-1"))),
                rel_width=float(bis.get("rel_width", "0.1")),
                max_probes=int(bis.get("max_probes", "24")),
                max_timeout_rate=float(bis.get("max_timeout_rate", "0.2")),
            ),
            clique_audit=audit.get("clique_counts", "false").strip().lower() in ("1", "true", "yes"),
        )
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ExperimentError):
            raise
        raise ExperimentError(f"bad config: {exc}") from exc


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# -- trials -----------------------------------------------------------------


@dataclass(frozen=True)
class TrialRecord:
    config_hash: str
    n: int
    p_index: int
    p: float
    trial: int
    seed: int
    verdict: str
    nodes_expanded: int
    certificate: str
    elapsed_ms: float | None = None
    clique_audit: dict | None = None

    def to_json(self) -> str:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        return json.dumps(d, sort_keys=True)


_BASE_CACHE: dict[tuple, Graph] = {}


def _base_graph(cfg: ExperimentConfig, n: int) -> Graph:
    key = (cfg.base, cfg.params, n)
    if key not in _BASE_CACHE:
        _BASE_CACHE[key] = cfg.base.build(n, cfg.params)
    return _BASE_CACHE[key]


def _intra_part_cliques(sample: Graph, cfg: ExperimentConfig, n: int) -> dict:
    q = math.ceil((cfg.params.m + 1) / (cfg.params.k + 1))
    out = {"clique_order": q, "total": count_cliques(sample, q).count if q >= 2 else n}
    if cfg.base.kind == "lower_bound":
        spec = LowerBoundSpec(n, cfg.params.k, cfg.base.eps)
        out["intra_part"] = sum(count_cliques(sample, q, within=_range_mask(part)).count for part in spec.parts())
    return out


def _range_mask(r: range) -> int:
    return ((1 << len(r)) - 1) << r.start


def run_trial(
    cfg: ExperimentConfig, n: int, p: float, i: int, p_index: int = 0, with_time: bool = False
) -> TrialRecord:
    seed = trial_seed(cfg.master_seed, n, p_index, i)
    sample = sample_gnp(n, p, seed)
    host = union(_base_graph(cfg, n), sample)
    out = contains_power_ham_cycle(host, cfg.params.m, cfg.budget)
    return TrialRecord(
        config_hash=cfg.config_hash(),
        n=n,
        p_index=p_index,
        p=p,
        trial=i,
        seed=seed,
        verdict=out.verdict,
        nodes_expanded=out.nodes_expanded,
        certificate=out.certificate,
        elapsed_ms=round(out.elapsed_ms, 3) if with_time else None,
        clique_audit=_intra_part_cliques(sample, cfg, n) if cfg.clique_audit else None,
    )


def _run_task(task) -> TrialRecord:
    return run_trial(*task)


def run_trials(tasks: Sequence[tuple], workers: int = 1) -> list[TrialRecord]:
    """Run ``run_trial`` argument tuples, returning records in task order."""
    if workers <= 1 or len(tasks) < 2:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))


@dataclass(frozen=True)
class CurvePoint:
    n: int
    p: float
    successes: int
    failures: int
    timeouts: int
    trials: int

    @property
    def resolved(self) -> int:
        return self.successes + self.failures

    @property
    def rate(self) -> float:
        """Success rate among resolved trials; timeouts are censored."""
        return self.successes / self.resolved if self.resolved else math.nan

    @property
    def timeout_rate(self) -> float:
        return self.timeouts / self.trials

    def wilson(self) -> tuple[float, float]:
        if not self.resolved:
            return 0.0, 1.0
        ci = binomtest(self.successes, self.resolved).proportion_ci(0.95, method="wilson")
        return max(0.0, ci.low), min(1.0, ci.high)

    def to_row(self) -> dict:
        lo, hi = self.wilson()
        return {
            "n": self.n,
            "p": self.p,
            "successes": self.successes,
            "trials": self.trials,
            "timeouts": self.timeouts,
            "rate": self.rate,
            "ci_lo": lo,
            "ci_hi": hi,
        }


def curve_point(n: int, p: float, records: Iterable[TrialRecord]) -> CurvePoint:
    recs = list(records)
    s = sum(r.verdict == FOUND for r in recs)
    f = sum(r.verdict == NOT_FOUND for r in recs)
    t = sum(r.verdict == TIMEOUT for r in recs)
    return CurvePoint(n, p, s, f, t, len(recs))


def success_curve(
    cfg: ExperimentConfig, workers: int = 1, sink: TextIO | None = None, with_time: bool = False
) -> list[CurvePoint]:
    """One point per ``(n, p)`` of the grid; records go to ``sink`` as JSONL
    in ``(n, p_index, trial)`` order."""
    tasks = []
    for n in cfg.n_values:
        for j, p in enumerate(cfg.p_grid(n)):
            tasks.extend((cfg, n, p, i, j, with_time) for i in range(cfg.trials))
    if not tasks:
        raise ExperimentError("the p grid is empty")
    records = run_trials(tasks, workers)
    if sink is not None:
        for r in records:
            sink.write(r.to_json() + "\n")
    points = []
    for n in cfg.n_values:
        for j, p in enumerate(cfg.p_grid(n)):
            points.append(curve_point(n, p, (r for r in records if r.n == n and r.p_index == j)))
    return points


def write_summary_csv(points: Sequence[CurvePoint], fh: TextIO) -> None:
    w = csv.DictWriter(fh, fieldnames=["n", "p", "successes", "trials", "timeouts", "rate", "ci_lo", "ci_hi"])
    w.writeheader()
    for pt in points:
        w.writerow(pt.to_row())


# -- critical probability and exponent fit ---------------------------------


@dataclass(frozen=True)
class PHalfResult:
    n: int
    p_half: float
    bracket: tuple[float, float]
    probes: tuple[CurvePoint, ...]
    converged: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "p_half": self.p_half,
            "bracket": list(self.bracket),
            "converged": self.converged,
            "probes": [pt.to_row() for pt in self.probes],
        }


def _midpoint(lo: float, hi: float) -> float:
    return math.sqrt(lo * hi) if lo > 0 else (lo + hi) / 2


def find_p_half(
    cfg: ExperimentConfig,
    n: int,
    workers: int = 1,
    sink: TextIO | None = None,
    bracket: tuple[float, float] | None = None,
) -> PHalfResult:
    """Bisect for the ``p`` where the success rate crosses 1/2.

    The midpoint is geometric once the lower end is positive.  Stops when
    ``(hi - lo) / hi`` drops below ``rel_width`` or after ``max_probes``
    probes (endpoints included).  Probe ``j`` uses ``p_index = j``.
    """
    bis = cfg.bisection
    lo, hi = bracket or bis.bracket(n)
    if not 0 <= lo < hi <= 1:
        raise ExperimentError(f"bad bracket [{lo}, {hi}]")
    probes: list[CurvePoint] = []

    def probe(p: float) -> float:
        j = len(probes)
        recs = run_trials([(cfg, n, p, i, j) for i in range(cfg.trials)], workers)
        if sink is not None:
            for r in recs:
                sink.write(r.to_json() + "\n")
        pt = curve_point(n, p, recs)
        probes.append(pt)
        if pt.timeout_rate > bis.max_timeout_rate:
            raise ExcessiveTimeoutError(
                f"{pt.timeouts}/{pt.trials} trials timed out at n={n}, p={p:.6g}"
            )
        return pt.rate

    r_lo, r_hi = probe(lo), probe(hi)
    if not (r_lo < 0.5 <= r_hi):
        raise NonStraddlingError(f"rates {r_lo:.3f} at p={lo:.6g} and {r_hi:.3f} at p={hi:.6g} do not straddle 1/2")
    converged = False
    while len(probes) < bis.max_probes:
        if lo > 0 and (hi - lo) / hi < bis.rel_width:
            converged = True
            break
        mid = _midpoint(lo, hi)
        if probe(mid) >= 0.5:
            hi = mid
        else:
            lo = mid
    else:
        converged = lo > 0 and (hi - lo) / hi < bis.rel_width
    return PHalfResult(n, _midpoint(lo, hi), (lo, hi), tuple(probes), converged)


def fit_threshold_exponent(points: Sequence[tuple[int, float]]) -> tuple[float, float]:
    """Least-squares slope of ``log p_half`` against ``log n`` and its
    standard error."""
    if len(points) < 3:
        raise ExperimentError("need at least 3 (n, p_half) points")
    ns = [n for n, _ in points]
    if len(set(ns)) != len(ns):
        raise ExperimentError("n values must be distinct")
    if any(p <= 0 for _, p in points):
        raise ExperimentError("p_half values must be positive")
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray([p for _, p in points], dtype=float))
    fit = linregress(x, y)
    return float(fit.slope), float(fit.stderr)


# -- lower-bound audits ----------------------------------------------------


@dataclass(frozen=True)
class AuditReport:
    n: int
    k: int
    m: int
    eps: Fraction
    clique_order: int
    clique_order_matches_l: bool
    w_avoiding_cliques: int
    pigeonhole_violations: int
    intra_part_cliques: int
    demand: int
    certifies_absence: bool
    below_recommended_n: bool

    def to_json(self) -> dict:
        d = asdict(self)
        d["eps"] = str(self.eps)
        return d


def lower_bound_demand(spec: LowerBoundSpec, m: int) -> int:
    """``floor(n/(m+1)) - (k+1) ceil(eps n)``: intra-part cliques any
    ``C_n^m`` in ``G_alpha`` plus random edges would need."""
    return spec.n // (m + 1) - (spec.k + 1) * spec.w_size


def lower_bound_audit(
    spec: LowerBoundSpec,
    params: ProblemParams,
    model: RandomModel | None = None,
    seed: int = 0,
    sample: Graph | None = None,
    cap: int = 2_000_000,
) -> AuditReport:
    """Counting certificate from the extremal construction.

    (a) every ``K_{m+1}`` of ``G_alpha`` plus the sample that avoids ``W``
    has ``q = ceil((m+1)/(k+1))`` vertices in one part forming a clique of
    the sample; (b) the sample's intra-part ``K_q`` are counted; (c) fewer
    than the demand certifies that no ``C_n^m`` exists.
    """
    if spec.k != params.k:
        raise ParameterError(f"spec has k={spec.k}, params have k={params.k}")
    n, k, m = spec.n, spec.k, params.m
    q = math.ceil((m + 1) / (k + 1))
    if sample is None:
        model = model or RandomModel(n, 0.0)
        if model.n != n:
            raise ParameterError("model and spec disagree on n")
        sample = sample_gnp(n, model.p, seed)
    host = union(lower_bound_graph(spec), sample)
    part = spec.part_of()
    outside_w = host.full_mask & ~spec.w_mask()
    seen = violations = 0
    for c in iter_cliques(host, m + 1, within=outside_w):
        seen += 1
        if seen > cap:
            raise ExperimentError(f"more than {cap} W-avoiding cliques; raise the cap")
        ok = False
        for i in range(k + 1):
            inside = [v for v in c if part[v] == i]
            if len(inside) >= q and all(sample.has_edge(a, b) for a in inside for b in inside if a < b):
                ok = True
                break
        violations += not ok
    intra = 0
    if q >= 2:
        for r in spec.parts():
            intra += count_cliques(sample, q, within=_range_mask(r)).count
    else:
        intra = n
    demand = lower_bound_demand(spec, m)
    return AuditReport(
        n=n,
        k=k,
        m=m,
        eps=spec.eps,
        clique_order=q,
        clique_order_matches_l=q == params.l,
        w_avoiding_cliques=seen,
        pigeonhole_violations=violations,
        intra_part_cliques=intra,
        demand=demand,
        certifies_absence=violations == 0 and intra < demand,
        below_recommended_n=n < 4 * (k + 2) * (m + 1),
    )


@dataclass(frozen=True)
class PathEdgeAudit:
    m: int
    q: int
    edges: int
    stated_edges: int | None
    discrepancy: bool

    @property
    def first_moment_exponent(self) -> Fraction:
        """The ``x`` with ``n^q p^edges = 1`` at ``p = n^x``."""
        return Fraction(-self.q, self.edges)

    def to_json(self) -> dict:
        d = asdict(self)
        d["first_moment_exponent"] = str(self.first_moment_exponent)
        return d


# edge counts of m-th powers of paths as stated for the first-moment bound
_STATED = {1: lambda q: q - 1, 2: lambda q: 2 * q - 3, 3: lambda q: 3 * q - 3, 4: lambda q: 4 * q - 6}


def path_edge_audit(m: int, q: int) -> PathEdgeAudit:
    """Edges of ``P^m_q`` next to the count the lower-bound argument uses.

    The true count is ``m q - m(m+1)/2``; the argument writes ``3q - 3``
    for ``m = 3`` and ``4q - 6`` for ``m = 4`` (both overcounts).
    """
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if q < max(4, m + 1):
        raise ParameterError(f"q must be >= max(4, m + 1), got {q}")
    edges = m * q - m * (m + 1) // 2
    stated = _STATED[m](q) if m in _STATED else None
    return PathEdgeAudit(m, q, edges, stated, stated is not None and stated != edges)


def c_prime(eps: Fraction) -> Fraction:
    """``9 eps / (2 - 18 eps)`` for ``0 < eps < 1/9``."""
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 9):
        raise ParameterError("eps must lie in (0, 1/9)")
    return 9 * eps / (2 - 18 * eps)


def c_prime_from_q(eps: Fraction) -> tuple[int, Fraction]:
    """``q = ceil(1/(6 eps))`` and the excess ``q/(2q-3) - 1/2 = 3/(4q-6)``,
    which is at most ``c'(eps)`` with equality when ``1/(6 eps)`` is whole."""
    eps = Fraction(eps)
    c_prime(eps)
    q = math.ceil(1 / (6 * eps))
    return q, Fraction(q, 2 * q - 3) - Fraction(1, 2)


# -- clique concentration --------------------------------------------------


def triangle_count(g: Graph) -> int:
    a = g.adjacency_matrix().astype(np.int64)
    return int(np.trace(a @ a @ a)) // 6


@dataclass(frozen=True)
class ConcentrationReport:
    n: int
    p: float
    trials: int
    mean: float
    expected: float
    relative_error: float
    tail_threshold: float
    tail_fraction: float

    def to_json(self) -> dict:
        return asdict(self)


def clique_concentration(n: int, c: float, exponent: float, trials: int, master_seed: int) -> ConcentrationReport:
    """Triangle counts of ``G(n, c n^exponent)`` against ``C(n,3) p^3``;
    the tail is ``P(count >= n/4)``."""
    p = min(1.0, c * n**exponent)
    counts = np.array([triangle_count(sample_gnp(n, p, trial_seed(master_seed, n, 0, i))) for i in range(trials)])
    expected = math.comb(n, 3) * p**3
    mean = float(counts.mean())
    return ConcentrationReport(
        n=n,
        p=p,
        trials=trials,
        mean=mean,
        expected=expected,
        relative_error=abs(mean - expected) / expected,
        tail_threshold=n / 4,
        tail_fraction=float((counts >= n / 4).mean()),
    )


__all__ = [
    "BUILD_ID",
    "ExperimentError",
    "NonStraddlingError",
    "ExcessiveTimeoutError",
    "trial_seed",
    "sample_gnp",
    "BaseSpec",
    "BisectionSpec",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "TrialRecord",
    "run_trial",
    "run_trials",
    "CurvePoint",
    "curve_point",
    "success_curve",
    "write_summary_csv",
    "PHalfResult",
    "find_p_half",
    "fit_threshold_exponent",
    "AuditReport",
    "lower_bound_demand",
    "lower_bound_audit",
    "PathEdgeAudit",
    "path_edge_audit",
    "c_prime",
    "c_prime_from_q",
    "triangle_count",
    "ConcentrationReport",
    "clique_concentration",
]
