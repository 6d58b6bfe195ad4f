import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import binomtest

from hampower.densities import RandomModel
from hampower.gadgets import LowerBoundSpec, ParameterError, ProblemParams
from hampower.graph import complete_graph
from hampower.experiments import (
    BaseSpec,
    BisectionSpec,
    CurvePoint,
    ExcessiveTimeoutError,
    ExperimentConfig,
    ExperimentError,
    NonStraddlingError,
    c_prime,
    c_prime_from_q,
    clique_concentration,
    find_p_half,
    fit_threshold_exponent,
    lower_bound_audit,
    lower_bound_demand,
    parse_config,
    path_edge_audit,
    run_trial,
    sample_gnp,
    success_curve,
    trial_seed,
    triangle_count,
    write_summary_csv,
)
from hampower.search import SearchBudget

CONFIG = """
[experiment]
name = smoke
trials = 12
master_seed = 99

[params]
k = 1
m = 2

[base]
kind = lower_bound
eps = 1/16

[grid]
n = 12, 16
p = 0, 0.3, 1

[budget]
max_nodes = 200000
max_millis = 60000
"""


def test_sampling_endpoints_and_determinism():
    assert sample_gnp(10, 0.0, 1).edge_count == 0
    assert sample_gnp(10, 1.0, 1) == complete_graph(10)
    assert sample_gnp(40, 0.3, 7) == sample_gnp(40, 0.3, 7)
    assert sample_gnp(40, 0.3, 7) != sample_gnp(40, 0.3, 8)
    with pytest.raises(ExperimentError):
        sample_gnp(5, 1.5, 0)


def test_sampling_mean():
    counts = [sample_gnp(1000, 0.01, trial_seed(5, 1000, 0, i)).edge_count for i in range(400)]
    mean = math.comb(1000, 2) * 0.01
    sd = math.sqrt(math.comb(1000, 2) * 0.01 * 0.99)
    assert abs(np.mean(counts) - mean) < 3 * sd
    # and the sample spread matches the binomial one
    assert 0.8 * sd < np.std(counts) < 1.2 * sd


def test_trial_seed():
    seeds = {trial_seed(1, n, j, i) for n in (10, 20) for j in range(3) for i in range(50)}
    assert len(seeds) == 300
    assert all(0 <= s < 2**64 for s in seeds)
    assert trial_seed(1, 10, 0, 0) == trial_seed(1, 10, 0, 0)


def test_parse_config():
    cfg = parse_config(CONFIG)
    assert cfg.params == ProblemParams(1, 2, 0)
    assert cfg.n_values == (12, 16) and cfg.p_values == (0.0, 0.3, 1.0)
    assert cfg.budget == SearchBudget(200000, 60000)
    assert cfg.config_hash() == parse_config(CONFIG).config_hash()
    assert cfg.config_hash() != parse_config(CONFIG.replace("master_seed = 99", "master_seed = 98")).config_hash()
    with pytest.raises(ExperimentError):
        parse_config("[params]\nk = 1\nm = 2\n")
    with pytest.raises(ExperimentError):
        parse_config(CONFIG.replace("n = 12, 16", "n = 100"))
    with pytest.raises(ExperimentError):
        parse_config(CONFIG.replace("trials = 12", "trials = 0"))


def test_run_trial_examples():
    p = ProblemParams(1, 2, 1)
    cfg = ExperimentConfig(p, (12,), (0.0,), base=BaseSpec("complete"), trials=1)
    assert run_trial(cfg, 12, 0.3, 0).verdict == "found"
    cfg = ExperimentConfig(p, (12,), (1.0,), base=BaseSpec("empty"), trials=1)
    assert run_trial(cfg, 12, 1.0, 0).verdict == "found"
    cfg = ExperimentConfig(p, (12,), (0.0,), base=BaseSpec("lower_bound", Fraction(1, 16)), trials=1)
    rec = run_trial(cfg, 12, 0.0, 0)
    assert rec.verdict == "not_found"
    assert "elapsed_ms" not in json.loads(rec.to_json())
    assert "elapsed_ms" in json.loads(run_trial(cfg, 12, 0.0, 0, with_time=True).to_json())


def test_success_curve_and_csv():
    cfg = parse_config(CONFIG)
    sink = io.StringIO()
    points = success_curve(cfg, sink=sink)
    lines = sink.getvalue().splitlines()
    assert len(lines) == 2 * 3 * 12
    keys = [(r["n"], r["p_index"], r["trial"]) for r in map(json.loads, lines)]
    assert keys == sorted(keys)
    by = {(pt.n, pt.p): pt for pt in points}
    for n in (12, 16):
        assert by[(n, 0.0)].rate == 0.0
        assert by[(n, 1.0)].rate == 1.0
        assert by[(n, 0.0)].rate <= by[(n, 0.3)].rate <= by[(n, 1.0)].rate
    out = io.StringIO()
    write_summary_csv(points, out)
    rows = out.getvalue().splitlines()
    assert rows[0] == "n,p,successes,trials,timeouts,rate,ci_lo,ci_hi" and len(rows) == 7


def test_curve_point_censoring():
    pt = CurvePoint(10, 0.5, successes=3, failures=5, timeouts=2, trials=10)
    assert pt.rate == 3 / 8 and pt.timeout_rate == 0.2
    lo, hi = pt.wilson()
    ci = binomtest(3, 8).proportion_ci(method="wilson")
    assert (lo, hi) == pytest.approx((ci.low, ci.high))
    assert 0 <= lo <= pt.rate <= hi <= 1


def test_find_p_half_straddles():
    cfg = parse_config(CONFIG.replace("trials = 12", "trials = 20"))
    res = find_p_half(cfg, 16)
    assert res.probes[0].rate == 0 and res.probes[1].rate == 1
    lo, hi = res.bracket
    assert lo < res.p_half < hi
    assert res.converged == ((hi - lo) / hi < 0.1)
    assert all(0 < pt.p < 1 for pt in res.probes[2:])
    assert len(res.probes) <= cfg.bisection.max_probes


def test_find_p_half_errors():
    cfg = ExperimentConfig(ProblemParams(1, 2, 0), (12,), base=BaseSpec("complete"), trials=4)
    with pytest.raises(NonStraddlingError):
        find_p_half(cfg, 12)
    cfg = ExperimentConfig(
        ProblemParams(1, 2, 0),
        (40,),
        trials=4,
        budget=SearchBudget(max_nodes=1),
        bisection=BisectionSpec(lo=0.3, hi=0.5, max_timeout_rate=0.0),
    )
    with pytest.raises((ExcessiveTimeoutError, NonStraddlingError)):
        find_p_half(cfg, 40)
    with pytest.raises(ExperimentError):
        find_p_half(cfg, 40, bracket=(0.5, 0.2))


def test_fit_exponent():
    ns = [16, 24, 32, 48]
    slope, err = fit_threshold_exponent([(n, n**-1.0) for n in ns])
    assert slope == pytest.approx(-1) and err == pytest.approx(0, abs=1e-12)
    slope, _ = fit_threshold_exponent([(n, 3 * n ** (-2 / 3)) for n in ns])
    assert slope == pytest.approx(-2 / 3)
    with pytest.raises(ExperimentError):
        fit_threshold_exponent([(16, 0.1), (24, 0.05)])
    with pytest.raises(ExperimentError):
        fit_threshold_exponent([(16, 0.1), (16, 0.05), (24, 0.01)])


def test_lower_bound_audit():
    spec = LowerBoundSpec(12, 1, Fraction(1, 16))
    rep = lower_bound_audit(spec, ProblemParams(1, 2, 1))
    assert rep.certifies_absence and rep.intra_part_cliques == 0 and rep.demand == 1
    assert rep.pigeonhole_violations == 0 and rep.w_avoiding_cliques == 0
    assert lower_bound_demand(LowerBoundSpec(24, 1, Fraction(1, 16)), 3) == 2
    dense = lower_bound_audit(spec, ProblemParams(1, 2, 1), RandomModel(12, 0.9), seed=3)
    assert dense.pigeonhole_violations == 0 and dense.w_avoiding_cliques > 0
    with pytest.raises(ParameterError):
        lower_bound_audit(spec, ProblemParams(2, 2, 1))


@pytest.mark.parametrize("n", [12, 16, 20])
def test_pigeonhole_on_dense_samples(n):
    spec = LowerBoundSpec(n, 1, Fraction(1, 16))
    for seed in range(3):
        rep = lower_bound_audit(spec, ProblemParams(1, 2, 1), RandomModel(n, 0.7), seed=seed)
        assert rep.pigeonhole_violations == 0


def test_clique_order_mismatch_is_flagged():
    # m = 6 at k = 1 split as l = 3, r = 3: ceil(7/2) = 4 != 3
    rep = lower_bound_audit(LowerBoundSpec(14, 1, Fraction(0)), ProblemParams(1, 3, 3))
    assert rep.clique_order == 4 and not rep.clique_order_matches_l


def test_path_edge_audit():
    assert path_edge_audit(2, 7).edges == 11
    assert path_edge_audit(1, 9).edges == 8
    a3 = path_edge_audit(3, 8)
    assert a3.edges == 18 and a3.stated_edges == 21 and a3.discrepancy
    a4 = path_edge_audit(4, 8)
    assert a4.edges == 22 and a4.stated_edges == 26 and a4.discrepancy
    assert not path_edge_audit(2, 9).discrepancy
    assert path_edge_audit(2, 10**6).first_moment_exponent == Fraction(-(10**6), 2 * 10**6 - 3)
    with pytest.raises(ParameterError):
        path_edge_audit(2, 3)


def test_c_prime():
    eps = Fraction(1, 60)
    q, excess = c_prime_from_q(eps)
    assert q == 10 and excess == Fraction(3, 34) == c_prime(eps)
    q, excess = c_prime_from_q(Fraction(1, 50))
    assert excess <= c_prime(Fraction(1, 50))
    with pytest.raises(ParameterError):
        c_prime(Fraction(1, 9))


def test_triangle_count():
    assert triangle_count(complete_graph(6)) == 20


def test_clique_concentration_small():
    rep = clique_concentration(60, 0.5, -2 / 3, 50, 1)
    assert rep.expected == pytest.approx(math.comb(60, 3) * rep.p**3)
    assert rep.trials == 50 and 0 <= rep.tail_fraction <= 1
