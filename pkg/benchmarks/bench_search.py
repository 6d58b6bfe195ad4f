"""Compare the compiled and pure-Python search kernels on the same instances.

Instances are G_alpha (k=1, eps=1/16) plus G(n, c/n), the workload of the
threshold experiments.  Both kernels get the same node budget and relabeling,
so their verdicts and node counts must agree; only the time differs.

    python benchmarks/bench_search.py --n 24 --c 2,4 --instances 10
"""

import argparse
import time
from fractions import Fraction

from hampower import _backend, _kernel_py
from hampower.experiments import sample_gnp, trial_seed
from hampower.gadgets import LowerBoundSpec, lower_bound_graph
from hampower.graph import union
from hampower.search import _permute, round_permutation, twin_classes


def instances(n, c, count, seed):
    base = lower_bound_graph(LowerBoundSpec(n, 1, Fraction(1, 16)))
    for i in range(count):
        h = union(base, sample_gnp(n, min(1.0, c / n), trial_seed(seed, n, 0, i)))
        perm = round_permutation(n, 0)
        yield _permute(h.rows, perm), _permute(twin_classes(h), perm)


def run(kernel, rows, twins, n, m, budget):
    t0 = time.perf_counter()
    status, _, nodes = kernel.search_power_cycle(rows, n, m, twins, budget, 3600.0)
    return status, nodes, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=24)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--c", default="2,4")
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--max-nodes", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    if _backend.compiled is None:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")
    print(f"{'c':>5} {'nodes':>10} {'python s':>10} {'cython s':>10} {'speedup':>8}  agree")
    for c in (float(x) for x in args.c.split(",")):
        tot_nodes = 0
        t_py = t_cy = 0.0
        agree = True
        for rows, twins in instances(args.n, c, args.instances, args.seed):
            a = run(_kernel_py, rows, twins, args.n, args.m, args.max_nodes)
            b = run(_backend.compiled, rows, twins, args.n, args.m, args.max_nodes)
            agree &= a[:2] == b[:2]
            tot_nodes += a[1]
            t_py += a[2]
            t_cy += b[2]
        speed = t_py / t_cy if t_cy > 0 else float("inf")
        print(f"{c:>5g} {tot_nodes:>10d} {t_py:>10.3f} {t_cy:>10.4f} {speed:>8.0f}x  {agree}")


if __name__ == "__main__":
    main()
