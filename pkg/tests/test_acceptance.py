"""Acceptance suite. Each test prints one ``criterion N: PASS|FAIL`` line.

Run alone with ``pytest tests/test_acceptance.py -v``; the lines are repeated
in the terminal summary.
"""
import math
import random
import statistics
import time
from fractions import Fraction

import pytest

from orgchart.cli import ALPHA_GRID, sweep
from orgchart.errors import Infeasible, OrgChartError
from orgchart.evaluation import label_metrics, per_class_pr, precision_at_k, rank_metrics, strat_metrics
from orgchart.matching import build_flow_graph, flow_violations, min_cost_flow
from orgchart.metapath import MetaPathIndex, ScoredCandidateSet, aggregate_intimacy, count_outgoing
from orgchart.pipeline import run_method
from orgchart.report import report_for_result
from orgchart.stratification import StratificationConfig, build_program, solve_program
from orgchart.synth import generate, preset

from oracles import assignment_brute_force, auc_pairwise, dp_oracle, ilp_brute_force, random_network, walk_counts

BENCH_SEEDS = range(10)
HELD_OUT_SEED = 1000
K_BENCH = 6


def bench_config(seed):
    return preset("high-signal", n_employees=200, depth=5, bmin=2, bmax=6, seed=seed)


def generate_bench(seed):
    return generate(bench_config(seed))


# ----------------------------------------------------------------- 1 and 2

_SOLVED = []


def _ilp_instances():
    """120 random feasible programs plus every infeasible draw met on the way."""
    rng = random.Random(2024)
    feasible, infeasible = [], []
    while len(feasible) < 120:
        n = rng.randint(1, 7)
        net = random_network(rng, n, p_follow=rng.choice([0.15, 0.3, 0.5]))
        alpha, cmax = rng.choice([0, 2]), rng.randint(2, 4)
        want = ilp_brute_force(net, alpha, cmax)
        (feasible if want else infeasible).append((net, alpha, cmax, want))
    return feasible, infeasible


def test_ilp_oracle_equivalence(criterion):
    feasible, infeasible = _ilp_instances()
    start = time.perf_counter()
    mismatches = []
    for net, alpha, cmax, want in feasible:
        prog = build_program(net, StratificationConfig(alpha=alpha, cmax=cmax))
        try:
            res = solve_program(prog)
        except Infeasible:
            mismatches.append((sorted(net.users), alpha, cmax, "solver infeasible"))
            continue
        _SOLVED.append((net, res.assignment))
        if res.objective != want[0] or prog.violations(res.assignment.classes):
            mismatches.append((sorted(net.users), alpha, cmax, res.objective, want[0]))
    for net, alpha, cmax, _ in infeasible:
        try:
            solve_program(build_program(net, StratificationConfig(alpha=alpha, cmax=cmax)))
            mismatches.append((sorted(net.users), alpha, cmax, "solver found a solution"))
        except Infeasible:
            pass
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 60
    criterion(1, ok, f"{len(feasible)} feasible + {len(infeasible)} infeasible instances, "
                     f"{len(mismatches)} mismatches, {elapsed:.1f}s")
    assert ok, mismatches[:3]


def _matthew_violations(net, assignment):
    bad = 0
    rest = [u for u in net.users if u != net.ceo]
    for u in rest:
        for v in rest:
            du, dv = net.in_degree(u), net.in_degree(v)
            if du == dv and assignment[u] != assignment[v]:
                bad += 1
            if du > dv and assignment[u] > assignment[v]:
                bad += 1
    return bad


def test_matthew_invariants(criterion):
    if not _SOLVED:
        for net, alpha, cmax, _ in _ilp_instances()[0]:
            _SOLVED.append((net, solve_program(build_program(net, StratificationConfig(alpha, cmax))).assignment))
    instances = list(_SOLVED)
    for seed in list(BENCH_SEEDS)[:3]:
        net, _ = generate_bench(seed)
        instances.append((net, run_method(net, "create-sl", alpha=5).assignment))
    bad = sum(_matthew_violations(net, a) for net, a in instances)
    criterion(2, bad == 0, f"{bad} violations over {len(instances)} solved instances")
    assert bad == 0


# ---------------------------------------------------------------------- 3


def test_flow_oracle_equivalence(criterion):
    rng = random.Random(77)
    checked = mismatches = 0
    while checked < 150:
        nu, nl, K = rng.randint(1, 3), rng.randint(1, 6), rng.randint(1, 3)
        ups, los = [f"m{i}" for i in range(nu)], [f"s{i}" for i in range(nl)]
        costs = {(m, s): Fraction(rng.randrange(0, 100), 100) for m in ups for s in los if rng.random() < 0.85}
        want = assignment_brute_force(costs, ups, los, K)
        if want is None:
            continue
        H = build_flow_graph(ScoredCandidateSet(tuple(ups), tuple(los), {k: 1 - c for k, c in costs.items()}), K)
        res = min_cost_flow(H)
        checked += 1
        if res.cost != want[0] or flow_violations(H, res) or not all(isinstance(x, int) for x in res.flow.values()):
            mismatches += 1
    criterion(3, mismatches == 0, f"{checked} feasible cost matrices, {mismatches} mismatches")
    assert mismatches == 0


# ---------------------------------------------------------------------- 4


def test_metapath_oracle(criterion):
    rng = random.Random(4)
    count_bad = dp_bad = pairs = 0
    for _ in range(60):
        net = random_network(rng, rng.randint(2, 12), p_follow=rng.choice([0.1, 0.25, 0.4]),
                             n_groups=rng.randint(0, 5), n_posts=rng.randint(0, 12), p_reply=0.1)
        assert len(net.users) + len(net.groups) + len(net.posts) <= 30
        idx = MetaPathIndex(net)
        users = sorted(net.users)
        for i in range(1, 8):
            for u in users:
                want = walk_counts(net, i, u)
                count_bad += count_outgoing(net, i, u) != sum(want.values())
                for v in users:
                    if u == v:
                        continue
                    pairs += 1
                    count_bad += idx.count(i, u, v) != want.get(v, 0)
                    d = idx.dp(i, u, v)
                    dp_bad += not (d == idx.dp(i, v, u) == dp_oracle(net, i, u, v) and 0 <= d <= 1)
    ok = count_bad == 0 and dp_bad == 0
    criterion(4, ok, f"60 networks, {pairs} ordered pairs x path, {count_bad} count and {dp_bad} DP mismatches")
    assert ok


# ---------------------------------------------------------------------- 5


def test_aggregation(criterion):
    zero = aggregate_intimacy([0] * 7) == 0.5
    rng = random.Random(5)
    failures = 0
    trials = 0
    for _ in range(200):
        dp = [rng.random() for _ in range(7)]
        base = aggregate_intimacy(dp)
        for i in range(7):
            bumped = list(dp)
            bumped[i] += 1e-3
            trials += 1
            failures += not aggregate_intimacy(bumped) > base
    ok = zero and failures == 0
    criterion(5, ok, f"all-zero -> 0.5 exactly: {zero}; monotone in {trials - failures}/{trials} perturbations")
    assert ok


# ------------------------------------------------------------- 6, 7 and 8


@pytest.fixture(scope="module")
def benchmark():
    start = time.perf_counter()
    held_net, held_truth = generate_bench(HELD_OUT_SEED)
    grid = [float(x) for x in ALPHA_GRID.split(",")]
    tuned = max(grid, key=lambda a: (_accuracy(held_net, held_truth, a), -a))
    runs = {}
    for seed in BENCH_SEEDS:
        net, truth = generate_bench(seed)
        per = {}
        for method in ("create", "create-sl", "create-sm", "create-s"):
            try:
                r = run_method(net, method, alpha=tuned, K=K_BENCH)
                per[method] = report_for_result(r, truth)
            except OrgChartError as exc:
                per[method] = exc
        runs[seed] = (net, truth, per)
    return tuned, runs, time.perf_counter() - start


def _accuracy(net, truth, alpha):
    r = run_method(net, "create-sl", alpha=alpha)
    return strat_metrics(r.assignment, truth.levels()).accuracy


def test_end_to_end_calibration(criterion, benchmark):
    tuned, runs, elapsed = benchmark
    accs, f1s, failed = [], [], []
    for seed, (net, truth, per) in runs.items():
        sl = per["create-sl"]
        accs.append(sl["stratification"]["accuracy"])
        rep = per["create"]
        if isinstance(rep, Exception):
            failed.append(f"seed {seed}: {rep}")
            f1s.append(0.0)  # no chart, no predicted links
        else:
            f1s.append(rep["links"]["f1"])
    acc, f1 = statistics.median(accs), statistics.median(f1s)
    ok = acc >= 0.8 and f1 >= 0.6 and elapsed < 300
    criterion(6, ok, f"alpha={tuned} (tuned on seed {HELD_OUT_SEED}), K={K_BENCH}: median accuracy {acc:.3f} "
                     f"(>= 0.8), median F1 {f1:.3f} (>= 0.6), {len(failed)}/10 seeds infeasible, {elapsed:.0f}s")
    assert ok, failed[:2]


def test_ablation_direction(criterion, benchmark):
    tuned, runs, _ = benchmark
    aucs = {m: [] for m in ("create", "create-sl", "create-sm", "create-s")}
    missing = []
    for seed, (_, _, per) in runs.items():
        for m in aucs:
            rep = per[m]
            if isinstance(rep, Exception) or rep["links"]["auc"] is None:
                missing.append(f"{m}@{seed}")
            else:
                aucs[m].append(rep["links"]["auc"])
    med = {m: statistics.median(v) if v else math.nan for m, v in aucs.items()}
    ok = not missing and med["create"] >= med["create-sl"] and med["create-sm"] >= med["create-s"]
    shown = ", ".join(f"{m} {v:.3f} (n={len(aucs[m])})" for m, v in med.items())
    criterion(7, ok, f"median AUC {shown}; {len(missing)} method-seed runs without AUC")
    assert ok, missing[:4]


def _single_peaked(values, tol=1e-12):
    peak = max(range(len(values)), key=lambda i: values[i])
    rises = all(values[i] <= values[i + 1] + tol for i in range(peak))
    falls = all(values[i] >= values[i + 1] - tol for i in range(peak, len(values) - 1))
    strict = values[0] < values[peak] and values[-1] < values[peak]
    return rises and falls and strict


def test_alpha_sweep_shape(criterion, benchmark):
    _, runs, _ = benchmark
    grid = [float(x) for x in ALPHA_GRID.split(",")]
    curves = []
    for net, truth, _ in runs.values():
        rows = sweep(net, truth, "alpha", grid, "create-sl")
        curves.append([v for _, _, metric, v in rows if metric == "accuracy"])
    median_curve = [statistics.median(c[i] for c in curves) for i in range(len(grid))]
    ok = _single_peaked(median_curve)
    shown = " ".join(f"{a:g}:{v:.2f}" for a, v in zip(grid, median_curve))
    criterion(8, ok, f"median accuracy over 10 seeds by alpha: {shown}")
    assert ok


# ---------------------------------------------------------------------- 9


def test_metric_fixtures(criterion):
    checks = []
    m = strat_metrics({"a": 1, "b": 3, "c": 2}, {"a": 1, "b": 2, "c": 3})
    checks.append(math.isclose(m.accuracy, 1 / 3) and math.isclose(m.mae, 2 / 3) and math.isclose(m.mse, 2 / 3))
    t = {"a": 1, "b": 2, "c": 3}
    checks.append(strat_metrics(t, t).as_dict() == {"accuracy": 1, "mae": 0, "mse": 0, "r2": 1})
    checks.append(strat_metrics({"a": 2, "b": 2, "c": 2}, t).r2 == 0)
    checks.append(per_class_pr({"r": 1, "x": 2}, {"r": 1, "x": 3}, 3) == (None, 0))
    truth6 = {"a": 1, "b": 2, "c": 2, "d": 3, "e": 3, "f": 3}
    pred6 = {"a": 1, "b": 2, "c": 3, "d": 2, "e": 3, "f": 3}
    checks.append([per_class_pr(pred6, truth6, k) for k in (1, 2, 3)] == [(1, 1), (0.5, 0.5), (2 / 3, 2 / 3)])
    scored = [(f"l{i}", s) for i, s in enumerate([0.9, 0.3, 0.3, 0.7, 0.1, 0.5, 0.5, 0.8, 0.2, 0.5])]
    pos = {"l0", "l1", "l5", "l8"}
    auc, p3 = rank_metrics(scored, pos, 3)
    checks.append(auc == auc_pairwise(scored, pos) == 11.5 / 24 and p3 == 1 / 3)
    checks.append(rank_metrics([(x, 0.3) for x in "abcd"], {"c"}, 4)[0] == 0.5)
    checks.append(precision_at_k([("b", 1.0), ("a", 1.0), ("c", 0.0)], {"a"}, 1) == 1.0)
    labels = {"l0": 1, "l1": 1, "l2": 1, "l3": -1, "l4": 1, "l5": 1, "l6": -1, "l7": -1}
    p, r, f = label_metrics(labels.items(), {"l0", "l1", "l2", "l3"})
    checks.append((p, r) == (3 / 5, 3 / 4) and math.isclose(f, 2 / 3))
    checks.append(label_metrics([], {"x"}) == (0, 0, 0))

    rng = random.Random(9)
    invariant = 0
    for _ in range(20):
        n = rng.randint(4, 40)
        scored = [(i, rng.randrange(10) / 9) for i in range(n)]
        pos = set(rng.sample(range(n), rng.randint(1, n - 1)))
        a = rank_metrics(scored, pos)[0]
        for f in (lambda x: math.exp(3 * x), lambda x: x ** 3 + 5, lambda x: math.log1p(x) * 10):
            invariant += math.isclose(rank_metrics([(k, f(s)) for k, s in scored], pos)[0], a)
    ok = all(checks) and invariant == 60
    criterion(9, ok, f"{sum(checks)}/{len(checks)} hand fixtures exact; AUC unchanged under {invariant}/60 "
                     f"monotone transforms on 20 fixtures")
    assert ok
