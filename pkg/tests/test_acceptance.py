"""Acceptance suite: one test per criterion, summarised at the end of the run.

Frozen constants come from the oracle sweeps in ``tests/sweeps`` and may
only be lowered.
"""

import math
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from cbcover.bidirected import CERT_TOL, solve_dst_bidirected
from cbcover.coverage import augment_graph, solve_dcbc, solve_ucbc
from cbcover.dst import greedy_hitting_set, hitting_set_bound, solve_dst
from cbcover.formats import parse_instance
from cbcover.graph import NodeWeightedDigraph, b_proper_prune, extract_out_tree, shortest_paths, validate_out_tree
from cbcover.lp import build_dcbc_lp, build_dst_lp, solve_lp
from cbcover.oracles import brute_force_csc, brute_force_dcbc, brute_force_dst, path_lp_oracle
from cbcover.reductions import solve_csc
from cbcover.trimming import ratio_at_least, trim_tree
from families import coverage_instance, csc_instance, dst_instance

HERE = Path(__file__).parent
PRIZE_RATIO_K = 4  # sweeps/prize_ratio.tsv: worst oracle/prize 1.1667
CSC_CEILING = 8  # sweeps/csc_ratio.tsv: worst cost/oracle 1.125
EPSILONS = (0.25, 0.5, 1.0)


def criterion(number, label):
    return pytest.mark.criterion(number, label)


def _solver(kind):
    return solve_dcbc if kind == "dcbc" else solve_ucbc


@criterion(1, "hard budget bound on seeds 0-199")
def test_hard_budget_bound(request):
    start = time.perf_counter()
    bad, runs = [], 0
    for seed in range(200):
        for kind in ("dcbc", "ucbc"):
            inst = coverage_instance(kind, seed, n_max=14, x_max=10)
            for eps in EPSILONS:
                rep = _solver(kind)(inst, eps)
                runs += 1
                cost = inst.graph.node_set_cost(rep.tree.nodes)
                assert cost.is_integer()
                if Fraction(int(cost)) > (1 + Fraction(eps)) * Fraction(inst.budget):
                    bad.append((kind, seed, eps, cost, inst.budget))
    elapsed = time.perf_counter() - start
    request.node.criterion_detail = f"{runs} solves, {len(bad)} over budget, {elapsed:.1f}s"
    assert not bad, bad[:5]
    assert elapsed < 300


@criterion(2, "relaxation bounds the optimal prize")
def test_lp_upper_bound(request):
    bad, checked = [], 0
    for seed in range(200):
        for kind in ("dcbc", "ucbc"):
            inst = coverage_instance(kind, seed, n_max=14, x_max=10)
            if inst.graph.node_count > 12:
                continue
            checked += 1
            rep = _solver(kind)(inst, 1.0)
            opt = brute_force_dcbc(inst)[1]
            if rep.lp_opt < opt - 1e-6:
                bad.append((kind, seed, rep.lp_opt, opt))
    request.node.criterion_detail = f"{checked} instances, {len(bad)} violations"
    assert not bad, bad[:5]


@criterion(3, f"prize within factor {PRIZE_RATIO_K} of the oracle")
def test_oracle_prize_ratio(request):
    bad, worst = [], 1.0
    for seed in range(100):
        for kind in ("dcbc", "ucbc"):
            inst = coverage_instance(kind, seed, n_max=12, x_max=8)
            rep = _solver(kind)(inst, 1.0)
            opt = brute_force_dcbc(inst)[1]
            if rep.prize * PRIZE_RATIO_K < opt:
                bad.append((kind, seed, rep.prize, opt))
            if rep.prize > 0:
                worst = max(worst, opt / rep.prize)
    request.node.criterion_detail = f"worst oracle/prize {worst:.4f}, {len(bad)} violations"
    assert not bad, bad[:5]


def _random_trim_case(rng, integral):
    n = rng.randint(2, 18)
    parent = {v: rng.randrange(v) for v in range(1, n)}
    if integral:
        cost = {v: rng.randint(0, 8) for v in range(n)}
    else:
        cost = {v: round(rng.uniform(0, 8), 3) for v in range(n)}
    cost[0] = cost[0] if rng.random() < 0.5 else 0
    tree_arcs = [(p, v) for v, p in parent.items()]
    # extra forward arcs keep every tree node but shorten some root distances
    extra = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in tree_arcs and rng.random() < 0.1]
    g = NodeWeightedDigraph(cost, tree_arcs + extra)
    t = extract_out_tree(NodeWeightedDigraph(cost, tree_arcs), 0, list(range(n)))
    B = max(shortest_paths(g, 0).dist.values())
    weights = {v: rng.randint(0, 9) for v in range(n)}
    return g, t, B, rng.choice(EPSILONS), (lambda nodes: sum(weights[v] for v in nodes))


@criterion(4, "trimming contract on 1000 random trees")
def test_trim_contract(request):
    rng = random.Random(4242)
    bad, trimmed = [], 0
    for i in range(1000):
        integral = i % 2 == 0
        g, t, B, eps, prize = _random_trim_case(rng, integral)
        out = trim_tree(t, eps, B, g, 0, prize)
        problems = validate_out_tree(out, g, 0)
        if t.total_cost <= (1 + eps) * B:
            ok = out == t
        else:
            trimmed += 1
            c_hat = out.total_cost
            rel = 0.0 if integral else 1e-9
            ok = (
                Fraction(eps) * Fraction(B) / 2 <= Fraction(c_hat)
                and Fraction(c_hat) <= (1 + Fraction(eps)) * Fraction(B)
                and ratio_at_least(prize(out.nodes), c_hat, eps, prize(t.nodes), t.total_cost, rel)
            )
        if problems or not ok:
            bad.append((i, eps, B, t.total_cost, out.total_cost, problems))
    request.node.criterion_detail = f"{trimmed} trees needed trimming, {len(bad)} violations"
    assert not bad, bad[:5]


@criterion(5, "directed Steiner cost between oracle and bound")
def test_dst_bound(request):
    bad, expensive = [], 0
    for seed in range(100):
        inst = dst_instance("dst", seed, n_max=14, r_max=4)
        tree, rep = solve_dst(inst)
        opt = brute_force_dst(inst)[1]
        expensive += rep.expensive > 0
        if not (opt - 1e-9 <= tree.total_cost <= rep.bound + 1e-9) or not inst.terminals <= tree.nodes:
            bad.append((seed, tree.total_cost, opt, rep.bound))
    request.node.criterion_detail = f"100 instances, {expensive} with expensive terminals, {len(bad)} violations"
    assert not bad, bad[:5]


@criterion(6, "hitting set within (M/L) ln N")
def test_hitting_set_bound(request):
    # N runs from 1 upward; a single set already needs one element while ln 1 = 0
    rng = random.Random(606)
    bad = []
    for i in range(500):
        n_sets = 1 + i % 12
        m = rng.randint(1, 12)
        low = rng.randint(1, m)
        sets = [set(rng.sample(range(m), rng.randint(low, m))) for _ in range(n_sets)]
        sets[0] = set(rng.sample(range(m), low))
        universe = set().union(*sets)
        h = greedy_hitting_set(sets)
        assert all(h & s for s in sets)
        L = min(len(s) for s in sets)
        if len(h) > hitting_set_bound(len(universe), L, len(sets)) + 1e-9:
            bad.append((len(sets), len(universe), L, len(h)))
    request.node.criterion_detail = f"{len(bad)} of 500 over the bound, e.g. (N, M, L, |H|) = {bad[:2]}"
    assert not bad


@criterion(7, "candidate sets reach sqrt(|V \\ R|) on the committed fixtures")
def test_candidate_set_size(request):
    bad, seen = [], 0
    for path in sorted((HERE / "fixtures" / "dst").glob("*.json")):
        inst = parse_instance(path).instance
        for method in ("highs", "simplex"):
            _, rep = solve_dst(inst, method=method)
            need = math.sqrt(max(rep.n_nonterminal, 1)) - 1
            for t, size in rep.candidate_sizes.items():
                seen += 1
                if size < need:
                    bad.append((path.name, method, t, size, need))
            bad += [(path.name, method, d) for d in rep.diagnostics]
    request.node.criterion_detail = f"{seen} expensive terminals checked, {len(bad)} violations"
    assert seen > 0
    assert not bad, bad


def _bidirected_suite():
    for seed in range(100):
        yield seed, dst_instance("dst-bidirected", seed, n_max=14, r_max=4)


@criterion(8, "per-iteration ratio certificate")
def test_bidirected_certificate(request):
    bad, iterations = [], 0
    for seed, inst in _bidirected_suite():
        _, rep = solve_dst_bidirected(inst, certify=True)
        for it in rep.iterations:
            iterations += 1
            if it["ratio"] > it["bound"] + 1e-6:
                bad.append((seed, it))
    request.node.criterion_detail = f"{iterations} iterations, {len(bad)} violations (tolerance {CERT_TOL})"
    assert not bad, bad[:5]


@criterion(9, "bidirected cost within 2(1 + ln(|R|+1)) of the relaxation")
def test_bidirected_ceiling(request):
    bad, worst = [], 0.0
    for seed, inst in _bidirected_suite():
        tree, rep = solve_dst_bidirected(inst, certify=True)
        k = len(inst.proper_terminals)
        if tree.total_cost > 2 * (1 + math.log(k + 1)) * rep.lp_opt + 1e-9:
            bad.append((seed, tree.total_cost, rep.lp_opt, k))
        if rep.lp_opt > 0:
            worst = max(worst, tree.total_cost / rep.lp_opt)
    request.node.criterion_detail = f"worst cost/relaxation {worst:.3f}, {len(bad)} violations"
    assert not bad, bad[:5]


@criterion(10, f"set cover within {CSC_CEILING}x of the oracle")
def test_csc_correctness(request):
    bad, worst = [], 1.0
    for seed in range(50):
        inst = csc_instance(seed)
        tree, trace = solve_csc(inst)
        opt = brute_force_csc(inst)[1]
        full = inst.covered(tree.nodes) == set(inst.prizes)
        progress = all(it["newly_covered"] >= 1 for it in trace.iterations)
        if not (full and progress and opt - 1e-9 <= tree.total_cost <= CSC_CEILING * opt):
            bad.append((seed, tree.total_cost, opt, full, progress))
        if opt > 0:
            worst = max(worst, tree.total_cost / opt)
    request.node.criterion_detail = f"worst cost/oracle {worst:.4f}, {len(bad)} violations"
    assert not bad, bad[:5]


@criterion(11, "compact relaxation equals the path relaxation on small fixtures")
def test_compact_lp_fidelity(request):
    bad, checked = [], 0
    for path in sorted((HERE / "fixtures" / "small").glob("*.json")):
        f = parse_instance(path)
        inst = f.instance
        if f.kind in ("dcbc", "ucbc"):
            aug = augment_graph(inst.restricted(b_proper_prune(inst.graph, inst.root, inst.budget)))
            if aug.graph.node_count > 8:
                continue
            compact = solve_lp(build_dcbc_lp(aug, inst.budget)).objective
            paths = path_lp_oracle(aug, "dcbc", inst.budget)
        else:
            if inst.graph.node_count > 8:
                continue
            compact = solve_lp(build_dst_lp(inst)).objective
            paths = path_lp_oracle(inst, "dst")
        checked += 1
        if abs(compact - paths) > 1e-6:
            bad.append((path.name, compact, paths))
    request.node.criterion_detail = f"{checked} fixtures, {len(bad)} mismatches"
    assert checked >= 20
    assert not bad, bad


def _cli(*args):
    res = subprocess.run([sys.executable, "-m", "cbcover.cli", *map(str, args)], capture_output=True)
    return res.returncode, res.stdout


@criterion(12, "CLI output is byte-identical across runs")
def test_cli_determinism(request, tmp_path):
    small = HERE / "fixtures" / "small"
    gen_csc = tmp_path / "csc.json"
    gen_gst = tmp_path / "gst.json"
    _cli("gen", "--kind", "csc", "--n", 7, "--seed", 11, "-o", gen_csc)
    _cli("gen", "--kind", "gst", "--n", 7, "--seed", 12, "-o", gen_gst)
    sol = tmp_path / "sol.json"
    _cli("solve", "dcbc", "-i", small / "dcbc_s2.json", "-o", sol)
    commands = [
        ("solve", "dcbc", "-i", small / "dcbc_s2.json"),
        ("solve", "ucbc", "-i", small / "ucbc_s2.json", "--format", "tsv"),
        ("solve", "dst", "-i", HERE / "fixtures" / "dst" / "fan4_mixed.json"),
        ("solve", "dst-bd", "-i", small / "dst_bidirected_s1.json", "--certify"),
        ("solve", "csc", "-i", gen_csc),
        ("solve", "gst", "-i", gen_gst),
        ("oracle", "-i", small / "ucbc_s3.json"),
        ("verify", "-i", small / "dcbc_s2.json", "-s", sol),
        ("gen", "--kind", "dcbc", "--seed", 7, "--budget-policy", "oracle"),
        ("bench", "--kind", "ucbc", "--seeds", "0-5", "--n", 7),
        ("bench", "--kind", "dst", "--seeds", "0-5", "--n", 7, "--jobs", 2, "--format", "json"),
        ("lp-dump", "-i", small / "dcbc_s1.json"),
    ]
    differ = []
    for cmd in commands:
        first, second = _cli(*cmd), _cli(*cmd)
        assert first[0] == 0, (cmd, first)
        if first != second:
            differ.append(cmd[:2])
    subcommands = {c[0] for c in commands}
    request.node.criterion_detail = f"{len(commands)} commands over {len(subcommands)} subcommands, {len(differ)} differ"
    assert subcommands == {"solve", "oracle", "verify", "gen", "bench", "lp-dump"}
    assert not differ, differ
