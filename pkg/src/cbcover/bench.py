"""Approximation-ratio tables over seeded instance families."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

from cbcover.bidirected import solve_dst_bidirected
from cbcover.coverage import solve_dcbc, solve_ucbc
from cbcover.dst import solve_dst
from cbcover.errors import CapExceededError
from cbcover.generate import GenParams, generate_instance
from cbcover.oracles import DEFAULT_CAP, brute_force_csc, brute_force_dcbc, brute_force_dst
from cbcover.reductions import gst_to_csc, solve_csc, solve_gst

COLUMNS = ("kind", "seed", "n", "cost", "value", "oracle", "ratio", "budget_violation", "lp_opt")


def run_one(kind: str, params: GenParams, seed: int, eps: float = 1.0, cap: int = DEFAULT_CAP) -> dict:
    """Solve one generated instance and compare with the exact optimum when small enough."""
    inst = generate_instance(kind, params, seed).instance
    row = dict.fromkeys(COLUMNS)
    row.update(kind=kind, seed=seed, n=inst.graph.node_count)
    oracle = None
    try:
        if kind in ("dcbc", "ucbc"):
            rep = (solve_dcbc if kind == "dcbc" else solve_ucbc)(inst, eps)
            row.update(cost=rep.cost, value=rep.prize, budget_violation=rep.budget_violation, lp_opt=rep.lp_opt)
            oracle = brute_force_dcbc(inst, cap)[1]
            row["ratio"] = oracle / rep.prize if rep.prize > 0 else (1.0 if oracle == 0 else math.inf)
        else:
            if kind == "dst":
                tree, rep = solve_dst(inst, eps)
                row["lp_opt"] = rep.lp_opt
            elif kind == "dst-bidirected":
                tree, rep = solve_dst_bidirected(inst, certify=True)
                row["lp_opt"] = rep.lp_opt
            elif kind == "csc":
                tree, _ = solve_csc(inst)
            else:
                tree, _ = solve_gst(inst)
            row.update(cost=tree.total_cost, value=tree.total_cost)
            if kind in ("dst", "dst-bidirected"):
                oracle = brute_force_dst(inst, cap)[1]
            else:
                oracle = brute_force_csc(inst if kind == "csc" else gst_to_csc(inst), cap)[1]
            row["ratio"] = tree.total_cost / oracle if oracle > 0 else (1.0 if tree.total_cost == 0 else math.inf)
    except CapExceededError:
        pass
    row["oracle"] = oracle
    return row


def _star(args):
    return run_one(*args)


def run_bench(kind: str, seeds, params: GenParams, eps: float = 1.0, jobs: int = 1, cap: int = DEFAULT_CAP) -> list[dict]:
    """Rows in seed order; ``jobs > 1`` spreads instances over worker processes."""
    tasks = [(kind, params, s, eps, cap) for s in seeds]
    if jobs <= 1:
        return [_star(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_star, tasks))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if v.is_integer():
            return str(int(v))
        return f"{v:.6g}"
    return str(v)


def to_tsv(rows: list[dict]) -> str:
    lines = ["\t".join(COLUMNS)]
    lines += ["\t".join(_cell(r[c]) for c in COLUMNS) for r in rows]
    return "\n".join(lines) + "\n"
