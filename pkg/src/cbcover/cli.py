"""Command line entry point.

Exit codes: 0 success, 1 solver failure, 2 infeasible instance,
3 invalid input or failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from cbcover import bench, formats
from cbcover.bidirected import solve_dst_bidirected
from cbcover.coverage import augment_graph, solve_dcbc, solve_ucbc
from cbcover.dst import solve_dst
from cbcover.errors import CapExceededError, CoverageError, InfeasibleError, ValidationError
from cbcover.generate import GenParams, generate_dict
from cbcover.graph import b_proper_prune
from cbcover.instances import element_sort_key
from cbcover.lp import build_dcbc_lp, build_dst_lp, write_lp_text
from cbcover.oracles import DEFAULT_CAP, brute_force_csc, brute_force_dcbc, brute_force_dst
from cbcover.reductions import gst_to_csc, solve_csc, solve_gst

SOLVE_KINDS = {
    "dcbc": ("dcbc",),
    "ucbc": ("ucbc",),
    "dst": ("dst", "dst-bidirected"),
    "dst-bd": ("dst-bidirected",),
    "csc": ("csc",),
    "gst": ("gst",),
}


def _emit(text: str, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path, allowed=None) -> formats.InstanceFile:
    f = formats.parse_instance(path)
    if allowed and f.kind not in allowed:
        raise ValidationError(f"{path}: instance kind {f.kind!r} does not fit; expected {' or '.join(allowed)}")
    return f


def _tsv(body: dict) -> str:
    keys = [k for k, v in body.items() if not isinstance(v, (dict, list))]
    return "\t".join(keys) + "\n" + "\t".join(bench._cell(body[k]) for k in keys) + "\n"


def cmd_solve(args) -> int:
    f = _load(args.input, SOLVE_KINDS[args.problem])
    inst = f.instance
    if args.problem in ("dcbc", "ucbc"):
        rep = (solve_dcbc if args.problem == "dcbc" else solve_ucbc)(inst, args.epsilon)
        body = rep.to_dict(timings=args.timings)
        body.pop("tree")
        tree = rep.tree
    elif args.problem == "dst":
        tree, rep = solve_dst(inst, args.epsilon, f_cap=args.fcap)
        extra = {k: v for k, v in rep.to_dict().items() if k != "cost"}
        body = {"cost": formats._num(tree.total_cost), "epsilon": args.epsilon, **extra}
    elif args.problem == "dst-bd":
        tree, rep = solve_dst_bidirected(inst, certify=args.certify)
        body = {"cost": formats._num(tree.total_cost), **{k: v for k, v in rep.to_dict().items() if k != "cost"}}
    else:
        tree, trace = solve_csc(inst, args.epsilon) if args.problem == "csc" else solve_gst(inst, args.epsilon)
        body = {"cost": formats._num(tree.total_cost), **trace.to_dict()}
        if args.problem == "csc":
            body["covered"] = sorted(inst.covered(tree.nodes), key=element_sort_key)
    if args.format == "tsv":
        _emit(_tsv(body), args.output)
    else:
        _emit(formats.write_solution(f, tree, body), args.output)
    return 0


def cmd_oracle(args) -> int:
    f = _load(args.input)
    inst = f.instance
    if f.kind in ("dcbc", "ucbc"):
        tree, prize = brute_force_dcbc(inst, args.cap)
        body = {
            "cost": formats._num(tree.total_cost),
            "prize": formats._num(prize),
            "covered": sorted(inst.covered(tree.nodes), key=element_sort_key),
        }
    elif f.kind in ("dst", "dst-bidirected"):
        tree, cost = brute_force_dst(inst, args.cap)
        body = {"cost": formats._num(cost)}
    else:
        csc = inst if f.kind == "csc" else gst_to_csc(inst)
        tree, cost = brute_force_csc(csc, args.cap)
        body = {"cost": formats._num(cost)}
        if f.kind == "csc":
            body["covered"] = sorted(inst.covered(tree.nodes), key=element_sort_key)
    body["oracle"] = True
    if args.format == "tsv":
        _emit(_tsv(body), args.output)
    else:
        _emit(formats.write_solution(f, tree, body), args.output)
    return 0


def cmd_verify(args) -> int:
    f = _load(args.input)
    try:
        sol = json.loads(Path(args.solution).read_text())
    except json.JSONDecodeError as e:
        raise ValidationError(f"{args.solution}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from None
    problems = formats.verify_solution(f, sol)
    out = {"ok": not problems, "problems": problems}
    _emit(formats.dumps(out), args.output)
    return 0 if not problems else 3


def _params(args) -> GenParams:
    return GenParams(
        n=args.n,
        n_elements=args.elements,
        density=args.density,
        cost_range=(args.cost_min, args.cost_max),
        prize_range=(args.prize_min, args.prize_max),
        budget_policy=args.budget_policy,
        budget_fraction=args.budget_fraction,
        n_terminals=args.terminals,
        n_groups=args.groups,
        directed=not args.undirected,
    )


def cmd_gen(args) -> int:
    try:
        data = generate_dict(args.kind, _params(args), args.seed)
    except ValueError as e:
        raise ValidationError(str(e)) from None
    _emit(formats.dumps(data), args.output)
    return 0


def _seed_range(text: str) -> range:
    if "-" in text:
        lo, hi = text.split("-", 1)
        return range(int(lo), int(hi) + 1)
    return range(int(text), int(text) + 1)


def cmd_bench(args) -> int:
    try:
        params = _params(args)
        params.check(args.kind)
    except ValueError as e:
        raise ValidationError(str(e)) from None
    seeds = _seed_range(args.seeds) if args.seeds else range(args.seed, args.seed + args.count)
    rows = bench.run_bench(args.kind, seeds, params, args.epsilon, args.jobs, args.cap)
    if args.format == "json":
        _emit(formats.dumps(rows), args.output)
    else:
        _emit(bench.to_tsv(rows), args.output)
    return 0


def cmd_lp_dump(args) -> int:
    f = _load(args.input, ("dcbc", "ucbc", "dst", "dst-bidirected"))
    inst = f.instance
    if f.kind in ("dcbc", "ucbc"):
        g = b_proper_prune(inst.graph, inst.root, inst.budget)
        p = build_dcbc_lp(augment_graph(inst.restricted(g)), inst.budget)
    else:
        p = build_dst_lp(inst)
    _emit(write_lp_text(p), args.output)
    return 0


def _gen_flags(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, default=8, help="number of nodes")
    p.add_argument("--elements", type=int, default=6, help="ground set size")
    p.add_argument("--density", type=float, default=0.2, help="probability of each extra arc")
    p.add_argument("--cost-min", type=int, default=0)
    p.add_argument("--cost-max", type=int, default=5)
    p.add_argument("--prize-min", type=int, default=1)
    p.add_argument("--prize-max", type=int, default=5)
    p.add_argument("--budget-policy", choices=("fraction", "oracle"), default="fraction")
    p.add_argument("--budget-fraction", type=float, default=0.3)
    p.add_argument("--terminals", type=int, default=3)
    p.add_argument("--groups", type=int, default=3)
    p.add_argument("--undirected", action="store_true", help="undirected csc/gst instances")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cbcover", description="Connected budgeted coverage and Steiner tree solvers")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt=("json", "tsv")):
        p.add_argument("--output", "-o", help="write here instead of stdout")
        p.add_argument("--format", choices=fmt, default=fmt[0])

    p = sub.add_parser("solve", help="run an approximation algorithm")
    p.add_argument("problem", choices=sorted(SOLVE_KINDS))
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--certify", action="store_true", help="check the per-iteration LP bound (dst-bd)")
    p.add_argument("--fcap", type=float, default=None, help="known bound on root distances; skips optimum guessing (dst)")
    p.add_argument("--timings", action="store_true", help="include stage timings (output is then not reproducible)")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact optimum by enumeration")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest node count to enumerate")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="recheck a solution file against its instance")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--solution", "-s", required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write a random instance")
    p.add_argument("--kind", choices=formats.KINDS, required=True)
    _gen_flags(p)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="ratio table over a seed range")
    p.add_argument("--kind", choices=formats.KINDS, required=True)
    _gen_flags(p)
    p.add_argument("--seeds", help="inclusive range such as 0-19 (overrides --seed/--count)")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--jobs", type=int, default=1)
    common(p, ("tsv", "json"))
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("lp-dump", help="print the relaxation in LP text format")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_lp_dump)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return 2
    except (ValidationError, CapExceededError) as e:
        print(f"invalid: {e}", file=sys.stderr)
        return 3
    except CoverageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
