"""Regenerate the oracle sweep logs behind the frozen ratio constants.

Run from the tests directory: ``python3 sweeps/run_sweeps.py``.
"""

import math
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from families import coverage_instance, csc_instance  # noqa: E402

from cbcover.coverage import solve_dcbc, solve_ucbc  # noqa: E402
from cbcover.oracles import brute_force_csc, brute_force_dcbc  # noqa: E402
from cbcover.reductions import solve_csc  # noqa: E402


def _fmt(x):
    if isinstance(x, float):
        return str(int(x)) if x.is_integer() else f"{x:.6f}"
    return str(x)


def prize_sweep():
    rows = [("seed", "kind", "n", "elements", "oracle_prize", "prize", "oracle_over_prize")]
    for seed in range(100):
        for kind, solve in (("dcbc", solve_dcbc), ("ucbc", solve_ucbc)):
            inst = coverage_instance(kind, seed, n_max=12, x_max=8)
            _, opt = brute_force_dcbc(inst)
            rep = solve(inst, 1.0)
            ratio = opt / rep.prize if rep.prize > 0 else (1.0 if opt == 0 else math.inf)
            rows.append((seed, kind, inst.graph.node_count, len(inst.prizes), opt, rep.prize, ratio))
    return rows


def csc_sweep():
    rows = [("seed", "directed", "n", "elements", "oracle_cost", "cost", "cost_over_oracle", "iterations", "guess")]
    for seed in range(50):
        inst = csc_instance(seed)
        _, opt = brute_force_csc(inst)
        tree, trace = solve_csc(inst)
        ratio = tree.total_cost / opt if opt > 0 else (1.0 if tree.total_cost == 0 else math.inf)
        rows.append((seed, inst.directed, inst.graph.node_count, len(inst.prizes), opt, tree.total_cost, ratio,
                     len(trace.iterations), trace.guess))
    return rows


def write(name, rows):
    body = "\n".join("\t".join(_fmt(c) for c in r) for r in rows) + "\n"
    worst = max(r[6] for r in rows[1:])
    (HERE / name).write_text(body + f"# max\t{_fmt(worst)}\n")
    return worst


if __name__ == "__main__":
    print("prize ratio max", write("prize_ratio.tsv", prize_sweep()))
    print("csc ratio max", write("csc_ratio.tsv", csc_sweep()))
