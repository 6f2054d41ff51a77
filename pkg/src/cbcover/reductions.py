"""Connected set cover and group Steiner tree through budgeted coverage.

Set cover guesses the optimum on a geometric ladder (binary search) and,
per guess, repeatedly solves budgeted coverage with unit prizes on the
still-uncovered elements, zeroing the cost of every node bought so far.
Group Steiner tree is the same problem with groups and elements swapped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from cbcover.coverage import solve_dcbc, solve_ucbc
from cbcover.dst import guess_opt_schedule
from cbcover.errors import InfeasibleBudgetError, InfeasibleError, ValidationError
from cbcover.graph import NodeWeightedDigraph, OutTree, extract_out_tree, induced_subgraph
from cbcover.instances import CoverageInstance, GroupInstance, element_sort_key


def gst_to_csc(inst: GroupInstance) -> CoverageInstance:
    """Element i stands for group i; node v covers the groups it belongs to."""
    sets = {v: frozenset(i for i, gr in enumerate(inst.groups) if v in gr) for v in inst.graph.nodes}
    prizes = {i: 1.0 for i in range(len(inst.groups))}
    return CoverageInstance(inst.graph, inst.root, prizes, sets, None, inst.directed)


def csc_to_gst(inst: CoverageInstance) -> GroupInstance:
    """Group x holds the nodes whose set contains element x."""
    groups = []
    for x in inst.elements:
        gr = frozenset(v for v in inst.graph.nodes if x in inst.sets[v])
        if not gr:
            raise InfeasibleError(f"element {x!r} is covered by no node")
        groups.append(gr)
    return GroupInstance(inst.graph, inst.root, tuple(groups), inst.directed)


def split_edge_weights(
    nodes, edges: Mapping[tuple[int, int], float], directed: bool = False
) -> tuple[NodeWeightedDigraph, dict]:
    """Node-weighted graph with a middle node carrying each edge's cost.

    Original nodes cost 0. Returns the graph and the edge -> middle node map.
    """
    nodes = sorted(set(nodes))
    first = (max(nodes) + 1) if nodes else 0
    cost = {v: 0.0 for v in nodes}
    arcs = []
    middle = {}
    for i, ((u, v), w) in enumerate(sorted(edges.items())):
        if not w >= 0 or math.isinf(w):
            raise ValidationError(f"edge ({u}, {v}): cost must be finite and >= 0, got {w}")
        if u not in cost or v not in cost:
            raise ValidationError(f"edge ({u}, {v}) has an unknown endpoint")
        m = first + i
        cost[m] = float(w)
        middle[(u, v)] = m
        arcs += [(u, m), (m, v)]
        if not directed:
            arcs += [(v, m), (m, u)]
    core = None if directed else frozenset(cost)
    return NodeWeightedDigraph(cost, arcs, core), middle


def iteration_cap(n_elements: int, factor: float = 4.0) -> int:
    """factor * (log2 |X| + 1)^3 rounded up."""
    return math.ceil(factor * (math.log2(max(n_elements, 1)) + 1) ** 3)


@dataclass
class CscTrace:
    guess: float | None = None
    iterations: list = field(default_factory=list)
    guesses: list = field(default_factory=list)  # (guess, accepted, iterations)
    cap: int = 0

    def to_dict(self) -> dict:
        return {
            "guess": self.guess,
            "cap": self.cap,
            "iterations": [dict(it) for it in self.iterations],
            "guesses": [list(gs) for gs in self.guesses],
        }


def _cover_at(inst: CoverageInstance, guess: float, cap: int, method: str):
    """Run the inner loop at one guess; (tree nodes, iteration records) or None on failure."""
    g = inst.graph
    cost = dict(g.cost)
    root = inst.root
    uncovered = set(inst.prizes) - inst.covered([root])
    bought = {root}
    records = []
    solve = solve_dcbc if inst.directed else solve_ucbc
    while uncovered:
        if len(records) >= cap:
            return None, records
        gi = g.with_costs(cost)
        sets = {v: inst.sets[v] & uncovered for v in g.nodes}
        sub = CoverageInstance(gi, root, {x: 1.0 for x in uncovered}, sets, guess, inst.directed)
        try:
            rep = solve(sub, 1.0, forced=sorted(bought), method=method)
        except InfeasibleBudgetError:
            return None, records
        new = inst.covered(rep.tree.nodes) & uncovered
        records.append(
            {
                "uncovered": len(uncovered),
                "newly_covered": len(new),
                "tree_cost": rep.cost,
                "zeroed": len(bought | rep.tree.nodes),
            }
        )
        if not new:
            return None, records
        uncovered -= new
        bought |= rep.tree.nodes
        for v in rep.tree.nodes:
            cost[v] = 0.0
    return bought, records


def solve_csc(
    inst: CoverageInstance, eps_guess: float = 1.0, cap_factor: float = 4.0, method: str = "highs"
) -> tuple[OutTree, CscTrace]:
    """Approximate minimum-cost out-tree (tree if undirected) covering every element."""
    g, root = inst.graph, inst.root
    reach = g.reachable_from(root)
    missing = set(inst.prizes) - inst.covered(reach)
    if missing:
        raise InfeasibleError(f"elements {sorted(missing, key=element_sort_key)} cannot be covered from the root")
    trace = CscTrace(cap=iteration_cap(len(inst.prizes), cap_factor))
    if not set(inst.prizes) - inst.covered([root]):
        trace.guess = g.cost[root]
        return OutTree.single(g, root), trace

    positive = [c for v, c in g.cost.items() if c > 0 and v in reach]
    ladder = guess_opt_schedule(min(positive), math.fsum(positive), eps_guess) if positive else [0.0]
    results = {}

    def attempt(i):
        if i not in results:
            nodes, records = _cover_at(inst, ladder[i], trace.cap, method)
            results[i] = (nodes, records)
            trace.guesses.append((ladder[i], nodes is not None, len(records)))
        return results[i][0] is not None

    lo, hi = 0, len(ladder) - 1
    if not attempt(hi):
        raise InfeasibleError(f"every optimum guess failed; largest guess {ladder[hi]} took {len(results[hi][1])} iterations")
    while lo < hi:
        mid = (lo + hi) // 2
        if attempt(mid):
            hi = mid
        else:
            lo = mid + 1
    nodes, records = results[hi]
    trace.guess = ladder[hi]
    trace.iterations = records
    tree = extract_out_tree(induced_subgraph(g, nodes), root, nodes)
    return tree, trace


def solve_gst(inst: GroupInstance, eps_guess: float = 1.0, method: str = "highs") -> tuple[OutTree, CscTrace]:
    """Out-tree touching every group."""
    return solve_csc(gst_to_csc(inst), eps_guess=eps_guess, method=method)
