"""Budgeted connected coverage on directed and undirected graphs.

Pipeline: prune to the budget ball, add one zero-cost sink per element,
solve the flow relaxation, bucket element sinks by how much flow they
receive, connect each bucket by a Steiner tree, trim every candidate to
the budget and keep the one with the largest prize.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable

from cbcover.bidirected import solve_dst_bidirected
from cbcover.dst import solve_dst
from cbcover.errors import UnreachableError, ValidationError
from cbcover.graph import (
    NodeWeightedDigraph,
    OutTree,
    b_proper_prune,
    induced_subgraph,
    shortest_paths,
)
from cbcover.instances import AugmentedGraph, CoverageInstance, SteinerInstance, element_sort_key
from cbcover.lp import FracSolution, build_dcbc_lp, solve_or_raise
from cbcover.report import RunReport
from cbcover.trimming import trim_tree

SNAP_TOL = 1e-9
Z_TOL = 1e-9


def augment_graph(inst: CoverageInstance) -> AugmentedGraph:
    """Append a sink ``w_x`` (cost 0, prize p(x)) per element with arcs v -> w_x for x in S_v."""
    g = inst.graph
    base = g.nodes
    first = (max(base) + 1) if base else 0
    element_node = {x: first + i for i, x in enumerate(inst.elements)}
    cost = dict(g.cost)
    arcs = list(g.arcs)
    for x, w in element_node.items():
        cost[w] = 0.0
    for v in base:
        for x in inst.sets[v]:
            arcs.append((v, element_node[x]))
    core = frozenset(base) if not inst.directed else None
    aug = NodeWeightedDigraph(cost, arcs, core)
    prize = {w: float(inst.prizes[x]) for x, w in element_node.items()}
    return AugmentedGraph(aug, inst.root, frozenset(base), element_node, prize, inst.directed)


def _snap(y: float) -> float:
    if y <= 0:
        return y
    k = round(-math.log2(y))
    if abs(y - 2.0 ** -k) <= SNAP_TOL:
        return 2.0 ** -k
    return y


def bucket_index(y: float) -> int:
    """i with y in (2^-i, 2^-(i-1)]."""
    y = _snap(y)
    return math.floor(-math.log2(y)) + 1


def za_limit(n_elements: int) -> int:
    """Largest bucket index folded into Z_A: floor(log2 log2 |X|), at least 0."""
    if n_elements <= 2:
        return 0
    return max(0, math.floor(math.log2(math.log2(n_elements))))


@dataclass(frozen=True)
class BucketStructure:
    Z: frozenset
    buckets: dict  # index -> frozenset of element nodes
    z_a: frozenset
    limit: int
    n_elements: int
    retained_mass: float

    @property
    def k(self) -> int:
        return max(self.buckets, default=0)

    def delta(self, branch) -> float:
        """Capacity slack used when transporting the relaxation to a Steiner instance."""
        if branch == "Z_A":
            return max(1.0, math.log2(self.n_elements))
        return float(2 ** branch)


def select_buckets(s: FracSolution, n_elements: int, element_nodes: Iterable[int], prize: dict) -> BucketStructure:
    y = s.capacity
    nodes = sorted(element_nodes)
    if n_elements == 0:
        return BucketStructure(frozenset(), {}, frozenset(), 0, 0, 0.0)
    cut = 1.0 / n_elements**2
    Z = [w for w in nodes if y.get(w, 0.0) >= cut - Z_TOL and y.get(w, 0.0) > 0]
    buckets: dict[int, set] = {}
    for w in Z:
        buckets.setdefault(bucket_index(y[w]), set()).add(w)
    limit = za_limit(n_elements)
    z_a = frozenset(w for i, ws in buckets.items() if i <= limit for w in ws)
    mass = math.fsum(y[w] * prize.get(w, 0.0) for w in Z)
    return BucketStructure(
        frozenset(Z), {i: frozenset(ws) for i, ws in sorted(buckets.items())}, z_a, limit, n_elements, mass
    )


def steiner_connect(terms: Iterable[int], aug: AugmentedGraph, directed: bool, f_cap: float | None = None) -> OutTree:
    """Out-tree of G'[V + terms] from the root spanning ``terms``."""
    terms = frozenset(terms)
    if not terms:
        raise ValidationError("no terminals to connect")
    sub = induced_subgraph(aug.graph, aug.base_nodes | terms)
    dm = shortest_paths(sub, aug.root)
    for t in sorted(terms):
        if not dm.reachable(t):
            raise UnreachableError(t)
    inst = SteinerInstance(sub, aug.root, terms)
    if directed:
        tree, _ = solve_dst(inst, f_cap=f_cap)
    else:
        tree, _ = solve_dst_bidirected(inst)
    return tree


@dataclass(frozen=True)
class Candidate:
    branch: object  # "Z_A", a bucket index, or "root"
    tree: OutTree  # on the base graph
    prize: float

    @property
    def ratio(self) -> float:
        if self.tree.total_cost == 0:
            return math.inf if self.prize > 0 else 0.0
        return self.prize / self.tree.total_cost


def to_base_tree(t: OutTree, aug: AugmentedGraph, g: NodeWeightedDigraph) -> OutTree:
    """Drop the element sinks; they are leaves so the rest stays a tree."""
    arcs = frozenset(a for a in t.arcs if a[1] in aug.base_nodes)
    nodes = frozenset(v for v in t.nodes if v in aug.base_nodes)
    return OutTree(t.root, nodes, arcs, g.node_set_cost(nodes))


def candidate_trees(bs: BucketStructure, aug: AugmentedGraph, inst: CoverageInstance, f_cap: float | None = None) -> list[Candidate]:
    branches = []
    if bs.z_a:
        branches.append(("Z_A", bs.z_a))
    for i, ws in bs.buckets.items():
        if ws:
            branches.append((i, ws))
    out = []
    for branch, terms in branches:
        t = steiner_connect(terms, aug, inst.directed, f_cap)
        bt = to_base_tree(t, aug, inst.graph)
        out.append(Candidate(branch, bt, inst.prize_of(bt.nodes)))
    if not out:
        root_tree = OutTree.single(inst.graph, inst.root)
        out.append(Candidate("root", root_tree, inst.prize_of(root_tree.nodes)))
    return out


def _solve(inst: CoverageInstance, eps: float, forced: Iterable[int] = (), method: str = "highs") -> RunReport:
    if not 0 < eps <= 1:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    if inst.budget is None:
        raise ValidationError("budgeted coverage needs a budget")
    B = inst.budget
    timings = {}
    clock = time.perf_counter()

    def lap(name):
        nonlocal clock
        now = time.perf_counter()
        timings[name] = now - clock
        clock = now

    g = b_proper_prune(inst.graph, inst.root, B)
    pruned = inst.restricted(g)
    aug = augment_graph(pruned)
    lap("prune")
    forced = [v for v in forced if v in g]
    sol = solve_or_raise(build_dcbc_lp(aug, B, forced), method=method)
    lap("lp")
    bs = select_buckets(sol, len(pruned.prizes), aug.element_nodes, aug.prize)
    lap("buckets")
    cands = candidate_trees(bs, aug, pruned, f_cap=B)
    if all(c.branch != "root" for c in cands):
        root_tree = OutTree.single(g, inst.root)
        cands.append(Candidate("root", root_tree, pruned.prize_of(root_tree.nodes)))
    lap("candidates")

    trimmed = []
    for c in cands:
        t = trim_tree(c.tree, eps, B, g, inst.root, pruned.prize_of)
        trimmed.append(Candidate(c.branch, t, pruned.prize_of(t.nodes)))
    # largest prize wins; then cheaper, then branch order
    best_i = min(range(len(trimmed)), key=lambda i: (-trimmed[i].prize, trimmed[i].tree.total_cost, i))
    best = trimmed[best_i]
    lap("trim")

    tree = best.tree
    return RunReport(
        kind="dcbc" if inst.directed else "ucbc",
        tree=tree,
        cost=tree.total_cost,
        prize=best.prize,
        covered=sorted(inst.covered(tree.nodes), key=element_sort_key),
        budget=B,
        epsilon=eps,
        lp_opt=sol.objective,
        branch=best.branch,
        retained_mass=bs.retained_mass,
        n_buckets=len(bs.buckets),
        candidates=[
            {
                "branch": c.branch,
                "cost": c.tree.total_cost,
                "prize": c.prize,
                "trimmed_cost": tc.tree.total_cost,
                "trimmed_prize": tc.prize,
            }
            for c, tc in zip(cands, trimmed)
        ],
        timings=timings,
    )


def solve_dcbc(inst: CoverageInstance, eps: float = 1.0, forced: Iterable[int] = (), method: str = "highs") -> RunReport:
    if not inst.directed:
        raise ValidationError("solve_dcbc expects a directed instance")
    return _solve(inst, eps, forced, method)


def solve_ucbc(inst: CoverageInstance, eps: float = 1.0, forced: Iterable[int] = (), method: str = "highs") -> RunReport:
    if inst.directed:
        raise ValidationError("solve_ucbc expects an undirected instance")
    return _solve(inst, eps, forced, method)
