"""Exact reference solvers for small instances.

Everything here is plain enumeration: node subsets for the combinatorial
problems and simple paths for the relaxations. Slow on purpose, easy to
trust.
"""

from __future__ import annotations

import math

import numpy as np

from cbcover import simplex
from cbcover.errors import CapExceededError, InfeasibleError, LpError, UnreachableError
from cbcover.graph import NodeWeightedDigraph, OutTree, extract_out_tree, induced_subgraph
from cbcover.instances import AugmentedGraph, CoverageInstance, SteinerInstance

DEFAULT_CAP = 16
PATH_LP_CAP = 8


class _Masks:
    """Bitmask view of a graph: node i <-> bit i in sorted node order."""

    def __init__(self, g: NodeWeightedDigraph):
        self.nodes = list(g.nodes)
        self.bit = {v: i for i, v in enumerate(self.nodes)}
        self.succ = [0] * len(self.nodes)
        for u, v in g.arcs:
            self.succ[self.bit[u]] |= 1 << self.bit[v]

    def reach(self, start: int, within: int) -> int:
        seen = 1 << start
        frontier = seen
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= self.succ[low.bit_length() - 1]
                f ^= low
            nxt &= within & ~seen
            seen |= nxt
            frontier = nxt
        return seen

    def members(self, mask: int) -> list[int]:
        return [self.nodes[i] for i in range(len(self.nodes)) if mask >> i & 1]


def _check_cap(g: NodeWeightedDigraph, cap: int):
    if g.node_count > cap:
        raise CapExceededError(f"{g.node_count} nodes exceed the oracle cap of {cap}")


def _tree(g: NodeWeightedDigraph, root: int, nodes) -> OutTree:
    nodes = set(nodes)
    return extract_out_tree(induced_subgraph(g, nodes), root, nodes)


def _subsets_with_root(m: _Masks, root: int):
    """Every connected-from-root node subset containing the root, as bitmasks."""
    r = m.bit[root]
    others = [i for i in range(len(m.nodes)) if i != r]
    for k in range(1 << len(others)):
        mask = 1 << r
        for j, i in enumerate(others):
            if k >> j & 1:
                mask |= 1 << i
        if m.reach(r, mask) == mask:
            yield mask


def brute_force_dcbc(inst: CoverageInstance, cap: int = DEFAULT_CAP) -> tuple[OutTree, float]:
    """Maximum-prize out-tree of cost at most the budget."""
    g = inst.graph
    _check_cap(g, cap)
    if inst.budget is None:
        raise ValueError("instance has no budget")
    if g.cost[inst.root] > inst.budget:
        raise InfeasibleError(f"root cost {g.cost[inst.root]} exceeds budget {inst.budget}")
    m = _Masks(g)
    best_key, best = None, None
    for mask in _subsets_with_root(m, inst.root):
        nodes = m.members(mask)
        c = math.fsum(g.cost[v] for v in nodes)
        if c > inst.budget:
            continue
        p = inst.prize_of(nodes)
        key = (-p, c, mask)
        if best_key is None or key < best_key:
            best_key, best = key, nodes
    return _tree(g, inst.root, best), -best_key[0]


def brute_force_dst(inst: SteinerInstance, cap: int = DEFAULT_CAP) -> tuple[OutTree, float]:
    """Minimum-cost out-tree spanning the terminals."""
    g = inst.graph
    _check_cap(g, cap)
    m = _Masks(g)
    need = 0
    for t in inst.terminals | {inst.root}:
        need |= 1 << m.bit[t]
    free = [i for i in range(len(m.nodes)) if not need >> i & 1]
    r = m.bit[inst.root]
    best_key, best = None, None
    for k in range(1 << len(free)):
        mask = need
        for j, i in enumerate(free):
            if k >> j & 1:
                mask |= 1 << i
        if m.reach(r, mask) & need != need:
            continue
        nodes = m.members(mask)
        c = math.fsum(g.cost[v] for v in nodes)
        key = (c, mask)
        if best_key is None or key < best_key:
            best_key, best = key, nodes
    if best is None:
        raise InfeasibleError("no out-tree from the root spans all terminals")
    # the cheapest set may carry dead branches of zero cost; prune them away
    t = extract_out_tree(induced_subgraph(g, best), inst.root, inst.terminals | {inst.root})
    return t, best_key[0]


def brute_force_csc(inst: CoverageInstance, cap: int = DEFAULT_CAP) -> tuple[OutTree, float]:
    """Minimum-cost out-tree whose nodes cover every element."""
    g = inst.graph
    _check_cap(g, cap)
    everything = frozenset(inst.prizes)
    if inst.covered(g.nodes) != everything:
        missing = sorted(everything - inst.covered(g.nodes), key=str)
        raise InfeasibleError(f"elements {missing} are covered by no node")
    m = _Masks(g)
    best_key, best = None, None
    for mask in _subsets_with_root(m, inst.root):
        nodes = m.members(mask)
        if inst.covered(nodes) != everything:
            continue
        c = math.fsum(g.cost[v] for v in nodes)
        key = (c, mask)
        if best_key is None or key < best_key:
            best_key, best = key, nodes
    if best is None:
        raise InfeasibleError("no connected node set from the root covers every element")
    return _tree(g, inst.root, best), best_key[0]


def simple_paths(g: NodeWeightedDigraph, source: int, target: int) -> list[tuple[int, ...]]:
    out = []
    stack = [(source, (source,))]
    while stack:
        u, path = stack.pop()
        if u == target:
            out.append(path)
            continue
        for v in reversed(g.succ(u)):
            if v not in path:
                stack.append((v, path + (v,)))
    return sorted(out)


def path_lp_oracle(inst, kind: str, budget: float | None = None, cap: int = PATH_LP_CAP) -> float:
    """Optimum of the path-variable relaxation, solved with the embedded simplex.

    ``inst`` is an ``AugmentedGraph`` (with ``budget``) for ``kind="dcbc"``
    and a ``SteinerInstance`` for ``kind="dst"``.
    """
    g, root = inst.graph, inst.root
    _check_cap(g, cap)
    nodes = list(g.nodes)
    col = {("y", v): i for i, v in enumerate(nodes)}
    if kind == "dcbc":
        if not isinstance(inst, AugmentedGraph) or budget is None:
            raise ValueError("dcbc needs an augmented graph and a budget")
        commodities = [v for v in nodes if v != root]
        free_demand = True
    elif kind == "dst":
        if not isinstance(inst, SteinerInstance):
            raise ValueError("dst needs a Steiner instance")
        commodities = sorted(inst.proper_terminals)
        free_demand = False
    else:
        raise ValueError(f"unknown relaxation kind {kind!r}")

    paths = {}
    for k in commodities:
        paths[k] = simple_paths(g, root, k)
        if not paths[k] and not free_demand:
            raise UnreachableError(k)
        for P in paths[k]:
            col[("f", k, P)] = len(col)
    n = len(col)
    c = np.zeros(n)
    for v in nodes:
        c[col[("y", v)]] = -inst.prize.get(v, 0.0) if kind == "dcbc" else g.cost[v]
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    if kind == "dcbc" and not math.isinf(budget):
        row = np.zeros(n)
        for v in nodes:
            row[col[("y", v)]] = g.cost[v]
        A_ub.append(row)
        b_ub.append(budget)
    for k in commodities:
        row = np.zeros(n)
        for P in paths[k]:
            row[col[("f", k, P)]] = 1.0
        if free_demand:
            row[col[("y", k)]] = -1.0
            A_eq.append(row)
            b_eq.append(0.0)
        else:
            A_eq.append(row)
            b_eq.append(1.0)
        for z in nodes:
            if z == root or (free_demand and z == k):
                continue
            through = [P for P in paths[k] if z in P]
            if not through:
                continue
            row = np.zeros(n)
            for P in through:
                row[col[("f", k, P)]] = 1.0
            row[col[("y", z)]] = -1.0
            A_ub.append(row)
            b_ub.append(0.0)
    lower = np.zeros(n)
    upper = np.ones(n)
    lower[col[("y", root)]] = 1.0
    res = simplex.linprog(
        c,
        A_ub=np.array(A_ub).reshape(-1, n),
        b_ub=np.array(b_ub),
        A_eq=np.array(A_eq).reshape(-1, n),
        b_eq=np.array(b_eq),
        lower=lower,
        upper=upper,
    )
    if res.status != simplex.OPTIMAL:
        raise LpError(res.status)
    return -res.objective if kind == "dcbc" else res.objective
