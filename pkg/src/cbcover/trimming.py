"""Cut an over-budget tree down to a budget-feasible piece with a good ratio.

With theta = eps*B/2 the tree is peeled bottom-up into pieces of cost at
least theta: at each node, child leftovers (each below theta) are packed
greedily into groups of cost in [theta, 2*theta), and whatever remains
together with the node itself becomes a piece once it reaches theta.
The part left at the root costs less than theta. Each piece joined to a
shortest root path, and the root part joined with each neighbouring
piece, are the candidates; the best one by prize among those meeting the
ratio and cost targets is returned.

Why one always qualifies (gamma = p(T)/c(T), alpha = eps/4): if the root
part holds at most alpha*p(T), some piece Q has ratio >= (1-alpha)*gamma and
its candidate costs at most c(Q) + B <= c(Q)*(1 + 2/eps), giving ratio
>= eps*gamma/4. Otherwise the root part plus any neighbouring piece keeps
more than alpha*p(T) at cost at most c(T), and costs at most
2*theta + B = (1+eps)*B because every node is within B of the root.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from cbcover.errors import ValidationError
from cbcover.graph import NodeWeightedDigraph, OutTree, extract_out_tree, induced_subgraph, shortest_paths


@dataclass(frozen=True)
class Piece:
    nodes: frozenset
    anchor: int  # node the piece hangs from (inside the piece for kind "b")
    kind: str


def _cost(g, nodes) -> float:
    return g.node_set_cost(nodes)


def peel(t: OutTree, g: NodeWeightedDigraph, theta: float) -> tuple[list[Piece], frozenset]:
    """Split the tree into pieces of cost >= theta and a root part of cost < theta."""
    kids = t.children()
    pieces: list[Piece] = []
    residual: dict[int, frozenset] = {}
    order = []
    stack = [t.root]
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(kids[u])
    for u in reversed(order):
        group, group_cost = set(), 0.0
        for c in sorted(kids[u]):
            r = residual.pop(c, None)
            if not r:
                continue
            group |= r
            group_cost += _cost(g, r)
            if group_cost >= theta:
                pieces.append(Piece(frozenset(group), u, "a"))
                group, group_cost = set(), 0.0
        group.add(u)
        if _cost(g, group) >= theta:
            pieces.append(Piece(frozenset(group), u, "b"))
            residual[u] = frozenset()
        else:
            residual[u] = frozenset(group)
    return pieces, residual[t.root]


def _as_tree(g: NodeWeightedDigraph, root: int, nodes: Iterable[int]) -> OutTree:
    nodes = set(nodes)
    return extract_out_tree(induced_subgraph(g, nodes), root, nodes)


def ratio_at_least(p_hat: float, c_hat: float, eps: float, p_t: float, c_t: float, rel: float = 0.0) -> bool:
    """Exact check of p_hat/c_hat >= (1 - rel) * (eps/4) * p_t/c_t on the given floats."""
    lhs = Fraction(p_hat) * Fraction(c_t) * 4
    rhs = Fraction(eps) * Fraction(p_t) * Fraction(c_hat) * (1 - Fraction(rel))
    return lhs >= rhs


def trim_tree(
    t: OutTree,
    eps: float,
    budget: float,
    g: NodeWeightedDigraph,
    root: int,
    prize: Callable[[Iterable[int]], float],
) -> OutTree:
    """Budget-feasible subtree keeping at least eps/4 of the prize-to-cost ratio."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    if t.root != root:
        raise ValidationError(f"tree is rooted at {t.root}, expected {root}")
    c_t = t.total_cost
    if c_t <= (1 + eps) * budget:
        return t
    dm = shortest_paths(g, root)
    for v in t.nodes:
        if dm.dist[v] > budget:
            raise ValidationError(f"graph is not budget-proper: node {v} at distance {dm.dist[v]} > {budget}")
    theta = eps * budget / 2
    pieces, base = peel(t, g, theta)
    p_t = prize(t.nodes)

    parent = t.parent
    cands = []
    for q in pieces:
        cands.append(frozenset(q.nodes) | frozenset(dm.path_to(q.anchor)))
        hook = q.anchor if q.kind == "a" else parent.get(q.anchor)
        if base and hook in base:
            cands.append(base | q.nodes | ({q.anchor} if q.kind == "a" else set()))
    scored = [(nodes, _cost(g, nodes), prize(nodes)) for nodes in cands]
    # exact first; float cost sums may need a hair of slack
    for rel in (0.0, 1e-9):
        best, best_key = None, None
        for nodes, c_hat, p_hat in scored:
            if not theta <= c_hat <= (1 + eps) * budget:
                continue
            if not ratio_at_least(p_hat, c_hat, eps, p_t, c_t, rel):
                continue
            key = (-p_hat, c_hat, tuple(sorted(nodes)))
            if best_key is None or key < best_key:
                best_key, best = key, nodes
        if best is not None:
            return _as_tree(g, root, best)
    raise AssertionError("trimming found no qualifying piece")
