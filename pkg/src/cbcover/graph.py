"""Node-weighted digraphs, node-weighted shortest paths and rooted out-trees.

Nodes are integers. A path costs the sum of the costs of its nodes; the
``Endpoints`` flag selects whether the two endpoints are charged.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping

from cbcover.errors import InfeasibleBudgetError, UnreachableError, ValidationError


class Endpoints(Enum):
    INCLUDE_BOTH = "include_both"
    EXCLUDE_ENDPOINTS = "exclude_endpoints"


class NodeWeightedDigraph:
    """Immutable directed graph with nonnegative node costs.

    ``bidirected_core`` optionally names a node subset whose internal arcs
    all come in opposite pairs; nodes outside the core must be sinks.
    """

    __slots__ = ("_cost", "_succ", "_pred", "_arcs", "_nodes", "_core")

    def __init__(
        self,
        cost: Mapping[int, float],
        arcs: Iterable[tuple[int, int]] = (),
        bidirected_core: Iterable[int] | None = None,
    ):
        costs = {}
        for v, c in cost.items():
            c = float(c)
            if not c >= 0 or math.isinf(c):
                raise ValidationError(f"node {v}: cost must be finite and >= 0, got {c}")
            costs[v] = c
        succ = {v: [] for v in costs}
        pred = {v: [] for v in costs}
        arc_set = set()
        for u, v in arcs:
            if u not in costs or v not in costs:
                raise ValidationError(f"arc ({u}, {v}) references an unknown node")
            if u == v:
                raise ValidationError(f"self-loop at node {u}")
            if (u, v) in arc_set:
                raise ValidationError(f"duplicate arc ({u}, {v})")
            arc_set.add((u, v))
            succ[u].append(v)
            pred[v].append(u)
        self._cost = MappingProxyType(costs)
        self._nodes = tuple(sorted(costs))
        self._succ = {v: tuple(sorted(s)) for v, s in succ.items()}
        self._pred = {v: tuple(sorted(s)) for v, s in pred.items()}
        self._arcs = frozenset(arc_set)
        self._core = None
        if bidirected_core is not None:
            core = frozenset(bidirected_core)
            unknown = core - costs.keys()
            if unknown:
                raise ValidationError(f"bidirected core has unknown nodes {sorted(unknown)}")
            for u, v in arc_set:
                if u not in core:
                    raise ValidationError(f"node {u} is outside the core but has outgoing arc to {v}")
                if v in core and (v, u) not in arc_set:
                    raise ValidationError(f"core arc ({u}, {v}) has no reverse arc")
            self._core = core

    @property
    def cost(self) -> Mapping[int, float]:
        return self._cost

    @property
    def nodes(self) -> tuple[int, ...]:
        return self._nodes

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def arcs(self) -> frozenset:
        return self._arcs

    @property
    def bidirected_core(self) -> frozenset | None:
        return self._core

    def succ(self, v: int) -> tuple[int, ...]:
        return self._succ[v]

    def pred(self, v: int) -> tuple[int, ...]:
        return self._pred[v]

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self._arcs

    def __contains__(self, v) -> bool:
        return v in self._cost

    def __len__(self) -> int:
        return len(self._nodes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NodeWeightedDigraph):
            return NotImplemented
        return (
            dict(self._cost) == dict(other._cost)
            and self._arcs == other._arcs
            and self._core == other._core
        )

    def __hash__(self):
        return hash((self._nodes, self._arcs))

    def __repr__(self) -> str:
        return f"NodeWeightedDigraph(nodes={len(self._nodes)}, arcs={len(self._arcs)})"

    def node_set_cost(self, nodes: Iterable[int]) -> float:
        return math.fsum(self._cost[v] for v in sorted(set(nodes)))

    def with_costs(self, cost: Mapping[int, float]) -> "NodeWeightedDigraph":
        """Same arcs, new costs (nodes missing from ``cost`` keep theirs)."""
        merged = dict(self._cost)
        merged.update(cost)
        return NodeWeightedDigraph(merged, sorted(self._arcs), self._core)

    def reachable_from(self, source: int, within: Iterable[int] | None = None) -> set[int]:
        allowed = None if within is None else set(within)
        if allowed is not None and source not in allowed:
            return set()
        seen = {source}
        stack = [source]
        while stack:
            u = stack.pop()
            for v in self._succ[u]:
                if v not in seen and (allowed is None or v in allowed):
                    seen.add(v)
                    stack.append(v)
        return seen

    def reaching(self, target: int, within: Iterable[int] | None = None) -> set[int]:
        """Nodes from which ``target`` is reachable (``target`` included)."""
        allowed = None if within is None else set(within)
        if allowed is not None and target not in allowed:
            return set()
        seen = {target}
        stack = [target]
        while stack:
            u = stack.pop()
            for v in self._pred[u]:
                if v not in seen and (allowed is None or v in allowed):
                    seen.add(v)
                    stack.append(v)
        return seen


@dataclass(frozen=True)
class DistanceMap:
    source: int
    mode: Endpoints
    dist: Mapping[int, float]
    parent: Mapping[int, int]

    def reachable(self, v: int) -> bool:
        return not math.isinf(self.dist.get(v, math.inf))

    def path_to(self, v: int) -> list[int]:
        """Node sequence source -> v along the parent pointers."""
        if not self.reachable(v):
            raise UnreachableError(v)
        path = [v]
        while path[-1] != self.source:
            path.append(self.parent[path[-1]])
        path.reverse()
        return path


def shortest_paths(g: NodeWeightedDigraph, source: int, mode: Endpoints = Endpoints.INCLUDE_BOTH) -> DistanceMap:
    """Dijkstra on node costs; a node's cost is charged when it is entered.

    Unreachable nodes get ``math.inf``. Among equal-cost parents the
    smaller node id wins.
    """
    if source not in g:
        raise ValidationError(f"unknown source node {source!r}")
    cost = g.cost
    # label[v]: cost of the best path excluding source, including v
    label = {source: 0.0}
    parent: dict[int, int] = {}
    done = set()
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v in g.succ(u):
            if v in done:
                continue
            nd = d + cost[v]
            old = label.get(v, math.inf)
            if nd < old or (nd == old and u < parent[v]):
                label[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))

    dist = {}
    if mode is Endpoints.INCLUDE_BOTH:
        base = cost[source]
        for v in g.nodes:
            dist[v] = base + label[v] if v in label else math.inf
    else:
        for v in g.nodes:
            if v == source:
                dist[v] = 0.0
            elif v in label:
                # interior of source..parent(v)..v is exactly label(parent)
                dist[v] = label[parent[v]]
            else:
                dist[v] = math.inf
    return DistanceMap(source, mode, MappingProxyType(dist), MappingProxyType(parent))


def induced_subgraph(g: NodeWeightedDigraph, keep: Iterable[int]) -> NodeWeightedDigraph:
    keep = set(keep)
    missing = keep.difference(g.cost)
    if missing:
        raise ValidationError(f"nodes {sorted(missing)} are not in the graph")
    arcs = [(u, v) for (u, v) in sorted(g.arcs) if u in keep and v in keep]
    core = None if g.bidirected_core is None else g.bidirected_core & keep
    return NodeWeightedDigraph({v: g.cost[v] for v in sorted(keep)}, arcs, core)


def b_proper_prune(g: NodeWeightedDigraph, root: int, budget: float) -> NodeWeightedDigraph:
    """Drop every node farther than ``budget`` from ``root`` (both endpoints charged)."""
    if root not in g:
        raise ValidationError(f"unknown root {root!r}")
    if g.cost[root] > budget:
        raise InfeasibleBudgetError(f"root cost {g.cost[root]} exceeds budget {budget}")
    if math.isinf(budget):
        return g
    dm = shortest_paths(g, root, Endpoints.INCLUDE_BOTH)
    keep = [v for v in g.nodes if dm.dist[v] <= budget]
    if len(keep) == g.node_count:
        return g
    return induced_subgraph(g, keep)


@dataclass(frozen=True)
class OutTree:
    root: int
    nodes: frozenset
    arcs: frozenset
    total_cost: float
    _parent: dict = field(default=None, compare=False, repr=False)

    @classmethod
    def build(cls, g: NodeWeightedDigraph, root: int, arcs: Iterable[tuple[int, int]]) -> "OutTree":
        arcs = frozenset(arcs)
        nodes = frozenset({root}.union(*(set(a) for a in arcs)) if arcs else {root})
        return cls(root, nodes, arcs, g.node_set_cost(nodes))

    @classmethod
    def single(cls, g: NodeWeightedDigraph, root: int) -> "OutTree":
        return cls(root, frozenset({root}), frozenset(), g.cost[root])

    @property
    def parent(self) -> dict[int, int]:
        return {v: u for (u, v) in self.arcs}

    def children(self) -> dict[int, list[int]]:
        kids = {v: [] for v in self.nodes}
        for u, v in sorted(self.arcs):
            kids[u].append(v)
        return kids

    def path_from_root(self, v: int) -> list[int]:
        parent = self.parent
        path = [v]
        while path[-1] != self.root:
            path.append(parent[path[-1]])
        path.reverse()
        return path

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "nodes": sorted(self.nodes),
            "arcs": [list(a) for a in sorted(self.arcs)],
            "cost": self.total_cost,
        }


def extract_out_tree(g: NodeWeightedDigraph, root: int, targets: Iterable[int]) -> OutTree:
    """Shortest-path out-tree from ``root`` restricted to branches that reach a target."""
    dm = shortest_paths(g, root, Endpoints.INCLUDE_BOTH)
    arcs = set()
    seen = {root}
    for t in sorted(set(targets)):
        if t not in g or not dm.reachable(t):
            raise UnreachableError(t)
        v = t
        while v not in seen:
            seen.add(v)
            u = dm.parent[v]
            arcs.add((u, v))
            v = u
    return OutTree(root, frozenset(seen), frozenset(arcs), g.node_set_cost(seen))


def validate_out_tree(t: OutTree, g: NodeWeightedDigraph, root: int) -> list[str]:
    """Every structural problem with ``t`` as an out-tree of ``g`` rooted at ``root``."""
    problems = []
    if t.root != root:
        problems.append(f"tree root {t.root} differs from expected root {root}")
    if root not in t.nodes:
        problems.append(f"root {root} is not a tree node")
    for v in sorted(t.nodes):
        if v not in g:
            problems.append(f"node {v} is not in the graph")
    incoming: dict[int, list[int]] = {}
    for u, v in sorted(t.arcs):
        if not g.has_arc(u, v):
            problems.append(f"arc ({u}, {v}) is not in the graph")
        if u not in t.nodes or v not in t.nodes:
            problems.append(f"arc ({u}, {v}) has an endpoint outside the tree")
        incoming.setdefault(v, []).append(u)
    for v, us in sorted(incoming.items()):
        if len(us) > 1:
            problems.append(f"node {v} has {len(us)} parents {us}")
        if v == root:
            problems.append(f"root {root} has an incoming arc")
    if len(t.arcs) != len(t.nodes) - 1:
        problems.append(f"{len(t.arcs)} arcs for {len(t.nodes)} nodes")
    if root in t.nodes:
        kids: dict[int, list[int]] = {}
        for u, v in t.arcs:
            kids.setdefault(u, []).append(v)
        seen = {root}
        stack = [root]
        while stack:
            for v in kids.get(stack.pop(), ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        for v in sorted(t.nodes - seen):
            problems.append(f"node {v} is not reachable from the root inside the tree")
    if all(v in g for v in t.nodes):
        recomputed = g.node_set_cost(t.nodes)
        if recomputed != t.total_cost:
            problems.append(f"cost field {t.total_cost} differs from recomputed {recomputed}")
    return problems
