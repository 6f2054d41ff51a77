"""Problem instances shared by the solvers, oracles and file formats."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping

from cbcover.errors import ValidationError
from cbcover.graph import NodeWeightedDigraph


def element_sort_key(x):
    return (isinstance(x, str), x)


@dataclass(frozen=True)
class CoverageInstance:
    """Rooted connected coverage instance.

    ``sets[v]`` are the elements covered by node ``v``. For undirected
    instances the graph must already contain both directions of each edge.
    ``budget`` is ``None`` for the unbudgeted (set cover) variants.
    """

    graph: NodeWeightedDigraph
    root: int
    prizes: Mapping[Hashable, float]
    sets: Mapping[int, frozenset]
    budget: float | None = None
    directed: bool = True

    def __post_init__(self):
        g = self.graph
        if self.root not in g:
            raise ValidationError(f"root {self.root!r} is not a graph node")
        for x, p in self.prizes.items():
            if not p >= 0 or math.isinf(p):
                raise ValidationError(f"element {x!r}: prize must be finite and >= 0, got {p}")
        for v, s in self.sets.items():
            if v not in g:
                raise ValidationError(f"set attached to unknown node {v!r}")
            for x in s:
                if x not in self.prizes:
                    raise ValidationError(f"node {v}: unknown element {x!r}")
        if self.budget is not None and not self.budget >= 0:
            raise ValidationError(f"budget must be >= 0, got {self.budget}")
        if not self.directed:
            for u, v in g.arcs:
                if not g.has_arc(v, u):
                    raise ValidationError(f"undirected instance has one-way arc ({u}, {v})")
        # normalise: every node gets a (possibly empty) frozenset
        norm = {v: frozenset(self.sets.get(v, ())) for v in g.nodes}
        object.__setattr__(self, "sets", norm)

    @property
    def elements(self) -> list:
        return sorted(self.prizes, key=element_sort_key)

    def covered(self, nodes) -> frozenset:
        out = set()
        for v in nodes:
            out |= self.sets.get(v, frozenset())
        return frozenset(out)

    def prize_of(self, nodes) -> float:
        return math.fsum(self.prizes[x] for x in sorted(self.covered(nodes), key=element_sort_key))

    def restricted(self, graph: NodeWeightedDigraph) -> "CoverageInstance":
        """Same coverage data on a subgraph (or a re-costed copy) of the graph."""
        return CoverageInstance(
            graph,
            self.root,
            self.prizes,
            {v: self.sets.get(v, frozenset()) for v in graph.nodes},
            self.budget,
            self.directed,
        )


@dataclass(frozen=True)
class SteinerInstance:
    graph: NodeWeightedDigraph
    root: int
    terminals: frozenset

    def __post_init__(self):
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        if self.root not in self.graph:
            raise ValidationError(f"root {self.root!r} is not a graph node")
        for t in self.terminals:
            if t not in self.graph:
                raise ValidationError(f"terminal {t!r} is not a graph node")

    @property
    def proper_terminals(self) -> frozenset:
        """Terminals other than the root; the root is in every tree anyway."""
        return self.terminals - {self.root}


@dataclass(frozen=True)
class GroupInstance:
    graph: NodeWeightedDigraph
    root: int
    groups: tuple
    directed: bool = True

    def __post_init__(self):
        groups = tuple(frozenset(gr) for gr in self.groups)
        object.__setattr__(self, "groups", groups)
        if self.root not in self.graph:
            raise ValidationError(f"root {self.root!r} is not a graph node")
        if not groups:
            raise ValidationError("at least one group is required")
        for i, gr in enumerate(groups):
            if not gr:
                raise ValidationError(f"group {i} is empty")
            for v in gr:
                if v not in self.graph:
                    raise ValidationError(f"group {i}: unknown node {v!r}")


@dataclass(frozen=True)
class AugmentedGraph:
    """Base graph plus one zero-cost sink per element, reached from its covering nodes."""

    graph: NodeWeightedDigraph
    root: int
    base_nodes: frozenset
    element_node: Mapping[Hashable, int]
    prize: Mapping[int, float] = field(repr=False)
    directed: bool = True

    @property
    def element_of(self) -> dict[int, Hashable]:
        return {w: x for x, w in self.element_node.items()}

    @property
    def element_nodes(self) -> frozenset:
        return frozenset(self.element_node.values())
