"""Spider-merging Steiner tree for bidirected graphs with sink terminals.

Start with one component per terminal plus one for the root. Each round
picks a center ``v`` and the ``j`` components closest to it minimising
``(c(v) + sum of distances) / j``, then fuses them along shortest paths.
When one component is left, a shortest-path out-tree from the root over
the accumulated arcs is the answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from cbcover.errors import CertificateError, UnreachableError, ValidationError
from cbcover.graph import (
    DistanceMap,
    Endpoints,
    NodeWeightedDigraph,
    OutTree,
    extract_out_tree,
    shortest_paths,
)
from cbcover.instances import SteinerInstance
from cbcover.lp import build_dst_lp, solve_or_raise

CERT_TOL = 1e-6
FLOAT_SLACK = 1e-9


@dataclass(frozen=True)
class Component:
    nodes: frozenset
    kind: str  # "terminal", "root" or "merged"

    def targets(self, core: frozenset) -> frozenset:
        """Nodes a spider leg may end at."""
        if self.kind == "terminal":
            return self.nodes
        return self.nodes & core


@dataclass
class ComponentSet:
    components: list
    arcs: set = field(default_factory=set)

    @classmethod
    def initial(cls, root: int, terminals) -> "ComponentSet":
        comps = [Component(frozenset({root}), "root")]
        comps += [Component(frozenset({t}), "terminal") for t in sorted(terminals)]
        return cls(comps)

    def __len__(self):
        return len(self.components)

    def covered(self) -> frozenset:
        return frozenset().union(*(c.nodes for c in self.components))


@dataclass(frozen=True)
class Spider:
    center: int
    members: tuple  # indices into ComponentSet.components
    paths: tuple  # one node path per member, center first
    ratio: object  # Fraction or float
    numerator: object = 0


def check_sink_structure(inst: SteinerInstance) -> frozenset:
    g = inst.graph
    core = g.bidirected_core
    if core is None:
        raise ValidationError("graph has no bidirected core")
    if inst.root not in core:
        raise ValidationError(f"root {inst.root} is not a core node")
    for t in inst.proper_terminals:
        if t in core:
            raise ValidationError(f"terminal {t} lies in the bidirected core")
        if g.succ(t):
            raise ValidationError(f"terminal {t} has outgoing arcs")
    return core


def _exact(g: NodeWeightedDigraph) -> bool:
    return all(float(c).is_integer() for c in g.cost.values())


def component_distance(v: int, comp: Component, g: NodeWeightedDigraph, dm: DistanceMap | None = None) -> tuple[float, int | None]:
    """Interior-cost distance from core node ``v`` to ``comp`` and the target reached.

    ``dm`` may carry a precomputed endpoint-excluding distance map from ``v``.
    """
    core = g.bidirected_core
    if core is None or v not in core:
        raise ValidationError(f"node {v} is not a core node")
    if v in comp.nodes:
        return 0.0, v
    if dm is None:
        dm = shortest_paths(g, v, Endpoints.EXCLUDE_ENDPOINTS)
    best, arg = math.inf, None
    for u in sorted(comp.targets(core)):
        d = dm.dist.get(u, math.inf)
        if d < best:
            best, arg = d, u
    return best, arg


def min_ratio_spider(cs: ComponentSet, g: NodeWeightedDigraph) -> Spider:
    """Best (center, closest-j components) pair by cost per component."""
    if len(cs) < 2:
        raise ValidationError("need at least two components")
    core = g.bidirected_core
    exact = _exact(g)
    best_key, best = None, None
    for v in sorted(core):
        dm = shortest_paths(g, v, Endpoints.EXCLUDE_ENDPOINTS)
        scored = []
        for i, comp in enumerate(cs.components):
            d, u = component_distance(v, comp, g, dm)
            if not math.isinf(d):
                scored.append((d, i, u))
        if len(scored) < 2:
            continue
        scored.sort()
        total = int(g.cost[v]) if exact else g.cost[v]
        for j, (d, _, _) in enumerate(scored, start=1):
            total += int(d) if exact else d
            if j < 2:
                continue
            ratio = Fraction(total, j) if exact else total / j
            key = (ratio, j, v)
            if best_key is None or _less(key, best_key, exact):
                best_key = key
                best = (v, scored[:j], dm, ratio, total)
    if best is None:
        raise UnreachableError(None, "no node reaches two components; the instance is disconnected")
    v, chosen, dm, ratio, total = best
    members, paths = [], []
    for d, i, u in sorted(chosen, key=lambda item: item[1]):
        members.append(i)
        paths.append(tuple(dm.path_to(u)) if u != v else (v,))
    return Spider(v, tuple(members), tuple(paths), ratio, total)


def _less(a, b, exact) -> bool:
    if exact:
        return a < b
    # float ratios within slack count as equal and fall through to the tie-breaks
    if a[0] < b[0] - FLOAT_SLACK:
        return True
    if a[0] > b[0] + FLOAT_SLACK:
        return False
    return a[1:] < b[1:]


def merge_components(cs: ComponentSet, spider: Spider, g: NodeWeightedDigraph) -> ComponentSet:
    """Fuse the spider's components and any component its legs pass through."""
    core = g.bidirected_core
    new_nodes = set()
    arcs = set(cs.arcs)
    for path in spider.paths:
        new_nodes.update(path)
        for a, b in zip(path, path[1:]):
            if a in core and b in core:
                arcs.add((a, b))
                arcs.add((b, a))
            else:
                arcs.add((a, b))
    fused = set(spider.members)
    for i, comp in enumerate(cs.components):
        if i not in fused and comp.nodes & new_nodes:
            fused.add(i)
    for i in fused:
        new_nodes |= cs.components[i].nodes
    rest = [c for i, c in enumerate(cs.components) if i not in fused]
    return ComponentSet(rest + [Component(frozenset(new_nodes), "merged")], arcs)


@dataclass
class BidirectedReport:
    iterations: list = field(default_factory=list)
    lp_opt: float | None = None
    cost: float = 0.0
    n_terminals: int = 0

    @property
    def certificate_ok(self) -> bool:
        return all(it["ratio"] <= it["bound"] + CERT_TOL for it in self.iterations if it.get("bound") is not None)

    def to_dict(self) -> dict:
        return {
            "lp_opt": self.lp_opt,
            "cost": self.cost,
            "n_terminals": self.n_terminals,
            "iterations": [dict(it) for it in self.iterations],
        }


def solve_dst_bidirected(
    inst: SteinerInstance, certify: bool = False, method: str = "highs"
) -> tuple[OutTree, BidirectedReport]:
    g, root = inst.graph, inst.root
    check_sink_structure(inst)
    terms = sorted(inst.proper_terminals)
    dm = shortest_paths(g, root)
    for t in terms:
        if not dm.reachable(t):
            raise UnreachableError(t)
    rep = BidirectedReport(n_terminals=len(terms))
    if certify and terms:
        rep.lp_opt = solve_or_raise(build_dst_lp(inst), method=method).objective
    cs = ComponentSet.initial(root, terms)
    while len(cs) > 1:
        sp = min_ratio_spider(cs, g)
        record = {
            "center": sp.center,
            "size": len(sp.members),
            "components": len(cs),
            "ratio": float(sp.ratio),
        }
        if rep.lp_opt is not None:
            record["bound"] = rep.lp_opt / len(cs)
            if record["ratio"] > record["bound"] + CERT_TOL:
                rep.iterations.append(record)
                raise CertificateError(
                    f"iteration {len(rep.iterations)}: ratio {record['ratio']} exceeds {record['bound']}"
                )
        rep.iterations.append(record)
        nxt = merge_components(cs, sp, g)
        assert len(nxt) < len(cs)
        cs = nxt
    last = cs.components[0].nodes
    pool = NodeWeightedDigraph({v: g.cost[v] for v in sorted(last)}, sorted(cs.arcs))
    tree = extract_out_tree(pool, root, terms)
    rep.cost = tree.total_cost
    return tree, rep
