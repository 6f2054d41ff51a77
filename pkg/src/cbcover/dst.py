"""LP-rounding approximation for node-weighted directed Steiner tree.

Outline: solve the flow relaxation, keep the nodes U with capacity at least
1/sqrt(|V \\ R|), connect the terminals reachable inside U by a shortest
path tree, and reach the rest through a small hitting set of the
low-capacity entry nodes. Without a known bound on the largest root
distance the whole thing is repeated over a geometric ladder of optimum
guesses, each on the graph pruned to that distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from cbcover.errors import UnreachableError, ValidationError
from cbcover.graph import (
    NodeWeightedDigraph,
    OutTree,
    extract_out_tree,
    induced_subgraph,
    shortest_paths,
)
from cbcover.instances import SteinerInstance
from cbcover.lp import FracSolution, build_dst_lp, solve_or_raise

THRESHOLD_TOL = 1e-9
SUPPORT_TOL = 1e-9


def guess_opt_schedule(c_min: float, c_max: float, eps: float) -> list[float]:
    """Geometric guesses ``c_min * (1+eps)**i`` up to the first one >= ``c_max``."""
    if not (c_min > 0 and c_max > 0 and eps > 0):
        raise ValueError(f"guess ladder needs positive inputs, got {c_min}, {c_max}, {eps}")
    if c_min > c_max:
        raise ValueError(f"c_min {c_min} exceeds c_max {c_max}")
    out = [float(c_min)]
    # relative slack so that e.g. 1.1**k landing a hair under c_max still stops
    while out[-1] < c_max * (1 - 1e-12):
        out.append(c_min * (1 + eps) ** len(out))
    return out


@dataclass(frozen=True)
class TerminalSplit:
    U: frozenset
    cheap: frozenset
    expensive: frozenset
    threshold: float


def nonterminal_count(inst: SteinerInstance) -> int:
    return inst.graph.node_count - len(inst.proper_terminals)


def split_terminals(s: FracSolution, inst: SteinerInstance) -> TerminalSplit:
    """High-capacity nodes and the cheap/expensive terminal partition."""
    g, root = inst.graph, inst.root
    terms = inst.proper_terminals
    threshold = 1.0 / math.sqrt(max(nonterminal_count(inst), 1))
    x = s.capacity
    U = {v for v in g.nodes if x.get(v, 0.0) >= threshold - THRESHOLD_TOL}
    U |= {root} | set(terms)
    reach = g.reachable_from(root, within=U)
    cheap = frozenset(t for t in terms if t in reach)
    return TerminalSplit(frozenset(U), cheap, frozenset(terms) - cheap, threshold)


def candidate_sets(s: FracSolution, inst: SteinerInstance, split: TerminalSplit) -> dict[int, frozenset]:
    """For each expensive terminal, support nodes outside U that reach it through U."""
    g = inst.graph
    x = s.capacity
    support = {v for v in g.nodes if x.get(v, 0.0) > SUPPORT_TOL}
    outside = sorted(support - split.U)
    out = {}
    for t in sorted(split.expensive):
        inside = g.reaching(t, within=split.U)
        out[t] = frozenset(w for w in outside if any(v in inside for v in g.succ(w)))
    return out


def greedy_hitting_set(sets: Iterable[Iterable[int]], universe: Iterable[int] | None = None) -> frozenset:
    """Greedy: repeatedly take the element hitting most unhit sets (smallest id on ties)."""
    family = [frozenset(s) for s in sets]
    for i, s in enumerate(family):
        if not s:
            raise ValidationError(f"set {i} is empty and cannot be hit")
    if universe is not None:
        universe = set(universe)
        for i, s in enumerate(family):
            if not s <= universe:
                raise ValidationError(f"set {i} has elements {sorted(s - universe)} outside the universe")
    unhit = list(range(len(family)))
    chosen = set()
    while unhit:
        counts: dict[int, int] = {}
        for i in unhit:
            for e in family[i]:
                counts[e] = counts.get(e, 0) + 1
        best = min(counts, key=lambda e: (-counts[e], e))
        chosen.add(best)
        unhit = [i for i in unhit if best not in family[i]]
    return frozenset(chosen)


def hitting_set_bound(universe_size: int, min_set_size: int, n_sets: int) -> float:
    """(M / L) * ln N."""
    return universe_size / min_set_size * math.log(n_sets)


def dst_cost_bound(n_nonterminal: int, lp_opt: float, F: float, n_terminals: int) -> float:
    """sqrt(|V \\ R|) * (2 LP + F (ln |R| + 1)), with |V \\ R| and |R| clamped."""
    return math.sqrt(max(n_nonterminal, 1)) * (2 * lp_opt + F * (math.log(max(n_terminals, 2)) + 1))


@dataclass
class DstReport:
    lp_opt: float = 0.0
    F: float = 0.0
    threshold: float = 1.0
    n_nonterminal: int = 0
    n_terminals: int = 0
    u_size: int = 0
    cheap: int = 0
    expensive: int = 0
    cheap_tree_cost: float = 0.0
    hitting_set_size: int = 0
    candidate_sizes: dict = field(default_factory=dict)
    guess: float | None = None
    guesses_tried: int = 0
    diagnostics: list = field(default_factory=list)
    cost: float = 0.0

    @property
    def min_candidate_size(self) -> int | None:
        return min(self.candidate_sizes.values()) if self.candidate_sizes else None

    @property
    def bound(self) -> float:
        return dst_cost_bound(self.n_nonterminal, self.lp_opt, self.F, self.n_terminals)

    def to_dict(self) -> dict:
        return {
            "lp_opt": self.lp_opt,
            "F": self.F,
            "threshold": self.threshold,
            "n_nonterminal": self.n_nonterminal,
            "n_terminals": self.n_terminals,
            "u_size": self.u_size,
            "cheap": self.cheap,
            "expensive": self.expensive,
            "cheap_tree_cost": self.cheap_tree_cost,
            "hitting_set_size": self.hitting_set_size,
            "min_candidate_size": self.min_candidate_size,
            "guess": self.guess,
            "guesses_tried": self.guesses_tried,
            "diagnostics": list(self.diagnostics),
            "cost": self.cost,
        }


def _max_root_distance(g: NodeWeightedDigraph, root: int) -> float:
    dm = shortest_paths(g, root)
    return max(d for d in dm.dist.values() if not math.isinf(d))


def _round_once(inst: SteinerInstance, method: str) -> tuple[OutTree, DstReport]:
    g, root = inst.graph, inst.root
    terms = sorted(inst.proper_terminals)
    rep = DstReport(
        n_nonterminal=nonterminal_count(inst),
        n_terminals=len(terms),
        F=_max_root_distance(g, root),
    )
    if not terms:
        t = OutTree.single(g, root)
        rep.cost = t.total_cost
        return t, rep
    s = solve_or_raise(build_dst_lp(inst), method=method)
    rep.lp_opt = s.objective
    split = split_terminals(s, inst)
    rep.threshold = split.threshold
    rep.u_size = len(split.U)
    rep.cheap, rep.expensive = len(split.cheap), len(split.expensive)

    keep = set()
    gU = induced_subgraph(g, split.U)
    if split.cheap:
        cheap_tree = extract_out_tree(gU, root, split.cheap)
        rep.cheap_tree_cost = cheap_tree.total_cost
        keep |= cheap_tree.nodes
    else:
        keep.add(root)

    if split.expensive:
        X = candidate_sets(s, inst, split)
        rep.candidate_sizes = {t: len(ws) for t, ws in X.items()}
        hittable = {t: ws for t, ws in X.items() if ws}
        for t in sorted(set(X) - set(hittable)):
            # finite-precision LP can leave an expensive terminal without entry nodes
            rep.diagnostics.append(f"terminal {t}: empty candidate set; connected by a shortest path")
        hit = greedy_hitting_set(hittable.values()) if hittable else frozenset()
        rep.hitting_set_size = len(hit)
        from_root = shortest_paths(g, root)
        for w in sorted(hit):
            keep.update(from_root.path_to(w))
        from_w = {w: shortest_paths(induced_subgraph(g, split.U | {w}), w) for w in sorted(hit)}
        for t in sorted(split.expensive):
            if t not in hittable:
                keep.update(from_root.path_to(t))
                continue
            options = sorted(hit & hittable[t], key=lambda w: (from_w[w].dist[t], w))
            keep.update(from_w[options[0]].path_to(t))

    tree = extract_out_tree(induced_subgraph(g, keep), root, terms)
    rep.cost = tree.total_cost
    return tree, rep


def solve_dst(
    inst: SteinerInstance, eps: float = 1.0, f_cap: float | None = None, method: str = "highs"
) -> tuple[OutTree, DstReport]:
    """Approximate minimum-cost out-tree from the root spanning all terminals.

    With ``f_cap`` the caller vouches that every node is within that
    distance of the root, and the optimum-guessing loop is skipped.
    """
    g, root = inst.graph, inst.root
    terms = sorted(inst.proper_terminals)
    dm = shortest_paths(g, root)
    for t in terms:
        if not dm.reachable(t):
            raise UnreachableError(t)
    if f_cap is not None:
        tree, rep = _round_once(inst, method)
        rep.guesses_tried = 1
        return tree, rep

    positive = [c for c in g.cost.values() if c > 0]
    if not positive:
        tree, rep = _round_once(inst, method)
        rep.guesses_tried = 1
        return tree, rep
    ladder = guess_opt_schedule(min(positive), math.fsum(positive), eps)
    best = None
    tried: dict[frozenset, tuple[OutTree, DstReport]] = {}
    for guess in ladder:
        keep = frozenset(v for v in g.nodes if dm.dist[v] <= guess)
        if any(t not in keep for t in terms):
            continue
        if keep not in tried:
            sub = g if len(keep) == g.node_count else induced_subgraph(g, keep)
            tried[keep] = _round_once(SteinerInstance(sub, root, inst.terminals & keep), method)
            tried[keep][1].guess = guess
        tree, rep = tried[keep]
        if best is None or tree.total_cost < best[0].total_cost:
            best = (tree, rep)
    assert best is not None  # the last guess keeps every reachable node
    best[1].guesses_tried = len(tried)
    return best
