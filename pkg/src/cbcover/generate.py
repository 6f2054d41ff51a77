"""Seeded random instances.

Every node is reachable from the root by construction: node i > 0 gets a
backbone arc from a random earlier node, then every other ordered pair
is added with probability ``density``. All randomness comes from one
``random.Random(seed)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from cbcover.formats import KINDS, InstanceFile, instance_from_dict

B_POLICIES = ("fraction", "oracle")


@dataclass(frozen=True)
class GenParams:
    n: int = 8
    n_elements: int = 6
    density: float = 0.2
    cost_range: tuple = (0, 5)
    prize_range: tuple = (1, 5)
    budget_policy: str = "fraction"
    budget_fraction: float = 0.3
    n_terminals: int = 3
    n_groups: int = 3
    cover_prob: float = 0.3
    directed: bool = True  # csc and gst only

    def check(self, kind: str):
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= self.density <= 1:
            raise ValueError("density must be in [0, 1]")
        if self.cost_range[0] < 0 or self.cost_range[0] > self.cost_range[1]:
            raise ValueError(f"bad cost range {self.cost_range}")
        if self.prize_range[0] < 0 or self.prize_range[0] > self.prize_range[1]:
            raise ValueError(f"bad prize range {self.prize_range}")
        if kind in ("dst", "dst-bidirected") and self.n_terminals < 1:
            raise ValueError("Steiner kinds need at least one terminal")
        if kind == "dst-bidirected" and self.n < 2:
            raise ValueError("dst-bidirected needs n >= 2 (root plus a sink terminal)")
        if self.budget_policy not in B_POLICIES:
            raise ValueError(f"budget policy must be one of {B_POLICIES}")


def _backbone_graph(rng: random.Random, n: int, density: float, undirected: bool) -> list[list[int]]:
    arcs = set()
    for v in range(1, n):
        u = rng.randrange(v)
        arcs.add((u, v))
        if undirected:
            arcs.add((v, u))
    for u in range(n):
        for v in range(n):
            if u != v and (u, v) not in arcs and rng.random() < density:
                arcs.add((u, v))
                if undirected:
                    arcs.add((v, u))
    if undirected:
        return [[u, v] for (u, v) in sorted(arcs) if u < v]
    return [list(a) for a in sorted(arcs)]


def generate_dict(kind: str, params: GenParams, seed: int) -> dict:
    params.check(kind)
    rng = random.Random(seed)
    lo, hi = params.cost_range
    n = params.n
    out = {"format_version": 1, "kind": kind, "root": 0}

    if kind == "dst-bidirected":
        n_terms = min(params.n_terminals, max(n - 1, 0))
        n_core = n - n_terms
        edges = _backbone_graph(rng, n_core, params.density, undirected=True)
        cost = [rng.randint(lo, hi) for _ in range(n)]
        terms = list(range(n_core, n))
        for t in terms:
            k = 1 + (rng.random() < 0.5)
            for u in sorted(rng.sample(range(n_core), min(k, n_core))):
                edges.append([u, t])
        out.update(directed=True, nodes=[{"id": v, "cost": cost[v]} for v in range(n)], arcs=edges, terminals=terms)
        return out

    undirected = kind == "ucbc" or (kind in ("csc", "gst") and not params.directed)
    arcs = _backbone_graph(rng, n, params.density, undirected)
    cost = [rng.randint(lo, hi) for _ in range(n)]
    out["directed"] = not undirected
    if kind in ("dcbc", "ucbc", "csc"):
        elems = [f"x{i}" for i in range(params.n_elements)]
        plo, phi = params.prize_range
        prizes = {x: rng.randint(plo, phi) for x in elems}
        sets = {v: [] for v in range(n)}
        for x in elems:
            for v in range(n):
                if rng.random() < params.cover_prob:
                    sets[v].append(x)
            if not any(x in s for s in sets.values()):
                sets[rng.randrange(n)].append(x)
        out["nodes"] = [{"id": v, "cost": cost[v], "elements": sets[v]} for v in range(n)]
        out["arcs"] = arcs
        out["elements"] = [{"id": x, "prize": prizes[x] if kind != "csc" else 1} for x in elems]
        if kind != "csc":
            total = sum(cost)
            if params.budget_policy == "fraction":
                budget = max(cost[0], round(params.budget_fraction * total))
            else:
                budget = _oracle_budget(out, rng, cost)
            out["budget"] = budget
        return out

    out["nodes"] = [{"id": v, "cost": cost[v]} for v in range(n)]
    out["arcs"] = arcs
    if kind == "dst":
        k = min(params.n_terminals, max(n - 1, 1))
        out["terminals"] = sorted(rng.sample(range(1, n), k)) if n > 1 else [0]
    else:
        groups = []
        for _ in range(params.n_groups):
            size = rng.randint(1, max(1, min(3, n)))
            groups.append(sorted(rng.sample(range(n), size)))
        out["groups"] = groups
    return out


def _oracle_budget(data: dict, rng: random.Random, cost: list) -> float:
    """Exact cheapest cost of covering a random half of the elements (small n only)."""
    from cbcover.oracles import brute_force_csc

    probe = dict(data, kind="csc", elements=[dict(e) for e in data["elements"]])
    elems = [e["id"] for e in probe["elements"]]
    keep = set(rng.sample(elems, max(1, len(elems) // 2))) if elems else set()
    probe["elements"] = [e for e in probe["elements"] if e["id"] in keep]
    probe["nodes"] = [dict(nd, elements=[x for x in nd["elements"] if x in keep]) for nd in data["nodes"]]
    f = instance_from_dict(probe, "budget probe")
    _, c = brute_force_csc(f.instance)
    return int(c) if float(c).is_integer() else c


def generate_instance(kind: str, params: GenParams | None = None, seed: int = 0) -> InstanceFile:
    return instance_from_dict(generate_dict(kind, params or GenParams(), seed), f"generated[{kind}, seed={seed}]")
