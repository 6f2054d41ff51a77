"""JSON instance and solution files.

Instance files carry ``format_version`` 1 and a ``kind`` among dcbc, ucbc,
dst, dst-bidirected, csc and gst. Undirected kinds list each edge once.
For dst-bidirected an arc between two non-terminals is an edge of the
bidirected core and an arc into a terminal is one-way.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from cbcover.errors import ValidationError
from cbcover.graph import NodeWeightedDigraph, OutTree, validate_out_tree
from cbcover.instances import CoverageInstance, GroupInstance, SteinerInstance, element_sort_key

FORMAT_VERSION = 1
KINDS = ("dcbc", "ucbc", "dst", "dst-bidirected", "csc", "gst")
UNDIRECTED_KINDS = ("ucbc",)


@dataclass(frozen=True)
class InstanceFile:
    kind: str
    instance: object  # CoverageInstance, SteinerInstance or GroupInstance

    @property
    def directed(self) -> bool:
        inst = self.instance
        if isinstance(inst, SteinerInstance):
            return True
        return inst.directed


def _num(x):
    if isinstance(x, float) and x.is_integer() and abs(x) < 2**53:
        return int(x)
    return x


def _field(obj, key, where, kinds=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ValidationError(f"{where}: missing field {key!r}")
    v = obj[key]
    if kinds is not None and (not isinstance(v, kinds) or isinstance(v, bool) and bool not in kinds):
        raise ValidationError(f"{where}.{key}: expected {_kind_names(kinds)}, got {type(v).__name__}")
    return v


def _kind_names(kinds) -> str:
    kinds = kinds if isinstance(kinds, tuple) else (kinds,)
    return " or ".join(k.__name__ for k in kinds)


def _number(v, where) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{where}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ValidationError(f"{where}: must be finite, got {v!r}")
    return float(v)


def loads_instance(text: str, source: str = "<string>") -> InstanceFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{source}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from None
    return instance_from_dict(data, source)


def parse_instance(path) -> InstanceFile:
    p = Path(path)
    return loads_instance(p.read_text(), str(p))


def instance_from_dict(data: dict, source: str = "instance") -> InstanceFile:
    if not isinstance(data, dict):
        raise ValidationError(f"{source}: top level must be an object")
    version = _field(data, "format_version", source, int)
    if version != FORMAT_VERSION:
        raise ValidationError(f"{source}.format_version: unsupported version {version}, expected {FORMAT_VERSION}")
    kind = _field(data, "kind", source, str)
    if kind not in KINDS:
        raise ValidationError(f"{source}.kind: unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    directed = data.get("directed", kind not in UNDIRECTED_KINDS)
    if not isinstance(directed, bool):
        raise ValidationError(f"{source}.directed: expected a boolean")
    if kind == "ucbc" and directed:
        raise ValidationError(f"{source}.directed: ucbc instances are undirected")
    if kind in ("dcbc", "dst", "dst-bidirected") and not directed:
        raise ValidationError(f"{source}.directed: {kind} instances are directed")

    elements = {}
    for i, e in enumerate(data.get("elements", [])):
        where = f"{source}.elements[{i}]"
        x = _field(e, "id", where, (int, str))
        if x in elements:
            raise ValidationError(f"{where}.id: duplicate element id {x!r}")
        elements[x] = _number(e.get("prize", 1), f"{where}.prize")

    cost, sets = {}, {}
    for i, nd in enumerate(_field(data, "nodes", source, list)):
        where = f"{source}.nodes[{i}]"
        v = _field(nd, "id", where, int)
        if v in cost:
            raise ValidationError(f"{where}.id: duplicate node id {v}")
        cost[v] = _number(_field(nd, "cost", where), f"{where}.cost")
        covered = nd.get("elements", [])
        if not isinstance(covered, list):
            raise ValidationError(f"{where}.elements: expected a list")
        for j, x in enumerate(covered):
            if x not in elements:
                raise ValidationError(f"{where}.elements[{j}]: unknown element id {x!r}")
        sets[v] = frozenset(covered)

    root = _field(data, "root", source, int)
    if root not in cost:
        raise ValidationError(f"{source}.root: unknown node id {root}")

    terminals = None
    if kind in ("dst", "dst-bidirected"):
        terminals = []
        for j, t in enumerate(_field(data, "terminals", source, list)):
            if t not in cost:
                raise ValidationError(f"{source}.terminals[{j}]: unknown node id {t!r}")
            terminals.append(t)
        if not terminals:
            raise ValidationError(f"{source}.terminals: at least one terminal is required")
        if len(set(terminals)) != len(terminals):
            raise ValidationError(f"{source}.terminals: duplicate terminal ids")

    raw_arcs = _field(data, "arcs", source, list)
    arcs = []
    for j, a in enumerate(raw_arcs):
        where = f"{source}.arcs[{j}]"
        if not isinstance(a, list) or len(a) != 2 or not all(isinstance(z, int) and not isinstance(z, bool) for z in a):
            raise ValidationError(f"{where}: expected a pair of node ids")
        for z in a:
            if z not in cost:
                raise ValidationError(f"{where}: unknown node id {z}")
        arcs.append(tuple(a))
    core = None
    if kind == "dst-bidirected":
        tset = set(terminals) - {root}
        core = frozenset(v for v in cost if v not in tset)
        full = []
        for j, (u, v) in enumerate(arcs):
            if u in tset:
                raise ValidationError(f"{source}.arcs[{j}]: terminal {u} cannot have outgoing arcs")
            full.append((u, v))
            if v not in tset:
                full.append((v, u))
        arcs = full
    elif not directed:
        arcs = arcs + [(v, u) for (u, v) in arcs]
    try:
        g = NodeWeightedDigraph(cost, arcs, core)
    except ValidationError as e:
        raise ValidationError(f"{source}.arcs: {e}") from None

    if kind in ("dcbc", "ucbc"):
        budget = _number(_field(data, "budget", source), f"{source}.budget")
        inst = CoverageInstance(g, root, elements, sets, budget, directed)
    elif kind == "csc":
        inst = CoverageInstance(g, root, elements, sets, None, directed)
    elif kind in ("dst", "dst-bidirected"):
        inst = SteinerInstance(g, root, frozenset(terminals))
    else:
        groups = []
        for j, gr in enumerate(_field(data, "groups", source, list)):
            if not isinstance(gr, list) or not gr:
                raise ValidationError(f"{source}.groups[{j}]: expected a nonempty list of node ids")
            for z in gr:
                if z not in cost:
                    raise ValidationError(f"{source}.groups[{j}]: unknown node id {z!r}")
            groups.append(frozenset(gr))
        inst = GroupInstance(g, root, tuple(groups), directed)
    return InstanceFile(kind, inst)


def instance_to_dict(f: InstanceFile) -> dict:
    inst, kind = f.instance, f.kind
    g = inst.graph
    sets = getattr(inst, "sets", {})
    nodes = []
    for v in g.nodes:
        entry = {"id": v, "cost": _num(g.cost[v])}
        if kind in ("dcbc", "ucbc", "csc"):
            entry["elements"] = sorted(sets.get(v, ()), key=element_sort_key)
        nodes.append(entry)
    if kind == "dst-bidirected":
        arcs = [[u, v] for (u, v) in sorted(g.arcs) if not (g.has_arc(v, u) and v < u)]
    elif not f.directed:
        arcs = [[u, v] for (u, v) in sorted(g.arcs) if u < v]
    else:
        arcs = [[u, v] for (u, v) in sorted(g.arcs)]
    out = {"format_version": FORMAT_VERSION, "kind": kind, "directed": f.directed, "root": inst.root, "nodes": nodes, "arcs": arcs}
    if kind in ("dcbc", "ucbc", "csc"):
        out["elements"] = [{"id": x, "prize": _num(inst.prizes[x])} for x in inst.elements]
    if kind in ("dcbc", "ucbc"):
        out["budget"] = _num(inst.budget)
    if kind in ("dst", "dst-bidirected"):
        out["terminals"] = sorted(inst.terminals)
    if kind == "gst":
        out["groups"] = [sorted(gr) for gr in inst.groups]
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def write_instance(f: InstanceFile, path):
    Path(path).write_text(dumps(instance_to_dict(f)))


def instance_digest(f: InstanceFile) -> str:
    canon = json.dumps(instance_to_dict(f), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def solution_dict(f: InstanceFile, tree: OutTree, body: dict) -> dict:
    out = {"format_version": FORMAT_VERSION, "instance_digest": instance_digest(f), "kind": f.kind}
    out.update(body)
    out["tree"] = {"root": tree.root, "nodes": sorted(tree.nodes), "arcs": [list(a) for a in sorted(tree.arcs)]}
    return out


def write_solution(f: InstanceFile, tree: OutTree, body: dict, path=None) -> str:
    text = dumps(solution_dict(f, tree, body))
    if path is not None:
        Path(path).write_text(text)
    return text


def verify_solution(f: InstanceFile, sol: dict) -> list[str]:
    """Problems found by recomputing everything from the instance alone."""
    problems = []
    if not isinstance(sol, dict):
        return ["solution must be a JSON object"]
    if sol.get("instance_digest") != instance_digest(f):
        problems.append("instance_digest does not match the instance")
    tr = sol.get("tree")
    try:
        nodes = frozenset(tr["nodes"])
        arcs = frozenset(tuple(a) for a in tr["arcs"])
        root = tr["root"]
    except (TypeError, KeyError):
        return problems + ["tree: expected root, nodes and arcs"]
    inst = f.instance
    g = inst.graph
    bad = [v for v in nodes if v not in g]
    if bad:
        return problems + [f"tree: unknown nodes {sorted(bad)}"]
    cost = g.node_set_cost(nodes)
    tree = OutTree(root, nodes, arcs, cost)
    problems += validate_out_tree(tree, g, inst.root)
    if sol.get("cost") != _num(cost):
        problems.append(f"cost: reported {sol.get('cost')}, recomputed {_num(cost)}")
    if f.kind in ("dcbc", "ucbc", "csc"):
        covered = sorted(inst.covered(nodes), key=element_sort_key)
        if "covered" in sol and sol["covered"] != covered:
            problems.append(f"covered: reported {sol['covered']}, recomputed {covered}")
    if f.kind in ("dcbc", "ucbc"):
        prize = inst.prize_of(nodes)
        if sol.get("prize") != _num(prize):
            problems.append(f"prize: reported {sol.get('prize')}, recomputed {_num(prize)}")
        eps = sol.get("epsilon")
        if isinstance(eps, (int, float)) and cost > (1 + eps) * inst.budget:
            problems.append(f"cost {cost} exceeds (1 + {eps}) * budget {inst.budget}")
    elif f.kind == "csc":
        left = set(inst.prizes) - inst.covered(nodes)
        if left:
            problems.append(f"elements {sorted(left, key=element_sort_key)} are not covered")
    elif f.kind in ("dst", "dst-bidirected"):
        left = inst.terminals - nodes
        if left:
            problems.append(f"terminals {sorted(left)} are not spanned")
    elif f.kind == "gst":
        missed = [i for i, gr in enumerate(inst.groups) if not gr & nodes]
        if missed:
            problems.append(f"groups {missed} are not touched")
    return problems
