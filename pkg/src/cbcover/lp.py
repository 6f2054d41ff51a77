"""Flow relaxations for budgeted coverage and node-weighted Steiner trees.

Both relaxations are written in compact arc-flow form: one commodity per
target node, conservation at intermediate nodes and node capacities
bounding each commodity's throughput. By flow decomposition this has the
same optimum as the path formulation (see ``oracles.path_lp_oracle``).

Variable keys are ``("cap", v)`` for capacities and ``("flow", k, (a, b))``
for the flow of commodity ``k`` on arc ``(a, b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import sparse
from scipy.optimize import linprog as _highs_linprog

from cbcover import simplex
from cbcover.errors import LpError, UnreachableError, ValidationError
from cbcover.graph import Endpoints, NodeWeightedDigraph, OutTree, shortest_paths
from cbcover.instances import AugmentedGraph, SteinerInstance

ROW_TOL = 1e-7
OBJ_TOL = 1e-6


@dataclass
class LpProblem:
    kind: str
    sense: str  # "max" or "min"
    keys: list
    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rows: sparse.csr_matrix
    row_sense: list  # "<=" or "="
    rhs: np.ndarray
    row_labels: list
    graph: NodeWeightedDigraph | None = None
    root: int | None = None
    commodities: dict = field(default_factory=dict)  # commodity -> list of arcs
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {k: i for i, k in enumerate(self.keys)}

    @property
    def n_vars(self) -> int:
        return len(self.keys)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]


class _RowBuilder:
    def __init__(self):
        self.data, self.ri, self.ci = [], [], []
        self.sense, self.rhs, self.labels = [], [], []

    def add(self, label, coefs: dict, sense: str, rhs: float):
        r = len(self.rhs)
        for j, a in coefs.items():
            if a != 0:
                self.ri.append(r)
                self.ci.append(j)
                self.data.append(a)
        self.sense.append(sense)
        self.rhs.append(rhs)
        self.labels.append(label)

    def matrix(self, n_vars):
        return sparse.csr_matrix(
            (self.data, (self.ri, self.ci)), shape=(len(self.rhs), n_vars), dtype=float
        )


def _commodity_arcs(g: NodeWeightedDigraph, root: int, k: int, from_root: set) -> list:
    """Arcs usable by commodity ``k``: off ``k``, not into the root, on some root->k walk."""
    to_k = g.reaching(k)
    return [
        (a, b)
        for (a, b) in sorted(g.arcs)
        if a != k and b != root and a in from_root and b in to_k
    ]


def _flow_lp(g, root, targets, capacity_nodes, demand, kind, sense, objective_of, extra_rows):
    """Shared skeleton of both relaxations.

    ``demand(k)`` is either a float (fixed inflow) or ``None`` meaning the
    inflow equals the commodity's own capacity variable.
    """
    from_root = g.reachable_from(root)
    keys = [("cap", v) for v in g.nodes]
    commodities = {}
    for k in targets:
        arcs = _commodity_arcs(g, root, k, from_root)
        commodities[k] = arcs
        keys.extend(("flow", k, a) for a in arcs)
    index = {key: i for i, key in enumerate(keys)}
    n = len(keys)
    lower = np.zeros(n)
    upper = np.ones(n)
    obj = np.zeros(n)
    for v in g.nodes:
        obj[index[("cap", v)]] = objective_of(v)
    lower[index[("cap", root)]] = 1.0

    rb = _RowBuilder()
    extra_rows(rb, index)
    for k, arcs in commodities.items():
        inflow: dict[int, list] = {}
        outflow: dict[int, list] = {}
        for a in arcs:
            j = index[("flow", k, a)]
            outflow.setdefault(a[0], []).append(j)
            inflow.setdefault(a[1], []).append(j)
        touched = sorted(set(inflow) | set(outflow))
        for z in touched:
            if z in (root, k):
                continue
            coefs = {j: 1.0 for j in inflow.get(z, ())}
            for j in outflow.get(z, ()):
                coefs[j] = coefs.get(j, 0.0) - 1.0
            rb.add(("conserve", k, z), coefs, "=", 0.0)
        d = demand(k)
        coefs = {j: 1.0 for j in inflow.get(k, ())}
        if d is None:
            coefs[index[("cap", k)]] = -1.0
            rb.add(("demand", k), coefs, "=", 0.0)
        else:
            rb.add(("demand", k), coefs, "=", d)
        for z in touched:
            if z == root or z not in capacity_nodes or (z == k and d is None):
                continue
            if not inflow.get(z):
                continue
            coefs = {j: 1.0 for j in inflow[z]}
            coefs[index[("cap", z)]] = -1.0
            rb.add(("capacity", k, z), coefs, "<=", 0.0)
    return LpProblem(
        kind=kind,
        sense=sense,
        keys=keys,
        objective=obj,
        lower=lower,
        upper=upper,
        rows=rb.matrix(n),
        row_sense=rb.sense,
        rhs=np.array(rb.rhs, dtype=float),
        row_labels=rb.labels,
        graph=g,
        root=root,
        commodities=commodities,
        index=index,
    )


def build_dcbc_lp(
    aug: AugmentedGraph, budget: float, forced: Iterable[int] = (), check_proper: bool = True
) -> LpProblem:
    """Budgeted coverage relaxation on an augmented, budget-proper graph.

    ``forced`` nodes get their capacity fixed to 1 (used for zero-cost nodes
    already bought in earlier set-cover iterations). ``check_proper=False``
    skips the budget-proper check, which only matters for the bound proofs.
    """
    g, root = aug.graph, aug.root
    dm = shortest_paths(g, root, Endpoints.INCLUDE_BOTH)
    slack = 1e-9 * max(1.0, abs(budget))
    for v in g.nodes if check_proper else ():
        # unreachable nodes carry no flow, so only reachable ones must be within budget
        if budget + slack < dm.dist[v] < math.inf and not math.isinf(budget):
            raise ValidationError(f"graph is not budget-proper: node {v} at distance {dm.dist[v]} > {budget}")
    targets = [v for v in g.nodes if v != root]

    def budget_row(rb, index):
        if math.isinf(budget):
            return
        rb.add(("budget",), {index[("cap", v)]: g.cost[v] for v in g.nodes}, "<=", float(budget))

    p = _flow_lp(
        g,
        root,
        targets,
        capacity_nodes=set(g.nodes),
        demand=lambda k: None,
        kind="dcbc",
        sense="max",
        objective_of=lambda v: aug.prize.get(v, 0.0),
        extra_rows=budget_row,
    )
    for v in forced:
        if v in g:
            p.lower[p.index[("cap", v)]] = 1.0
    return p


def build_dst_lp(inst: SteinerInstance) -> LpProblem:
    """Steiner tree relaxation: unit demand per terminal, minimise capacity cost."""
    g, root = inst.graph, inst.root
    reach = g.reachable_from(root)
    terminals = sorted(inst.proper_terminals)
    for t in terminals:
        if t not in reach:
            raise UnreachableError(t)
    return _flow_lp(
        g,
        root,
        terminals,
        capacity_nodes=set(g.nodes),
        demand=lambda k: 1.0,
        kind="dst",
        sense="min",
        objective_of=lambda v: g.cost[v],
        extra_rows=lambda rb, index: None,
    )


@dataclass
class FracSolution:
    problem: LpProblem = field(repr=False)
    values: np.ndarray = field(repr=False)
    objective: float
    status: str = "optimal"

    @property
    def capacity(self) -> dict:
        return {k[1]: float(self.values[i]) for i, k in enumerate(self.problem.keys) if k[0] == "cap"}

    @property
    def flow(self) -> dict:
        return {(k[1], k[2]): float(self.values[i]) for i, k in enumerate(self.problem.keys) if k[0] == "flow"}

    def commodity_flow(self, k) -> dict:
        idx = self.problem.index
        return {a: float(self.values[idx[("flow", k, a)]]) for a in self.problem.commodities.get(k, ())}

    @classmethod
    def from_values(cls, problem: LpProblem, values: dict, status="constructed") -> "FracSolution":
        x = np.zeros(problem.n_vars)
        for key, val in values.items():
            x[problem.index[key]] = val
        return cls(problem, x, float(problem.objective @ x), status)


def _clean(x, lower, upper):
    x = np.minimum(np.maximum(x, lower), upper)
    x[np.abs(x) < 1e-12] = 0.0
    return x


def solve_lp(p: LpProblem, tol: float = ROW_TOL, method: str = "highs") -> FracSolution:
    """Solve ``p``; ``method`` is ``"highs"`` (scipy) or ``"simplex"`` (embedded)."""
    n = p.n_vars
    if n == 0:
        return FracSolution(p, np.zeros(0), 0.0, "optimal")
    c = -p.objective if p.sense == "max" else p.objective
    ub_mask = np.array([s == "<=" for s in p.row_sense], dtype=bool)
    eq_mask = ~ub_mask
    A = p.rows
    if method == "highs":
        res = _highs_linprog(
            c,
            A_ub=A[ub_mask] if ub_mask.any() else None,
            b_ub=p.rhs[ub_mask] if ub_mask.any() else None,
            A_eq=A[eq_mask] if eq_mask.any() else None,
            b_eq=p.rhs[eq_mask] if eq_mask.any() else None,
            bounds=np.column_stack([p.lower, p.upper]),
            method="highs-ds",
            options={"primal_feasibility_tolerance": min(tol, 1e-9), "dual_feasibility_tolerance": 1e-9},
        )
        status = {0: "optimal", 1: "iteration_limit", 2: "infeasible", 3: "unbounded"}.get(res.status, "error")
        if status != "optimal":
            return FracSolution(p, np.full(n, np.nan), math.nan, status)
        x = np.asarray(res.x, dtype=float)
    elif method == "simplex":
        dense = A.toarray()
        res = simplex.linprog(
            c,
            A_ub=dense[ub_mask],
            b_ub=p.rhs[ub_mask],
            A_eq=dense[eq_mask],
            b_eq=p.rhs[eq_mask],
            lower=p.lower,
            upper=p.upper,
        )
        if res.status != simplex.OPTIMAL:
            return FracSolution(p, np.full(n, np.nan), math.nan, res.status)
        x = res.x
    else:
        raise ValueError(f"unknown LP method {method!r}")
    x = _clean(x, p.lower, p.upper)
    return FracSolution(p, x, float(p.objective @ x), "optimal")


def solve_or_raise(p: LpProblem, method: str = "highs") -> FracSolution:
    s = solve_lp(p, method=method)
    if s.status != "optimal":
        raise LpError(s.status)
    return s


@dataclass(frozen=True)
class RowViolation:
    label: tuple
    activity: float
    rhs: float
    excess: float


def check_lp_feasible(s: FracSolution, p: LpProblem | None = None, tol: float = ROW_TOL) -> list[RowViolation]:
    """Rows and bounds violated by more than ``tol``; an empty list means feasible."""
    p = p or s.problem
    x = s.values
    out = []
    if np.any(np.isnan(x)):
        return [RowViolation(("nan",), math.nan, math.nan, math.inf)]
    act = p.rows @ x
    for i, (sense, b) in enumerate(zip(p.row_sense, p.rhs)):
        excess = act[i] - b if sense == "<=" else abs(act[i] - b)
        if excess > tol:
            out.append(RowViolation(p.row_labels[i], float(act[i]), float(b), float(excess)))
    for i, key in enumerate(p.keys):
        if x[i] < p.lower[i] - tol:
            out.append(RowViolation(("lower",) + key[1:], float(x[i]), float(p.lower[i]), float(p.lower[i] - x[i])))
        if x[i] > p.upper[i] + tol:
            out.append(RowViolation(("upper",) + key[1:], float(x[i]), float(p.upper[i]), float(x[i] - p.upper[i])))
    recomputed = float(p.objective @ x)
    if abs(recomputed - s.objective) > OBJ_TOL * max(1.0, abs(recomputed)):
        out.append(RowViolation(("objective",), s.objective, recomputed, abs(recomputed - s.objective)))
    return out


def decompose_flow(arc_flow: dict, source: int, sink: int, tol: float = 1e-12) -> list[tuple[list[int], float]]:
    """Split a single-commodity arc flow into source->sink paths; cycles are dropped."""
    residual = {a: f for a, f in arc_flow.items() if f > tol}
    paths = []
    while True:
        out: dict[int, list] = {}
        for (a, b) in sorted(residual):
            out.setdefault(a, []).append(b)
        # DFS for a simple path over positive arcs
        parent = {source: None}
        stack = [source]
        while stack and sink not in parent:
            u = stack.pop()
            for v in reversed(out.get(u, ())):
                if v not in parent:
                    parent[v] = u
                    stack.append(v)
        if sink not in parent or source == sink:
            break
        path = [sink]
        while path[-1] != source:
            path.append(parent[path[-1]])
        path.reverse()
        amount = min(residual[(path[i], path[i + 1])] for i in range(len(path) - 1))
        for i in range(len(path) - 1):
            a = (path[i], path[i + 1])
            residual[a] -= amount
            if residual[a] <= tol:
                del residual[a]
        paths.append((path, amount))
    return paths


def tree_to_dcbc_solution(t: OutTree, p: LpProblem, sets: dict, element_node: dict) -> FracSolution:
    """Integral relaxation point for a budget-feasible tree of the base graph.

    Every tree node and every covered element node gets capacity 1 and one
    unit of flow along the tree path (elements through their smallest
    covering tree node).
    """
    if p.kind != "dcbc":
        raise ValueError("expected a budgeted coverage relaxation")
    g = p.graph
    if t.root != p.root:
        raise ValidationError(f"tree root {t.root} differs from LP root {p.root}")
    for v in t.nodes:
        if v not in g:
            raise ValidationError(f"tree node {v} is not in the relaxation's graph")
    budget_rows = [i for i, lab in enumerate(p.row_labels) if lab == ("budget",)]
    if budget_rows and t.total_cost > p.rhs[budget_rows[0]] + 1e-9 * max(1.0, t.total_cost):
        raise ValidationError(f"tree cost {t.total_cost} exceeds the budget {p.rhs[budget_rows[0]]}")
    values = {}
    for v in t.nodes:
        values[("cap", v)] = 1.0
        if v != t.root:
            path = t.path_from_root(v)
            for a in zip(path, path[1:]):
                values[("flow", v, a)] = 1.0
    coverer = {}
    for v in sorted(t.nodes):
        for x in sets.get(v, ()):
            coverer.setdefault(x, v)
    for x, v in coverer.items():
        w = element_node[x]
        values[("cap", w)] = 1.0
        path = t.path_from_root(v) + [w]
        for a in zip(path, path[1:]):
            values[("flow", w, a)] = 1.0
    return FracSolution.from_values(p, values)


def scale_dcbc_to_dst_solution(
    s: FracSolution, terminals: Iterable[int], delta: float, base_nodes: Iterable[int]
) -> tuple[LpProblem, FracSolution]:
    """Turn a coverage relaxation point into a Steiner relaxation point.

    Each terminal's commodity is decomposed into paths, scaled by
    ``1 / y_t`` and the capacity of a non-terminal becomes the largest
    scaled throughput over terminals. The result is feasible for the
    Steiner relaxation on ``base_nodes + terminals`` and costs at most
    ``delta`` times the coverage point's budget usage.
    """
    p = s.problem
    if p.kind != "dcbc":
        raise ValueError("expected a budgeted coverage relaxation")
    if delta < 1:
        raise ValueError(f"delta must be >= 1, got {delta}")
    terminals = sorted(set(terminals))
    y = s.capacity
    for t in terminals:
        if y[t] < 1.0 / delta - 1e-12:
            raise ValidationError(f"terminal {t} has capacity {y[t]} < 1/delta = {1.0 / delta}")
    from cbcover.graph import induced_subgraph

    keep = set(base_nodes) | set(terminals)
    sub = induced_subgraph(p.graph, keep)
    dst = build_dst_lp(SteinerInstance(sub, p.root, frozenset(terminals)))
    values = {("cap", p.root): 1.0}
    through: dict[int, float] = {}
    for t in terminals:
        flows = s.commodity_flow(t)
        paths = decompose_flow(flows, p.root, t)
        total = sum(a for _, a in paths)
        if total <= 0:
            raise ValidationError(f"terminal {t} carries no flow")
        # renormalise so the demand is met exactly after dropping cycles
        scale = 1.0 / total
        arc_vals: dict = {}
        node_through: dict[int, float] = {}
        for path, amount in paths:
            for a in zip(path, path[1:]):
                arc_vals[a] = arc_vals.get(a, 0.0) + amount * scale
            for v in path[1:]:
                node_through[v] = node_through.get(v, 0.0) + amount * scale
        for a, f in arc_vals.items():
            values[("flow", t, a)] = min(f, 1.0)
        for v, f in node_through.items():
            through[v] = max(through.get(v, 0.0), min(f, 1.0))
    for v, f in through.items():
        values[("cap", v)] = f
    for t in terminals:
        values[("cap", t)] = 1.0
    return dst, FracSolution.from_values(dst, values)


def _lp_name(key) -> str:
    if key[0] == "cap":
        return f"y_{key[1]}"
    _, k, (a, b) = key
    return f"f_{k}_{a}_{b}"


def _fmt(c: float) -> str:
    return repr(float(c)) if c != int(c) else str(int(c))


def write_lp_text(p: LpProblem) -> str:
    """CPLEX LP text rendering for debugging."""
    names = [_lp_name(k) for k in p.keys]

    def expr(pairs):
        parts = []
        for j, c in pairs:
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            parts.append(f"{sign} {names[j]}" if mag == 1 else f"{sign} {_fmt(mag)} {names[j]}")
        if not parts:
            return "0"
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else s

    lines = ["\\ kind: " + p.kind, "Maximize" if p.sense == "max" else "Minimize"]
    obj = [(j, c) for j, c in enumerate(p.objective) if c != 0]
    lines.append(" obj: " + expr(obj))
    lines.append("Subject To")
    A = p.rows.tocsr()
    for i in range(p.n_rows):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        pairs = sorted(zip(A.indices[lo:hi].tolist(), A.data[lo:hi].tolist()))
        label = "_".join(str(part).replace(" ", "").replace(",", "_").strip("()") for part in p.row_labels[i])
        op = "<=" if p.row_sense[i] == "<=" else "="
        lines.append(f" r{i}_{label}: {expr(pairs)} {op} {_fmt(p.rhs[i])}")
    lines.append("Bounds")
    for j, name in enumerate(names):
        lines.append(f" {_fmt(p.lower[j])} <= {name} <= {_fmt(p.upper[j])}")
    lines.append("End")
    return "\n".join(lines) + "\n"
