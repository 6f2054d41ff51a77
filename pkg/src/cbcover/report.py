"""Result records returned by the solvers and written by the CLI."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from cbcover.graph import OutTree


def _num(x):
    """JSON-friendly number: ints stay ints, inf/nan become strings."""
    if x is None:
        return None
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return str(x)
        if x.is_integer() and abs(x) < 2**53:
            return int(x)
    return x


@dataclass
class RunReport:
    kind: str
    tree: OutTree
    cost: float
    prize: float
    covered: list
    budget: float | None = None
    epsilon: float | None = None
    lp_opt: float | None = None
    branch: object = None
    retained_mass: float | None = None
    n_buckets: int | None = None
    candidates: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def budget_violation(self) -> float | None:
        if self.budget is None:
            return None
        if self.budget == 0:
            return 0.0 if self.cost == 0 else math.inf
        return self.cost / self.budget

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "kind": self.kind,
            "tree": {
                "root": self.tree.root,
                "nodes": sorted(self.tree.nodes),
                "arcs": [list(a) for a in sorted(self.tree.arcs)],
            },
            "cost": _num(self.cost),
            "prize": _num(self.prize),
            "covered": list(self.covered),
            "budget": _num(self.budget),
            "epsilon": _num(self.epsilon),
            "budget_violation": _num(self.budget_violation),
            "lp_opt": _num(self.lp_opt),
            "branch": self.branch,
            "retained_mass": _num(self.retained_mass),
            "n_buckets": self.n_buckets,
            "candidates": [{k: _num(v) if isinstance(v, float) else v for k, v in c.items()} for c in self.candidates],
        }
        for k, v in sorted(self.extra.items()):
            out[k] = v
        if timings:
            out["timings"] = {k: v for k, v in sorted(self.timings.items())}
        return out
