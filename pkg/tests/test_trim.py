import random
from fractions import Fraction
from itertools import combinations

import pytest

from cbcover.graph import NodeWeightedDigraph, OutTree, extract_out_tree, shortest_paths, validate_out_tree
from cbcover.trimming import peel, ratio_at_least, trim_tree


def tree_graph(parent, cost):
    g = NodeWeightedDigraph(cost, [(p, v) for v, p in parent.items()])
    return g, extract_out_tree(g, 0, list(cost))


def node_prize(weights):
    return lambda nodes: sum(weights.get(v, 0) for v in nodes)


def contract_holds(t, out, eps, B, prize):
    c_t, c_hat = t.total_cost, out.total_cost
    if c_t <= (1 + eps) * B:
        return out == t
    return (
        Fraction(eps) * Fraction(B) / 2 <= c_hat <= (1 + eps) * Fraction(B)
        and ratio_at_least(prize(out.nodes), c_hat, eps, prize(t.nodes), c_t)
    )


def test_within_budget_is_unchanged():
    g, t = tree_graph({1: 0, 2: 1}, {0: 0, 1: 2, 2: 2})
    assert trim_tree(t, 1.0, 4, g, 0, node_prize({2: 1})) is t


def test_long_unit_path():
    # root plus 16 unit nodes in a row; the graph adds root shortcuts so it is budget-proper
    n, B = 16, 4
    cost = {v: (0 if v == 0 else 1) for v in range(n + 1)}
    g = NodeWeightedDigraph(cost, [(v, v + 1) for v in range(n)] + [(0, v) for v in range(2, n + 1)])
    t = extract_out_tree(NodeWeightedDigraph(cost, [(v, v + 1) for v in range(n)]), 0, list(cost))
    assert t.total_cost == 4 * B
    prize = node_prize({v: v % 3 for v in cost})
    out = trim_tree(t, 1.0, B, g, 0, prize)
    assert B / 2 <= out.total_cost <= 2 * B
    gamma = Fraction(prize(t.nodes), int(t.total_cost))
    assert Fraction(prize(out.nodes), int(out.total_cost)) >= gamma / 4
    # the best single segment joined to the root bounds what any cut can keep
    best = max(prize(set(range(i, j + 1)) | {0}) for i, j in combinations(range(1, n + 1), 2) if j - i + 1 <= 2 * B)
    assert prize(out.nodes) <= best


def test_heavy_branch_survives():
    # two branches of four unit nodes; only the second carries prize
    parent = {1: 0, 2: 1, 3: 2, 4: 3, 5: 0, 6: 5, 7: 6, 8: 7}
    cost = {0: 0, **{v: 1 for v in parent}}
    g, t = tree_graph(parent, cost)
    out = trim_tree(t, 0.5, 4, g, 0, node_prize({6: 3, 7: 3, 8: 3}))
    assert {6, 7, 8} & out.nodes
    assert not {2, 3, 4} & out.nodes


def test_peel_pieces_cover_the_tree():
    parent = {1: 0, 2: 0, 3: 1, 4: 1, 5: 2}
    cost = {0: 0, 1: 1, 2: 2, 3: 1, 4: 1, 5: 2}
    g, t = tree_graph(parent, cost)
    pieces, base = peel(t, g, 2)
    parts = [p.nodes for p in pieces] + [base]
    assert sorted(v for s in parts for v in s) == sorted(t.nodes)
    assert all(g.node_set_cost(p.nodes) >= 2 for p in pieces)
    assert g.node_set_cost(base) < 2


def random_case(rng):
    n = rng.randint(2, 16)
    parent = {v: rng.randrange(v) for v in range(1, n)}
    cost = {v: rng.randint(0, 6) for v in range(n)}
    cost[0] = rng.randint(0, 1)
    g, t = tree_graph(parent, cost)
    dm = shortest_paths(g, 0)
    B = max(dm.dist.values())
    weights = {v: rng.randint(0, 9) for v in range(n)}
    eps = rng.choice((0.25, 0.5, 1.0))
    return g, t, B, eps, node_prize(weights)


@pytest.mark.parametrize("seed", range(150))
def test_random_trees_meet_the_contract(seed):
    g, t, B, eps, prize = random_case(random.Random(seed))
    out = trim_tree(t, eps, B, g, 0, prize)
    assert validate_out_tree(out, g, 0) == []
    assert contract_holds(t, out, eps, B, prize)


def test_rejects_wrong_root_and_bad_eps():
    g, t = tree_graph({1: 0}, {0: 0, 1: 1})
    with pytest.raises(ValueError):
        trim_tree(t, 0, 1, g, 0, node_prize({}))
    with pytest.raises(Exception):
        trim_tree(OutTree(1, frozenset({1}), frozenset(), 1.0), 1.0, 1, g, 0, node_prize({}))
