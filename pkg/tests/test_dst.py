import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbcover.dst import (
    candidate_sets,
    greedy_hitting_set,
    guess_opt_schedule,
    hitting_set_bound,
    split_terminals,
    solve_dst,
)
from cbcover.errors import UnreachableError, ValidationError
from cbcover.formats import parse_instance
from cbcover.graph import NodeWeightedDigraph, validate_out_tree
from cbcover.instances import SteinerInstance
from cbcover.lp import FracSolution, build_dst_lp, solve_lp
from cbcover.oracles import brute_force_dst
from families import dst_instance

FANS = Path(__file__).parent / "fixtures" / "dst"


def test_guess_ladder():
    assert guess_opt_schedule(1, 8, 1) == [1, 2, 4, 8]
    assert guess_opt_schedule(1, 10, 1) == [1, 2, 4, 8, 16]
    assert guess_opt_schedule(3, 3, 1) == [3]
    with pytest.raises(ValueError):
        guess_opt_schedule(0, 3, 1)


def test_greedy_hitting_set():
    assert greedy_hitting_set([{1, 2}, {2, 3}, {3, 4}]) == {2, 3}
    assert greedy_hitting_set([{1}, {2}, {3}]) == {1, 2, 3}
    assert greedy_hitting_set([{4, 5}, {4, 5}]) == {4}
    assert greedy_hitting_set([]) == frozenset()
    with pytest.raises(ValidationError):
        greedy_hitting_set([{1}, set()])
    with pytest.raises(ValidationError):
        greedy_hitting_set([{1, 9}], universe={1, 2})


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12).flatmap(lambda m: st.lists(
    st.sets(st.integers(0, m - 1), min_size=1), min_size=1, max_size=15)))
def test_greedy_size_within_harmonic_bound(sets):
    # |H| <= (M / L) * (1 + ln N) holds for greedy on every family
    m = len(set().union(*sets))
    low = min(len(s) for s in sets)
    h = greedy_hitting_set(sets)
    assert all(h & s for s in sets)
    assert len(h) <= m / low * (1 + math.log(len(sets))) + 1e-9


def test_hitting_set_bound_formula():
    assert hitting_set_bound(10, 2, 4) == pytest.approx(5 * math.log(4))
    assert hitting_set_bound(3, 3, 1) == 0  # one set still needs one element


def two_relays():
    g = NodeWeightedDigraph({0: 0, 1: 1, 2: 1, 3: 0}, [(0, 1), (0, 2), (1, 3), (2, 3)])
    return SteinerInstance(g, 0, frozenset({3}))


def test_split_with_integral_solution_has_no_expensive():
    inst = two_relays()
    s = solve_lp(build_dst_lp(inst))
    split = split_terminals(s, inst)
    assert split.expensive == frozenset()
    assert split.threshold == pytest.approx(1 / math.sqrt(3))


def test_split_with_half_bottlenecks():
    inst = two_relays()
    p = build_dst_lp(inst)
    s = FracSolution.from_values(p, {("cap", 0): 1, ("cap", 1): .5, ("cap", 2): .5, ("cap", 3): 1,
                                     ("flow", 3, (0, 1)): .5, ("flow", 3, (1, 3)): .5,
                                     ("flow", 3, (0, 2)): .5, ("flow", 3, (2, 3)): .5})
    split = split_terminals(s, inst)
    assert split.expensive == {3}
    # 1/2 is below 1/sqrt(3), so both relays are candidates
    assert candidate_sets(s, inst, split) == {3: frozenset({1, 2})}


def test_threshold_is_one_with_single_nonterminal():
    g = NodeWeightedDigraph({0: 2, 1: 0}, [(0, 1)])
    inst = SteinerInstance(g, 0, frozenset({1}))
    assert split_terminals(solve_lp(build_dst_lp(inst)), inst).threshold == 1


@pytest.mark.parametrize("name,cost", [("fan4", 2), ("fan5_costly", 10), ("fan4_mixed", 5), ("fan6_hub", 6)])
def test_fans_hit_expensive_terminals(name, cost):
    inst = parse_instance(FANS / f"{name}.json").instance
    tree, rep = solve_dst(inst)
    assert rep.expensive > 0 and not rep.diagnostics
    assert rep.min_candidate_size >= math.sqrt(rep.n_nonterminal)
    assert tree.total_cost == cost == brute_force_dst(inst)[1]
    assert tree.total_cost <= rep.bound
    assert validate_out_tree(tree, inst.graph, inst.root) == []


def test_single_path_and_star():
    g = NodeWeightedDigraph({0: 1, 1: 2, 2: 3}, [(0, 1), (1, 2)])
    tree, _ = solve_dst(SteinerInstance(g, 0, frozenset({2})))
    assert tree.nodes == {0, 1, 2} and tree.total_cost == 6
    star = NodeWeightedDigraph({0: 0, 1: 1, 2: 1, 3: 1}, [(0, 1), (0, 2), (0, 3)])
    tree, _ = solve_dst(SteinerInstance(star, 0, frozenset({1, 2, 3})))
    assert tree.arcs == {(0, 1), (0, 2), (0, 3)}


def test_unreachable_terminal():
    g = NodeWeightedDigraph({0: 0, 1: 1}, [])
    with pytest.raises(UnreachableError):
        solve_dst(SteinerInstance(g, 0, frozenset({1})))


def test_fcap_skips_the_ladder():
    inst = parse_instance(FANS / "fan4_mixed.json").instance
    tree, rep = solve_dst(inst, f_cap=100)
    assert rep.guesses_tried == 1
    assert set(inst.terminals) <= tree.nodes


@pytest.mark.parametrize("seed", range(30))
def test_random_instances_between_oracle_and_bound(seed):
    inst = dst_instance("dst", seed, n_max=12, r_max=3)
    tree, rep = solve_dst(inst)
    opt = brute_force_dst(inst)[1]
    assert validate_out_tree(tree, inst.graph, inst.root) == []
    assert inst.terminals <= tree.nodes
    assert opt - 1e-9 <= tree.total_cost <= rep.bound + 1e-9
