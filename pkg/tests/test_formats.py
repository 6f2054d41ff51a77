import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbcover import formats
from cbcover.errors import ValidationError
from cbcover.generate import GenParams, generate_dict, generate_instance

MINIMAL = {
    "format_version": 1,
    "kind": "dcbc",
    "root": 0,
    "nodes": [{"id": 0, "cost": 0, "elements": []}, {"id": 1, "cost": 3, "elements": ["x"]}],
    "arcs": [[0, 1]],
    "elements": [{"id": "x", "prize": 7}],
    "budget": 3,
}


def load(d):
    return formats.loads_instance(json.dumps(d))


def test_minimal_file_parses():
    f = load(MINIMAL)
    assert f.kind == "dcbc" and f.instance.budget == 3
    assert f.instance.sets[1] == {"x"}


@pytest.mark.parametrize(
    "patch,needle",
    [
        ({"nodes": [{"id": 0, "cost": 0, "elements": ["nope"]}]}, "'nope'"),
        ({"format_version": 2}, "format_version"),
        ({"kind": "tsp"}, "kind"),
        ({"root": 9}, "root"),
        ({"arcs": [[0, 5]]}, "arcs[0]"),
        ({"budget": "lots"}, "budget"),
        ({"directed": False}, "directed"),
    ],
)
def test_errors_name_the_field(patch, needle):
    with pytest.raises(ValidationError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        load({**MINIMAL, **patch})


def test_bad_json_reports_position():
    with pytest.raises(ValidationError, match=r"<string>:1:"):
        formats.loads_instance("{nope")


def test_bidirected_format_adds_reverse_core_arcs():
    d = {"format_version": 1, "kind": "dst-bidirected", "root": 0,
         "nodes": [{"id": 0, "cost": 0}, {"id": 1, "cost": 1}, {"id": 2, "cost": 0}],
         "arcs": [[0, 1], [1, 2]], "terminals": [2]}
    f = load(d)
    assert f.instance.graph.arcs == {(0, 1), (1, 0), (1, 2)}
    assert formats.instance_to_dict(f)["arcs"] == [[0, 1], [1, 2]]
    with pytest.raises(ValidationError, match="outgoing"):
        load({**d, "arcs": [[0, 1], [2, 1]]})


def test_generator_shapes():
    p = GenParams(n=1)
    assert len(generate_dict("dcbc", p, 0)["nodes"]) == 1
    full = generate_dict("dcbc", GenParams(n=4, density=1.0), 3)
    assert len(full["arcs"]) == 12
    assert generate_dict("gst", GenParams(), 5) == generate_dict("gst", GenParams(), 5)
    with pytest.raises(ValueError):
        generate_dict("dcbc", GenParams(density=2), 0)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(formats.KINDS), st.integers(0, 10_000), st.integers(1, 9))
def test_generated_files_round_trip(kind, seed, n):
    if kind == "dst-bidirected" and n < 2:
        with pytest.raises(ValueError):
            generate_dict(kind, GenParams(n=n), seed)
        return
    f = generate_instance(kind, GenParams(n=n, n_elements=4), seed)
    text = formats.dumps(formats.instance_to_dict(f))
    again = formats.loads_instance(text)
    assert formats.dumps(formats.instance_to_dict(again)) == text
    assert formats.instance_digest(again) == formats.instance_digest(f)


def test_verify_catches_tampering():
    from cbcover.coverage import solve_dcbc

    f = load(MINIMAL)
    rep = solve_dcbc(f.instance)
    body = rep.to_dict()
    body.pop("tree")
    sol = json.loads(formats.write_solution(f, rep.tree, body))
    assert formats.verify_solution(f, sol) == []
    bad = {**sol, "prize": 99}
    assert any("prize" in p for p in formats.verify_solution(f, bad))
    assert formats.verify_solution(f, {**sol, "tree": {"root": 0, "nodes": [0, 1], "arcs": []}})
