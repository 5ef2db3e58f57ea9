import json
from collections import deque

import pytest

from bergman.errors import PreconditionError, ResourceError
from bergman.expressions import (all_permutations, comm_canonical, evaluate, full_triples,
                                 higher_inversion_set, longest_element, parse_expression,
                                 reduced_expressions)
from bergman.graphs import expression_graph, to_dot, to_json


def bfs_classes(words):
    """Connected components under distant commutations, found by search."""
    words = set(words)
    left, classes = set(words), []
    while left:
        start = left.pop()
        comp, todo = {start}, deque([start])
        while todo:
            v = todo.popleft()
            for p in range(len(v) - 1):
                if abs(v[p] - v[p + 1]) >= 2:
                    u = v[:p] + (v[p + 1], v[p]) + v[p + 2:]
                    if u in words and u not in comp:
                        comp.add(u)
                        todo.append(u)
        left -= comp
        classes.append(comp)
    return classes


def count_paths(g, a, b):
    out = {}
    for x, y, _ in g.quotient_edges:
        out.setdefault(x, []).append(y)

    def walk(v):
        return 1 if v == b else sum(walk(u) for u in out.get(v, []))

    return walk(a)


def test_longest_element_of_s4():
    w0 = longest_element(4)
    g = expression_graph(w0)
    assert len(g.vertices) == 16
    assert len(g.quotient_vertices) == 8
    assert len(bfs_classes(g.vertices)) == 8
    (src,), (snk,) = g.sources(), g.sinks()
    assert g.grading()[src] == 0 and g.grading()[snk] == 4
    assert snk == (3, 2, 1, 3, 2, 3)
    assert count_paths(g, src, snk) == 2


@pytest.mark.parametrize("w", all_permutations(4))
def test_gradings_in_s4(w):
    g = expression_graph(w)
    grading = g.grading()
    assert len(g.sources()) == 1 and len(g.sinks()) == 1
    assert grading[g.sources()[0]] == 0
    assert higher_inversion_set(g.sinks()[0], 4) == full_triples(w)
    for a, b, kind in g.quotient_edges:
        assert kind == "braid"
        assert grading[b] == grading[a] + 1
    assert len(g.quotient_vertices) == len(bfs_classes(reduced_expressions(w)))


def test_spot_checks_in_s5():
    for w in [(5, 4, 3, 2, 1), (3, 5, 4, 1, 2), (2, 4, 5, 3, 1)]:
        g = expression_graph(w)
        assert len(g.sources()) == 1 and len(g.sinks()) == 1
        grading = g.grading()
        assert all(grading[b] == grading[a] + 1 for a, b, _ in g.quotient_edges)
        assert len(g.quotient_vertices) == len(bfs_classes(g.vertices))


def test_extended_graph_has_cancel_edges():
    g = expression_graph((2, 1, 3), extra_length=2)
    assert {len(v) for v in g.vertices} == {1, 3}
    assert any(k == "cancel" for _, _, k in g.edges)
    assert all(len(b) == len(a) - 2 for a, b, k in g.edges if k == "cancel")
    assert g.sinks() == [(1,)]
    assert all(comm_canonical(v) in g.quotient_vertices for v in g.vertices)


def test_bad_arguments():
    with pytest.raises(PreconditionError):
        expression_graph((2, 1), extra_length=1)
    with pytest.raises(ResourceError):
        expression_graph(longest_element(5), extra_length=6, vertex_cap=100)


def test_dot_output():
    g = expression_graph((3, 2, 1))
    dot = to_dot(g, quotient=True)
    assert dot.startswith("digraph Xbar {")
    assert 'label="sts", height_J="0"' in dot
    assert "dir=forward" in dot
    plain = to_dot(expression_graph(longest_element(4)))
    assert 'label="commute", dir=none' in plain
    assert to_dot(g, quotient=True) == dot


def test_json_output():
    g = expression_graph(evaluate(parse_expression("sts"), 3))
    data = json.loads(to_json(g))
    assert data["sources"] == ["sts"] and data["sinks"] == ["tst"]
    assert data["classes"][1]["J"] == [[1, 2, 3]]
    assert data["edges"] == [{"from": "sts", "to": "tst", "kind": "braid"}]

