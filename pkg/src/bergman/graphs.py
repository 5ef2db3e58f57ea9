"""Expression graphs of a permutation and their commutation quotients.

Vertices are expressions of ``w`` (reduced ones, or all of length up to
``len(w) + extra_length``).  Edges are labelled ``commute``, ``braid`` or
``cancel``.  Braid edges point from ``s_i s_{i+1} s_i`` to
``s_{i+1} s_i s_{i+1}`` and cancel edges point to the shorter word, so
following arrows only ever makes higher inversion sets bigger or words
shorter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product

from .errors import PreconditionError, ResourceError
from .expressions import (Perm, Word, comm_canonical, evaluate, format_expression,
                          higher_inversion_set, is_reduced, length)

DEFAULT_VERTEX_CAP = 200_000


@dataclass
class ExpressionGraph:
    w: Perm
    vertices: list[Word]
    edges: list[tuple[Word, Word, str]]
    quotient_vertices: list[Word] = field(default_factory=list)
    quotient_edges: list[tuple[Word, Word, str]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.w)

    def grading(self) -> dict[Word, int]:
        """``|J|`` of every reduced class representative."""
        return {v: len(higher_inversion_set(v, self.n))
                for v in self.quotient_vertices if is_reduced(v, self.n)}

    def sources(self) -> list[Word]:
        heads = {b for _, b, _ in self.quotient_edges}
        return [v for v in self.quotient_vertices if v not in heads]

    def sinks(self) -> list[Word]:
        tails = {a for a, _, _ in self.quotient_edges}
        return [v for v in self.quotient_vertices if v not in tails]


def _expressions_of(w: Perm, L: int, cap: int) -> list[Word]:
    n = len(w)
    out = []
    for word in product(range(1, n), repeat=L):
        if evaluate(word, n) == w:
            out.append(word)
            if len(out) > cap:
                raise ResourceError(f"more than {cap} expressions of length {L}")
    return out


def expression_graph(w: Perm, extra_length: int = 0, vertex_cap: int = DEFAULT_VERTEX_CAP) -> ExpressionGraph:
    """Build the expression graph of ``w`` and its quotient by commutations."""
    if extra_length < 0 or extra_length % 2:
        raise PreconditionError("extra_length must be a non-negative even number")
    n = len(w)
    base = length(w)
    if n <= 1:
        verts = [()]
    else:
        L_max = base + extra_length
        if (n - 1) ** L_max > 50 * vertex_cap:
            raise ResourceError(f"expressions of length {L_max} in S_{n} exceed the configured cap")
        verts = []
        for L in range(base, L_max + 1, 2):
            verts.extend(_expressions_of(w, L, vertex_cap))
            if len(verts) > vertex_cap:
                raise ResourceError(f"graph has more than {vertex_cap} vertices")
    vset = set(verts)
    edges = []
    for v in verts:
        for p in range(len(v) - 1):
            a, b = v[p], v[p + 1]
            if abs(a - b) >= 2 and a < b:
                edges.append((v, v[:p] + (b, a) + v[p + 2:], "commute"))
            if a == b:
                u = v[:p] + v[p + 2:]
                if u in vset:
                    edges.append((v, u, "cancel"))
        for p in range(len(v) - 2):
            a, b, c = v[p:p + 3]
            if a == c and b == a + 1:
                edges.append((v, v[:p] + (b, a, b) + v[p + 3:], "braid"))
    canon = {v: comm_canonical(v) for v in verts}
    qverts = sorted(set(canon.values()), key=lambda x: (len(x), x))
    qedges = sorted({(canon[a], canon[b], k) for a, b, k in edges if k != "commute"},
                    key=lambda e: (len(e[0]), e[0], len(e[1]), e[1], e[2]))
    return ExpressionGraph(tuple(w), verts, edges, qverts, qedges)


def _label(word: Word) -> str:
    return format_expression(word) or "1"


def to_dot(g: ExpressionGraph, quotient: bool = False, orient: bool = True) -> str:
    """DOT text; commutation edges are undirected, the others carry arrows when ``orient``."""
    verts = g.quotient_vertices if quotient else g.vertices
    edges = g.quotient_edges if quotient else g.edges
    grading = g.grading() if quotient else {}
    name = "Xbar" if quotient else "X"
    lines = [f'digraph {name} {{', '  rankdir=LR;']
    index = {v: i for i, v in enumerate(verts)}
    for v in verts:
        extra = f', height_J="{grading[v]}"' if v in grading else ""
        lines.append(f'  v{index[v]} [label="{_label(v)}"{extra}];')
    for a, b, kind in edges:
        arrow = "forward" if orient and kind != "commute" else "none"
        lines.append(f'  v{index[a]} -> v{index[b]} [label="{kind}", dir={arrow}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(g: ExpressionGraph) -> str:
    n = g.n
    classes = []
    for v in g.quotient_vertices:
        entry = {"word": _label(v), "length": len(v)}
        if is_reduced(v, n):
            J = sorted(higher_inversion_set(v, n))
            entry["J"] = [list(t) for t in J]
            entry["height"] = len(J)
        classes.append(entry)
    data = {
        "w": list(g.w),
        "vertices": len(g.vertices),
        "classes": classes,
        "edges": [{"from": _label(a), "to": _label(b), "kind": k} for a, b, k in g.quotient_edges],
        "sources": [_label(v) for v in g.sources()],
        "sinks": [_label(v) for v in g.sinks()],
    }
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
