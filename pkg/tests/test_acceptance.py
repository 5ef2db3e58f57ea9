"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line and the session ends with a summary of
all of them (see ``conftest.py``).  Oracles here are independent of the
code under test: brute-force scans, breadth-first searches and exact
linear algebra.
"""

import random
import sys
from collections import deque
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from itertools import combinations, product
from math import factorial

import pytest
import sympy

from bergman.comparison import Cmp
from bergman.expressions import (all_permutations, comm_canonical, evaluate,
                                 full_triples, higher_inversion_set, leq, length, longest_element,
                                 oriented_successors, parabolic_embed, reduced_expressions, sink)
from bergman.graphs import expression_graph
from bergman.hecke import (AmbiguityInstance, Dot, check_ambiguity_instance, check_presentation,
                           derive_conditions, enumerate_basis, hecke_reduce, specialize)
from bergman.presentation import load_preset
from bergman.scalar import Scalar
from bergman.words import LinComb, RewriteSystem, make_rule, rewrite_closure_order

S = Scalar.parse


def W(text):
    return tuple(text)


def commutation_components(words):
    """Classes under distant commutations, by breadth-first search."""
    words, classes = set(words), []
    while words:
        start = words.pop()
        comp, todo = {start}, deque([start])
        while todo:
            v = todo.popleft()
            for p in range(len(v) - 1):
                if abs(v[p] - v[p + 1]) >= 2:
                    u = v[:p] + (v[p + 1], v[p]) + v[p + 2:]
                    if u in words:
                        words.discard(u)
                        comp.add(u)
                        todo.append(u)
        classes.append(comp)
    return classes


# ---------------------------------------------------------------------------

def test_criterion_1_xyz(criterion):
    with criterion(1, "xyz normal form, verdict and 35 irreducibles", limit=1):
        s = load_preset("xyz").build()
        nf, _ = s.normal_form(W("zyx"))
        expected = LinComb({W("xyz"): 1, W("z"): 1, W("y"): 2, W("x"): 3})
        assert nf == expected
        assert s.bergman_check().bergman_type
        irr = set(s.enumerate_irreducible(4))
        monomials = {("x",) * a + ("y",) * b + ("z",) * c
                     for a in range(5) for b in range(5) for c in range(5) if a + b + c <= 4}
        assert irr == monomials and len(irr) == 35
        lhss = ["".join(r.lhs) for r in s.rules]
        scan = [w for k in range(5) for w in product("xyz", repeat=k)
                if not any(l in "".join(w) for l in lhss)]
        assert len(scan) == 35


def test_criterion_2_coxeter_s3(criterion):
    with criterion(2, "S3 Coxeter ambiguities and irreducibles", limit=1):
        s = load_preset("coxeter-s3").build()
        ambs = s.enumerate_minimal_ambiguities()
        assert sorted("".join(a.word) for a in ambs) == sorted(["sss", "ttt", "ssts", "stss", "ststs"])
        verdict = s.bergman_check()
        assert verdict.bergman_type and all(r.resolvable for r in verdict.reports)
        assert set(s.enumerate_irreducible()) == {W(x) for x in ["", "s", "t", "st", "ts", "tst"]}


def test_criterion_3_s4_orientations(criterion):
    with criterion(3, "all 8 S4 orientations fail; witness (stsu, sts, su)", limit=10):
        verdicts = []
        for b1, b2, comm in product((("sts", "tst"), ("tst", "sts")), (("tut", "utu"), ("utu", "tut")),
                                    (("su", "us"), ("us", "su"))):
            pairs = [(W(a), W(b)) for a, b in (b1, b2, comm)]
            rules = [make_rule(W(x + x), LinComb({(): 1})) for x in "stu"]
            rules += [make_rule(a, LinComb.word(b)) for a, b in pairs]
            s = RewriteSystem("stu", rules, rewrite_closure_order(pairs))
            assert s.validate().valid
            verdicts.append(s.bergman_check().bergman_type)
        assert len(verdicts) == 8 and not any(verdicts)
        naive = load_preset("coxeter-s4-naive").build()
        v = naive.bergman_check()
        assert not v.bergman_type
        assert "(stsu, sts, su)" in [r.ambiguity.describe(naive) for r in v.reports if not r.resolvable]
        for w in ["utustu", "tustus", "ustust"]:
            assert naive.is_irreducible(W(w))


def test_criterion_4_gradings(criterion):
    with criterion(4, "gradings of the quotient graphs in S4 and S5", limit=30):
        for w in all_permutations(4):
            g = expression_graph(w)
            grading = g.grading()
            (src,), (snk,) = g.sources(), g.sinks()
            assert higher_inversion_set(src, 4) == frozenset()
            assert higher_inversion_set(snk, 4) == full_triples(w)
            assert all(grading[b] == grading[a] + 1 for a, b, _ in g.quotient_edges)
        g0 = expression_graph(longest_element(4))
        assert len(g0.vertices) == 16
        assert len(g0.quotient_vertices) == len(commutation_components(g0.vertices)) == 8
        for w in [(5, 4, 3, 2, 1), (2, 5, 3, 1, 4), (4, 1, 5, 2, 3)]:
            g = expression_graph(w)
            grading = g.grading()
            assert len(g.sources()) == 1 and len(g.sinks()) == 1
            assert grading[g.sources()[0]] == 0
            assert higher_inversion_set(g.sinks()[0], 5) == full_triples(w)
            assert all(grading[b] == grading[a] + 1 for a, b, _ in g.quotient_edges)
            assert len(g.quotient_vertices) == len(commutation_components(g.vertices))


def test_criterion_5_unique_sink(criterion):
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10_000))
    with criterion(5, "unique terminal class reached by sink() up to length l(w)+4", limit=120):
        memo = {}

        def terminals(c):
            # every terminal class reachable from c by oriented moves
            if c not in memo:
                nxt = oriented_successors(c)
                memo[c] = frozenset([c]) if not nxt else frozenset().union(*(terminals(u) for u in nxt))
            return memo[c]

        checked = 0
        for n in (3, 4):
            for w in all_permutations(n):
                for L in range(length(w), length(w) + 5):
                    for x in product(range(1, n), repeat=L):
                        if evaluate(x, n) != w:
                            continue
                        ends = terminals(comm_canonical(x))
                        s, trace = sink(x, n)
                        assert len(ends) == 1 and s in ends
                        assert {k for k, _, _ in trace} <= {"commute", "braid", "cancel"}
                        checked += 1
        assert checked > 10_000


def _law_checks(e, f, n, rng=None):
    c = leq(e, f, n)
    assert leq(f, e, n) is c.flip()
    assert (c is Cmp.EQ) == (comm_canonical(e) == comm_canonical(f))
    if c in (Cmp.LT, Cmp.EQ):
        contexts = [((a,), ()) for a in range(1, n)] + [((), (a,)) for a in range(1, n)]
        if rng is not None:
            contexts = [(tuple(rng.randint(1, n - 1) for _ in range(rng.randint(0, 2))),
                         tuple(rng.randint(1, n - 1) for _ in range(rng.randint(0, 2))))]
        for x, y in contexts:
            assert leq(x + e + y, x + f + y, n) is c
        for m, k in ((n + 1, 0), (n + 1, 1)):
            assert leq(parabolic_embed(e, n, m, k), parabolic_embed(f, n, m, k), m) is c


def test_criterion_6_order_laws(criterion):
    with criterion(6, "order laws exhaustive for n<=4, len<=6, and 1000 random trials in S5", limit=60):
        for n in (3, 4):
            groups = {}
            for L in range(7):
                for x in product(range(1, n), repeat=L):
                    groups.setdefault((L, evaluate(x, n)), []).append(x)
            for (L, _), words in groups.items():
                ts = TopologicalSorter({x: () for x in words})
                for e, f in combinations(words, 2):
                    if L < 6:
                        _law_checks(e, f, n)
                    c = leq(e, f, n)
                    if c is Cmp.LT:
                        ts.add(f, e)
                    elif c is Cmp.GT:
                        ts.add(e, f)
                try:
                    ts.prepare()
                except CycleError:
                    pytest.fail(f"descending cycle among words of length {L}")
        rng = random.Random(2024)
        perms = all_permutations(5)
        for _ in range(1000):
            w = rng.choice(perms)
            words = reduced_expressions(w)
            e, f = rng.choice(words), rng.choice(words)
            _law_checks(e, f, 5, rng)


def test_criterion_7_modified_symmetric(criterion):
    with criterion(7, "torsion generators 2a, 2b and re-check after substitution", limit=30):
        p = load_preset("modified-symmetric").build()
        conds = derive_conditions(p)
        assert S("2*a") in conds.raw and S("2*b") in conds.raw
        for bindings in ({"a": 0, "b": 0, "e": 0, "c": 0, "d": 0},
                         {"a": 0, "b": 0, "e": 0, "d": "-c", "beta": 0},
                         {"a": 0, "b": 0, "e": 0, "d": "-c"}):
            assert check_presentation(specialize(p, bindings)).bergman_type


def _in_ideal(f, generators):
    """Exact ideal membership over Q via a Groebner basis of ``generators``."""
    syms = sorted({sympy.Symbol(v) for g in [f, *generators] for v in g.variables()}, key=str)
    basis = sympy.groebner([g.to_sympy() for g in generators], *syms, order="lex", domain="QQ")
    return basis.contains(f.to_sympy())


@pytest.mark.xfail(strict=True, reason="the derived ideal is <a, b, e, c+d>; the extra c*beta "
                                       "condition is not produced (residual of stsuts vanishes once "
                                       "d = -c), and an independent rank oracle agrees")
def test_criterion_7_ideal_equality(criterion):
    with criterion(7, "derived ideal equals <a, b, e, c+d, c*beta>"):
        target = [S("a"), S("b"), S("e"), S("c + d"), S("c*beta")]
        got = derive_conditions(load_preset("modified-symmetric").build()).reduced
        assert all(_in_ideal(g, target) for g in got)
        assert all(_in_ideal(g, got) for g in target)


def _quotient_dimension(alpha, beta, c, d, max_len):
    """dim of (words up to max_len) / (relation instances inside max_len), exact over Q."""
    rels = []
    for q in (1, 2, 3):
        rels.append({(q, q): 1, (q,): -alpha, (): -beta})
    for q in (1, 2):
        rels.append({(q, q + 1, q): 1, (q + 1, q, q + 1): -1, (q,): -c, (q + 1,): -d})
    rels.append({(1, 3): 1, (3, 1): -1})
    pivots, rank = {}, 0
    key = lambda w: (len(w), w)
    for r in rels:
        k = max(len(w) for w in r)
        for a in range(max_len - k + 1):
            for b in range(max_len - k - a + 1):
                for A in product((1, 2, 3), repeat=a):
                    for B in product((1, 2, 3), repeat=b):
                        v = {A + w + B: Fraction(x) for w, x in r.items() if x}
                        while v:
                            top = max(v, key=key)
                            if top not in pivots:
                                break
                            cv = v[top]
                            for w, x in pivots[top].items():
                                y = v.get(w, 0) - cv * x
                                if y:
                                    v[w] = y
                                else:
                                    v.pop(w, None)
                        if v:
                            top = max(v, key=key)
                            inv = 1 / v[top]
                            pivots[top] = {w: x * inv for w, x in v.items()}
                            rank += 1
    words = sum(3 ** k for k in range(max_len + 1))
    return words - rank


def test_criterion_7_rank_oracle_supports_derived_ideal(criterion):
    with criterion(7, "exact rank oracle: c*beta != 0 with a=b=e=c+d=0 keeps rank 24"):
        p = specialize(load_preset("modified-symmetric").build(),
                       {"a": 0, "b": 0, "e": 0, "c": 1, "d": -1, "beta": 1, "alpha": 0})
        rep = check_ambiguity_instance(p, AmbiguityInstance("stsuts", ("i",) * 4))
        assert rep.resolvable
        assert _quotient_dimension(0, 1, 1, -1, 6) == factorial(4)
        assert _quotient_dimension(2, 1, 1, -1, 6) == factorial(4)
        # the oracle does see collapse when a derived condition is broken
        assert _quotient_dimension(0, 1, 1, 0, 6) < factorial(4)


def test_criterion_8_nilhecke(criterion):
    with criterion(8, "nilHecke instances, rank n!, sfg against divided differences", limit=60):
        nh = load_preset("nilhecke").build()
        verdict = check_presentation(nh)
        assert verdict.bergman_type and len(verdict.reports) == 14
        for n in range(1, 5):
            assert len(enumerate_basis(nh, ("i",) * n, ("i",) * n, verdict)) == factorial(n)
        x1, x2 = sympy.Symbol("x[1]"), sympy.Symbol("x[2]")
        rng = random.Random(8)
        for _ in range(40):
            f, g = (sum((rng.randint(-2, 2) * x1 ** rng.randint(0, 3) * x2 ** rng.randint(0, 3)
                         for _ in range(2)), sympy.Integer(0)) for _ in range(2))
            if f == 0 or g == 0:
                continue
            F, G = Scalar.from_sympy(sympy.expand(f)), Scalar.from_sympy(sympy.expand(g))
            assert check_ambiguity_instance(nh, AmbiguityInstance("sfg", ("i", "i"), (F, G))).resolvable
            got = hecke_reduce(nh, ("i", "i"), (1, Dot(F), Dot(G))).terms
            fg = sympy.expand(f * g)
            swapped = fg.subs({x1: x2, x2: x1}, simultaneous=True)
            demazure = sympy.cancel((fg - swapped) / (x1 - x2))
            assert sympy.expand(got.get((1,), Scalar.const(0)).to_sympy() - swapped) == 0
            assert sympy.expand(got.get((), Scalar.const(0)).to_sympy() - demazure) == 0


def test_criterion_9_cross_module(criterion):
    with criterion(9, "Coxeter reduction agrees with word rewriting; randomized nilHecke strategies",
                   limit=120):
        cx = load_preset("coxeter").build()
        s3 = load_preset("coxeter-s3").build()
        s4, status = load_preset("coxeter-s4-naive").build().complete()
        assert status["confluent"] and len(s4.enumerate_irreducible()) == 24
        letters = {"s": 1, "t": 2, "u": 3}
        names = "stu"
        for n in (2, 3, 4):
            system = s3 if n <= 3 else s4
            for L in range(7):
                for word in product(range(1, n), repeat=L):
                    got = hecke_reduce(cx, ("i",) * n, word).terms
                    nf, _ = system.normal_form(tuple(names[q - 1] for q in word))
                    (u, coeff), = nf.items()
                    u = tuple(letters[x] for x in u)
                    target = comm_canonical(u) if n <= 3 else comm_canonical(sink(u, n)[0])
                    assert got == {target: coeff}
        nh = load_preset("nilhecke").build()
        rng = random.Random(9)
        for _ in range(500):
            n = rng.randint(2, 4)
            gens = nh.ring_generators(("i",) * n)
            word = []
            for _ in range(rng.randint(1, 5)):
                if rng.random() < 0.4:
                    f = Scalar.const(rng.randint(0, 2))
                    for _ in range(rng.randint(1, 2)):
                        f = f + Scalar.var(rng.choice(gens)) * Scalar.var(rng.choice(gens))
                    word.append(Dot(f))
                else:
                    word.append(rng.randint(1, n - 1))
            word = tuple(word)
            bottom = ("i",) * n
            ref = hecke_reduce(nh, bottom, word)
            for seed in range(2):
                assert hecke_reduce(nh, bottom, word, strategy="random",
                                    rng=random.Random(rng.random() + seed)) == ref


def test_criterion_10_completion(criterion):
    with criterion(10, "completion of ss = tt = ststst = 1 gives 6 irreducibles", limit=5):
        s = load_preset("s3-bad").build()
        done, status = s.complete(rounds=20)
        assert status["confluent"]
        assert any(r.startswith("tstst -> s") for r in status["added"])
        irr = done.enumerate_irreducible()
        assert len(irr) == 6 == factorial(3)
        assert {evaluate(tuple({"s": 1, "t": 2}[x] for x in w), 3) for w in irr} == set(all_permutations(3))
