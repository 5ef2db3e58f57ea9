import dataclasses
import random
from collections import Counter
from fractions import Fraction
from math import factorial
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from bergman.errors import ConfigurationError, TypingError, UncertifiedError
from bergman.expressions import all_permutations, reduced_expressions
from bergman.hecke import (AmbiguityInstance, BraidEntry, Dot, HeckeTerm, check_ambiguity_instance,
                           check_presentation, derive_conditions, enumerate_basis, hecke_reduce,
                           instantiate_ambiguities, permissible_permutations, push_dots_left,
                           reduced_generators, specialize, validate_presentation)
from bergman.presentation import load_preset, parse_presentation
from bergman.scalar import ONE, Scalar

import bergman

S = Scalar.parse
PRESETS = Path(bergman.__file__).parent / "presets"


def preset(name):
    return load_preset(name).build()


def preset_text_variant(name, old, new, parameters=()):
    text = (PRESETS / f"{name}.yaml").read_text()
    assert old in text
    text = text.replace(old, new)
    if parameters:
        text += f"parameters: [{', '.join(parameters)}]\n"
    return parse_presentation(text).build()


# -- validation and permissibility ------------------------------------------

def test_validate_presets():
    assert validate_presentation(preset("nilhecke")).valid
    assert validate_presentation(preset("webster-sl2-skeleton")).valid


def test_zero_lambda_is_invalid():
    p = preset("nilhecke")
    braid = {"5.8c": {k: BraidEntry(Fraction(0), e.lower) for k, e in p.braid["5.8c"].items()}}
    report = validate_presentation(dataclasses.replace(p, braid=braid))
    assert not report.valid
    with pytest.raises(ConfigurationError):
        report.raise_if_invalid()


def test_permissible_permutations_examples():
    w = preset("webster-sl2-skeleton")
    assert permissible_permutations(w, ("r1", "r2"), ("r1", "r2")) == [(1, 2)]
    assert permissible_permutations(w, ("r1", "b"), ("b", "r1")) == [(2, 1)]
    assert len(permissible_permutations(preset("nilhecke"), ("i",) * 3, ("i",) * 3)) == 6
    with pytest.raises(TypingError):
        permissible_permutations(w, ("b",), ("b", "b"))


def crossed_pairs(word, bottom):
    cols, out = list(bottom), []
    for q in reversed(word):
        out.append(frozenset((cols[q - 1], cols[q])) if cols[q - 1] != cols[q] else (cols[q - 1],))
        cols[q - 1], cols[q] = cols[q], cols[q - 1]
    return Counter(out)


@pytest.mark.parametrize("bottom", [("b", "r1", "b", "r2"), ("r1", "r2", "b", "b"), ("b", "b", "b", "r1")])
def test_permissibility_is_braid_invariant(bottom):
    w = preset("webster-sl2-skeleton")
    for perm in all_permutations(4):
        words = reduced_expressions(perm)
        pairs = {frozenset(crossed_pairs(x, bottom).items()) for x in words}
        assert len(pairs) == 1
        assert len({w.is_permissible(x, bottom) for x in words}) == 1


# -- dots and reduction ----------------------------------------------------

def test_push_dots_left_examples():
    nh = preset("nilhecke")
    assert str(push_dots_left(nh, ("i",), (Dot(S("x[1]")), Dot(S("x[1]^2"))))) == "(x[1]^3)"
    t = push_dots_left(nh, ("i", "i"), (1, Dot(S("x[1]"))))
    assert t.terms == {(1,): S("x[2]"), (): ONE}
    assert push_dots_left(nh, ("i", "i"), (1,)).terms == {(1,): ONE}


def test_hecke_reduce_examples():
    nh, cx = preset("nilhecke"), preset("coxeter")
    assert hecke_reduce(nh, ("i", "i"), (1, 1)).is_zero()
    assert hecke_reduce(cx, ("i",) * 3, (1, 2, 1, 2)).terms == {(2, 1): ONE}
    assert hecke_reduce(cx, ("i",) * 3, (2, 1, 2)).terms == {(2, 1, 2): ONE}
    with pytest.raises(TypingError):
        hecke_reduce(preset("webster-sl2-skeleton"), ("r1", "r2"), (1,))


def test_webster_square_uncrosses_to_a_dot():
    w = preset("webster-sl2-skeleton")
    assert hecke_reduce(w, ("b", "r1"), (1, 1)).terms == {(): S("x[1]")}
    assert hecke_reduce(w, ("r1", "b"), (1, 1)).terms == {(): S("x[2]")}


def test_term_printing_and_difference():
    t = HeckeTerm(("i", "i"), {(1,): S("x[2]"), (): ONE})
    assert str(t) == "(x[2])*s + 1"
    assert (t - t).is_zero()
    assert t.to_json() == [{"word": "s", "coefficient": "x[2]"}, {"word": "1", "coefficient": "1"}]


def random_decorated(rng, p, n, length):
    gens = p.ring_generators(("i",) * n)
    word = []
    for _ in range(length):
        if rng.random() < 0.4:
            f = S("1")
            for _ in range(rng.randint(1, 2)):
                f = f * S(rng.choice(gens))
            word.append(Dot(f + rng.randint(0, 2)))
        else:
            word.append(rng.randint(1, n - 1))
    return tuple(word)


def test_random_strategies_agree_on_nilhecke():
    nh = preset("nilhecke")
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(2, 4)
        w = random_decorated(rng, nh, n, rng.randint(1, 5))
        bottom = ("i",) * n
        det = hecke_reduce(nh, bottom, w)
        assert det == hecke_reduce(nh, bottom, w, strategy="random", rng=random.Random(rng.random()))


# -- ambiguities -----------------------------------------------------------

def test_instance_counts():
    insts, skipped = instantiate_ambiguities(preset("coxeter"))
    assert sorted(i.template for i in insts) == sorted(["sss", "ssts", "stss", "ststs", "stsuts"])
    assert skipped == {"ssf": 1, "stsf": 1, "sfg": 1}
    insts, skipped = instantiate_ambiguities(preset("nilhecke"))
    assert len(insts) == 14 and skipped == {}
    assert Counter(i.template for i in insts)["sfg"] == 4


def test_forbidden_colors_leave_only_monochrome_instances():
    text = """
version: 1
kind: hecke
colors: [i, j]
permissible: [[i, i]]
relations:
  5.8a: {i: {alpha: 0, beta: 1}}
  5.8c: {i: {lambda: 1}}
"""
    insts, _ = instantiate_ambiguities(parse_presentation(text).build())
    assert all(set(i.bottom) == {"i"} for i in insts)
    assert "sss[i,i]" in [i.label() for i in insts]


def test_unknown_dot_mode():
    with pytest.raises(ConfigurationError):
        instantiate_ambiguities(preset("nilhecke"), "numeric")


def test_stsuts_resolves_for_coxeter():
    rep = check_ambiguity_instance(preset("coxeter"), AmbiguityInstance("stsuts", ("i",) * 4), trace=True)
    assert rep.resolvable
    assert rep.traces[0] and rep.traces[1]
    assert rep.to_json(trace=True)["normal_forms"][0] == rep.to_json(trace=True)["normal_forms"][1]


def test_sfg_resolves_for_nilhecke():
    inst = AmbiguityInstance("sfg", ("i", "i"), (S("x[1]"), S("x[2]")))
    assert check_ambiguity_instance(preset("nilhecke"), inst).resolvable


def test_ssts_residual_has_2b_tst():
    rep = check_ambiguity_instance(preset("modified-symmetric"), AmbiguityInstance("ssts", ("i",) * 3))
    assert not rep.resolvable
    assert rep.residual.terms[(2, 1, 2)] == S("-2*b")


def test_verdicts():
    assert check_presentation(preset("coxeter")).bergman_type
    v = check_presentation(preset("nilhecke"))
    assert v.bergman_type and not v.failures
    assert not check_presentation(preset("modified-symmetric")).bergman_type


def test_webster_needs_q_equal_one():
    assert check_presentation(preset("webster-sl2-skeleton")).bergman_type
    bad = preset_text_variant("webster-sl2-skeleton", "q: 1", "q: -1")
    assert not check_presentation(bad).bergman_type
    sym = preset_text_variant("webster-sl2-skeleton", "q: 1", "q: qq", ["qq"])
    assert [str(g) for g in derive_conditions(sym).reduced] == ["qq - 1"]


local_polys = st.builds(
    lambda cs, es: sum((Scalar.const(c) * S(f"x[1]^{a}*x[2]^{b}") for c, (a, b) in zip(cs, es)), Scalar.const(0)),
    st.lists(st.integers(-3, 3), min_size=1, max_size=3),
    st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=3, max_size=3))


@settings(max_examples=25, deadline=None)
@given(local_polys, local_polys)
def test_dotted_instances_resolve_for_arbitrary_polynomials(f, g):
    nh = preset("nilhecke")
    if not f or not g:
        return
    for inst in [AmbiguityInstance("ssf", ("i", "i"), (f,)),
                 AmbiguityInstance("sfg", ("i", "i"), (f, g)),
                 AmbiguityInstance("stsf", ("i",) * 3, (f * S("x[3]"),))]:
        assert check_ambiguity_instance(nh, inst).resolvable


# -- conditions ------------------------------------------------------------

def test_conditions_for_certified_presets_are_empty():
    assert derive_conditions(preset("coxeter")).raw == []
    assert derive_conditions(preset("nilhecke")).raw == []


def test_modified_symmetric_conditions():
    conds = derive_conditions(preset("modified-symmetric"))
    assert S("2*a") in conds.raw and S("2*b") in conds.raw
    assert sorted(str(g) for g in conds.reduced) == ["a", "b", "c + d", "e"]


def test_conditions_stable_under_reversal_and_renaming():
    base = derive_conditions(preset("modified-symmetric")).reduced
    swap = {"a": "b", "b": "a", "c": "d", "d": "c"}
    mirrored = [g.map_variables(lambda v: swap.get(v, v)) for g in base]
    assert set(reduced_generators(mirrored)) == set(base)
    renamed = """
version: 1
kind: hecke
parameters: [p0, p1, pa, pb, pc, pd, pe]
colors: [i]
permissible: [[i, i]]
relations:
  5.8a: {i: {alpha: p0, beta: p1}}
  5.8c: {i: {lambda: 1, a: pa, b: pb, c: pc, d: pd, e: pe}}
"""
    got = derive_conditions(parse_presentation(renamed).build()).reduced
    assert sorted(str(g) for g in got) == ["pa", "pb", "pc + pd", "pe"]


def test_specialized_modified_symmetric_is_certified():
    p = specialize(preset("modified-symmetric"), {"a": 0, "b": 0, "e": 0, "d": "-c"})
    assert check_presentation(p).bergman_type
    assert derive_conditions(p).raw == []


def test_reduced_generators_edge_cases():
    assert reduced_generators([]) == []
    assert reduced_generators([S("2")]) == [ONE]
    assert reduced_generators([S("2*a"), S("a*b")]) == [S("a")]


# -- bases -----------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_nilhecke_rank(n):
    nh = preset("nilhecke")
    verdict = check_presentation(nh)
    basis = enumerate_basis(nh, ("i",) * n, ("i",) * n, verdict)
    assert len(basis) == factorial(n)
    assert len(set(basis)) == len(basis)


def test_basis_refusals_and_edge_cases():
    nh = preset("nilhecke")
    with pytest.raises(UncertifiedError):
        enumerate_basis(nh, ("i", "i"), ("i", "i"))
    ms = preset("modified-symmetric")
    with pytest.raises(UncertifiedError, match="ssts"):
        enumerate_basis(ms, ("i", "i"), ("i", "i"), check_presentation(ms))
    assert len(enumerate_basis(ms, ("i", "i"), ("i", "i"), force=True)) == 2
    w = preset("webster-sl2-skeleton")
    vw = check_presentation(w)
    assert enumerate_basis(w, ("r1", "b"), ("b", "r1"), vw) == [(1,)]
    assert enumerate_basis(w, ("r1", "b"), ("b", "b"), vw) == []
    assert enumerate_basis(w, ("r1", "r2"), ("r1", "r2"), vw) == [()]
