"""Rewriting in a free algebra: the classical diamond lemma.

A :class:`RewriteSystem` holds an alphabet, oriented rules ``W -> f`` and an
order on words.  The engine validates compatibility with the order,
computes normal forms, enumerates the minimal overlap and inclusion
ambiguities, checks each of them and, if asked, completes the system.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .comparison import Cmp
from .errors import (CompatibilityError, CompletionStuckError, ConfigurationError,
                     DivergenceError, NoMatchError, OrderViolationError)
from .scalar import ONE, Scalar

Word = tuple

DEFAULT_BUDGET = 10 ** 6


def format_word(word: Sequence[str]) -> str:
    if not word:
        return "1"
    if all(len(a) == 1 for a in word):
        return "".join(word)
    return " ".join(word)


class LinComb:
    """A finite linear combination of words with :class:`Scalar` coefficients."""

    __slots__ = ("_d",)

    def __init__(self, terms: Mapping[Word, Scalar | int] | None = None):
        d = {}
        for w, c in (terms or {}).items():
            c = Scalar.coerce(c)
            if c:
                d[tuple(w)] = c
        self._d = d

    @classmethod
    def word(cls, w: Sequence[str], coeff=1) -> "LinComb":
        return cls({tuple(w): coeff})

    def items(self):
        return sorted(self._d.items(), key=lambda kv: (-len(kv[0]), kv[0]))

    def words(self):
        return [w for w, _ in self.items()]

    def coefficient(self, w: Sequence[str]) -> Scalar:
        return self._d.get(tuple(w), Scalar())

    def is_zero(self) -> bool:
        return not self._d

    def __bool__(self):
        return bool(self._d)

    def __len__(self):
        return len(self._d)

    def __add__(self, other: "LinComb") -> "LinComb":
        d = dict(self._d)
        for w, c in other._d.items():
            s = d.get(w, Scalar()) + c
            if s:
                d[w] = s
            else:
                d.pop(w, None)
        out = LinComb()
        out._d = d
        return out

    def __neg__(self):
        out = LinComb()
        out._d = {w: -c for w, c in self._d.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "LinComb":
        c = Scalar.coerce(c)
        return LinComb({w: c * v for w, v in self._d.items()})

    def wrap(self, left: Sequence[str], right: Sequence[str]) -> "LinComb":
        """Multiply every word by ``left`` on the left and ``right`` on the right."""
        left, right = tuple(left), tuple(right)
        out = LinComb()
        out._d = {left + w + right: c for w, c in self._d.items()}
        return out

    def __eq__(self, other):
        return isinstance(other, LinComb) and self._d == other._d

    def __hash__(self):
        return hash(frozenset(self._d.items()))

    def __str__(self):
        if not self._d:
            return "0"
        parts = []
        for i, (w, c) in enumerate(self.items()):
            ws = "" if not w else format_word(w)
            if c == ONE:
                body, neg = ws or "1", False
            elif c == -ONE:
                body, neg = ws or "1", True
            elif c.is_constant():
                v = c.constant_value()
                neg = v < 0
                sep = "" if all(len(a) == 1 for a in w) else " "
                body = f"{abs(v)}{sep + ws if ws else ''}"
            else:
                body, neg = f"({c}){' ' + ws if ws else ''}", False
            if i == 0:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append((" - " if neg else " + ") + body)
        return "".join(parts)

    def __repr__(self):
        return f"LinComb({str(self)!r})"

    def to_json(self):
        return [{"word": format_word(w), "coefficient": str(c)} for w, c in self.items()]


# ---------------------------------------------------------------------------
# orders

@dataclass(frozen=True)
class OrderSpec:
    """How words are compared.

    ``deglex``: shorter first, then lexicographic by ``precedence``.
    ``length``: shorter first, distinct words of equal length incomparable.
    ``plugin``: ``comparator(a, b) -> Cmp`` supplied by the caller.
    """

    kind: str = "deglex"
    precedence: tuple = ()
    comparator: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("deglex", "length", "plugin"):
            raise ConfigurationError(f"unknown order kind {self.kind!r}")
        if self.kind == "plugin" and self.comparator is None:
            raise ConfigurationError("a plugin order needs a comparator")
        if len(set(self.precedence)) != len(self.precedence):
            raise ConfigurationError("letter precedence repeats a letter")

    def compare(self, a: Word, b: Word) -> Cmp:
        if self.kind == "plugin":
            return self.comparator(tuple(a), tuple(b))
        if a == b:
            return Cmp.EQ
        if len(a) != len(b):
            return Cmp.LT if len(a) < len(b) else Cmp.GT
        if self.kind == "length":
            return Cmp.INCOMPARABLE
        rank = {x: i for i, x in enumerate(self.precedence)}
        for x, y in zip(a, b):
            if x != y:
                return Cmp.LT if rank[x] < rank[y] else Cmp.GT
        return Cmp.EQ

    def sort_key(self):
        rank = {x: i for i, x in enumerate(self.precedence)}
        return lambda w: (len(w), [rank.get(x, len(rank)) for x in w], w)


def rewrite_closure_order(rules: Sequence[tuple[Sequence[str], Sequence[str]]]) -> OrderSpec:
    """Length first, then reachability under the given same-length rewrites.

    ``rules`` are ``(lhs, rhs)`` word pairs of equal length.  A word is
    larger than every word it rewrites to, anywhere inside it.  This is the
    smallest semigroup order making such an orientation compatible; when
    the rewrites cycle the comparator raises :class:`CompatibilityError`.
    """
    pairs = [(tuple(a), tuple(b)) for a, b in rules]
    cache: dict[Word, frozenset] = {}

    def below(w: Word) -> frozenset:
        if w in cache:
            return cache[w]
        seen, todo = set(), [w]
        while todo:
            v = todo.pop()
            for a, b in pairs:
                k = len(a)
                for p in range(len(v) - k + 1):
                    if v[p:p + k] == a:
                        x = v[:p] + b + v[p + k:]
                        if x == w:
                            raise CompatibilityError(f"rewrites cycle through {format_word(w)}", [(w, x)])
                        if x not in seen:
                            seen.add(x)
                            todo.append(x)
        cache[w] = frozenset(seen)
        return cache[w]

    def compare(a: Word, b: Word) -> Cmp:
        if a == b:
            return Cmp.EQ
        if len(a) != len(b):
            return Cmp.LT if len(a) < len(b) else Cmp.GT
        if b in below(a):
            return Cmp.GT
        if a in below(b):
            return Cmp.LT
        return Cmp.INCOMPARABLE

    return OrderSpec("plugin", comparator=compare)


# ---------------------------------------------------------------------------
# rules and systems

@dataclass(frozen=True)
class RewriteRule:
    lhs: Word
    rhs: LinComb
    label: str = ""

    def __str__(self):
        return f"{format_word(self.lhs)} -> {self.rhs}"


def make_rule(lhs: Sequence[str], rhs: LinComb, label: str = "",
              lhs_coefficient: Scalar | int = 1) -> RewriteRule:
    """Build a rule, dividing through by an invertible lhs coefficient."""
    c = Scalar.coerce(lhs_coefficient)
    if not c.is_constant() or c.is_zero():
        raise ConfigurationError(f"lhs coefficient {c} of {format_word(lhs)} is not invertible")
    v = c.constant_value()
    if v != 1:
        rhs = rhs.scale(Scalar.const(1 / v))
    return RewriteRule(tuple(lhs), rhs, label or format_word(lhs))


@dataclass(frozen=True)
class Ambiguity:
    """A minimal ambiguity: the word ``B C D`` hit by two rules.

    For an overlap, ``rules[0]`` matches ``B C`` and ``rules[1]`` matches
    ``C D``.  For an inclusion, ``rules[0]`` matches ``C`` inside the word
    matched by ``rules[1]``.
    """

    kind: str
    B: Word
    C: Word
    D: Word
    rules: tuple[int, int]
    positions: tuple[int, int]

    @property
    def word(self) -> Word:
        return self.B + self.C + self.D

    def describe(self, system: "RewriteSystem") -> str:
        r, s = self.rules
        return (f"({format_word(self.word)}, {format_word(system.rules[r].lhs)}, "
                f"{format_word(system.rules[s].lhs)})")


@dataclass
class AmbiguityReport:
    ambiguity: Ambiguity
    resolutions: tuple[LinComb, LinComb]
    normal_forms: tuple[LinComb, LinComb]
    residual: LinComb
    resolvable: bool
    method: str | None = None  # "joint", "relative" or None
    traces: tuple = ()


@dataclass
class ValidationReport:
    valid: bool
    violations: list = field(default_factory=list)

    def raise_if_invalid(self):
        if not self.valid:
            msgs = [f"{label}: {format_word(lhs)} vs {format_word(w)} ({cmp})"
                    for label, lhs, w, cmp in self.violations]
            raise CompatibilityError("rules are not compatible with the order: " + "; ".join(msgs),
                                     self.violations)


@dataclass
class BergmanVerdict:
    bergman_type: bool
    reports: list[AmbiguityReport]
    irreducible_counts: dict[int, int]
    witness: AmbiguityReport | None = None


class RewriteSystem:
    def __init__(self, alphabet: Sequence[str], rules: Iterable[RewriteRule],
                 order: OrderSpec | None = None):
        self.alphabet = tuple(alphabet)
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ConfigurationError("alphabet repeats a letter")
        self.rules = list(rules)
        if order is None:
            order = OrderSpec("deglex", self.alphabet)
        if order.kind == "deglex" and not order.precedence:
            order = OrderSpec("deglex", self.alphabet)
        self.order = order
        letters = set(self.alphabet)
        for r in self.rules:
            for w in [r.lhs, *r.rhs.words()]:
                bad = [x for x in w if x not in letters]
                if bad:
                    raise ConfigurationError(f"rule {r.label}: letter {bad[0]!r} not in the alphabet")

    def with_rules(self, rules) -> "RewriteSystem":
        return RewriteSystem(self.alphabet, rules, self.order)

    # -- validation -------------------------------------------------------
    def validate(self) -> ValidationReport:
        violations = []
        for r in self.rules:
            if not r.lhs:
                violations.append((r.label, r.lhs, r.lhs, "empty lhs"))
                continue
            for w in r.rhs.words():
                c = self.order.compare(w, r.lhs)
                if c is not Cmp.LT:
                    violations.append((r.label, r.lhs, w, str(c)))
        return ValidationReport(not violations, violations)

    # -- single steps -----------------------------------------------------
    def matches(self, word: Word):
        """All ``(position, rule index)`` where some lhs occurs in ``word``."""
        out = []
        for ri, r in enumerate(self.rules):
            k = len(r.lhs)
            for p in range(len(word) - k + 1):
                if word[p:p + k] == r.lhs:
                    out.append((p, ri))
        return sorted(out)

    def reduce_once(self, t: LinComb, rule: int | RewriteRule, position: int,
                    word: Sequence[str] | None = None) -> LinComb:
        """Apply one elementary resolution to one word of ``t``.

        ``word`` selects the term; it defaults to the only word of ``t``.
        """
        r = self.rules[rule] if isinstance(rule, int) else rule
        if word is None:
            if len(t) != 1:
                raise NoMatchError("reduce_once needs the target word when t has several terms")
            word = t.words()[0]
        word = tuple(word)
        c = t.coefficient(word)
        k = len(r.lhs)
        if c.is_zero() or word[position:position + k] != r.lhs:
            raise NoMatchError(f"{format_word(r.lhs)} does not occur at {position} in {format_word(word)}")
        repl = r.rhs.wrap(word[:position], word[position + k:]).scale(c)
        return t - LinComb.word(word, c) + repl

    def normal_form(self, t: LinComb | Sequence[str], budget: int = DEFAULT_BUDGET,
                    strategy: str = "leftmost", rng: random.Random | None = None,
                    check_order: bool = True):
        """Reduce ``t`` to a combination of irreducible words.

        The default strategy rewrites the largest reducible word first, at
        its leftmost match, using the lowest-index rule there.  ``"random"``
        picks word, position and rule at random (for confluence tests).
        Returns ``(normal form, trace)``.
        """
        if not isinstance(t, LinComb):
            t = LinComb.word(t)
        trace = []
        steps = 0
        done = LinComb()
        pending = t
        while pending:
            reducible = []
            keep = {}
            for w, c in pending.items():
                ms = self.matches(w)
                if ms:
                    reducible.append((w, ms))
                else:
                    keep[w] = c
            done = done + LinComb(keep)
            if not reducible:
                break
            if strategy == "random":
                rng = rng or random.Random(0)
                w, ms = rng.choice(reducible)
                pos, ri = rng.choice(ms)
            else:
                w, ms = reducible[0]
                pos, ri = ms[0]
            steps += 1
            if steps > budget:
                raise DivergenceError(f"normal form exceeded {budget} steps", trace)
            r = self.rules[ri]
            if check_order:
                for u in r.rhs.words():
                    new = w[:pos] + u + w[pos + len(r.lhs):]
                    if self.order.compare(new, w) is not Cmp.LT:
                        raise OrderViolationError(
                            f"{r.label} sends {format_word(w)} to {format_word(new)}, not smaller")
            trace.append((w, r.label, pos))
            rest = LinComb({x: c for x, c in pending.items() if x != w and self.matches(x)})
            pending = rest + self.reduce_once(LinComb.word(w, pending.coefficient(w)), ri, pos, w)
        return done, trace

    # -- ambiguities ------------------------------------------------------
    def enumerate_minimal_ambiguities(self) -> list[Ambiguity]:
        out = []
        seen = set()
        rules = self.rules
        for ri, r in enumerate(rules):
            for si, s in enumerate(rules):
                a, b = r.lhs, s.lhs
                for k in range(1, min(len(a), len(b))):
                    if a[len(a) - k:] == b[:k]:
                        amb = Ambiguity("overlap", a[:len(a) - k], a[len(a) - k:], b[k:],
                                        (ri, si), (0, len(a) - k))
                        out.append(amb)
                if ri != si and len(a) <= len(b):
                    for p in range(len(b) - len(a) + 1):
                        if b[p:p + len(a)] == a:
                            if a == b:
                                key = (min(ri, si), max(ri, si))
                                if key in seen:
                                    continue
                                seen.add(key)
                            out.append(Ambiguity("inclusion", b[:p], a, b[p + len(a):],
                                                 (ri, si), (p, 0)))
        return out

    def check_ambiguity(self, amb: Ambiguity, budget: int = DEFAULT_BUDGET,
                        relative: bool = False, trace: bool = False) -> AmbiguityReport:
        A = amb.word
        one = LinComb.word(A)
        (ri, si), (pr, ps) = amb.rules, amb.positions
        rho1 = self.reduce_once(one, ri, pr)
        rho2 = self.reduce_once(one, si, ps)
        nf1, tr1 = self.normal_form(rho1, budget)
        nf2, tr2 = self.normal_form(rho2, budget)
        residual = nf1 - nf2
        method = "joint" if residual.is_zero() else None
        if method is None and relative and self.relatively_resolvable(A, rho1 - rho2):
            method = "relative"
        return AmbiguityReport(amb, (rho1, rho2), (nf1, nf2), residual,
                               residual.is_zero(), method,
                               (tr1, tr2) if trace else ())

    def relatively_resolvable(self, A: Word, difference: LinComb) -> bool:
        """Bounded test of ``difference`` lying in the span of relations below ``A``.

        Relations ``B (W - f) C`` are collected for every ``B W C < A`` of
        length at most ``len(A)``; membership is decided by exact Gaussian
        elimination.  Returns False when a coefficient is not a rational
        constant (the linear algebra is then over a polynomial ring).
        """
        coeffs = [c for _, c in difference.items()]
        if not all(c.is_constant() for c in coeffs):
            return False
        rows = []
        for L in range(len(A) + 1):
            for w in _all_words(self.alphabet, L):
                if self.order.compare(w, A) is not Cmp.LT:
                    continue
                for pos, ri in self.matches(w):
                    r = self.rules[ri]
                    rel = LinComb.word(w) - r.rhs.wrap(w[:pos], w[pos + len(r.lhs):])
                    if not all(c.is_constant() for _, c in rel.items()):
                        return False
                    rows.append({x: c.constant_value() for x, c in rel.items()})
        target = {x: c.constant_value() for x, c in difference.items()}
        return _in_span(rows, target)

    def bergman_check(self, budget: int = DEFAULT_BUDGET, relative: bool = False,
                      summary_length: int = 4) -> BergmanVerdict:
        self.validate().raise_if_invalid()
        reports = [self.check_ambiguity(a, budget, relative) for a in self.enumerate_minimal_ambiguities()]
        ok = all(r.resolvable or r.method == "relative" for r in reports)
        counts: dict[int, int] = {}
        for w in self.enumerate_irreducible(summary_length):
            counts[len(w)] = counts.get(len(w), 0) + 1
        witness = next((r for r in reports if not (r.resolvable or r.method == "relative")), None)
        return BergmanVerdict(ok, reports, counts, witness)

    # -- irreducibles -----------------------------------------------------
    def is_irreducible(self, word: Word) -> bool:
        return not self.matches(tuple(word))

    def enumerate_irreducible(self, max_length: int | None = None, cap: int = 100_000) -> list[Word]:
        """Irreducible words, shortest first; ``None`` means no length bound.

        Irreducibles are closed under taking prefixes, so the search extends
        irreducible words one letter at a time.
        """
        key = self.order.sort_key() if self.order.kind == "deglex" else (lambda w: (len(w), w))
        level = [()]
        out = [()]
        L = 0
        while level and (max_length is None or L < max_length):
            nxt = []
            for w in level:
                for x in self.alphabet:
                    v = w + (x,)
                    if self.is_irreducible(v):
                        nxt.append(v)
            out.extend(nxt)
            if len(out) > cap:
                raise DivergenceError(f"more than {cap} irreducible words; give a length bound")
            level = nxt
            L += 1
        return sorted(out, key=key)

    # -- completion -------------------------------------------------------
    def complete(self, rounds: int = 20, budget: int = DEFAULT_BUDGET):
        """Add oriented residuals of unresolvable ambiguities until confluent.

        Rules whose lhs becomes reducible by a newer rule are retired and
        their relation is re-examined, and right-hand sides are kept in
        normal form.  Returns ``(system, status)``.
        """
        system = self
        added = []
        for rnd in range(rounds + 1):
            reports = [system.check_ambiguity(a, budget) for a in system.enumerate_minimal_ambiguities()]
            bad = [r for r in reports if not r.resolvable]
            if not bad:
                return system, {"confluent": True, "rounds": rnd, "added": added}
            if rnd == rounds:
                break
            for rep in bad:
                residual, _ = system.normal_form(rep.residual, budget)
                if residual.is_zero():
                    continue
                rule = system._orient(residual, f"c{len(added) + 1}")
                added.append(str(rule))
                system = system.with_rules(system.rules + [rule])._interreduce(budget)
        return system, {"confluent": False, "rounds": rounds, "added": added}

    def _orient(self, residual: LinComb, label: str) -> RewriteRule:
        words = residual.words()
        lead = None
        for w in words:
            if all(self.order.compare(w, v) in (Cmp.GT, Cmp.EQ) for v in words):
                lead = w
        if lead is None:
            raise CompletionStuckError(f"residual {residual} has no largest word")
        c = residual.coefficient(lead)
        if not c.is_constant():
            raise CompletionStuckError(f"leading coefficient {c} of {residual} is not invertible")
        rest = (residual - LinComb.word(lead, c)).scale(Scalar.const(-1 / c.constant_value()))
        return RewriteRule(lead, rest, label)

    def _interreduce(self, budget: int) -> "RewriteSystem":
        rules = list(self.rules)
        changed = True
        while changed:
            changed = False
            for i, r in enumerate(rules):
                others = rules[:i] + rules[i + 1:]
                sub = self.with_rules(others)
                if not sub.is_irreducible(r.lhs):
                    # retire r and keep its relation if it says something new
                    rules = others
                    diff, _ = sub.normal_form(LinComb.word(r.lhs) - r.rhs, budget)
                    if diff:
                        rules.append(sub._orient(diff, r.label))
                    changed = True
                    break
                nf, _ = sub.normal_form(r.rhs, budget)
                if nf != r.rhs:
                    rules[i] = RewriteRule(r.lhs, nf, r.label)
        return self.with_rules(rules)


def _all_words(alphabet, L):
    if L == 0:
        yield ()
        return
    for w in _all_words(alphabet, L - 1):
        for x in alphabet:
            yield w + (x,)


def _in_span(rows: list[dict], target: dict) -> bool:
    """Exact test: is ``target`` a rational combination of ``rows``?"""
    basis: list[tuple] = []  # (pivot key, row dict), rows reduced against earlier pivots

    def reduce(v):
        v = dict(v)
        for piv, row in basis:
            c = v.get(piv)
            if c:
                for k, x in row.items():
                    s = v.get(k, Fraction(0)) - c * x
                    if s:
                        v[k] = s
                    else:
                        v.pop(k, None)
        return v

    for r in rows:
        v = reduce(r)
        if not v:
            continue
        piv = min(v, key=lambda k: (len(k), k))
        inv = 1 / v[piv]
        v = {k: x * inv for k, x in v.items()}
        basis.append((piv, v))
    return not reduce(target)


# ---------------------------------------------------------------------------
# module-level spellings of the engine's operations

def validate_system(system: RewriteSystem) -> ValidationReport:
    return system.validate()


def normal_form(system: RewriteSystem, t, budget: int = DEFAULT_BUDGET):
    return system.normal_form(t, budget)


def enumerate_minimal_ambiguities(system: RewriteSystem) -> list[Ambiguity]:
    return system.enumerate_minimal_ambiguities()


def check_ambiguity(system: RewriteSystem, amb: Ambiguity, budget: int = DEFAULT_BUDGET) -> AmbiguityReport:
    return system.check_ambiguity(amb, budget)


def bergman_check(system: RewriteSystem, budget: int = DEFAULT_BUDGET) -> BergmanVerdict:
    return system.bergman_check(budget)


def enumerate_irreducible(system: RewriteSystem, max_length: int | None = None) -> list[Word]:
    return system.enumerate_irreducible(max_length)


def complete(system: RewriteSystem, rounds: int = 20):
    return system.complete(rounds)
