"""Colored strand categories with dots and Hecke-type relations.

A morphism from a bottom color sequence is stored as a map from crossing
words to coefficients in the dot ring of the top sequence.  Words are
tuples read top to bottom, as in :mod:`bergman.expressions`; while
rewriting, a word may also contain :class:`Dot` bands, which are pushed up
to the top and absorbed into the coefficient.

Dot generators are position-tagged variables (``x[2]`` is the generator
``x`` on the strand at position 2).  Relation coefficients and ring maps
are written in local positions ``[1]``, ``[2]``, ``[3]`` and shifted to
wherever the relation is applied.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

from .comparison import Cmp
from .errors import (ConfigurationError, DivergenceError, InternalConsistencyError,
                     NoMatchError, TypingError, UncertifiedError)
from .expressions import (all_permutations, comm_canonical, convex_split, evaluate,
                          format_expression, inversion_set, iter_redexes, leq,
                          reduced_word, sink)
from .scalar import ONE, ZERO, RingMapSpec, Scalar, shift_tags, split_tag, swap_endomorphism, tag

DEFAULT_BUDGET = 10 ** 6

# Lower-term words of each braid relation, in local letters (s = 1, t = 2).
BRAID_LOWER = {
    "5.8c": {"a": (1, 2), "b": (2, 1), "c": (1,), "d": (2,), "e": ()},
    "5.8d": {"p": (1, 2)},
    "5.8e": {"p": (2, 1)},
    "5.8f": {"q": ()},
    "5.8g": {},
}


def braid_relation_id(bottom: Sequence[str]) -> str:
    """Which braid relation applies to ``s t s`` on three strands of these colors."""
    x, y, z = bottom
    if x == y == z:
        return "5.8c"
    if x == y:
        return "5.8d"
    if y == z:
        return "5.8e"
    if x == z:
        return "5.8f"
    return "5.8g"


@dataclass(frozen=True)
class BraidEntry:
    lam: Fraction = Fraction(1)
    lower: Mapping[str, Scalar] = field(default_factory=dict)


@dataclass(frozen=True)
class DotMaps:
    """phi and (for one color) the twisted derivation, in local tags."""

    phi: RingMapSpec | None
    partial: RingMapSpec | None = None


@dataclass
class HeckePresentation:
    colors: tuple[str, ...]
    permissible: frozenset
    generators: dict[str, tuple[str, ...]]
    parameters: tuple[str, ...] = ()
    quadratic: dict = field(default_factory=dict)   # color -> (alpha, beta)
    square: dict = field(default_factory=dict)      # bottom (a, b) -> Q
    braid: dict = field(default_factory=dict)       # relation id -> {bottom triple or "*": BraidEntry}
    same_maps: dict = field(default_factory=dict)   # color -> DotMaps
    mixed_maps: dict = field(default_factory=dict)  # bottom (a, b) or "*" -> DotMaps
    name: str = ""

    def ring_generators(self, colors: Sequence[str]) -> list[str]:
        return [tag(g, p) for p, c in enumerate(colors, 1) for g in self.generators.get(c, ())]

    def braid_entry(self, bottom: Sequence[str]) -> tuple[str, BraidEntry]:
        rel = braid_relation_id(bottom)
        table = self.braid.get(rel, {})
        entry = table.get(tuple(bottom), table.get("*"))
        if entry is None:
            raise ConfigurationError(f"no {rel} relation for bottom colors {','.join(bottom)}")
        return rel, entry

    def mixed_map(self, a: str, b: str) -> DotMaps:
        m = self.mixed_maps.get((a, b), self.mixed_maps.get("*"))
        if m is None:
            if self.generators.get(a) or self.generators.get(b):
                raise ConfigurationError(f"no 5.8i map for the crossing {a},{b}")
            return DotMaps(None)
        return m

    def is_permissible(self, word: Sequence, bottom: Sequence[str]) -> bool:
        cols = list(bottom)
        for q in reversed(word):
            if isinstance(q, int):
                if (cols[q - 1], cols[q]) not in self.permissible:
                    return False
                cols[q - 1], cols[q] = cols[q], cols[q - 1]
        return True


def swap_maps(a_gens: Iterable[str], b_gens: Iterable[str]) -> RingMapSpec:
    """Dots follow their strand through the crossing."""
    return swap_endomorphism(a_gens, b_gens)


# ---------------------------------------------------------------------------
# validation

@dataclass
class PresentationReport:
    valid: bool
    problems: list[str]

    def raise_if_invalid(self):
        if not self.valid:
            raise ConfigurationError("; ".join(self.problems))


def _guarded_braid_colorings(p: HeckePresentation) -> list[tuple]:
    return [c for c in product(p.colors, repeat=3) if p.is_permissible((1, 2, 1), c)]


def validate_presentation(p: HeckePresentation) -> PresentationReport:
    problems = []
    colors = set(p.colors)
    if len(colors) != len(p.colors):
        problems.append("colors repeat")
    for a, b in p.permissible:
        if a not in colors or b not in colors:
            problems.append(f"permissible pair {a},{b} uses an unknown color")
    params = set(p.parameters)

    def check_coeff(what, f, target):
        for v in sorted(f.variables()):
            name, pos = split_tag(v)
            if pos is None:
                if v not in params:
                    problems.append(f"{what}: undeclared parameter {v}")
            elif target is not None:
                if not 1 <= pos <= len(target) or name not in p.generators.get(target[pos - 1], ()):
                    problems.append(f"{what}: {v} is not a dot generator of R_{''.join(target)}")

    same = [c for c in p.colors if (c, c) in p.permissible]
    for c in same:
        if c not in p.quadratic:
            problems.append(f"5.8a missing for color {c}")
    for c, (al, be) in p.quadratic.items():
        if c not in same:
            problems.append(f"5.8a given for color {c} whose self-crossing is not permitted")
        check_coeff(f"5.8a[{c}] alpha", al, (c, c))
        check_coeff(f"5.8a[{c}] beta", be, (c, c))
    sq_needed = {(a, b) for a, b in p.permissible if a != b and (b, a) in p.permissible}
    for k in sorted(sq_needed - set(p.square)):
        problems.append(f"5.8b missing for bottom colors {','.join(k)}")
    for k, q in p.square.items():
        if k not in sq_needed:
            problems.append(f"5.8b given for {','.join(k)} but the crossings are not both permitted")
        check_coeff(f"5.8b[{','.join(k)}]", q, k)
    needed = _guarded_braid_colorings(p)
    for rel in BRAID_LOWER:
        table = p.braid.get(rel, {})
        guarded = [c for c in needed if braid_relation_id(c) == rel]
        for c in guarded:
            if c not in table and "*" not in table:
                problems.append(f"{rel} missing for bottom colors {','.join(c)}")
        for k, entry in table.items():
            if k != "*" and (k not in guarded):
                problems.append(f"{rel} given for {','.join(k)} but its guard is not met")
            if entry.lam == 0:
                problems.append(f"{rel}[{k if k == '*' else ','.join(k)}]: lambda must be invertible")
            for name, f in entry.lower.items():
                if name not in BRAID_LOWER[rel]:
                    problems.append(f"{rel}: unknown coefficient {name}")
                check_coeff(f"{rel} {name}", f, tuple(reversed(k)) if k != "*" else None)
    for c in same:
        if p.generators.get(c) and c not in p.same_maps:
            problems.append(f"5.8h maps missing for color {c}")
    for c, m in p.same_maps.items():
        if c not in same:
            problems.append(f"5.8h given for color {c} whose self-crossing is not permitted")
            continue
        local = {tag(g, k) for g in p.generators.get(c, ()) for k in (1, 2)}
        for label, spec in (("phi", m.phi), ("partial", m.partial)):
            if spec is None:
                problems.append(f"5.8h[{c}] {label} missing")
                continue
            missing = local - set(spec.images)
            if missing:
                problems.append(f"5.8h[{c}] {label} has no image for {sorted(missing)[0]}")
            for v, img in spec.images.items():
                check_coeff(f"5.8h[{c}] {label}({v})", img, (c, c))
    for a, b in p.permissible:
        if a != b and (p.generators.get(a) or p.generators.get(b)):
            if (a, b) not in p.mixed_maps and "*" not in p.mixed_maps:
                problems.append(f"5.8i map missing for crossing {a},{b}")
    for k, m in p.mixed_maps.items():
        if k == "*":
            continue
        if k not in p.permissible or k[0] == k[1]:
            problems.append(f"5.8i given for {','.join(k)} which is not a permitted two-color crossing")
            continue
        a, b = k
        local = {tag(g, 1) for g in p.generators.get(a, ())} | {tag(g, 2) for g in p.generators.get(b, ())}
        missing = local - set(m.phi.images) if m.phi else local
        if missing:
            problems.append(f"5.8i[{a},{b}] has no image for {sorted(missing)[0]}")
        elif m.phi:
            for v, img in m.phi.images.items():
                check_coeff(f"5.8i[{a},{b}]({v})", img, (b, a))
    return PresentationReport(not problems, problems)


def permissible_permutations(p: HeckePresentation, bottom: Sequence[str], top: Sequence[str]) -> list[tuple]:
    """Permutations carrying ``bottom`` to ``top`` whose crossings are all permitted."""
    if len(bottom) != len(top):
        raise TypingError("source and target have different numbers of strands")
    out = []
    n = len(bottom)
    for w in all_permutations(n):
        image = [None] * n
        for i in range(n):
            image[w[i] - 1] = bottom[i]
        if tuple(image) != tuple(top):
            continue
        if all((bottom[i - 1], bottom[j - 1]) in p.permissible for i, j in inversion_set(w)):
            out.append(w)
    return out


# ---------------------------------------------------------------------------
# terms

@dataclass(frozen=True)
class Dot:
    """A band of dots: multiplication by ``f`` in the ring of the current level."""

    f: Scalar

    def __repr__(self):
        return f"<{self.f}>"


def _word_str(word) -> str:
    parts = []
    for x in word:
        parts.append(f"<{x.f}>" if isinstance(x, Dot) else format_expression((x,)))
    return "".join(parts) or "1"


def _word_key(word):
    return (len(word), tuple((0, x, "") if isinstance(x, int) else (1, 0, str(x.f)) for x in word))


@dataclass
class HeckeTerm:
    """A morphism out of ``bottom``: crossing word -> coefficient at the top."""

    bottom: tuple
    terms: dict

    def __post_init__(self):
        self.terms = {k: v for k, v in self.terms.items() if v}

    def __eq__(self, other):
        return isinstance(other, HeckeTerm) and self.bottom == other.bottom and self.terms == other.terms

    def __sub__(self, other: "HeckeTerm") -> "HeckeTerm":
        d = dict(self.terms)
        for k, v in other.terms.items():
            d[k] = d.get(k, ZERO) - v
        return HeckeTerm(self.bottom, d)

    def is_zero(self) -> bool:
        return not self.terms

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: _word_key(kv[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.items():
            ws = _word_str(w)
            if c == ONE:
                parts.append(ws)
            elif c.is_constant():
                parts.append(f"{c}" if ws == "1" else f"{c}*{ws}")
            else:
                parts.append(f"({c})" if ws == "1" else f"({c})*{ws}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self):
        return [{"word": _word_str(w), "coefficient": str(c)} for w, c in self.items()]


# ---------------------------------------------------------------------------
# the rewriting engine

def _shift_spec(spec: RingMapSpec, off: int) -> RingMapSpec:
    if off == 0:
        return spec
    twist = _shift_spec(spec.twist, off) if spec.twist is not None else None
    images = {tag(*_untag(k, off)): shift_tags(v, off) for k, v in spec.images.items()}
    return RingMapSpec(spec.kind, images, twist=twist)


def _untag(v: str, off: int):
    name, pos = split_tag(v)
    return name, pos + off


def _has_dots(f: Scalar) -> bool:
    return any(split_tag(v)[1] is not None for v in f.variables())


class Reducer:
    """Rewrites decorated words with a fixed bottom color sequence."""

    def __init__(self, p: HeckePresentation, bottom: Sequence[str], check_order: bool = True):
        self.p = p
        self.bottom = tuple(bottom)
        self.n = len(bottom)
        self.check_order = check_order
        self._maps: dict = {}

    # -- colors -----------------------------------------------------------
    def colors_at(self, word, k: int) -> list[str]:
        """Colors just below letter ``k`` (``k = len(word)`` is the bottom)."""
        cols = list(self.bottom)
        for q in reversed(word[k:]):
            if isinstance(q, int):
                cols[q - 1], cols[q] = cols[q], cols[q - 1]
        return cols

    def _require_permissible(self, word, cols):
        cols = list(cols)
        for q in reversed(word):
            if (cols[q - 1], cols[q]) not in self.p.permissible:
                raise InternalConsistencyError(
                    f"relation produced the forbidden crossing {cols[q - 1]},{cols[q]}")
            cols[q - 1], cols[q] = cols[q], cols[q - 1]

    # -- relations --------------------------------------------------------
    def _band(self, coef: Scalar):
        """Letters and scalar factor for inserting ``coef`` as a dot band."""
        if _has_dots(coef):
            return (Dot(coef),), ONE
        return (), coef

    def crossing_relation(self, kind: str, q: int, cols: Sequence[str]):
        """Right-hand side of the relation at letter ``q``: list of (coef, letters)."""
        off = q - 1
        if kind == "cancel":
            a, b = cols[q - 1], cols[q]
            if a == b:
                al, be = self.p.quadratic[a]
                out = [(shift_tags(al, off), (q,)), (shift_tags(be, off), ())]
            else:
                out = [(shift_tags(self.p.square[(a, b)], off), ())]
        else:
            local = tuple(cols[q - 1:q + 2])
            rel, entry = self.p.braid_entry(local)
            out = [(Scalar.const(entry.lam), (q + 1, q, q + 1))]
            for name, f in entry.lower.items():
                if f:
                    out.append((shift_tags(f, off), tuple(x + off for x in BRAID_LOWER[rel][name])))
        for _, letters in out:
            self._require_permissible(letters, cols)
        return [(c, w) for c, w in out if c]

    def _map(self, key, spec, off):
        k = (key, id(spec), off)
        m = self._maps.get(k)
        if m is None:
            m = self._maps[k] = _shift_spec(spec, off)
        return m

    def push_through(self, q: int, f: Scalar, cols: Sequence[str]):
        """``sigma_q f`` as a list of (coef above, keeps crossing)."""
        a, b = cols[q - 1], cols[q]
        off = q - 1
        if a == b:
            maps = self.p.same_maps.get(a)
            if maps is None:
                return [(f, True)]
            phi = self._map("phi", maps.phi, off)
            d = self._map("d", maps.partial, off)
            return [(phi.apply(f), True), (d.apply(f), False)]
        maps = self.p.mixed_map(a, b)
        if maps.phi is None:
            return [(f, True)]
        return [(self._map("phi", maps.phi, off).apply(f), True)]

    # -- moves ------------------------------------------------------------
    def moves(self, word) -> list[tuple]:
        out = []
        for k, x in enumerate(word):
            if isinstance(x, Dot):
                if k == 0:
                    out.append(("absorb", k))
                elif isinstance(word[k - 1], Dot):
                    out.append(("merge", k))
                else:
                    out.append(("push", k))
        for kind, idxs in iter_redexes(word):
            out.append((kind, idxs))
        return out

    def apply(self, word, move) -> list[tuple]:
        """Result of one move: list of (word, scalar factor)."""
        kind, arg = move
        if kind == "absorb":
            return [(word[1:], word[0].f)]
        if kind == "merge":
            k = arg
            band, c = self._band(word[k - 1].f * word[k].f)
            return [(word[:k - 1] + band + word[k + 1:], c)]
        if kind == "push":
            k = arg
            q = word[k - 1]
            cols = self.colors_at(word, k)
            out = []
            for g, keep in self.push_through(q, word[k].f, cols):
                if not g:
                    continue
                band, c = self._band(g)
                mid = band + ((q,) if keep else ())
                out.append((word[:k - 1] + mid + word[k + 1:], c))
            return out
        split = convex_split(word, arg)
        if split is None:
            raise NoMatchError(f"letters {arg} of {_word_str(word)} cannot be brought together")
        rep, start = split
        size = 2 if kind == "cancel" else 3
        factor = rep[start:start + size]
        q = factor[0]
        if kind == "cancel" and factor != (q, q):
            raise NoMatchError("no s_i s_i factor")
        if kind == "braid" and factor != (q, q + 1, q):
            raise NoMatchError("no s_i s_{i+1} s_i factor")
        cols = self.colors_at(rep, start + size)
        out = []
        for coef, letters in self.crossing_relation(kind, q, cols):
            band, c = self._band(coef)
            out.append((rep[:start] + band + letters + rep[start + size:], c))
        return out

    # -- order ------------------------------------------------------------
    @staticmethod
    def _cross(word):
        return tuple(x for x in word if isinstance(x, int))

    @staticmethod
    def _dot_weight(word):
        return sum(k for k, x in enumerate(word) if isinstance(x, Dot))

    def _assert_decrease(self, old, new):
        a, b = self._cross(new), self._cross(old)
        c = leq(a, b, self.n) if len(a) == len(b) else (Cmp.LT if len(a) < len(b) else Cmp.GT)
        if c is Cmp.LT:
            return
        if c is Cmp.EQ and (len(new) < len(old) or self._dot_weight(new) < self._dot_weight(old)):
            return
        raise InternalConsistencyError(
            f"rewrite {_word_str(old)} -> {_word_str(new)} does not decrease the order ({c})")

    # -- driver -----------------------------------------------------------
    def reduce(self, pending: Mapping, budget: int = DEFAULT_BUDGET, strategy: str = "default",
               rng: random.Random | None = None, trace: list | None = None,
               only: Sequence[str] | None = None) -> HeckeTerm:
        """Rewrite ``{decorated word: coefficient}`` to normal form.

        The default strategy takes the words in a fixed order and applies
        the first available move: dot moves from the top down, then
        cancellations, then braid flips.  ``"random"`` picks the word and
        the move at random.  ``only`` restricts the move kinds (used to
        push dots without touching crossings).
        """
        work: dict = {}
        for w, c in pending.items():
            c = Scalar.coerce(c)
            if c:
                key = _canon(tuple(w))
                work[key] = work.get(key, ZERO) + c
        done: dict = {}
        steps = 0
        rng = rng or random.Random(0)
        while work:
            if strategy == "random":
                word = rng.choice(sorted(work, key=_word_key))
                coef = work.pop(word)
            else:
                word, coef = work.popitem()
            if not coef:
                continue
            moves = self.moves(word)
            if only is not None:
                moves = [m for m in moves if m[0] in only]
            if not moves:
                done[word] = done.get(word, ZERO) + coef
                continue
            if strategy == "random":
                move = rng.choice(moves)
            else:
                move = next((m for m in moves if m[0] not in ("cancel", "braid")), None)
                move = move or next((m for m in moves if m[0] == "cancel"), moves[0])
            steps += 1
            if steps > budget:
                raise DivergenceError(f"reduction exceeded {budget} steps", trace or [])
            results = self.apply(word, move)
            if trace is not None:
                trace.append((_word_str(word), move[0], [_word_str(w) for w, _ in results]))
            for new, factor in results:
                if self.check_order:
                    self._assert_decrease(word, new)
                key = _canon(new)
                val = work.get(key, ZERO) + coef * factor
                if val:
                    work[key] = val
                else:
                    work.pop(key, None)
        return HeckeTerm(self.bottom, done)


def _canon(word):
    if any(isinstance(x, Dot) for x in word):
        return tuple(word)
    return comm_canonical(word)


def _as_pending(word, coef=ONE) -> dict:
    return {tuple(word): Scalar.coerce(coef)}


def hecke_reduce(p: HeckePresentation, bottom: Sequence[str], t, budget: int = DEFAULT_BUDGET,
                 strategy: str = "default", rng: random.Random | None = None,
                 check_order: bool = True, trace: list | None = None) -> HeckeTerm:
    """Normal form of a decorated word, a ``{word: coefficient}`` map or a HeckeTerm.

    Keys of the result are commutation-canonical sinks of reduced
    permissible expressions; all dots sit in the coefficients.
    """
    r = Reducer(p, bottom, check_order)
    if isinstance(t, HeckeTerm):
        t = t.terms
    elif not isinstance(t, Mapping):
        t = _as_pending(t)
    for w in t:
        if not p.is_permissible(w, bottom):
            raise TypingError(f"{_word_str(w)} is not permissible on {','.join(bottom)}")
    return r.reduce(t, budget, strategy, rng, trace)


def push_dots_left(p: HeckePresentation, bottom: Sequence[str], word) -> HeckeTerm:
    """Collect all dots into the top coefficient using only the dot relations."""
    r = Reducer(p, bottom, check_order=False)
    return r.reduce(_as_pending(word), only=("absorb", "merge", "push"))


# ---------------------------------------------------------------------------
# ambiguities

# name -> (letters top to bottom, strands, first occurrence, second occurrence)
TEMPLATES = {
    "sss": ((1, 1, 1), 2, ("cancel", (0, 1)), ("cancel", (1, 2))),
    "ssts": ((1, 1, 2, 1), 3, ("cancel", (0, 1)), ("braid", (1, 2, 3))),
    "stss": ((1, 2, 1, 1), 3, ("braid", (0, 1, 2)), ("cancel", (2, 3))),
    "ststs": ((1, 2, 1, 2, 1), 3, ("braid", (0, 1, 2)), ("braid", (2, 3, 4))),
    "stsuts": ((1, 2, 1, 3, 2, 1), 4, ("braid", (0, 1, 2)), ("braid", (2, 4, 5))),
    "ssf": ((1, 1, "f"), 2, ("cancel", (0, 1)), ("push", 2)),
    "stsf": ((1, 2, 1, "f"), 3, ("braid", (0, 1, 2)), ("push", 3)),
    "sfg": ((1, "f", "g"), 2, ("push", 1), ("merge", 2)),
}
WORD_TEMPLATES = ("sss", "ssts", "stss", "ststs", "stsuts")
DOT_TEMPLATES = ("ssf", "stsf", "sfg")


@dataclass(frozen=True)
class AmbiguityInstance:
    template: str
    bottom: tuple
    dots: tuple = ()

    def word(self) -> tuple:
        letters = TEMPLATES[self.template][0]
        dots = iter(self.dots)
        return tuple(Dot(next(dots)) if isinstance(x, str) else x for x in letters)

    def label(self) -> str:
        s = f"{self.template}[{','.join(self.bottom)}]"
        if self.dots:
            s += "(" + "; ".join(str(f) for f in self.dots) + ")"
        return s


@dataclass
class InstanceReport:
    instance: AmbiguityInstance
    resolutions: tuple
    normal_forms: tuple
    residual: HeckeTerm
    resolvable: bool
    traces: tuple = ()

    def to_json(self, trace: bool = False) -> dict:
        d = {
            "template": self.instance.template,
            "coloring": list(self.instance.bottom),
            "dots": [str(f) for f in self.instance.dots],
            "resolvable": self.resolvable,
            "residual": self.residual.to_json(),
        }
        if trace:
            d["normal_forms"] = [nf.to_json() for nf in self.normal_forms]
            d["traces"] = [[list(step) for step in tr] for tr in self.traces]
        return d


def instantiate_ambiguities(p: HeckePresentation, mode: str = "generators"):
    """All template instances whose colorings are permissible.

    Returns ``(instances, skipped)`` where ``skipped`` counts dotted
    colorings left out because the bottom ring has no dot generators.
    """
    if mode not in ("generators", "symbolic"):
        raise ConfigurationError(f"unknown dot mode {mode!r}")
    out = []
    skipped = {}
    for name in WORD_TEMPLATES + DOT_TEMPLATES:
        letters, n, _, _ = TEMPLATES[name]
        crossings = tuple(x for x in letters if isinstance(x, int))
        ndots = len(letters) - len(crossings)
        for bottom in product(p.colors, repeat=n):
            if not p.is_permissible(crossings, bottom):
                continue
            if not ndots:
                out.append(AmbiguityInstance(name, bottom))
                continue
            gens = p.ring_generators(bottom)
            if not gens:
                skipped[name] = skipped.get(name, 0) + 1
                continue
            if mode == "symbolic":
                forms = []
                for d in range(ndots):
                    f = ZERO
                    for k, g in enumerate(gens, 1):
                        f = f + Scalar.var(f"_{'fg'[d]}{k}") * Scalar.var(g)
                    forms.append(f)
                out.append(AmbiguityInstance(name, bottom, tuple(forms)))
            else:
                for combo in product(gens, repeat=ndots):
                    out.append(AmbiguityInstance(name, bottom, tuple(Scalar.var(g) for g in combo)))
    return out, skipped


def check_ambiguity_instance(p: HeckePresentation, inst: AmbiguityInstance, budget: int = DEFAULT_BUDGET,
                             trace: bool = False, check_order: bool = True) -> InstanceReport:
    _, _, occ1, occ2 = TEMPLATES[inst.template]
    r = Reducer(p, inst.bottom, check_order)
    word = inst.word()
    resolutions, nfs, traces = [], [], []
    for occ in (occ1, occ2):
        first = {}
        for w, c in r.apply(word, occ):
            first[w] = first.get(w, ZERO) + c
        tr = [] if trace else None
        if tr is not None:
            tr.append((_word_str(word), occ[0], [_word_str(w) for w in first]))
        resolutions.append(first)
        nfs.append(r.reduce(first, budget, trace=tr))
        traces.append(tr or [])
    residual = nfs[0] - nfs[1]
    return InstanceReport(inst, tuple(resolutions), tuple(nfs), residual, residual.is_zero(),
                          tuple(traces) if trace else ())


@dataclass
class HeckeVerdict:
    bergman_type: bool
    reports: list[InstanceReport]
    skipped: dict

    @property
    def failures(self):
        return [r for r in self.reports if not r.resolvable]


def check_presentation(p: HeckePresentation, mode: str = "generators", budget: int = DEFAULT_BUDGET,
                       trace: bool = False) -> HeckeVerdict:
    validate_presentation(p).raise_if_invalid()
    insts, skipped = instantiate_ambiguities(p, mode)
    reports = [check_ambiguity_instance(p, a, budget, trace) for a in insts]
    return HeckeVerdict(all(r.resolvable for r in reports), reports, skipped)


# ---------------------------------------------------------------------------
# conditions

def _is_auxiliary(v: str) -> bool:
    return v.startswith("_") or split_tag(v)[1] is not None


def residual_conditions(residuals: Iterable) -> list[Scalar]:
    """Coefficient polynomials (in parameters only) that must vanish."""
    seen = {}
    for res in residuals:
        for _, c in res:
            for piece in c.split(_is_auxiliary).values():
                if piece:
                    g = piece.integer_normalized()
                    seen.setdefault(g, None)
    return sorted(seen, key=lambda f: (f.degree(), len(f.terms), str(f)))


def reduced_generators(gens: Sequence[Scalar]) -> list[Scalar]:
    """Reduced Groebner basis over the rationals of the ideal ``gens`` generate."""
    import sympy

    if not gens:
        return []
    exprs = [g.to_sympy() for g in gens]
    syms = sorted(set().union(*(e.free_symbols for e in exprs)), key=lambda s: s.name)
    if not syms:
        return [Scalar.const(1)] if any(not g.is_zero() for g in gens) else []
    G = sympy.groebner(exprs, *syms, order="grevlex", domain="QQ")
    return [Scalar.from_sympy(e).integer_normalized() for e in G.exprs]


@dataclass
class ConditionSet:
    raw: list[Scalar]
    reduced: list[Scalar]

    def to_json(self) -> dict:
        return {"generators": [str(g) for g in self.raw], "reduced": [str(g) for g in self.reduced]}


def derive_conditions(p: HeckePresentation, budget: int = DEFAULT_BUDGET) -> ConditionSet:
    validate_presentation(p).raise_if_invalid()
    insts, _ = instantiate_ambiguities(p, "symbolic")
    residuals = [check_ambiguity_instance(p, a, budget).residual.items() for a in insts]
    raw = residual_conditions(residuals)
    return ConditionSet(raw, reduced_generators(raw))


def specialize(p: HeckePresentation, bindings: Mapping[str, Scalar | int | str]) -> HeckePresentation:
    """Substitute parameter values into every coefficient."""
    from .scalar import substitute

    sub = lambda f: substitute(f, bindings)
    braid = {rel: {k: BraidEntry(e.lam, {n: sub(f) for n, f in e.lower.items()}) for k, e in t.items()}
             for rel, t in p.braid.items()}
    # substitution is simultaneous, so a bound name can survive inside another value
    used = set().union(*(Scalar.coerce(v).variables() for v in bindings.values())) if bindings else set()
    params = tuple(x for x in p.parameters if x not in bindings or x in used)
    return HeckePresentation(
        p.colors, p.permissible, p.generators, params,
        {c: (sub(a), sub(b)) for c, (a, b) in p.quadratic.items()},
        {k: sub(q) for k, q in p.square.items()},
        braid, p.same_maps, p.mixed_maps, p.name)


# ---------------------------------------------------------------------------
# bases

def enumerate_basis(p: HeckePresentation, bottom: Sequence[str], top: Sequence[str],
                    verdict: HeckeVerdict | None = None, force: bool = False) -> list[tuple]:
    """One sink reduced expression per permissible permutation ``bottom -> top``."""
    if not force:
        if verdict is None:
            raise UncertifiedError("no verdict supplied; run the ambiguity checks first or force")
        if not verdict.bergman_type:
            first = verdict.failures[0].instance.label()
            raise UncertifiedError(f"presentation failed its checks (first failure {first})")
    if sorted(bottom) != sorted(top):
        return []
    n = len(bottom)
    return [sink(reduced_word(w), n)[0] for w in permissible_permutations(p, bottom, top)]
