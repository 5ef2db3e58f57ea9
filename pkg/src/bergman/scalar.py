"""Exact coefficient arithmetic.

Every coefficient in the package is a :class:`Scalar`: a sparse polynomial
with rational coefficients in named parameters.  Dot-ring generators are
parameters too; they carry a strand-position tag written ``x[2]``.

>>> a = Scalar.parse("x[1] - x[2]")
>>> b = Scalar.parse("x[1] + x[2]")
>>> str(a * b)
'x[1]^2 - x[2]^2'
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Iterable, Mapping, Union

from .errors import ConfigurationError, TypingError

Monomial = tuple  # tuple[tuple[str, int], ...] sorted by variable name
Number = Union[int, Fraction]

_TAGGED = re.compile(r"^(?P<name>[^\W\d]\w*)\[(?P<pos>\d+)\]$")


@dataclass(frozen=True)
class Param:
    """A named parameter; dot-ring generators also record (color, position)."""

    name: str
    color: str | None = None
    position: int | None = None

    def __post_init__(self):
        if self.position is not None and self.position < 1:
            raise ConfigurationError(f"position tag of {self.name} must be positive")

    @property
    def symbol(self) -> str:
        if self.position is None:
            return self.name
        return tag(self.name, self.position)


def tag(name: str, position: int) -> str:
    return f"{name}[{position}]"


def split_tag(var: str) -> tuple[str, int | None]:
    m = _TAGGED.match(var)
    if m is None:
        return var, None
    return m.group("name"), int(m.group("pos"))


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_deg(m: Monomial) -> int:
    return sum(e for _, e in m)


def _term_key(item):
    mono = item[0]
    return (-_mono_deg(mono), mono)


class Scalar:
    """Immutable polynomial over the rationals in named parameters.

    Terms are kept in canonical form: no zero coefficients, one entry per
    monomial, sorted by descending degree and then by the variable list.
    Two scalars are equal exactly when their term tuples agree.
    """

    __slots__ = ("_terms", "_dict", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        d = {}
        if terms:
            for mono, c in terms.items():
                if c:
                    d[mono] = Fraction(c)
        self._dict = d
        self._terms = tuple(sorted(d.items(), key=_term_key))
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def _from_clean(cls, d: dict) -> "Scalar":
        obj = cls.__new__(cls)
        obj._dict = d
        obj._terms = tuple(sorted(d.items(), key=_term_key))
        obj._hash = None
        return obj

    @classmethod
    def const(cls, c: Number) -> "Scalar":
        return cls({(): c})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "Scalar":
        if power == 0:
            return cls.const(1)
        return cls({((name, power),): 1})

    @classmethod
    def coerce(cls, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return cls.const(x)
        if isinstance(x, str):
            return cls.parse(x)
        raise TypeError(f"cannot make a Scalar from {x!r}")

    @classmethod
    def parse(cls, text: str) -> "Scalar":
        return _Parser(text).parse()

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> tuple:
        return self._terms

    def is_zero(self) -> bool:
        return not self._dict

    def __bool__(self):
        return bool(self._dict)

    def is_constant(self) -> bool:
        return all(not m for m in self._dict)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._dict.get((), Fraction(0))

    def variables(self) -> set[str]:
        return {v for m in self._dict for v, _ in m}

    def degree(self) -> int:
        return max((_mono_deg(m) for m in self._dict), default=-1)

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._dict.get(mono, Fraction(0))

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        if not other._dict:
            return self
        if not self._dict:
            return other
        d = dict(self._dict)
        for m, c in other._dict.items():
            s = d.get(m, 0) + c
            if s:
                d[m] = s
            else:
                d.pop(m, None)
        return Scalar._from_clean(d)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._from_clean({m: -c for m, c in self._dict.items()})

    def __sub__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return other
        if not self._dict or not other._dict:
            return ZERO
        d: dict = {}
        for m1, c1 in self._dict.items():
            for m2, c2 in other._dict.items():
                m = _mono_mul(m1, m2)
                s = d.get(m, 0) + c1 * c2
                if s:
                    d[m] = s
                else:
                    d.pop(m, None)
        return Scalar._from_clean(d)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            if not other.is_constant() or other.is_zero():
                raise ZeroDivisionError(f"can only divide by a nonzero constant, not {other}")
            other = other.constant_value()
        return self * Scalar.const(1 / Fraction(other))

    def __eq__(self, other):
        other = _lift(other)
        if other is NotImplemented:
            return False
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    # -- transformations --------------------------------------------------
    def map_variables(self, fn) -> "Scalar":
        """Rename variables through ``fn``; must be injective on our variables."""
        d: dict = {}
        for m, c in self._dict.items():
            nm = tuple(sorted((fn(v), e) for v, e in m))
            d[nm] = d.get(nm, 0) + c
        return Scalar({k: v for k, v in d.items() if v})

    def split(self, selector) -> dict[Monomial, "Scalar"]:
        """Group terms by their monomial in the variables picked by ``selector``.

        Returns ``{monomial in selected vars: coefficient in the other vars}``.
        """
        out: dict = {}
        for m, c in self._dict.items():
            sel = tuple((v, e) for v, e in m if selector(v))
            rest = tuple((v, e) for v, e in m if not selector(v))
            out.setdefault(sel, {})
            out[sel][rest] = c
        return {k: Scalar._from_clean(v) for k, v in out.items()}

    def integer_normalized(self) -> "Scalar":
        """Clear denominators and make the leading coefficient positive.

        No content is divided out, so torsion such as ``2*b`` stays visible.
        """
        if not self._dict:
            return self
        den = reduce(lcm, (c.denominator for c in self._dict.values()), 1)
        sign = -1 if self._terms[0][1] < 0 else 1
        return Scalar._from_clean({m: c * den * sign for m, c in self._dict.items()})

    def monic(self) -> "Scalar":
        if not self._dict:
            return self
        lead = self._terms[0][1]
        return Scalar._from_clean({m: c / lead for m, c in self._dict.items()})

    # -- printing ---------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for i, (m, c) in enumerate(self._terms):
            neg = c < 0
            a = -c if neg else c
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            if i == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f" - {body}" if neg else f" + {body}")
        return "".join(parts)

    def __repr__(self):
        return f"Scalar({str(self)!r})"

    def to_sympy(self):
        import sympy

        syms = {v: sympy.Symbol(v) for v in self.variables()}
        expr = sympy.Integer(0)
        for m, c in self._terms:
            t = sympy.Rational(c.numerator, c.denominator)
            for v, e in m:
                t = t * syms[v] ** e
            expr += t
        return expr

    @classmethod
    def from_sympy(cls, expr) -> "Scalar":
        import sympy

        poly = sympy.Poly(sympy.expand(expr), *sorted(expr.free_symbols, key=str)) if expr.free_symbols else None
        if poly is None:
            r = sympy.Rational(expr)
            return cls.const(Fraction(int(r.p), int(r.q)))
        names = [str(g) for g in poly.gens]
        d = {}
        for exps, c in poly.terms():
            r = sympy.Rational(c)
            mono = tuple(sorted((names[i], e) for i, e in enumerate(exps) if e))
            d[mono] = Fraction(int(r.p), int(r.q))
        return cls(d)


def _lift(x):
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return Scalar.const(x)
    return NotImplemented


ZERO = Scalar()
ONE = Scalar.const(1)


def scalar_arith(a: Scalar, b: Scalar, op: str) -> Scalar:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# substitution and tagging

def substitute(f: Scalar, bindings: Mapping[str, Scalar | Number | str]) -> Scalar:
    """Simultaneously replace variables by scalars.

    Raises :class:`ConfigurationError` when the bindings refer to each other
    in a cycle (``x -> y + 1, y -> x``), since the intended value is then
    ambiguous.
    """
    if not bindings:
        return f
    table = {k: Scalar.coerce(v) for k, v in bindings.items()}
    _check_acyclic(table)
    out = ZERO
    cache: dict[tuple[str, int], Scalar] = {}
    for m, c in f.terms:
        t = Scalar.const(c)
        for v, e in m:
            if v in table:
                key = (v, e)
                if key not in cache:
                    cache[key] = table[v] ** e
                t = t * cache[key]
            else:
                t = t * Scalar.var(v, e)
        out = out + t
    return out


def _check_acyclic(table: Mapping[str, Scalar]) -> None:
    state: dict[str, int] = {}

    def visit(v, path):
        if state.get(v) == 2:
            return
        if state.get(v) == 1:
            raise ConfigurationError("cyclic binding: " + " -> ".join(path + [v]))
        state[v] = 1
        for w in sorted(table[v].variables()):
            if w in table:
                visit(w, path + [v])
        state[v] = 2

    for v in table:
        visit(v, [])


def shift_tags(f: Scalar, offset: int) -> Scalar:
    """Add ``offset`` to every position tag (untagged parameters are untouched)."""
    if offset == 0:
        return f

    def fn(v):
        name, pos = split_tag(v)
        return v if pos is None else tag(name, pos + offset)

    return f.map_variables(fn)


def tensor_embed(f: Scalar, position: int, ambient: Iterable[str], color: str,
                 generators: Iterable[str] | None = None) -> Scalar:
    """Embed an element of a single-strand dot ring into the ring of a strand sequence.

    ``f`` is written in untagged generators (``x``) or tagged at position 1
    (``x[1]``).  The result uses generators tagged at ``position``.  When
    ``generators`` is given, only those names are treated as dot
    generators; everything else is a ground parameter.
    """
    ambient = list(ambient)
    if not 1 <= position <= len(ambient):
        raise TypingError(f"position {position} outside a sequence of {len(ambient)} strands")
    if ambient[position - 1] != color:
        raise TypingError(
            f"strand {position} has color {ambient[position - 1]!r}, not {color!r}")
    gens = set(generators) if generators is not None else None

    def fn(v):
        name, pos = split_tag(v)
        if pos is None:
            if gens is not None and name not in gens:
                return v
            return tag(name, position)
        if pos != 1:
            raise TypingError(f"{v} is not a single-strand generator")
        return tag(name, position)

    return f.map_variables(fn)


# ---------------------------------------------------------------------------
# ring maps

@dataclass(frozen=True)
class RingMapSpec:
    """A ring endomorphism or twisted derivation given on generators.

    ``images`` maps each generator of ``domain`` to a scalar.  Variables
    outside ``domain`` are constants: endomorphisms fix them and
    derivations kill them.  A derivation carries its twisting endomorphism
    and extends by ``d(fg) = d(f) g + twist(f) d(g)``.
    """

    kind: str
    images: Mapping[str, Scalar]
    domain: frozenset = None
    twist: "RingMapSpec | None" = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.kind not in ("endomorphism", "derivation"):
            raise ConfigurationError(f"unknown ring map kind {self.kind!r}")
        imgs = {k: Scalar.coerce(v) for k, v in self.images.items()}
        object.__setattr__(self, "images", imgs)
        dom = frozenset(self.domain) if self.domain is not None else frozenset(imgs)
        object.__setattr__(self, "domain", dom)
        missing = sorted(dom - set(imgs))
        if missing:
            raise ConfigurationError(f"{self.kind} has no image for generator {missing[0]}")
        if self.kind == "derivation":
            if self.twist is None or self.twist.kind != "endomorphism":
                raise ConfigurationError("a derivation needs an endomorphism twist")
            if not dom <= self.twist.domain:
                raise ConfigurationError("derivation and twist act on different generators")

    def __hash__(self):
        return id(self)

    def _endo_mono(self, mono: Monomial) -> Scalar:
        c = self._cache.get(mono)
        if c is None:
            c = ONE
            for v, e in mono:
                img = self.images[v] if v in self.domain else Scalar.var(v)
                c = c * img ** e
            self._cache[mono] = c
        return c

    def _der_mono(self, mono: Monomial) -> Scalar:
        c = self._cache.get(mono)
        if c is not None:
            return c
        inner = tuple((v, e) for v, e in mono if v in self.domain)
        outer = tuple((v, e) for v, e in mono if v not in self.domain)
        if not inner:
            c = ZERO
        elif outer:
            c = Scalar({outer: 1}) * self._der_mono(inner)
        else:
            v, e = inner[0]
            rest = ((v, e - 1),) + inner[1:] if e > 1 else inner[1:]
            # d(v * rest) = d(v) rest + twist(v) d(rest)
            c = self.images[v] * Scalar({rest: 1}) + self.twist.images[v] * self._der_mono(rest)
        self._cache[mono] = c
        return c

    def apply(self, f: Scalar) -> Scalar:
        f = Scalar.coerce(f)
        out = ZERO
        mono_fn = self._endo_mono if self.kind == "endomorphism" else self._der_mono
        for m, c in f.terms:
            out = out + mono_fn(m) * c
        return out


def apply_ring_map(m: RingMapSpec, f: Scalar) -> Scalar:
    return m.apply(f)


def swap_endomorphism(generators_left: Iterable[str], generators_right: Iterable[str]) -> RingMapSpec:
    """The endomorphism moving strand-1 generators to strand 2 and vice versa."""
    images = {}
    for g in generators_left:
        images[tag(g, 1)] = Scalar.var(tag(g, 2))
    for g in generators_right:
        images[tag(g, 2)] = Scalar.var(tag(g, 1))
    return RingMapSpec("endomorphism", images)


# ---------------------------------------------------------------------------
# literal parser

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[^\W\d]\w*(?:\[\d+\])?)|(?P<op>[-+*/^()]))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ConfigurationError(f"cannot parse polynomial {self.text!r} at offset {pos}")
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> Scalar:
        if not self.toks:
            raise ConfigurationError("empty polynomial literal")
        out = self.sum()
        if self.i != len(self.toks):
            raise ConfigurationError(f"unexpected {self.peek()[1]!r} in {self.text!r}")
        return out

    def sum(self):
        sign = 1
        if self.peek() == ("op", "+"):
            self.take()
        elif self.peek() == ("op", "-"):
            self.take()
            sign = -1
        out = self.product() * sign
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.product()
            out = out + t if op == "+" else out - t
        return out

    def product(self):
        out = self.power()
        while True:
            kind, val = self.peek()
            if (kind, val) == ("op", "*"):
                self.take()
                out = out * self.power()
            elif (kind, val) == ("op", "/"):
                self.take()
                k, v = self.take()
                if k != "num" or int(v) == 0:
                    raise ConfigurationError(f"division only by a nonzero integer in {self.text!r}")
                out = out * Scalar.const(Fraction(1, int(v)))
            elif kind in ("num", "id") or (kind, val) == ("op", "("):
                out = out * self.power()  # juxtaposition, e.g. "2b"
            else:
                return out

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            k, v = self.take()
            if k != "num":
                raise ConfigurationError(f"exponent must be an integer in {self.text!r}")
            base = base ** int(v)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return Scalar.const(int(val))
        if kind == "id":
            return Scalar.var(val)
        if (kind, val) == ("op", "("):
            inner = self.sum()
            if self.take() != ("op", ")"):
                raise ConfigurationError(f"unbalanced parenthesis in {self.text!r}")
            return inner
        if (kind, val) == ("op", "-"):
            return -self.power()
        raise ConfigurationError(f"unexpected {val!r} in {self.text!r}")
