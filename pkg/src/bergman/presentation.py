"""Presentation files: YAML documents describing a rewrite system or a Hecke presentation.

A document is validated against a JSON schema, normalized (coefficients
become canonical polynomial strings) and then built into engine objects.
Normalized documents serialize back to YAML and re-parse to equal values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .errors import ConfigurationError
from .hecke import BRAID_LOWER, BraidEntry, DotMaps, HeckePresentation
from .scalar import RingMapSpec, Scalar, split_tag, swap_endomorphism, tag
from .words import LinComb, OrderSpec, RewriteSystem, make_rule, rewrite_closure_order

FORMAT_VERSION = 1

_scalar = {"type": ["string", "integer", "number"]}
_name = {"type": "string", "minLength": 1}

SCHEMA = {
    "type": "object",
    "required": ["version", "kind"],
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "kind": {"enum": ["word-rewrite", "hecke"]},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "parameters": {"type": "array", "items": _name, "uniqueItems": True},
        "options": {
            "type": "object",
            "properties": {
                "budget": {"type": "integer", "minimum": 1},
                "max_length": {"type": "integer", "minimum": 0},
                "rounds": {"type": "integer", "minimum": 0},
                "relative": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "word-rewrite"}}},
            "then": {
                "required": ["alphabet", "rules"],
                "properties": {
                    "alphabet": {"type": "array", "items": _name, "uniqueItems": True},
                    "order": {
                        "type": "object",
                        "required": ["kind"],
                        "properties": {
                            "kind": {"enum": ["deglex", "length", "rewrite-closure"]},
                            "precedence": {"type": "array", "items": _name},
                        },
                        "additionalProperties": False,
                    },
                    "rules": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["lhs", "rhs"],
                            "properties": {
                                "lhs": {"type": "string", "minLength": 1},
                                "rhs": _scalar,
                                "label": {"type": "string"},
                                "lhs_coefficient": _scalar,
                            },
                            "additionalProperties": False,
                        },
                    },
                },
                "not": {"anyOf": [{"required": ["colors"]}, {"required": ["relations"]}]},
            },
        },
        {
            "if": {"properties": {"kind": {"const": "hecke"}}},
            "then": {
                "required": ["colors", "permissible", "relations"],
                "properties": {
                    "colors": {"type": "array", "items": _name, "minItems": 1, "uniqueItems": True},
                    "permissible": {
                        "type": "array",
                        "items": {"type": "array", "items": _name, "minItems": 2, "maxItems": 2},
                    },
                    "dot_rings": {"type": "object", "additionalProperties": {"type": "array", "items": _name}},
                    "relations": {
                        "type": "object",
                        "propertyNames": {"enum": ["5.8a", "5.8b", "5.8c", "5.8d", "5.8e", "5.8f", "5.8g"]},
                        "additionalProperties": {
                            "type": "object",
                            "additionalProperties": {"type": "object", "additionalProperties": _scalar},
                        },
                    },
                    "maps": {
                        "type": "object",
                        "propertyNames": {"enum": ["5.8h", "5.8i"]},
                        "additionalProperties": {"type": "object"},
                    },
                },
                "not": {"anyOf": [{"required": ["alphabet"]}, {"required": ["rules"]}]},
            },
        },
    ],
}


@dataclass(frozen=True)
class PresentationFile:
    """A normalized presentation document."""

    doc: dict

    @property
    def kind(self) -> str:
        return self.doc["kind"]

    @property
    def name(self) -> str:
        return self.doc.get("name", "")

    @property
    def options(self) -> dict:
        return self.doc.get("options", {})

    def __eq__(self, other):
        return isinstance(other, PresentationFile) and self.doc == other.doc

    def __hash__(self):
        return hash(yaml.safe_dump(self.doc, sort_keys=True))

    def dump(self) -> str:
        return yaml.safe_dump(self.doc, sort_keys=False, allow_unicode=True)

    def build(self):
        if self.kind == "word-rewrite":
            return build_rewrite_system(self.doc)
        return build_hecke(self.doc)


# ---------------------------------------------------------------------------
# loading

def _locate(node, path) -> str:
    """``line N`` of the YAML node at ``path`` (best effort)."""
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(key) or k.value == key:
                    nxt = v
                    break
            if nxt is None:
                break
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
    return f"line {node.start_mark.line + 1}"


def _fmt_path(path) -> str:
    return "/".join(str(p) for p in path) or "<root>"


def parse_presentation(text: str, source: str = "<string>") -> PresentationFile:
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{source}: not valid YAML: {e}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}: top level must be a mapping")
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(data),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        msgs = [f"{source}: {_locate(node, e.absolute_path)}: {_fmt_path(e.absolute_path)}: {e.message}"
                for e in errors]
        raise ConfigurationError("\n".join(msgs))
    try:
        doc = normalize(data)
        pf = PresentationFile(doc)
        pf.build()
    except ConfigurationError as e:
        raise ConfigurationError(f"{source}: {e}") from None
    return pf


def load_presentation(path: str | Path) -> PresentationFile:
    """Read a presentation file; ``presets/NAME`` or ``NAME`` also finds a built-in preset."""
    p = Path(path)
    if p.is_file():
        return parse_presentation(p.read_text(), str(p))
    name = p.name.removesuffix(".yaml")
    if name in preset_names():
        return load_preset(name)
    raise ConfigurationError(f"{path}: no such file or preset")


def preset_names() -> list[str]:
    root = resources.files("bergman") / "presets"
    return sorted(f.name.removesuffix(".yaml") for f in root.iterdir() if f.name.endswith(".yaml"))


def load_preset(name: str) -> PresentationFile:
    f = resources.files("bergman") / "presets" / f"{name}.yaml"
    if not f.is_file():
        raise ConfigurationError(f"unknown preset {name!r}")
    return parse_presentation(f.read_text(), f"presets/{name}.yaml")


# ---------------------------------------------------------------------------
# normalization

def _canon_scalar(x) -> str:
    return str(Scalar.coerce(str(x) if not isinstance(x, (int, str)) else x))


def normalize(data: dict) -> dict:
    doc = {"version": data["version"], "kind": data["kind"]}
    for k in ("name", "description"):
        if k in data:
            doc[k] = data[k]
    doc["parameters"] = list(data.get("parameters", []))
    if data["kind"] == "word-rewrite":
        alphabet = list(data["alphabet"])
        doc["alphabet"] = alphabet
        order = dict(data.get("order", {"kind": "deglex"}))
        if order["kind"] == "deglex":
            order["precedence"] = list(order.get("precedence", alphabet))
        doc["order"] = order
        rules = []
        for r in data["rules"]:
            lhs = parse_word(r["lhs"], alphabet)
            rhs = parse_lincomb(str(r["rhs"]), alphabet)
            c = Scalar.coerce(str(r.get("lhs_coefficient", 1)))
            if c != Scalar.const(1):
                if not c.is_constant() or c.is_zero():
                    raise ConfigurationError(f"rule {r['lhs']}: lhs coefficient {c} is not invertible")
                rhs = rhs.scale(Scalar.const(1 / c.constant_value()))
            entry = {"lhs": _word_text(lhs, alphabet), "rhs": _lincomb_text(rhs, alphabet)}
            if "label" in r:
                entry["label"] = r["label"]
            rules.append(entry)
        doc["rules"] = rules
    else:
        doc["colors"] = list(data["colors"])
        doc["permissible"] = [list(p) for p in data["permissible"]]
        doc["dot_rings"] = {c: list(g) for c, g in data.get("dot_rings", {}).items()}
        doc["relations"] = {rel: {str(k): {n: _canon_scalar(v) for n, v in e.items()} for k, e in t.items()}
                            for rel, t in data["relations"].items()}
        maps = {}
        for rel, t in data.get("maps", {}).items():
            maps[rel] = {}
            for k, v in t.items():
                maps[rel][str(k)] = _norm_map(v, rel, k)
        doc["maps"] = maps
    if "options" in data:
        doc["options"] = dict(data["options"])
    return doc


def _norm_images(v, where):
    if not isinstance(v, dict):
        raise ConfigurationError(f"{where}: expected 'swap' or a table of generator images")
    return {str(g): _canon_scalar(x) for g, x in v.items()}


def _norm_map(v, rel, key):
    where = f"maps/{rel}/{key}"
    if rel == "5.8i":
        return "swap" if v == "swap" else _norm_images(v, where)
    if not isinstance(v, dict) or set(v) - {"phi", "partial"}:
        raise ConfigurationError(f"{where}: expected keys phi and partial")
    out = {}
    if "phi" in v:
        out["phi"] = "swap" if v["phi"] == "swap" else _norm_images(v["phi"], where + "/phi")
    if "partial" in v:
        out["partial"] = _norm_images(v["partial"], where + "/partial")
    return out


# ---------------------------------------------------------------------------
# words and linear combinations in text

def parse_word(text: str, alphabet) -> tuple:
    """Split ``text`` into letters by greedy longest match; ``1`` is the empty word."""
    s = re.sub(r"\s+", "", text)
    if s in ("", "1"):
        return ()
    letters = sorted(alphabet, key=len, reverse=True)
    out, i = [], 0
    while i < len(s):
        for a in letters:
            if s.startswith(a, i):
                out.append(a)
                i += len(a)
                break
        else:
            raise ConfigurationError(f"cannot read {text!r}: {s[i:]!r} does not start with a letter")
    return tuple(out)


def _word_text(w, alphabet) -> str:
    if not w:
        return "1"
    sep = "" if all(len(a) == 1 for a in alphabet) else " "
    return sep.join(w)


_NUM = re.compile(r"^(\d+(?:/\d+)?)\s*\*?\s*")


def _split_terms(text: str):
    depth, start, out = 0, 0, []
    sign = 1
    s = text.strip()
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0:
            chunk = s[start:i].strip()
            if chunk:
                out.append((sign, chunk))
            sign = 1 if ch == "+" else -1
            start = i + 1
        i += 1
    chunk = s[start:].strip()
    if chunk:
        out.append((sign, chunk))
    return out


def parse_lincomb(text: str, alphabet) -> LinComb:
    """Read ``"xy + 1"``, ``"tst - 3 s"`` or ``"(a + b) st"``."""
    out = LinComb()
    if text.strip() == "0":
        return out
    for sign, term in _split_terms(text):
        coeff = Scalar.const(1)
        rest = term
        if rest.startswith("("):
            depth = 0
            for j, ch in enumerate(rest):
                depth += ch == "("
                depth -= ch == ")"
                if depth == 0:
                    break
            coeff = Scalar.parse(rest[1:j])
            rest = rest[j + 1:].lstrip(" *")
        else:
            m = _NUM.match(rest)
            if m:
                coeff = Scalar.const(Fraction(m.group(1)))
                rest = rest[m.end():]
        out = out + LinComb.word(parse_word(rest, alphabet), coeff * sign)
    return out


def _lincomb_text(t: LinComb, alphabet) -> str:
    if t.is_zero():
        return "0"
    parts = []
    for w, c in t.items():
        ws = _word_text(w, alphabet)
        if c.is_constant():
            v = c.constant_value()
            sign = "-" if v < 0 else "+"
            body = ws if abs(v) == 1 else (f"{abs(v)}" if ws == "1" else f"{abs(v)} {ws}")
        else:
            sign, body = "+", f"({c}) {ws}"
        parts.append((sign, body))
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


# ---------------------------------------------------------------------------
# building engine objects

def build_rewrite_system(doc: dict) -> RewriteSystem:
    alphabet = doc["alphabet"]
    rules = []
    for i, r in enumerate(doc["rules"]):
        lhs = parse_word(r["lhs"], alphabet)
        if not lhs:
            raise ConfigurationError(f"rule {i + 1}: empty left-hand side")
        rhs = parse_lincomb(r["rhs"], alphabet)
        _declared([c for _, c in rhs.items()], doc.get("parameters", ()), (), f"rule {r['lhs']}")
        rules.append(make_rule(lhs, rhs, r.get("label", "")))
    o = doc["order"]
    if o["kind"] == "deglex":
        if sorted(o["precedence"]) != sorted(alphabet):
            raise ConfigurationError("order precedence must list every letter exactly once")
        order = OrderSpec("deglex", tuple(o["precedence"]))
    elif o["kind"] == "length":
        order = OrderSpec("length")
    else:
        pairs = [(r.lhs, w) for r in rules for w in r.rhs.words() if len(w) == len(r.lhs)]
        order = rewrite_closure_order(pairs)
    return RewriteSystem(alphabet, rules, order)


def _key(k: str, n: int | None):
    if k == "*":
        return k
    parts = tuple(x.strip() for x in k.split(","))
    if n is not None and len(parts) != n:
        raise ConfigurationError(f"key {k!r} should list {n} colors")
    return parts


def _images(table: dict) -> dict:
    return {g: Scalar.parse(v) for g, v in table.items()}


def build_hecke(doc: dict) -> HeckePresentation:
    colors = tuple(doc["colors"])
    gens = {c: tuple(doc.get("dot_rings", {}).get(c, ())) for c in colors}
    for c in doc.get("dot_rings", {}):
        if c not in colors:
            raise ConfigurationError(f"dot ring given for unknown color {c}")
    rel = doc["relations"]
    quadratic = {}
    for c, e in rel.get("5.8a", {}).items():
        _only(e, {"alpha", "beta"}, f"5.8a[{c}]")
        quadratic[c] = (Scalar.parse(e.get("alpha", "0")), Scalar.parse(e.get("beta", "0")))
    square = {}
    for k, e in rel.get("5.8b", {}).items():
        _only(e, {"Q"}, f"5.8b[{k}]")
        square[_key(k, 2)] = Scalar.parse(e.get("Q", "0"))
    braid = {}
    for rid in BRAID_LOWER:
        table = {}
        for k, e in rel.get(rid, {}).items():
            _only(e, {"lambda", *BRAID_LOWER[rid]}, f"{rid}[{k}]")
            lam = Scalar.parse(e.get("lambda", "1"))
            if not lam.is_constant():
                raise ConfigurationError(f"{rid}[{k}]: lambda must be a rational number, got {lam}")
            lower = {n: Scalar.parse(v) for n, v in e.items() if n != "lambda"}
            key = (k,) * 3 if rid == "5.8c" and k != "*" else _key(k, 3)
            table[key] = BraidEntry(lam.constant_value(), lower)
        if table:
            braid[rid] = table
    same_maps = {}
    maps = doc.get("maps", {})
    for c, m in maps.get("5.8h", {}).items():
        g = gens.get(c)
        if g is None:
            raise ConfigurationError(f"5.8h given for unknown color {c}")
        if "phi" not in m or "partial" not in m:
            raise ConfigurationError(f"5.8h[{c}] needs both phi and partial")
        phi = swap_endomorphism(g, g) if m["phi"] == "swap" else RingMapSpec("endomorphism", _images(m["phi"]))
        dom = {tag(x, k) for x in g for k in (1, 2)}
        partial = RingMapSpec("derivation", _images(m["partial"]), domain=dom, twist=phi)
        same_maps[c] = DotMaps(phi, partial)
    mixed = {}
    for k, m in maps.get("5.8i", {}).items():
        key = _key(k, 2)
        if m == "swap":
            if key == "*":
                mixed[key] = "swap"
                continue
            a, b = key
            mixed[key] = DotMaps(swap_endomorphism(gens.get(a, ()), gens.get(b, ())))
        else:
            mixed[key] = DotMaps(RingMapSpec("endomorphism", _images(m)))
    if mixed.get("*") == "swap":
        del mixed["*"]
        for a, b in doc["permissible"]:
            if a != b and (a, b) not in mixed:
                mixed[(a, b)] = DotMaps(swap_endomorphism(gens.get(a, ()), gens.get(b, ())))
    for pair in doc["permissible"]:
        _known_colors(pair, colors, "permissible")
    for c in quadratic:
        _known_colors((c,), colors, "5.8a")
    for k in square:
        _known_colors(k, colors, "5.8b")
    for rid, table in braid.items():
        for k in table:
            _known_colors(k, colors, rid)
    params = tuple(doc.get("parameters", ()))
    all_gens = {g for gs in gens.values() for g in gs}
    _declared([f for pair in quadratic.values() for f in pair], params, all_gens, "5.8a")
    _declared(list(square.values()), params, all_gens, "5.8b")
    for rid, table in braid.items():
        _declared([f for e in table.values() for f in e.lower.values()], params, all_gens, rid)
    return HeckePresentation(colors, frozenset(tuple(p) for p in doc["permissible"]), gens,
                             params, quadratic, square, braid,
                             same_maps, mixed, doc.get("name", ""))


def _known_colors(key, colors, where: str):
    if key == "*":
        return
    for c in key:
        if c not in colors:
            raise ConfigurationError(f"{where}: unknown color {c}")


def _declared(coeffs, params, generators, where: str):
    """Coefficients may use declared parameters and position-tagged dot generators."""
    for f in coeffs:
        for v in sorted(f.variables()):
            name, pos = split_tag(v)
            if pos is None and v not in params:
                raise ConfigurationError(f"{where}: parameter {v} is not declared")
            if pos is not None and name not in generators:
                raise ConfigurationError(f"{where}: {v} is not a dot generator")


def _only(entry: dict, allowed: set, where: str):
    bad = sorted(set(entry) - allowed)
    if bad:
        raise ConfigurationError(f"{where}: unknown coefficient {bad[0]}")
