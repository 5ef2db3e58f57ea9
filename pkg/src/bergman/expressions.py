"""Words in the simple transpositions of S_n.

An expression is a tuple of indices ``i`` standing for ``s_i``.  Tuples are
written top to bottom: the rightmost letter is the bottom crossing and is
applied first.  A permutation is a tuple in one-line notation, 1-based:
``w[i-1]`` is the top position reached by the strand that starts at
position ``i``.  Strands ``i < j`` form an inversion when they cross,
i.e. ``w(i) > w(j)``.

>>> evaluate((1, 2, 1), 3)
(3, 2, 1)
>>> crossing_sequence((1, 2, 1), 3)
[(1, 2), (1, 3), (2, 3)]
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterable, Sequence

from .comparison import Cmp
from .errors import ConfigurationError, DivergenceError, NoMatchError, PreconditionError, TypingError

Word = tuple
Perm = tuple
Pair = tuple
Triple = tuple

LETTERS = "stuvwxyzabcdefghijklmnopqr"


# ---------------------------------------------------------------------------
# parsing and printing

def parse_expression(text: str) -> Word:
    """Parse ``"sts"``, ``"s t s"``, ``"1 2 1"`` or ``"s1s2s1"``; ``""``/``"e"`` is empty."""
    text = text.strip()
    if text in ("", "e", "1", "()", "ε"):
        return ()
    if text.replace(" ", "").replace(",", "").isdigit() and (" " in text or "," in text):
        return tuple(int(t) for t in text.replace(",", " ").split())
    out = []
    i = 0
    compact = text.replace(" ", "")
    while i < len(compact):
        ch = compact[i]
        if ch == "s" and i + 1 < len(compact) and compact[i + 1].isdigit():
            j = i + 1
            while j < len(compact) and compact[j].isdigit():
                j += 1
            out.append(int(compact[i + 1:j]))
            i = j
            continue
        if ch.isdigit():
            out.append(int(ch))
        elif ch in LETTERS:
            out.append(LETTERS.index(ch) + 1)
        else:
            raise ConfigurationError(f"cannot parse expression {text!r}")
        i += 1
    return tuple(out)


def format_expression(word: Sequence[int]) -> str:
    if not word:
        return "e"
    if max(word) <= len(LETTERS):
        return "".join(LETTERS[i - 1] for i in word)
    return " ".join(f"s{i}" for i in word)


def parse_permutation(text: str) -> Perm:
    text = text.strip()
    if "," in text or " " in text:
        return tuple(int(t) for t in text.replace(",", " ").split())
    return tuple(int(c) for c in text)


def _check_range(word: Sequence[int], n: int) -> None:
    for i in word:
        if not 1 <= i <= n - 1:
            raise TypingError(f"s_{i} is not a simple reflection of S_{n}")


# ---------------------------------------------------------------------------
# permutations, crossings, inversions

def evaluate(word: Sequence[int], n: int) -> Perm:
    _check_range(word, n)
    at = list(range(1, n + 1))  # at[p] = strand currently at position p+1
    for i in reversed(word):
        at[i - 1], at[i] = at[i], at[i - 1]
    w = [0] * n
    for pos, strand in enumerate(at, start=1):
        w[strand - 1] = pos
    return tuple(w)


def crossing_sequence(word: Sequence[int], n: int) -> list[Pair]:
    """The strand pair crossed by each letter, bottom to top."""
    _check_range(word, n)
    at = list(range(1, n + 1))
    seq = []
    for i in reversed(word):
        a, b = at[i - 1], at[i]
        seq.append((min(a, b), max(a, b)))
        at[i - 1], at[i] = b, a
    return seq


def inversion_set(w: Perm) -> frozenset:
    n = len(w)
    return frozenset((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)
                     if w[i - 1] > w[j - 1])


def length(w: Perm) -> int:
    return len(inversion_set(w))


def is_reduced(word: Sequence[int], n: int) -> bool:
    seq = crossing_sequence(word, n)
    return len(set(seq)) == len(seq)


def identity(n: int) -> Perm:
    return tuple(range(1, n + 1))


def longest_element(n: int) -> Perm:
    return tuple(range(n, 0, -1))


def reduced_word(w: Perm) -> Word:
    """One reduced expression for ``w``, built by uncrossing from the bottom."""
    cur = list(w)
    bottom_first = []
    p = 1
    while p < len(cur):
        if cur[p - 1] > cur[p]:
            cur[p - 1], cur[p] = cur[p], cur[p - 1]
            bottom_first.append(p)
            p = 1
        else:
            p += 1
    return tuple(reversed(bottom_first))


def all_triples(n: int) -> list[Triple]:
    return list(combinations(range(1, n + 1), 3))


def packet(t: Triple) -> tuple[Pair, Pair, Pair]:
    i, j, k = t
    return ((i, j), (i, k), (j, k))


def is_prefix_triple(I, t: Triple) -> bool:
    p = packet(t)
    hit = tuple(x in I for x in p)
    return hit in ((False, False, False), (True, False, False), (True, True, False), (True, True, True))


def is_suffix_triple(I, t: Triple) -> bool:
    p = packet(t)
    hit = tuple(x in I for x in p)
    return hit in ((False, False, False), (False, False, True), (False, True, True), (True, True, True))


def classify_triple(I, t: Triple) -> str:
    """``"full"``, ``"prefix"``, ``"suffix"`` or ``"neither"``.

    A triple missing from ``I`` entirely is reported as ``"prefix"`` (it is
    also a suffix triple; use :func:`is_suffix_triple` to ask that).
    """
    if all(x in I for x in packet(t)):
        return "full"
    if is_prefix_triple(I, t):
        return "prefix"
    if is_suffix_triple(I, t):
        return "suffix"
    return "neither"


def is_full_triple(w: Perm, t: Triple) -> bool:
    i, j, k = t
    return w[k - 1] < w[j - 1] < w[i - 1]


def full_triples(w: Perm) -> frozenset:
    return frozenset(t for t in all_triples(len(w)) if is_full_triple(w, t))


def is_inversion_set(I: Iterable[Pair], n: int) -> tuple[bool, Triple | None]:
    I = set(I)
    for t in all_triples(n):
        if classify_triple(I, t) == "neither":
            return False, t
    return True, None


def validate_crossing_order(seq: Sequence[Pair]) -> tuple[bool, Triple | None]:
    """Check a total order on an inversion set against the packet conditions."""
    seq = [tuple(p) for p in seq]
    if len(set(seq)) != len(seq):
        raise PreconditionError("crossing order lists a pair twice")
    n = max((j for _, j in seq), default=1)
    ok, _ = is_inversion_set(seq, n)
    if not ok:
        raise PreconditionError("pairs do not form an inversion set")
    rank = {p: r for r, p in enumerate(seq)}
    I = set(seq)
    for t in all_triples(n):
        present = [p for p in packet(t) if p in I]
        if len(present) < 2:
            continue
        order = sorted(present, key=rank.__getitem__)
        lex = present
        antilex = present[::-1]
        kind = classify_triple(I, t)
        if kind == "full":
            good = order in (lex, antilex)
        elif kind == "prefix":
            good = order == lex
        else:
            good = order == antilex
        if not good:
            return False, t
    return True, None


def higher_inversion_set(word: Sequence[int], n: int) -> frozenset:
    seq = crossing_sequence(word, n)
    if len(set(seq)) != len(seq):
        raise PreconditionError(f"{format_expression(word)} is not reduced")
    rank = {p: r for r, p in enumerate(seq)}
    w = evaluate(word, n)
    J = set()
    for t in full_triples(w):
        a, b, c = (rank[p] for p in packet(t))
        if a > b > c:
            J.add(t)
    return frozenset(J)


# ---------------------------------------------------------------------------
# matching modulo commutation

def letters_depend(a, b) -> bool:
    """Crossings commute when far apart; any other letter blocks."""
    if isinstance(a, int) and isinstance(b, int):
        return abs(a - b) <= 1
    return True


def convex_split(word: Sequence, idxs: Sequence[int]):
    """Bring the letters at ``idxs`` together using commutations only.

    Returns ``(representative, start)`` where the chosen letters occupy
    ``representative[start:start+len(idxs)]`` in their original order, or
    ``None`` when some other letter is trapped between them.
    """
    idxs = sorted(idxs)
    lo, hi = idxs[0], idxs[-1]
    chosen = set(idxs)
    below = []
    below_set = set()
    for x in range(lo + 1, hi):
        if x in chosen:
            continue
        for y in range(lo, x):
            if (y in chosen or y in below_set) and letters_depend(word[y], word[x]):
                below.append(x)
                below_set.add(x)
                break
    for x in below:
        for z in idxs:
            if z > x and letters_depend(word[x], word[z]):
                return None
    above = [x for x in range(lo + 1, hi) if x not in chosen and x not in below_set]
    rep = (tuple(word[:lo]) + tuple(word[x] for x in above) + tuple(word[x] for x in idxs)
           + tuple(word[x] for x in below) + tuple(word[hi + 1:]))
    return rep, lo + len(above)


def _next_dependent(word, start, letter):
    for x in range(start + 1, len(word)):
        if letters_depend(word[x], letter):
            return x
    return None


def iter_redexes(word: Sequence):
    """Yield ``(kind, idxs)`` for every oriented move available modulo commutation.

    ``"cancel"`` is ``s_i s_i -> 1`` and ``"braid"`` is
    ``s_i s_{i+1} s_i -> s_{i+1} s_i s_{i+1}``.  Only integer letters take
    part; any other letter acts as a wall.
    """
    for a, q in enumerate(word):
        if not isinstance(q, int):
            continue
        b = _next_dependent(word, a, q)
        if b is None:
            continue
        if word[b] == q:
            yield "cancel", (a, b)
        elif word[b] == q + 1:
            c = _next_dependent(word, b, q)
            while c is not None and word[c] == q + 2:
                c = _next_dependent(word, c, q)
            if c is not None and word[c] == q and convex_split(word, (a, b, c)) is not None:
                yield "braid", (a, b, c)


def apply_move(word: Sequence, kind: str, idxs: Sequence[int]):
    """Apply a cancel or braid move at ``idxs``; returns (representative, result)."""
    split = convex_split(word, idxs)
    if split is None:
        raise NoMatchError(f"letters {tuple(idxs)} cannot be brought together")
    rep, start = split
    if kind == "cancel":
        q = rep[start]
        if rep[start + 1] != q:
            raise NoMatchError("no s_i s_i factor")
        return rep, rep[:start] + rep[start + 2:]
    q = rep[start]
    if rep[start:start + 3] != (q, q + 1, q):
        raise NoMatchError("no s_i s_{i+1} s_i factor")
    return rep, rep[:start] + (q + 1, q, q + 1) + rep[start + 3:]


# ---------------------------------------------------------------------------
# commutation classes

def comm_canonical(word: Sequence[int]) -> Word:
    """Canonical representative of a commutation class.

    Repeatedly emits, among letters that can be commuted to the front, the
    one with the smallest index.
    """
    rest = list(word)
    out = []
    while rest:
        best = None
        for x, q in enumerate(rest):
            if best is not None and q >= rest[best]:
                continue
            if all(not letters_depend(rest[y], q) for y in range(x)):
                if best is None or q < rest[best]:
                    best = x
        out.append(rest.pop(best))
    return tuple(out)


def commutation_class(word: Sequence[int]) -> frozenset:
    """Every word reachable by commutations (breadth-first oracle)."""
    start = tuple(word)
    seen = {start}
    todo = deque([start])
    while todo:
        w = todo.popleft()
        for p in range(len(w) - 1):
            if not letters_depend(w[p], w[p + 1]):
                v = w[:p] + (w[p + 1], w[p]) + w[p + 2:]
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
    return frozenset(seen)


def reduced_expressions(w: Perm) -> list[Word]:
    """All reduced expressions of ``w``, found by braid and commutation moves."""
    start = reduced_word(w)
    seen = {start}
    todo = deque([start])
    while todo:
        x = todo.popleft()
        for p in range(len(x) - 1):
            if abs(x[p] - x[p + 1]) >= 2:
                y = x[:p] + (x[p + 1], x[p]) + x[p + 2:]
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        for p in range(len(x) - 2):
            a, b, c = x[p:p + 3]
            if a == c and abs(a - b) == 1:
                y = x[:p] + (b, a, b) + x[p + 3:]
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
    return sorted(seen)


# ---------------------------------------------------------------------------
# packet flips

def apply_packet_flip(word: Sequence[int], n: int, position: int) -> Word:
    """Replace the braid factor starting at ``position`` by its partner."""
    word = tuple(word)
    f = word[position:position + 3]
    if len(f) != 3 or f[0] != f[2] or abs(f[0] - f[1]) != 1:
        raise NoMatchError(f"no braid factor at position {position} of {format_expression(word)}")
    out = word[:position] + (f[1], f[0], f[1]) + word[position + 3:]
    if is_reduced(word, n):
        before = higher_inversion_set(word, n)
        after = higher_inversion_set(out, n)
        assert len(before ^ after) == 1, "a packet flip must toggle exactly one triple"
    return out


def _triple_at(word: Sequence[int], n: int, start: int) -> Triple:
    """Strands occupying the three positions touched by the factor at ``start``."""
    at = list(range(1, n + 1))
    for i in reversed(word[start + 3:]):
        at[i - 1], at[i] = at[i], at[i - 1]
    q = min(word[start:start + 3])
    return tuple(sorted(at[q - 1:q + 2]))


def find_flippable_packet(word: Sequence[int], n: int):
    """A forward flip adding a new triple, or ``None`` at the sink.

    Returns ``(equivalent word, position, triple)``.
    """
    if not is_reduced(word, n):
        raise PreconditionError(f"{format_expression(word)} is not reduced")
    for kind, idxs in iter_redexes(tuple(word)):
        if kind != "braid":
            continue
        rep, start = convex_split(tuple(word), idxs)
        return rep, start, _triple_at(rep, n, start)
    return None


# ---------------------------------------------------------------------------
# orders

def triple_projection(word: Sequence[int], n: int, t: Triple) -> Word:
    """Trace out strands ``t``; crossings among them become ``s``/``t`` in S_3."""
    _check_range(word, n)
    chosen = set(t)
    at = list(range(1, n + 1))
    out = []
    for i in reversed(word):
        a, b = at[i - 1], at[i]
        if a in chosen and b in chosen:
            # rank of the left strand among the chosen strands, by position
            rank = sum(1 for s in at[:i - 1] if s in chosen)
            out.append(1 if rank == 0 else 2)
        at[i - 1], at[i] = b, a
    return tuple(reversed(out))


@lru_cache(maxsize=None)
def _braid_component(word: Word) -> frozenset:
    seen = {word}
    todo = [word]
    while todo:
        w = todo.pop()
        for p in range(len(w) - 2):
            a, b, c = w[p:p + 3]
            if a == c and a != b:
                v = w[:p] + (b, a, b) + w[p + 3:]
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
    return frozenset(seen)


def leq3(a: Sequence[int], b: Sequence[int]) -> Cmp:
    """Compare two words in ``s = 1, t = 2``.

    Shorter words are smaller.  Words of equal length are comparable only
    when braid moves connect them, and then the lexicographically later word
    is the smaller one.
    """
    a, b = tuple(a), tuple(b)
    if len(a) != len(b):
        return Cmp.LT if len(a) < len(b) else Cmp.GT
    if a == b:
        return Cmp.EQ
    if b not in _braid_component(a):
        return Cmp.INCOMPARABLE
    return Cmp.LT if a > b else Cmp.GT


def leq(e: Sequence[int], f: Sequence[int], n: int, m: int | None = None) -> Cmp:
    """The triple-projection order; ``EQ`` means the same commutation class."""
    if m is not None and m != n:
        raise TypingError(f"cannot compare expressions in S_{n} and S_{m}")
    e, f = tuple(e), tuple(f)
    if len(e) != len(f):
        return Cmp.LT if len(e) < len(f) else Cmp.GT
    if evaluate(e, n) != evaluate(f, n):
        return Cmp.INCOMPARABLE
    seen = set()
    for t in all_triples(n):
        c = leq3(triple_projection(e, n, t), triple_projection(f, n, t))
        if c is Cmp.INCOMPARABLE:
            return c
        seen.add(c)
        if Cmp.LT in seen and Cmp.GT in seen:
            return Cmp.INCOMPARABLE
    if Cmp.LT in seen:
        return Cmp.LT
    if Cmp.GT in seen:
        return Cmp.GT
    return Cmp.EQ


def parabolic_embed(word: Sequence[int], n: int, m: int, k: int) -> Word:
    if k < 0 or k + n > m:
        raise TypingError(f"cannot embed S_{n} into S_{m} at offset {k}")
    _check_range(word, n)
    return tuple(i + k for i in word)


# ---------------------------------------------------------------------------
# sinks

def oriented_successors(word: Sequence[int]) -> set[Word]:
    """Canonical classes one oriented move away from ``word``'s class."""
    out = set()
    for kind, idxs in iter_redexes(tuple(word)):
        _, res = apply_move(tuple(word), kind, idxs)
        out.add(comm_canonical(res))
    return out


def _shortest_nonreduced_factor(word: Word, n: int):
    L = len(word)
    for size in range(2, L + 1):
        for start in range(0, L - size + 1):
            if not is_reduced(word[start:start + size], n):
                return start, start + size
    return None


def sink(word: Sequence[int], n: int, budget: int = 100_000):
    """Shorten and flip ``word`` to the unique sink of its class graph.

    Uses only ``s_i s_i -> 1``, ``s_i s_{i+1} s_i -> s_{i+1} s_i s_{i+1}``
    and commutations.  Non-reduced words are first shortened one minimal
    non-reduced factor at a time; the reduced result is then flipped
    forward until every full triple is antilexicographic.

    Returns ``(canonical sink word, trace)``; trace entries are
    ``(move kind, word before, word after)``.
    """
    _check_range(word, n)
    cur = tuple(word)
    trace = []
    steps = 0

    def note(kind, before, after):
        nonlocal steps
        steps += 1
        if steps > budget:
            raise DivergenceError(f"sink computation exceeded {budget} moves", trace)
        trace.append((kind, before, after))

    while True:
        span = _shortest_nonreduced_factor(cur, n)
        if span is None:
            break
        lo, hi = span
        factor = cur[lo:hi]
        while True:
            moves = list(iter_redexes(factor))
            pick = next((m for m in moves if m[0] == "cancel"), None) or (moves[0] if moves else None)
            if pick is None:
                raise AssertionError(f"non-reduced factor {format_expression(factor)} admits no move")
            rep, res = apply_move(factor, *pick)
            if rep != factor:
                note("commute", cur[:lo] + factor + cur[hi:], cur[:lo] + rep + cur[hi:])
            note(pick[0], cur[:lo] + rep + cur[hi:], cur[:lo] + res + cur[hi:])
            factor = res
            if pick[0] == "cancel":
                break
        cur = cur[:lo] + factor + cur[hi:]

    while True:
        found = find_flippable_packet(cur, n)
        if found is None:
            break
        rep, pos, _ = found
        if rep != cur:
            note("commute", cur, rep)
        nxt = apply_packet_flip(rep, n, pos)
        note("braid", rep, nxt)
        cur = nxt
    canon = comm_canonical(cur)
    if canon != cur:
        note("commute", cur, canon)
    return canon, trace


def sink_of_permutation(w: Perm) -> Word:
    return sink(reduced_word(w), len(w))[0]


def all_permutations(n: int) -> list[Perm]:
    return [tuple(p) for p in permutations(range(1, n + 1))]
