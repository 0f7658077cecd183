"""Search for identity relations among reduced words in a matrix tuple.

Words are formal: ``(A, A)`` has the relation ``a1 a2^-1`` even though the
matrices coincide.  Letters are ordered ``a1 < a1^-1 < a2 < a2^-1 < ...`` and
words shortest first, then lexicographically; the search returns the first
relation in that order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

from .exact_arith import DomainError
from .mat2 import IDENTITY, Mat2, inverse, mul


class Letter(NamedTuple):
    gen: int  # 1-based generator index
    sign: int  # +1 or -1

    def inv(self) -> Letter:
        return Letter(self.gen, -self.sign)


Word = tuple[Letter, ...]


def alphabet(s: int) -> list[Letter]:
    if s < 1:
        raise DomainError(f"need at least one generator, got s={s}")
    return [Letter(g, e) for g in range(1, s + 1) for e in (1, -1)]


def is_reduced(word: Word) -> bool:
    return all(word[i + 1] != word[i].inv() for i in range(len(word) - 1))


def inverse_word(word: Word) -> Word:
    return tuple(x.inv() for x in reversed(word))


def words_of_length(s: int, n: int) -> Iterator[Word]:
    """Reduced words of length exactly ``n`` in lexicographic order."""
    letters = alphabet(s)
    if n == 0:
        yield ()
        return

    def extend(prefix: list[Letter]):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        banned = prefix[-1].inv() if prefix else None
        for x in letters:
            if x != banned:
                prefix.append(x)
                yield from extend(prefix)
                prefix.pop()

    yield from extend([])


def reduced_words(s: int, L: int) -> Iterator[Word]:
    """All reduced words of length ``1..L``, shortest first."""
    if L < 1:
        raise DomainError(f"length bound must be >= 1, got {L}")
    for n in range(1, L + 1):
        yield from words_of_length(s, n)


def words_count(s: int, n: int) -> int:
    return 1 if n == 0 else 2 * s * (2 * s - 1) ** (n - 1)


def word_rank(word: Word, s: int) -> int:
    """Position of ``word`` among reduced words of its length (0-based, lexicographic)."""
    letters = alphabet(s)
    n = len(word)
    rank = 0
    for i, x in enumerate(word):
        banned = word[i - 1].inv() if i else None
        smaller = sum(1 for y in letters[: letters.index(x)] if y != banned)
        rank += smaller * (2 * s - 1) ** (n - i - 1)
    return rank


def _letter_matrices(tup: Sequence[Mat2]) -> dict[Letter, Mat2]:
    out = {}
    for g, A in enumerate(tup, start=1):
        out[Letter(g, 1)] = A
        out[Letter(g, -1)] = inverse(A)
    return out


def evaluate(word: Word, tup: Sequence[Mat2]) -> Mat2:
    """Left-to-right product ``A_{w1} A_{w2} ...``."""
    mats = _letter_matrices(tup)
    out = IDENTITY
    for x in word:
        if not 1 <= x.gen <= len(tup):
            raise DomainError(f"letter {x} outside a {len(tup)}-tuple")
        out = mul(out, mats[x])
    return out


def prefix_tree_levels(tup: Sequence[Mat2], depth: int) -> list[list[tuple[Word, Mat2]]]:
    """``levels[n]`` lists every reduced word of length ``n`` with its value, lexicographically.

    Each value is one multiplication away from its parent prefix.
    """
    mats = _letter_matrices(tup)
    letters = alphabet(len(tup))
    levels: list[list[tuple[Word, Mat2]]] = [[((), IDENTITY)]]
    for _ in range(depth):
        nxt = []
        for w, M in levels[-1]:
            banned = w[-1].inv() if w else None
            for x in letters:
                if x != banned:
                    nxt.append((w + (x,), mul(M, mats[x])))
        levels.append(nxt)
    return levels


def walk_words(tup: Sequence[Mat2], L: int) -> Iterator[tuple[Word, Mat2]]:
    """Every reduced word of length ``1..L`` with its value, shortest first, one level in memory."""
    mats = _letter_matrices(tup)
    letters = alphabet(len(tup))
    level: list[tuple[Word, Mat2]] = [((), IDENTITY)]
    for _ in range(L):
        nxt = []
        for w, M in level:
            banned = w[-1].inv() if w else None
            for x in letters:
                if x != banned:
                    item = (w + (x,), mul(M, mats[x]))
                    nxt.append(item)
                    yield item
        level = nxt


@dataclass(frozen=True)
class RelationWitness:
    word: Word
    product: Mat2
    checked_words: int

    found = True

    @property
    def length(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class NotFoundUpTo:
    """No relation of length ``<= L``; this is not a proof of freeness."""

    L: int
    checked_words: int

    found = False


def _word_key(word: Word) -> tuple[tuple[int, int], ...]:
    return tuple((x.gen, -x.sign) for x in word)


def _checked_through(word: Word, s: int) -> int:
    return sum(words_count(s, n) for n in range(1, len(word))) + word_rank(word, s) + 1


def find_relation(tup: Sequence[Mat2], L: int, *, method: str = "mitm") -> RelationWitness | NotFoundUpTo:
    """First nonempty reduced word of length ``<= L`` that evaluates to the identity.

    ``method="mitm"`` splits a length-``n`` relation ``u v`` into halves of
    lengths ``ceil(n/2)`` and ``floor(n/2)`` and matches ``value(u)`` against
    ``value(v^-1)``; it only evaluates words up to length ``ceil(L/2)``.
    ``method="bfs"`` walks every word and is kept as a reference.
    """
    s = len(tup)
    if s < 1 or L < 1:
        raise DomainError("need a nonempty tuple and L >= 1")
    total = sum(words_count(s, n) for n in range(1, L + 1))
    if method == "bfs":
        for w, M in walk_words(tup, L):
            if M.is_identity():
                return RelationWitness(w, M, _checked_through(w, s))
        return NotFoundUpTo(L, total)
    if method != "mitm":
        raise DomainError(f"unknown search method {method!r}")

    levels = prefix_tree_levels(tup, (L + 1) // 2)
    tables: dict[int, dict[tuple, list[Word]]] = {}

    def table(q: int) -> dict[tuple, list[Word]]:
        if q not in tables:
            t: dict[tuple, list[Word]] = {}
            for w, M in levels[q]:
                t.setdefault(M.entries(), []).append(w)
            tables[q] = t
        return tables[q]

    for n in range(1, L + 1):
        p, q = (n + 1) // 2, n // 2
        t = table(q)
        for u, M in levels[p]:
            matches = t.get(M.entries())
            if not matches:
                continue
            best = None
            for u2 in matches:
                v = inverse_word(u2)
                if v and u[-1] == v[0].inv():
                    continue
                if best is None or _word_key(v) < _word_key(best):
                    best = v
            if best is not None:
                w = u + best
                return RelationWitness(w, evaluate(w, tup), _checked_through(w, s))
    return NotFoundUpTo(L, total)


# ---------------------------------------------------------------------------
# text form


def format_word(word: Word, s: int) -> str:
    """``"a a a"`` for one generator, ``"a1 a2⁻¹"`` otherwise."""
    parts = []
    for x in word:
        name = "a" if s == 1 else f"a{x.gen}"
        parts.append(name if x.sign > 0 else name + "⁻¹")
    return " ".join(parts)


_TOKEN = re.compile(r"^([a-z])(\d*)(\^-1|⁻¹|')?$")


def parse_word(text: str) -> Word:
    """Inverse of :func:`format_word`; also accepts ``a b c`` letters and ``^-1``."""
    out = []
    for tok in text.split():
        m = _TOKEN.match(tok)
        if m is None:
            raise DomainError(f"cannot parse letter {tok!r}")
        letter, digits, inv = m.groups()
        if digits:
            if letter != "a":
                raise DomainError(f"indexed letters must be a1, a2, ...; got {tok!r}")
            gen = int(digits)
        else:
            gen = ord(letter) - ord("a") + 1
        if gen < 1:
            raise DomainError(f"generator index must be >= 1 in {tok!r}")
        out.append(Letter(gen, -1 if inv else 1))
    return tuple(out)
