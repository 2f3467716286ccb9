"""Freely reduced words over a signed generator alphabet.

A word is a tuple of nonzero ints: ``i`` is the i-th generator (1-based) and
``-i`` its inverse.  Text form uses ``a, b, c, ...`` with uppercase letters or a
``^-1`` suffix for inverses, e.g. ``"bab^-1" == "baB"``.
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator

from .errors import UsageError

Word = tuple[int, ...]

IDENTITY: Word = ()

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"
_TOKEN = re.compile(r"\s*([A-Za-z])(?:\^(-?\d+))?\s*")


def reduce_word(letters: Iterable[int]) -> Word:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def multiply(w1: Word, w2: Word) -> Word:
    # both inputs are assumed reduced, so cancellation happens only at the seam
    i = 0
    n = min(len(w1), len(w2))
    while i < n and w1[len(w1) - 1 - i] == -w2[i]:
        i += 1
    return w1[: len(w1) - i] + w2[i:]


def invert(w: Word) -> Word:
    return tuple(-x for x in reversed(w))


def power(w: Word, n: int) -> Word:
    if n < 0:
        w, n = invert(w), -n
    out: Word = ()
    for _ in range(n):
        out = multiply(out, w)
    return out


def commutator(w1: Word, w2: Word) -> Word:
    return multiply(multiply(w1, w2), multiply(invert(w1), invert(w2)))


def is_reduced(w: Word) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1)) and 0 not in w


def common_prefix_length(w1: Word, w2: Word) -> int:
    n = min(len(w1), len(w2))
    i = 0
    while i < n and w1[i] == w2[i]:
        i += 1
    return i


def letters(rank: int) -> list[int]:
    """Signed alphabet in a fixed order: a, A, b, B, ..."""
    out = []
    for i in range(1, rank + 1):
        out.extend((i, -i))
    return out


def letter_name(x: int) -> str:
    c = _ALPHABET[abs(x) - 1]
    return c if x > 0 else c.upper()


def format_word(w: Word) -> str:
    if not w:
        return "1"
    return "".join(letter_name(x) for x in w)


def parse_word(text: str, rank: int | None = None) -> Word:
    """Parse ``"a b^-1 a^2"``, ``"abA"`` or ``"1"`` (identity) into a reduced word."""
    s = text.strip()
    if s in ("", "1", "e", "id"):
        return IDENTITY
    out: list[int] = []
    pos = 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            raise UsageError(f"cannot parse word {text!r} at position {pos}")
        ch, exp = m.group(1), m.group(2)
        g = _ALPHABET.index(ch.lower()) + 1
        if rank is not None and g > rank:
            raise UsageError(f"letter {ch!r} in {text!r} exceeds rank {rank}")
        x = g if ch.islower() else -g
        e = int(exp) if exp is not None else 1
        if e < 0:
            x, e = -x, -e
        out.extend([x] * e)
        pos = m.end()
    return reduce_word(out)


def reduced_words(rank: int, length: int) -> Iterator[Word]:
    """All reduced words of exactly ``length`` letters, in a deterministic order."""
    alphabet = letters(rank)
    if length == 0:
        yield IDENTITY
        return
    stack: list[Word] = [(x,) for x in reversed(alphabet)]
    while stack:
        w = stack.pop()
        if len(w) == length:
            yield w
            continue
        for x in reversed(alphabet):
            if x != -w[-1]:
                stack.append(w + (x,))
