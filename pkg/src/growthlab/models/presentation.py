"""Finitely presented groups given by a complete string-rewriting system.

Free cancellation rules ``xX -> 1`` are always included.  The user supplies the
remaining rules; construction runs the Knuth-Bendix critical-pair test and
refuses systems that are not locally confluent or not shortlex-decreasing
(so silent word-problem errors are impossible).
"""

from __future__ import annotations

from .. import words as W
from ..errors import UsageError
from .base import DEFAULT_MAX_VERTICES, CayleyModel


def _shortlex_key(w):
    return (len(w), tuple((abs(x), x < 0) for x in w))


class RewritingSystem:
    def __init__(self, rank: int, rules):
        self.rank = rank
        base = [((x, -x), ()) for x in W.letters(rank)]
        self.rules: list[tuple[tuple, tuple]] = base + [(tuple(l), tuple(r)) for l, r in rules]
        for lhs, rhs in self.rules:
            if not lhs:
                raise UsageError("rewriting rule with empty left side")
            if _shortlex_key(rhs) >= _shortlex_key(lhs):
                raise UsageError(
                    f"rule {W.format_word(lhs)} -> {W.format_word(rhs)} is not "
                    "shortlex-decreasing; termination cannot be guaranteed"
                )
        self.max_lhs = max(len(l) for l, _ in self.rules)

    def normal_form(self, w) -> tuple:
        out: list[int] = []
        todo = list(reversed(w))
        # out stays irreducible, so any new redex is a suffix of out
        while todo:
            out.append(todo.pop())
            for lhs, rhs in self.rules:
                k = len(lhs)
                if len(out) >= k and tuple(out[-k:]) == lhs:
                    del out[-k:]
                    todo.extend(reversed(rhs))
                    break
        return tuple(out)

    def critical_pairs(self):
        """Yield (word, reduct1, reduct2) for every overlap of two left sides."""
        for l1, r1 in self.rules:
            for l2, r2 in self.rules:
                # suffix of l1 equal to prefix of l2
                for k in range(1, min(len(l1), len(l2)) + (0 if l1 == l2 else 1)):
                    if l1[-k:] == l2[:k]:
                        word = l1 + l2[k:]
                        yield word, r1 + l2[k:], l1[:-k] + r2
                # l2 strictly inside l1
                if len(l2) < len(l1):
                    for i in range(len(l1) - len(l2) + 1):
                        if l1[i : i + len(l2)] == l2:
                            yield l1, r1, l1[:i] + r2 + l1[i + len(l2):]

    def check_confluent(self) -> None:
        for word, a, b in self.critical_pairs():
            na, nb = self.normal_form(a), self.normal_form(b)
            if na != nb:
                raise UsageError(
                    "rewriting system is not confluent: "
                    f"{W.format_word(word)} reduces to both {W.format_word(na)} "
                    f"and {W.format_word(nb)}"
                )


def parse_rules(text: str, rank: int):
    rules = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ">" not in part:
            raise UsageError(f"rule {part!r} must look like 'lhs>rhs'")
        lhs, rhs = part.split(">", 1)
        # sides stay literal (not freely reduced) so they act as patterns
        rules.append((tuple(_literal(lhs, rank)), tuple(_literal(rhs, rank))))
    return rules


def _literal(text: str, rank: int) -> list[int]:
    text = text.strip()
    if text in ("", "1"):
        return []
    out = []
    for ch in text:
        if ch.isspace():
            continue
        g = "abcdefghijklmnopqrstuvwxyz".index(ch.lower()) + 1
        if g > rank:
            raise UsageError(f"letter {ch!r} exceeds rank {rank}")
        out.append(g if ch.islower() else -g)
    return out


class FinitePresentationBall(CayleyModel):
    """Cayley graph of a group presented by a confluent rewriting system.

    Points are normal forms.  ``radius`` records the ball the caller intends
    to enumerate (informational; the vertex budget is the hard limit).
    """

    kind = "fp"

    def __init__(self, rank: int, rules, radius: int | None = None,
                 max_vertices: int = DEFAULT_MAX_VERTICES, label: str | None = None):
        super().__init__((), max_vertices)
        self.rank = rank
        self.system = RewritingSystem(rank, rules)
        self.system.check_confluent()
        self.radius = radius
        self.generators = [(x,) for x in W.letters(rank)]
        self._label = label

    def spec(self) -> str:
        return self._label or f"fp:{self.rank}"

    def multiply(self, x, y):
        return self.system.normal_form(x + y)

    def invert(self, x):
        return self.system.normal_form(tuple(-a for a in reversed(x)))

    def neighbors(self, x):
        return [self.system.normal_form(x + g) for g in self.generators]


def abelian_rules(rank: int):
    """Shortlex-complete rules for Z^rank: later letters move right of earlier ones."""
    rules = []
    for i in range(1, rank + 1):
        for j in range(1, i):
            for si in (1, -1):
                for sj in (1, -1):
                    rules.append(((si * i, sj * j), (sj * j, si * i)))
    return rules
