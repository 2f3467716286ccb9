from __future__ import annotations

from .. import words as W
from ..errors import ResourceExhausted, UsageError
from .base import DEFAULT_MAX_VERTICES, CayleyModel


class FreeGroup(CayleyModel):
    """Free group of rank k on its standard generators; the Cayley graph is the
    2k-regular tree.  Points are reduced words (tuples of signed ints)."""

    kind = "free"
    closed_form_depth = True

    def __init__(self, rank: int, max_vertices: int = DEFAULT_MAX_VERTICES):
        if rank < 1:
            raise UsageError(f"free group rank must be >= 1, got {rank}")
        super().__init__(W.IDENTITY, max_vertices)
        self.rank = rank
        self.alphabet = W.letters(rank)
        self.generators = [(x,) for x in self.alphabet]

    def spec(self) -> str:
        return f"free:{self.rank}"

    def multiply(self, x, y):
        return W.multiply(x, y)

    def invert(self, x):
        return W.invert(x)

    def neighbors(self, x):
        return [W.multiply(x, (g,)) for g in self.alphabet]

    def length(self, x) -> int:
        return len(x)

    def depth(self, x) -> int:
        return len(x)

    def sphere(self, n: int):
        # direct extension of the previous layer: a reduced word of length n is
        # a reduced word of length n-1 plus a non-cancelling letter
        if n < 0:
            return []
        with self._lock:
            while self.enumerated_radius < n:
                prev = self._spheres[-1]
                grow = len(prev) * (len(self.alphabet) - 1) if prev[0] else len(self.alphabet)
                if self._total + grow > self.max_vertices:
                    raise ResourceExhausted(
                        f"{self.spec()}: vertex budget {self.max_vertices} exceeded "
                        f"at radius {self.enumerated_radius + 1}",
                        achieved=self.enumerated_radius,
                    )
                new = [w + (x,) for w in prev for x in self.alphabet if not w or x != -w[-1]]
                self._total += len(new)
                self._spheres.append(new)
        return self._spheres[n]

    def sphere_count(self, n: int) -> int:
        # count reduced words by last letter, no enumeration
        if n == 0:
            return 1
        last = {x: 1 for x in self.alphabet}
        for _ in range(n - 1):
            total = sum(last.values())
            last = {x: total - last[-x] for x in self.alphabet}
        return sum(last.values())
