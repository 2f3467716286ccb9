from __future__ import annotations

from math import comb

from ..errors import UsageError
from .base import DEFAULT_MAX_VERTICES, CayleyModel


def _vectors_of_norm(d: int, n: int):
    """Integer vectors in Z^d with l1-norm exactly n, deterministic order."""
    if d == 1:
        return [(n,), (-n,)] if n else [(0,)]
    out = []
    for first in range(-n, n + 1):
        for rest in _vectors_of_norm(d - 1, n - abs(first)):
            out.append((first,) + rest)
    return out


class FreeAbelian(CayleyModel):
    """Z^d with the standard generators; the Cayley graph is the grid, word
    length is the l1 norm."""

    kind = "abelian"
    closed_form_depth = True

    def __init__(self, dim: int, max_vertices: int = DEFAULT_MAX_VERTICES):
        if dim < 1:
            raise UsageError(f"dimension must be >= 1, got {dim}")
        super().__init__((0,) * dim, max_vertices)
        self.dim = dim
        self.generators = []
        for i in range(dim):
            for sgn in (1, -1):
                self.generators.append(tuple(sgn if j == i else 0 for j in range(dim)))

    def spec(self) -> str:
        return f"abelian:{self.dim}"

    def multiply(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def invert(self, x):
        return tuple(-a for a in x)

    def length(self, x) -> int:
        return sum(abs(a) for a in x)

    def depth(self, x) -> int:
        return self.length(x)

    def sphere(self, n: int):
        if n < 0:
            return []
        with self._lock:
            while self.enumerated_radius < n:
                r = self.enumerated_radius + 1
                new = _vectors_of_norm(self.dim, r)
                self._total += len(new)
                self._spheres.append(new)
        return self._spheres[n]

    def sphere_count(self, n: int) -> int:
        if n == 0:
            return 1
        return sum(2**j * comb(self.dim, j) * comb(n - 1, j - 1) for j in range(1, self.dim + 1))
