"""Truncated coset graphs H\\F_k with generator-labelled edges.

Cosets are discovered by BFS from the identity coset, so they are stored in
order of distance and the ball of radius r is a prefix of the vertex list.
The neighbour table ``nbr[i, c]`` holds the index of ``coset_i . letter_c``
(or -1 beyond the truncation); columns follow ``words.letters(rank)``.

Sphere operators ``(S_n f)(y) = sum_{|g| = n} f(y g)`` obey the free-group
recurrence

    S_0 = I,  S_1 = T,  S_2 = T S_1 - 2k I,  S_{n+1} = T S_n - (2k-1) S_{n-1}

with T the generator sum.  On a graph truncated at radius B this is exact at
every coset of depth <= r for functions supported in the r-ball, as long as
B >= r + n // 2 (``margin_for``): the first wrong value appears at depth B
in S_{B-r+2} and the error front then moves inward one layer per step.
"""

from __future__ import annotations

import numpy as np

from .. import words as W
from ..errors import ResourceExhausted, UsageError
from .base import DEFAULT_MAX_VERTICES
from .subgroups import require_free_base


def margin_for(n: int) -> int:
    """Extra radius needed for n-step sphere sums to be exact on the inner ball."""
    return n // 2


class CosetGraph:
    def __init__(self, sub, rank: int, radius: int, max_vertices: int = DEFAULT_MAX_VERTICES):
        if radius < 0:
            raise UsageError("coset graph radius must be nonnegative")
        self.sub = sub
        self.rank = rank
        self.radius = radius
        self.letters = W.letters(rank)
        self._col = {x: c for c, x in enumerate(self.letters)}
        base = sub.base_coset()
        cosets = [base]
        index = {base: 0}
        starts = [0, 1]
        deg = len(self.letters)
        flat: list[int] = []  # row-major neighbour table, filled layer by layer
        act = sub.coset_act
        lo = 0
        for r in range(1, radius + 2):
            hi = len(cosets)
            last = r == radius + 1  # only resolve edges of the outer layer
            for i in range(lo, hi):
                c = cosets[i]
                for x in self.letters:
                    d = act(c, x)
                    j = index.get(d)
                    if j is None:
                        if last:
                            j = -1
                        else:
                            j = len(cosets)
                            index[d] = j
                            cosets.append(d)
                    flat.append(j)
            if len(cosets) > max_vertices:
                raise ResourceExhausted(
                    f"coset graph exceeds {max_vertices} vertices at radius {r}",
                    achieved=r - 1,
                )
            lo = hi
            if not last:
                starts.append(len(cosets))
        self.cosets = cosets
        self.index = index
        self._starts = starts
        n = len(cosets)
        nbr = np.array(flat, dtype=np.int64).reshape(n, deg)
        self.nbr = nbr
        self._nbr_pad = np.where(nbr < 0, n, nbr)
        dist = np.empty(n, dtype=np.int64)
        for r in range(len(starts) - 1):
            dist[starts[r]:starts[r + 1]] = r
        self.dist = dist

    # -- structure ---------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.cosets)

    @property
    def degree(self) -> int:
        return 2 * self.rank

    def inner(self, r: int) -> int:
        """Number of cosets at distance <= r (a prefix of the vertex list)."""
        r = min(r, len(self._starts) - 2)
        return self._starts[r + 1]

    def layer(self, n: int) -> slice:
        if n < 0 or n + 1 >= len(self._starts):
            return slice(0, 0)
        return slice(self._starts[n], self._starts[n + 1])

    def is_finite_complete(self) -> bool:
        """True when every edge stays inside (the whole coset space was found)."""
        return bool((self.nbr >= 0).all())

    def step(self, i: int, x: int) -> int:
        if i < 0:
            return -1
        return int(self.nbr[i, self._col[x]])

    def walk(self, i: int, word) -> int:
        for x in word:
            i = self.step(i, x)
            if i < 0:
                return -1
        return i

    def find(self, word) -> int:
        """Index of the coset H.word, or -1 if it lies beyond the truncation."""
        c = self.sub.base_coset()
        for x in W.reduce_word(word):
            c = self.sub.coset_act(c, x)
        return self.index.get(c, -1)

    def undirected_symmetric(self) -> bool:
        """Following x then x^-1 returns to the start wherever both edges exist."""
        for col, x in enumerate(self.letters):
            inv = self._col[-x]
            there = self.nbr[:, col]
            ok = there >= 0
            back = self.nbr[there[ok], inv]
            if not np.array_equal(back, np.nonzero(ok)[0]):
                return False
        return True

    # -- operators ---------------------------------------------------------
    def generator_sum(self, f: np.ndarray) -> np.ndarray:
        """(T f)(y) = sum over letters x of f(y x), zero beyond the truncation."""
        n = self.n_vertices
        pad = np.concatenate([f, np.zeros((1,) + f.shape[1:], dtype=f.dtype)])
        out = pad[self._nbr_pad[:, 0]].copy()
        for col in range(1, self.nbr.shape[1]):
            out += pad[self._nbr_pad[:, col]]
        return out[:n]

    def letter_apply(self, f: np.ndarray, x: int) -> np.ndarray:
        """(rho(x) f)(y) = f(y x)."""
        n = self.n_vertices
        pad = np.concatenate([f, np.zeros((1,) + f.shape[1:], dtype=f.dtype)])
        return pad[self._nbr_pad[:, self._col[x]]][:n]

    def sphere_terms(self, f: np.ndarray, n_max: int):
        """Yield S_0 f, S_1 f, ..., S_{n_max} f."""
        q = 2 * self.rank - 1
        prev = f.copy() if f.dtype == object else f.astype(float, copy=True)
        yield prev
        if n_max < 1:
            return
        cur = self.generator_sum(prev)
        yield cur
        for n in range(2, n_max + 1):
            c = 2 * self.rank if n == 2 else q
            nxt = self.generator_sum(cur) - c * prev
            prev, cur = cur, nxt
            yield cur

    def radial_apply(self, f: np.ndarray, coeffs) -> np.ndarray:
        """sum_n coeffs[n] S_n f."""
        out = np.zeros(f.shape, dtype=float)
        for c, term in zip(coeffs, self.sphere_terms(f, len(coeffs) - 1)):
            if c:
                out += c * term
        return out

    def return_counts(self, n_max: int, exact: bool = False) -> list:
        """|H intersect S(n)| for n <= n_max: reduced words of length n reading a loop.

        Floats by default; ``exact=True`` runs the recurrence on Python ints.
        """
        delta = np.zeros(self.n_vertices, dtype=object if exact else float)
        delta[0] = 1
        if self.radius < margin_for(n_max) and not self.is_finite_complete():
            raise UsageError(
                f"coset graph radius {self.radius} too small for return counts up to {n_max}"
            )
        return [t[0] if exact else float(t[0]) for t in self.sphere_terms(delta, n_max)]


def coset_graph(model, sub, radius: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> CosetGraph:
    """All cosets with a representative of length <= radius."""
    rank = require_free_base(model)
    if sub.rank != rank:
        raise UsageError(f"subgroup lives in rank {sub.rank}, model has rank {rank}")
    return CosetGraph(sub, rank, radius, max_vertices)
