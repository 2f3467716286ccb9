"""Implicit graph models with a group acting by label-preserving symmetries.

Every model enumerates spheres around its basepoint by breadth-first search and
caches the result.  The cache only ever grows; extension is serialized behind a
lock so concurrent readers always see a fully enumerated radius.
"""

from __future__ import annotations

import threading
from typing import Hashable, Iterable

from ..errors import RegionExhausted, ResourceExhausted

DEFAULT_MAX_VERTICES = 5_000_000

Point = Hashable


class GraphModel:
    """Base class: a locally finite connected graph with a marked basepoint."""

    kind = "graph"
    vertex_transitive = False

    def __init__(self, basepoint: Point, max_vertices: int = DEFAULT_MAX_VERTICES):
        self.basepoint = basepoint
        self.max_vertices = max_vertices
        self._lock = threading.RLock()
        self._depth: dict[Point, int] = {basepoint: 0}
        self._spheres: list[list[Point]] = [[basepoint]]
        self._total = 1

    # -- graph structure -------------------------------------------------
    def neighbors(self, x: Point) -> Iterable[Point]:
        raise NotImplementedError

    def spec(self) -> str:
        return self.kind

    # -- BFS from the basepoint -------------------------------------------
    @property
    def enumerated_radius(self) -> int:
        return len(self._spheres) - 1

    def _extend_to(self, n: int) -> None:
        with self._lock:
            while self.enumerated_radius < n:
                frontier = self._spheres[-1]
                depth = self._depth
                r = len(self._spheres)
                new: list[Point] = []
                for x in frontier:
                    for y in self.neighbors(x):
                        if y not in depth:
                            depth[y] = r
                            new.append(y)
                if self._total + len(new) > self.max_vertices:
                    # roll back the partial layer so the cache stays consistent
                    for y in new:
                        del depth[y]
                    raise ResourceExhausted(
                        f"{self.spec()}: vertex budget {self.max_vertices} exceeded "
                        f"while enumerating radius {r}",
                        achieved=r - 1,
                    )
                self._total += len(new)
                self._spheres.append(new)

    def sphere(self, n: int) -> list[Point]:
        if n < 0:
            return []
        self._extend_to(n)
        return self._spheres[n]

    def sphere_count(self, n: int) -> int:
        return len(self.sphere(n))

    def ball(self, n: int) -> list[Point]:
        out: list[Point] = []
        for r in range(n + 1):
            out.extend(self.sphere(r))
        return out

    def depth(self, x: Point) -> int:
        """d(o, x) for an enumerated point; raises RegionExhausted otherwise."""
        d = self._depth.get(x)
        if d is None:
            raise RegionExhausted(x, self.enumerated_radius)
        return d

    def depth_search(self, x: Point, limit: int | None = None) -> int:
        """d(o, x), extending the BFS (up to ``limit`` or the vertex budget)."""
        while True:
            d = self._depth.get(x)
            if d is not None:
                return d
            if limit is not None and self.enumerated_radius >= limit:
                raise RegionExhausted(x, self.enumerated_radius)
            try:
                self._extend_to(self.enumerated_radius + 1)
            except ResourceExhausted:
                raise RegionExhausted(x, self.enumerated_radius) from None

    def distance(self, x: Point, y: Point) -> int:
        raise NotImplementedError

    # -- group action (overridden by models with a free orbit structure) ---
    def act(self, g, x: Point) -> Point:
        raise NotImplementedError

    def decompose(self, x: Point):
        """Write ``x = g . rep`` with ``rep`` a canonical orbit representative."""
        raise NotImplementedError

    def orbit_point(self, g) -> Point:
        return self.act(g, self.basepoint)


class CayleyModel(GraphModel):
    """Cayley graph of a group: vertices are group elements, o is the identity.

    Subclasses supply ``identity``, ``multiply``, ``invert`` and ``generators``;
    ``length`` defaults to a BFS lookup.
    """

    vertex_transitive = True
    generators: list = []

    def __init__(self, identity, max_vertices: int = DEFAULT_MAX_VERTICES):
        super().__init__(identity, max_vertices)
        self.identity = identity

    def multiply(self, x, y):
        raise NotImplementedError

    def invert(self, x):
        raise NotImplementedError

    def neighbors(self, x):
        return [self.multiply(x, g) for g in self.generators]

    def length(self, x) -> int:
        return self.depth_search(x)

    def distance(self, x, y) -> int:
        if x == y:
            return 0
        return self.length(self.multiply(self.invert(x), y))

    def act(self, g, x):
        return self.multiply(g, x)

    def decompose(self, x):
        return x, self.identity

    def orbit_sphere(self, n: int) -> list:
        return self.sphere(n)

    def group_length(self, g) -> int:
        return self.length(g)
