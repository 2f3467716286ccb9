"""Horoball models over a Cayley graph Y.

Two flavours:

* the exact horocone Z(Y) = Y x [0, inf) with
  ``cosh d((y,r),(y',r')) = cosh(r - r') + e^{-(r+r')} d(y,y')^2 / 2``
  (real distances, used for Poincare series of parabolic subgroups);
* the combinatorial horoball: vertices (y, n) for 0 <= n <= depth, vertical
  edges (y,n)-(y,n+1) and horizontal edges (y,n)-(y',n) when
  0 < d(y,y') <= 2^n.  It is an integer graph, quasi-isometric to the cusp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DomainError, ResourceExhausted, UsageError
from .base import DEFAULT_MAX_VERTICES, CayleyModel, GraphModel


@dataclass(frozen=True)
class HoroconePoint:
    base: object
    height: float


def horocone_cosh_distance(model: CayleyModel, p: HoroconePoint, q: HoroconePoint) -> float:
    if p.height < 0 or q.height < 0:
        raise DomainError("horocone heights must be nonnegative")
    d = model.distance(p.base, q.base)
    return math.cosh(p.height - q.height) + 0.5 * math.exp(-(p.height + q.height)) * d * d


def horocone_distance(model: CayleyModel, p: HoroconePoint, q: HoroconePoint) -> float:
    return math.acosh(max(1.0, horocone_cosh_distance(model, p, q)))


def horocone_orbit_weight(k: int, s: float = 1.0) -> float:
    """e^{-s d(o, g o)} for a parabolic element of base word length k.

    Uses the cancellation-free form ``(2 / (sqrt(k^2+4) + k))^2`` of
    ``((sqrt(k^2+4) - k) / 2)^2``.
    """
    if k < 0:
        raise DomainError("word length must be nonnegative")
    a = 2.0 / (math.sqrt(k * k + 4.0) + k)
    return (a * a) ** s


class CombinatorialHoroball(GraphModel):
    """Points are ``(g, n)`` with g a base-group element and n the level.

    The base group acts by left translation on the first coordinate; orbit
    representatives are ``(identity, n)``.
    """

    kind = "horoball"

    def __init__(self, base: CayleyModel, depth: int,
                 max_vertices: int = DEFAULT_MAX_VERTICES, max_degree: int = 20_000):
        if depth < 0:
            raise DomainError("horoball depth must be nonnegative")
        super().__init__((base.identity, 0), max_vertices)
        self.base = base
        self.depth_cap = depth
        reach = 2**depth
        size = sum(base.sphere_count(r) for r in range(reach + 1))
        if size > max_degree:
            raise UsageError(
                f"horizontal degree {size} at level {depth} exceeds {max_degree}; "
                "lower the depth"
            )
        # displacement sets per level: base ball of radius 2^n minus the identity
        self._moves = [
            [g for r in range(1, 2**n + 1) for g in base.sphere(r)] for n in range(depth + 1)
        ]
        self._from_level: dict[int, dict] = {}
        self._from_level_frontier: dict[int, list] = {}

    def spec(self) -> str:
        return f"horoball:{self.base.spec()},depth={self.depth_cap}"

    def neighbors(self, x):
        g, n = x
        mul = self.base.multiply
        out = [(mul(g, m), n) for m in self._moves[n]]
        if n > 0:
            out.append((g, n - 1))
        if n < self.depth_cap:
            out.append((g, n + 1))
        return out

    # -- group action ------------------------------------------------------
    def act(self, h, x):
        return self.base.multiply(h, x[0]), x[1]

    def decompose(self, x):
        return x[0], (self.base.identity, x[1])

    def orbit_sphere(self, n: int) -> list:
        """Group elements g with d(o, g o) = n."""
        return [g for (g, lvl) in self.sphere(n) if lvl == 0]

    def group_length(self, g) -> int:
        return self.distance(self.basepoint, (g, 0))

    # -- distances ---------------------------------------------------------
    def _upper_bound(self, n1: int, g, n2: int) -> int:
        # climb to the top, cross in steps of 2^depth along a base geodesic, descend
        top = self.depth_cap
        return (top - n1) + (top - n2) + math.ceil(self.base.length(g) / 2**top)

    def _level_distance(self, n: int, target, limit: int) -> int:
        """BFS distance from (identity, n) to ``target``, extended lazily."""
        dist = self._from_level.setdefault(n, {(self.base.identity, n): 0})
        frontier = self._from_level_frontier.setdefault(n, [(self.base.identity, n)])
        with self._lock:
            while target not in dist:
                r = max(dist[frontier[0]] if frontier else 0, 0) + 1
                if r > limit:
                    raise ResourceExhausted(f"horoball distance search passed bound {limit}")
                new = []
                for x in frontier:
                    for y in self.neighbors(x):
                        if y not in dist:
                            dist[y] = r
                            new.append(y)
                if len(dist) > self.max_vertices:
                    raise ResourceExhausted(
                        f"{self.spec()}: vertex budget exceeded in distance search",
                        achieved=r - 1,
                    )
                frontier[:] = new
                if not new:
                    break
        return dist[target]

    def distance(self, x, y) -> int:
        if x == y:
            return 0
        gx, nx = x
        gy, ny = y
        rel = self.base.multiply(self.base.invert(gx), gy)
        if nx > ny:
            # search from the lower level: smaller BFS balls near the bottom
            rel, nx, ny = self.base.invert(rel), ny, nx
        return self._level_distance(nx, (rel, ny), self._upper_bound(nx, rel, ny))
