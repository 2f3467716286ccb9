"""Hyperbolicity primitives on graph models.

All quantities are exact: graph distances are integers, so Gromov products
are half-integers and are returned as :class:`fractions.Fraction`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

import numpy as np

from .errors import DomainError, RegionExhausted
from .models.base import GraphModel


def _require(model: GraphModel, *points) -> None:
    # closed-form models answer depth() for any point; BFS models only for
    # points already enumerated
    for p in points:
        model.depth(p)


def gromov_product(model: GraphModel, x, y, z) -> Fraction:
    """(x|y)_z = (d(x,z) + d(y,z) - d(x,y)) / 2."""
    _require(model, x, y, z)
    d = model.distance
    return Fraction(d(x, z) + d(y, z) - d(x, y), 2)


def four_point_defect(model: GraphModel, x, y, z, t) -> Fraction:
    """max(0, min{(x|y)_t, (y|z)_t} - (x|z)_t)."""
    _require(model, x, y, z, t)
    d = model.distance
    dxt, dyt, dzt = d(x, t), d(y, t), d(z, t)
    dxy, dyz, dxz = d(x, y), d(y, z), d(x, z)
    xy = Fraction(dxt + dyt - dxy, 2)
    yz = Fraction(dyt + dzt - dyz, 2)
    xz = Fraction(dxt + dzt - dxz, 2)
    return max(Fraction(0), min(xy, yz) - xz)


def quadruple_defect(model: GraphModel, pts) -> Fraction:
    """Largest four-point defect over every labelling of a quadruple."""
    _require(model, *pts)
    dm = [[0] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(i + 1, 4):
            dm[i][j] = dm[j][i] = model.distance(pts[i], pts[j])
    best = 0
    for x, y, z, t in permutations(range(4)):
        # doubled products keep everything integral
        xy = dm[x][t] + dm[y][t] - dm[x][y]
        yz = dm[y][t] + dm[z][t] - dm[y][z]
        xz = dm[x][t] + dm[z][t] - dm[x][z]
        best = max(best, min(xy, yz) - xz)
    return Fraction(best, 2)


@dataclass
class DeltaEstimate:
    """Certified lower bound on the hyperbolicity constant of a ball."""

    lower_bound: Fraction
    samples: int
    seed: int
    radius: int
    witness: tuple | None = field(default=None)

    def to_dict(self) -> dict:
        return {
            "lower_bound": str(self.lower_bound),
            "lower_bound_float": float(self.lower_bound),
            "samples": self.samples,
            "seed": self.seed,
            "radius": self.radius,
            "kind": "lower bound (maximum observed four-point defect)",
        }


def estimate_delta(model: GraphModel, radius: int, samples: int, seed: int = 0) -> DeltaEstimate:
    """Max defect over ``samples`` uniformly drawn quadruples from B(o, radius).

    All indices are drawn up front from one seeded generator, so the result
    does not depend on evaluation order.
    """
    if samples < 1:
        raise DomainError("need at least one sample")
    ball = model.ball(radius)
    if not ball:
        raise DomainError("cannot sample from an empty ball")
    # make sure pairwise distances (up to 2*radius) are answerable
    if not getattr(model, "closed_form_depth", False):
        model.ball(2 * radius)
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, len(ball), size=(samples, 4))
    best, witness = Fraction(0), None
    for row in picks:
        q = tuple(ball[i] for i in row)
        dq = quadruple_defect(model, q)
        if dq > best:
            best, witness = dq, q
    return DeltaEstimate(best, samples, seed, radius, witness)


def lies_on_geodesic(model: GraphModel, o, p, y) -> bool:
    d = model.distance
    return d(o, p) + d(p, y) == d(o, y)


def local_ball(model: GraphModel, center, r: int) -> list:
    """B(center, r) by a BFS started at ``center``."""
    return list(local_distances(model, center, r))


def local_distances(model: GraphModel, center, r: int) -> dict:
    """Distances from ``center`` to every point of B(center, r)."""
    seen = {center: 0}
    queue = deque([center])
    while queue:
        v = queue.popleft()
        if seen[v] == r:
            continue
        for w in model.neighbors(v):
            if w not in seen:
                seen[w] = seen[v] + 1
                queue.append(w)
    return seen


def shadow_contains(model: GraphModel, o, center, r: int, y) -> bool:
    """Some geodesic from o to y meets B(center, r)."""
    if r < 0:
        raise DomainError("shadow radius must be nonnegative")
    d = model.distance
    doy = d(o, y)
    return any(d(o, p) + d(p, y) == doy for p in local_ball(model, center, r))


def all_geodesics(model: GraphModel, x, y, limit: int = 100_000) -> list[list]:
    """Every geodesic vertex path from x to y (brute force, for checks)."""
    n = model.distance(x, y)
    out: list[list] = []

    def extend(path):
        if len(out) > limit:
            raise RegionExhausted(y)
        v = path[-1]
        k = len(path) - 1
        if k == n:
            out.append(list(path))
            return
        for w in model.neighbors(v):
            if model.distance(x, w) == k + 1 and model.distance(w, y) == n - k - 1:
                path.append(w)
                extend(path)
                path.pop()

    extend([x])
    return out
