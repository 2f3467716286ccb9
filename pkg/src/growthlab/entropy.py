"""Gamma_K enumeration, entropy outside compact sets and the BM finiteness series.

Gamma_K is the set of g for which some geodesic from a point of K to a point
of gK meets the orbit Gamma.K only inside K and gK.  The existence of such a
geodesic is decided exactly, by a breadth-first search restricted to
permitted vertices that only ever steps one unit closer to the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import UnsupportedError, UsageError
from .growth import (
    CONVERGING,
    DIVERGING,
    INDETERMINATE,
    GrowthEstimate,
    PoincareEvaluation,
    SphereCounts,
    _evaluate,
    estimate_growth,
    sphere_counts,
)
from .models.base import GraphModel

GRAPH_ONLY_NOTE = (
    "Gamma_K is computed for graph models only: geodesics are vertex paths of "
    "the graph metric"
)


@dataclass
class CompactSet:
    vertices: list
    label: str = "K"

    def __post_init__(self):
        if not self.vertices:
            raise UsageError("compact set must be nonempty")

    def radius(self, model: GraphModel) -> int:
        return max(model.distance(model.basepoint, v) for v in self.vertices)


@dataclass
class Witness:
    x: object
    y: object
    path: list

    def to_dict(self) -> dict:
        return {"x": repr(self.x), "y": repr(self.y), "length": len(self.path) - 1}


@dataclass
class GammaKReport:
    members: list
    witnesses: dict
    counts: list[int]
    radius: int
    h_out: float
    finite: bool
    K: str
    certified: bool = False
    note: str = GRAPH_ONLY_NOTE

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "radius": self.radius,
            "member_count": len(self.members),
            "counts": self.counts,
            "h_out": self.h_out,
            "finite": self.finite,
            "finiteness_certified": self.certified,
            "note": self.note,
        }


class _Orbit:
    """Membership test for Gamma.K through orbit representatives."""

    def __init__(self, model: GraphModel, K: CompactSet):
        try:
            self.reps = {model.decompose(k)[1] for k in K.vertices}
            model.act(model.decompose(model.basepoint)[0], model.basepoint)
        except NotImplementedError:
            raise UnsupportedError(
                f"{model.spec()} has no group action with orbit representatives"
            ) from None
        self.model = model
        self.everything = model.vertex_transitive

    def __contains__(self, v) -> bool:
        return self.everything or self.model.decompose(v)[1] in self.reps


def _witness(model: GraphModel, x, z, allowed) -> list | None:
    """A geodesic x -> z all of whose vertices satisfy ``allowed``, or None."""
    D = model.distance(x, z)
    parent = {x: None}
    layer = [x]
    for i in range(D):
        nxt = []
        for v in layer:
            for w in model.neighbors(v):
                if w in parent or not allowed(w):
                    continue
                if model.distance(w, z) != D - i - 1:
                    continue
                parent[w] = v
                nxt.append(w)
        if not nxt:
            return None
        layer = nxt
    if z not in parent:
        return None
    path, v = [], z
    while v is not None:
        path.append(v)
        v = parent[v]
    return path[::-1]


def _candidates(model: GraphModel, R: int):
    for n in range(R + 1):
        for g in (model.orbit_sphere(n) if hasattr(model, "orbit_sphere") else model.sphere(n)):
            yield n, g


def gamma_K(model: GraphModel, K: CompactSet, R: int) -> GammaKReport:
    """All g with d(o, go) <= R in Gamma_K, each with a witness geodesic."""
    orbit = _Orbit(model, K)
    Kset = set(K.vertices)
    members, witnesses = [], {}
    counts = [0] * (R + 1)
    # on a Cayley graph K and gK must touch, so d(o, go) <= 2 rad(K) + 1
    bound = 2 * K.radius(model) + 1 if orbit.everything else None
    reach = R if bound is None else min(R, bound)
    for n, g in _candidates(model, reach):
        gK = [model.act(g, k) for k in K.vertices]
        gKset = set(gK)
        inside = Kset | gKset
        if orbit.everything:
            # every vertex lies in Gamma.K, so the geodesic must stay in K u gK;
            # first check that K and gK touch at all
            if not _touches(model, Kset, gKset):
                continue
            allowed = inside.__contains__
        else:
            allowed = lambda v, inside=inside: v in inside or v not in orbit  # noqa: E731
        found = None
        for x in K.vertices:
            for z in gK:
                path = _witness(model, x, z, allowed)
                if path is not None:
                    found = Witness(x, z, path)
                    break
            if found:
                break
        if found is not None:
            members.append(g)
            witnesses[g] = found
            counts[n] += 1
    if bound is not None and R >= bound:
        return GammaKReport(members, witnesses, counts, R, 0.0, True, K.label, certified=True)
    h_out, finite = _h_out(counts)
    return GammaKReport(members, witnesses, counts, R, h_out, finite, K.label)


def _touches(model: GraphModel, A: set, B: set) -> bool:
    if A & B:
        return True
    return any(w in B for v in A for w in model.neighbors(v))


def _h_out(counts: list[int]) -> tuple[float, bool]:
    """Growth of Gamma_K counts; 0 and finite when the upper half is empty."""
    R = len(counts) - 1
    if sum(counts[R // 2 + 1:]) == 0:
        return 0.0, True
    est = estimate_growth(SphereCounts([1] + counts[1:]), (max(1, R // 2), R), basis="ball")
    return max(est.exponent, 0.0), False


def verify_witness(model: GraphModel, K: CompactSet, g, w: Witness) -> bool:
    """Endpoints in K and gK, geodesic length, and interior avoiding Gamma.K \\ (K u gK)."""
    orbit = _Orbit(model, K)
    Kset = set(K.vertices)
    gK = {model.act(g, k) for k in K.vertices}
    p = w.path
    if p[0] not in Kset or p[-1] not in gK:
        return False
    if len(p) - 1 != model.distance(p[0], p[-1]):
        return False
    if any(model.distance(a, b) != 1 for a, b in zip(p, p[1:])):
        return False
    return all(v in Kset or v in gK or v not in orbit for v in p)


def gamma_K_tree_bruteforce(model, K: CompactSet, R: int) -> set:
    """Independent oracle on free groups: unique geodesics, read letter by letter."""
    from . import words as W

    Kset = set(K.vertices)
    out = set()
    for n in range(R + 1):
        for g in model.sphere(n):
            gK = {W.multiply(g, k) for k in K.vertices}
            ok = False
            for x in K.vertices:
                for z in gK:
                    step = W.multiply(W.invert(x), z)
                    path = [W.multiply(x, step[:i]) for i in range(len(step) + 1)]
                    if all(v in Kset or v in gK for v in path):
                        ok = True
                        break
                if ok:
                    break
            if ok:
                out.add(g)
    return out


# -- SPR -----------------------------------------------------------------------
@dataclass
class SPRReport:
    h_gamma: GrowthEstimate
    h_infinity_upper: float
    verdict: str
    per_K: list = field(default_factory=list)
    margin: float = 0.2
    note: str = GRAPH_ONLY_NOTE

    def to_dict(self) -> dict:
        return {
            "h_gamma": self.h_gamma.to_dict(),
            "h_infinity_upper": self.h_infinity_upper,
            "verdict": self.verdict,
            "margin": self.margin,
            "per_K": self.per_K,
            "note": self.note + "; h_infinity is an upper bound over the tested K only",
        }


SPR = "SPR"
NOT_DETECTED = "NotDetected"


def spr_test(model: GraphModel, ladder: list[CompactSet], R: int, margin: float = 0.2,
             growth_radius: int | None = None, tol: float = 0.05) -> SPRReport:
    """Compare the smallest Gamma_K growth over ``ladder`` with the orbit growth."""
    if not ladder:
        raise UsageError("K ladder must be nonempty")
    counts = sphere_counts(model, growth_radius or R)
    h = estimate_growth(counts)
    rows, best = [], math.inf
    for K in ladder:
        rep = gamma_K(model, K, R)
        rows.append(rep.to_dict())
        best = min(best, rep.h_out)
    gap = h.exponent - best
    if gap >= margin:
        verdict = SPR
    elif gap <= tol:
        verdict = NOT_DETECTED
    else:
        verdict = INDETERMINATE
    return SPRReport(h, best, verdict, rows, margin)


# -- BM finiteness -------------------------------------------------------------
def bm_finiteness_series(model: GraphModel, K: CompactSet, h: float, R: int,
                         exact_base: Fraction | int | None = None,
                         report: GammaKReport | None = None) -> PoincareEvaluation:
    """Partial sums of sum over Gamma_K of d e^{-h d}, d = d(o, g o).

    With ``exact_base`` = e^h given as a rational the sum is also returned
    exactly.
    """
    rep = report or gamma_K(model, K, R)
    ev = bm_series_from_counts(rep.counts, h, exact_base)
    if rep.certified:
        # every member is enumerated, so the series is this finite sum
        ev.verdict = CONVERGING
        ev.trend = {"reason": "Gamma_K certified finite; the series is a finite sum"}
    return ev


def bm_series_from_counts(counts, h: float, exact_base=None) -> PoincareEvaluation:
    terms = [n * c * math.exp(-h * n) if c else 0.0 for n, c in enumerate(counts)]
    ev = _evaluate(h, terms)
    if exact_base is not None:
        b = Fraction(exact_base)
        ev.exact_total = sum((Fraction(n * c) / b**n for n, c in enumerate(counts)), Fraction(0))
    return ev


__all__ = [
    "CONVERGING",
    "DIVERGING",
    "INDETERMINATE",
    "NOT_DETECTED",
    "SPR",
    "CompactSet",
    "GammaKReport",
    "SPRReport",
    "Witness",
    "bm_finiteness_series",
    "bm_series_from_counts",
    "gamma_K",
    "gamma_K_tree_bruteforce",
    "spr_test",
    "verify_witness",
]
