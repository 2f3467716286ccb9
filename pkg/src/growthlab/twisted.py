"""Truncated twisted Poincare operators on coset spaces.

A_R(s) = sum_{|g| <= R} theta(|g|) e^{-s |g|} rho(g), with rho the Koopman
representation (rho(g) f)(y) = f(y g), restricted to cosets of depth <= R_Y.
Grouping by word length turns this into sum_n c_n S_n with the sphere
operators of :mod:`growthlab.models.cosets`, so no matrix is ever stored.

For the trivial subgroup the coset space is the tree itself and A_R commutes
with the automorphisms fixing the root; its Perron vector is radial and the
norm equals that of an (R_Y + 1)-square level matrix (``RadialTreeOperator``).

Boundedness in s is judged from the slope of ln ||A_R(s)|| in R.  This rule
is a heuristic: finite truncations never certify boundedness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, UsageError
from .growth import PattersonWeight
from .models.cosets import CosetGraph, margin_for
from .models.subgroups import StallingsAutomaton, require_free_base


def _coeffs(s: float, R: int, weight: PattersonWeight | None) -> list[float]:
    if s <= 0:
        raise DomainError("s must be positive")
    out = []
    for n in range(R + 1):
        lt = -s * n + (weight.log_theta(n) if weight is not None else 0.0)
        out.append(math.exp(lt))
    return out


class TwistedOperator:
    """Matrix-free A_R(s) on the R_Y-ball of a coset graph."""

    def __init__(self, graph: CosetGraph, s: float, R: int, R_Y: int,
                 weight: PattersonWeight | None = None):
        if graph.radius < R_Y + margin_for(R) and not graph.is_finite_complete():
            raise UsageError(
                f"coset graph radius {graph.radius} too small for R={R}, R_Y={R_Y}"
            )
        self.graph = graph
        self.s, self.R, self.R_Y = s, R, R_Y
        self.weight = weight
        self.coeffs = _coeffs(s, R, weight)
        self.n = graph.inner(R_Y)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.n

    def apply(self, f: np.ndarray) -> np.ndarray:
        full = np.zeros(self.graph.n_vertices)
        full[: self.n] = f
        return self.graph.radial_apply(full, self.coeffs)[: self.n]

    apply_transpose = apply  # rho(g)^* = rho(g^-1) and spheres are symmetric

    def diagonal_base(self) -> float:
        e = np.zeros(self.n)
        e[0] = 1.0
        return float(self.apply(e)[0])

    def row_sums(self) -> np.ndarray:
        return self.apply(np.ones(self.n))

    def dense(self) -> np.ndarray:
        if self.n > 4000:
            raise UsageError("dense assembly limited to 4000 cosets")
        return np.column_stack([self.apply(col) for col in np.eye(self.n)])


def _tree_level_counts(q: int, l: int, m: int, n: int) -> int:
    """Points at level m at distance n from a fixed point at level l (tree, q+1 regular)."""
    if (l + m - n) % 2:
        return 0
    c = (l + m - n) // 2
    if c < 0 or c > min(l, m):
        return 0
    if c == l and c == m:
        return 1
    if c == l:  # descendants
        return (q + 1) * q ** (m - 1) if l == 0 else q ** (m - l)
    if c == m:  # the ancestor at level m
        return 1
    if c == 0:
        return q**m
    return (q - 1) * q ** (m - c - 1)


class RadialTreeOperator:
    """A_R(s) for the trivial subgroup compressed to radial functions.

    Entry (l, m) is sum_n c_n N(l, m, n) sqrt(|S_l| / |S_m|), symmetric, whose
    top eigenvalue is ||A_R(s)|| on the R_Y-ball.
    """

    def __init__(self, rank: int, s: float, R: int, R_Y: int,
                 weight: PattersonWeight | None = None):
        self.rank, self.s, self.R, self.R_Y = rank, s, R, R_Y
        self.coeffs = _coeffs(s, R, weight)
        q = 2 * rank - 1
        size = [1] + [(q + 1) * q ** (m - 1) for m in range(1, R_Y + 1)]
        B = np.zeros((R_Y + 1, R_Y + 1))
        for l in range(R_Y + 1):
            for m in range(R_Y + 1):
                acc = 0.0
                for n in range(abs(l - m), min(R, l + m) + 1):
                    k = _tree_level_counts(q, l, m, n)
                    if k:
                        acc += self.coeffs[n] * k
                B[l, m] = acc * math.sqrt(size[l] / size[m])
        self.matrix = B
        self.n = R_Y + 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.n

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ f

    def apply_transpose(self, f: np.ndarray) -> np.ndarray:
        return self.matrix.T @ f

    def diagonal_base(self) -> float:
        return float(self.matrix[0, 0])


def assemble_twisted(model, sub, s: float, R: int, R_Y: int,
                     weight: PattersonWeight | None = None,
                     graph: CosetGraph | None = None) -> TwistedOperator:
    rank = require_free_base(model)
    if graph is None:
        graph = CosetGraph(sub, rank, R_Y + margin_for(R))
    return TwistedOperator(graph, s, R, R_Y, weight)


def weighted_twisted(model, sub, weight: PattersonWeight, s: float, R: int, R_Y: int) -> TwistedOperator:
    return assemble_twisted(model, sub, s, R, R_Y, weight)


def twisted_norm(op, tol: float = 1e-10, max_iter: int = 20_000,
                 start: np.ndarray | None = None, return_vector: bool = False):
    """Largest singular value by power iteration on A^T A."""
    v = np.ones(op.n) if start is None else np.asarray(start, dtype=float).copy()
    nv = np.linalg.norm(v)
    if nv == 0:
        v = np.ones(op.n)
        nv = np.linalg.norm(v)
    v /= nv
    lam_old = -1.0
    residual = math.inf
    for it in range(1, max_iter + 1):
        w = op.apply_transpose(op.apply(v))
        lam = float(v @ w)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return (0.0, v) if return_vector else 0.0
        residual = float(np.linalg.norm(w - lam * v)) / max(lam, 1e-300)
        v = w / nw
        if abs(lam - lam_old) <= tol * lam and residual <= math.sqrt(tol):
            val = math.sqrt(lam)
            return (val, v) if return_vector else val
        lam_old = lam
    raise ConvergenceError(
        f"twisted norm power iteration stalled after {max_iter} steps", residual=residual,
        iterations=max_iter,
    )


# -- h_rho bracketing -----------------------------------------------------------
BOUNDED = "bounded"
UNBOUNDED = "unbounded"
UNDECIDED = "indeterminate"


@dataclass
class HRhoEstimate:
    lo: float
    hi: float
    table: list = field(default_factory=list)
    tol: float = 0.01
    note: str = "heuristic: slope of ln||A_R(s)|| in R over the last schedule points"

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "tol": self.tol, "note": self.note,
                "table": self.table}


def _classify(slope: float, tol: float) -> str:
    if slope > 2 * tol:
        return UNBOUNDED
    if slope < tol:
        return BOUNDED
    return UNDECIDED


def estimate_h_rho(model, sub, s_grid: Sequence[float], R_schedule: Sequence[int],
                   R_Y: int | Sequence[int] | None = None, tol: float = 0.01,
                   fit_points: int = 3, radial: bool | None = None) -> HRhoEstimate:
    """Bracket h_rho = inf{s : A(s) bounded} on ``s_grid``.

    For every s the norms ||A_R(s)|| over ``R_schedule`` are computed, the slope
    of ln-norm against R is fitted on the last ``fit_points`` radii, and s is
    classified unbounded (slope > 2 tol), bounded (slope < tol) or
    indeterminate.  ``lo`` is the largest unbounded s, ``hi`` the smallest
    bounded s above it.  ``R_Y`` defaults to R (coupled truncation).
    """
    rank = require_free_base(model)
    sched = sorted(R_schedule)
    if not sched or not s_grid:
        raise UsageError("s-grid and R-schedule must be nonempty")
    if R_Y is None:
        ry = list(sched)
    elif isinstance(R_Y, int):
        ry = [R_Y] * len(sched)
    else:
        ry = list(R_Y)
        if len(ry) != len(sched):
            raise UsageError("R_Y schedule must match the R schedule")
    if radial is None:
        radial = isinstance(sub, StallingsAutomaton) and sub.is_trivial()
    graph = None
    if not radial:
        need = max(y + margin_for(r) for r, y in zip(sched, ry))
        graph = CosetGraph(sub, rank, need)
    table, verdicts = [], []
    warm: dict[int, np.ndarray] = {}
    for s in sorted(s_grid):
        norms = []
        for R, y in zip(sched, ry):
            op = (RadialTreeOperator(rank, s, R, y) if radial
                  else TwistedOperator(graph, s, R, y))
            val, vec = twisted_norm(op, tol=1e-9, start=warm.get(R), return_vector=True)
            warm[R] = vec
            norms.append(val)
        k = min(fit_points, len(sched))
        xs = np.asarray(sched[-k:], dtype=float)
        ys = np.log(np.asarray(norms[-k:]))
        slope = float(np.polyfit(xs, ys, 1)[0]) if k >= 2 else math.nan
        cls = _classify(slope, tol) if k >= 2 else UNDECIDED
        verdicts.append((s, cls))
        for R, y, nv in zip(sched, ry, norms):
            table.append({"s": s, "R": R, "R_Y": y, "norm": nv, "slope": slope, "class": cls})
    unb = [s for s, c in verdicts if c == UNBOUNDED]
    lo = max(unb) if unb else min(s_grid)
    above = [s for s, c in verdicts if c == BOUNDED and s > lo]
    hi = min(above) if above else max(s_grid)
    return HRhoEstimate(lo, hi, table, tol)


def subgroup_poincare_truncated(return_counts: Sequence[float], s: float, R: int,
                                weight: PattersonWeight | None = None) -> float:
    """sum_{n <= R} |H cap S(n)| theta(n) e^{-s n}."""
    c = _coeffs(s, R, weight)
    return math.fsum(c[n] * return_counts[n] for n in range(R + 1))


def parse_grid(text: str) -> list[float]:
    """``lo:hi:step`` (inclusive) or a comma list."""
    if ":" in text:
        try:
            lo, hi, step = (float(t) for t in text.split(":"))
        except ValueError:
            raise UsageError(f"grid must be lo:hi:step, got {text!r}") from None
        if step <= 0 or hi < lo:
            raise UsageError("grid needs step > 0 and hi >= lo")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 12) for i in range(count)]
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}") from None


def parse_schedule(text: str) -> list[int]:
    """``4,6,8`` or ``a..b`` or ``a..b:step``."""
    if ".." in text:
        body, _, step = text.partition(":")
        a, b = body.split("..")
        try:
            return list(range(int(a), int(b) + 1, int(step) if step else 1))
        except ValueError:
            raise UsageError(f"cannot parse schedule {text!r}") from None
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse schedule {text!r}") from None
