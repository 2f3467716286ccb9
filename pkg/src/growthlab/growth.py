"""Sphere counts, growth exponents, Poincare series and the lamp-subgroup series.

``exponent`` is always the natural-log rate h; ``base`` = e^h is reported next
to it because some classical values are quoted at base scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, ResourceExhausted, UsageError
from .models.horoball import horocone_orbit_weight

CONVERGING = "Converging"
DIVERGING = "Diverging"
INDETERMINATE = "Indeterminate"


# -- sphere counts -------------------------------------------------------------
@dataclass
class SphereCounts:
    counts: list[int]
    model: str = ""
    complete: bool = True

    def __post_init__(self):
        if not self.counts or self.counts[0] != 1:
            raise UsageError("sphere counts must start with N(0) = 1")
        if any(c < 0 for c in self.counts):
            raise UsageError("sphere counts must be nonnegative")

    @property
    def radius(self) -> int:
        return len(self.counts) - 1

    @property
    def balls(self) -> list[int]:
        out, acc = [], 0
        for c in self.counts:
            acc += c
            out.append(acc)
        return out

    def rows(self) -> list[dict]:
        balls = self.balls
        out = []
        for n, c in enumerate(self.counts):
            prev = self.counts[n - 1] if n else 0
            lr = math.log(c / prev) if n and c > 0 and prev > 0 else None
            out.append({"radius": n, "sphere_count": c, "ball_count": balls[n], "log_ratio": lr})
        return out


def sphere_counts(model, R: int) -> SphereCounts:
    """Orbit-sphere cardinalities N(0..R).

    On budget exhaustion a :class:`ResourceExhausted` is raised whose
    ``partial`` holds the counts up to the achieved radius.
    """
    counter: Callable[[int], int]
    if hasattr(model, "sphere_count") and model.vertex_transitive:
        counter = model.sphere_count
    else:
        counter = lambda n: len(model.orbit_sphere(n))  # noqa: E731
    counts: list[int] = []
    try:
        for n in range(R + 1):
            counts.append(counter(n))
    except ResourceExhausted as exc:
        partial = SphereCounts(counts, model.spec(), complete=False) if counts else None
        raise ResourceExhausted(str(exc), achieved=len(counts) - 1, partial=partial) from None
    return SphereCounts(counts, model.spec())


def sequence_counts(values: Sequence[float], label: str = "synthetic") -> SphereCounts:
    """Wrap an arbitrary count sequence (N(0) forced to 1)."""
    vals = [1] + [int(v) for v in values[1:]]
    return SphereCounts(vals, label)


# -- growth estimation ---------------------------------------------------------
@dataclass
class GrowthEstimate:
    exponent: float
    base: float
    window: tuple[int, int]
    method: str
    dispersion: float
    basis: str
    last_ratio: float | None = None

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "base": self.base,
            "window": list(self.window),
            "method": self.method,
            "basis": self.basis,
            "dispersion": self.dispersion,
            "last_ratio_exponent": self.last_ratio,
        }


GROWTH_METHODS = ("regression", "log-ratio", "corrected")


def estimate_growth(counts: SphereCounts, window: tuple[int, int] | None = None,
                    method: str = "regression", basis: str = "auto") -> GrowthEstimate:
    """Exponential growth rate of ``counts`` over ``window`` (inclusive).

    ``basis`` picks what is regressed: ``sphere`` (ln N(r)), ``ball``
    (ln |B(r)|) or ``auto`` (spheres when every count in the window is
    positive, balls otherwise).  Methods: least-squares slope, the last
    log-ratio, or ``corrected`` which fits ln N = a + b ln r + c r and reports
    c (removes polynomial prefactors).
    """
    if method not in GROWTH_METHODS:
        raise UsageError(f"unknown growth method {method!r}", list(GROWTH_METHODS))
    if window is None:
        window = (max(1, counts.radius - 6), counts.radius)
    lo, hi = window
    if lo < 0 or hi > counts.radius:
        raise UsageError(f"window {window} outside available radii 0..{counts.radius}")
    if hi - lo + 1 < 3:
        raise UsageError("growth window must span at least 3 radii")
    sph = counts.counts[lo:hi + 1]
    if basis == "auto":
        basis = "sphere" if all(c > 0 for c in sph) else "ball"
    if basis == "sphere":
        vals = sph
    elif basis == "ball":
        vals = counts.balls[lo:hi + 1]
    else:
        raise UsageError(f"unknown basis {basis!r}", ["sphere", "ball", "auto"])
    if any(v <= 0 for v in vals):
        raise DomainError("growth estimation needs positive counts over the window")
    r = np.arange(lo, hi + 1, dtype=float)
    y = np.log(np.asarray(vals, dtype=float))
    ratios = np.diff(y)
    dispersion = float(ratios.max() - ratios.min())
    last = float(ratios[-1])
    if method == "regression":
        exponent = float(np.polyfit(r, y, 1)[0])
    elif method == "log-ratio":
        exponent = last
    else:
        if lo < 1:
            raise UsageError("corrected fit needs radii >= 1")
        design = np.column_stack([np.ones_like(r), np.log(r), r])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        exponent = float(coef[2])
    return GrowthEstimate(exponent, math.exp(exponent), (lo, hi), method, dispersion, basis, last)


# -- Poincare series -----------------------------------------------------------
@dataclass
class PoincareEvaluation:
    s: float
    partial_sums: list[float]
    verdict: str
    trend: dict = field(default_factory=dict)
    exact_total: Fraction | None = None

    @property
    def total(self) -> float:
        return self.partial_sums[-1]

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "partial_sum": self.total,
            "terms": len(self.partial_sums),
            "verdict": self.verdict,
            "trend": self.trend,
            "exact_total": None if self.exact_total is None else str(self.exact_total),
        }


def classify_increments(increments: Sequence[float], geo_tol: float = 0.05,
                        power_tol: float = 0.05, tail_from: int | None = None) -> tuple[str, dict]:
    """Convergence verdict from the tail of a positive series.

    Converging when the tail decays geometrically (fitted log-ratio below
    -geo_tol) or like n^-p with p >= 1 + power_tol; Diverging when p <= 1 -
    power_tol (which covers increments bounded below); Indeterminate otherwise.
    Zero increments (parity gaps) are skipped.
    """
    inc = list(increments)
    n_all = len(inc)
    start = tail_from if tail_from is not None else n_all // 2
    idx = [n for n in range(max(start, 1), n_all) if inc[n] > 0]
    if len(idx) < 3:
        if sum(inc[start:]) == 0:
            return CONVERGING, {"reason": "tail identically zero", "geometric_rate": None,
                                "power_exponent": None}
        return INDETERMINATE, {"reason": "too few positive tail terms"}
    n = np.asarray(idx, dtype=float)
    y = np.log(np.asarray([inc[i] for i in idx], dtype=float))
    g = float(np.polyfit(n, y, 1)[0])
    p = float(-np.polyfit(np.log(n), y, 1)[0])
    trend = {"geometric_rate": g, "power_exponent": p, "tail": [int(idx[0]), int(idx[-1])],
             "geo_tol": geo_tol, "power_tol": power_tol, "heuristic": True}
    if g <= -geo_tol:
        return CONVERGING, trend
    if p >= 1 + power_tol:
        return CONVERGING, trend
    if p <= 1 - power_tol:
        return DIVERGING, trend
    return INDETERMINATE, trend


def _evaluate(s: float, terms: Sequence[float], **kw) -> PoincareEvaluation:
    sums = np.cumsum(np.asarray(terms, dtype=float)).tolist()
    verdict, trend = classify_increments(terms, **kw)
    return PoincareEvaluation(s, sums, verdict, trend)


def poincare_partial(counts: SphereCounts, s: float, R: int | None = None,
                     weight: "PattersonWeight | None" = None, **kw) -> PoincareEvaluation:
    """Partial sums of sum_n theta(n) N(n) e^{-s n} for n <= R."""
    if s < 0:
        raise DomainError("s must be nonnegative")
    R = counts.radius if R is None else min(R, counts.radius)
    terms = []
    for n in range(R + 1):
        c = counts.counts[n]
        if c == 0:
            terms.append(0.0)
            continue
        lt = math.log(c) - s * n
        if weight is not None:
            lt += weight.log_theta(n)
        terms.append(math.exp(lt))
    return _evaluate(s, terms, **kw)


def poincare_horocone(base_counts: Callable[[int], int], s: float, K: int, **kw) -> PoincareEvaluation:
    """Parabolic series sum_k |S_base(k)| a_k^s, a_k = ((sqrt(k^2+4) - k) / 2)^2."""
    if s < 0:
        raise DomainError("s must be nonnegative")
    terms = [base_counts(k) * horocone_orbit_weight(k, s) for k in range(K + 1)]
    return _evaluate(s, terms, **kw)


def abelian_sphere_count(d: int) -> Callable[[int], int]:
    """Closed-form |S(k)| in Z^d with the l1 word metric."""

    def count(k: int) -> int:
        if k == 0:
            return 1
        return sum(2**j * math.comb(d, j) * math.comb(k - 1, j - 1) for j in range(1, min(d, k) + 1))

    return count


def critical_exponent_scan(evals: Sequence[PoincareEvaluation]) -> dict:
    """Locate the Diverging -> Converging flip on an increasing s-grid."""
    last_div, first_conv = None, None
    for ev in evals:
        if ev.verdict == DIVERGING:
            last_div = ev.s
        if ev.verdict == CONVERGING and first_conv is None:
            first_conv = ev.s
    return {"last_diverging": last_div, "first_converging": first_conv}


# -- Patterson weight ------------------------------------------------------------
@dataclass
class PattersonWeight:
    """Piecewise log-affine theta: slope ``slopes[i]`` on [breakpoints[i], breakpoints[i+1])."""

    breakpoints: list[int]
    slopes: list[float]
    log_values: list[float]
    constant: bool = False

    def log_theta(self, t: float) -> float:
        if self.constant or not self.breakpoints or t <= self.breakpoints[0]:
            return 0.0
        i = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return self.log_values[i] + self.slopes[i] * (t - self.breakpoints[i])

    def __call__(self, t: float) -> float:
        return math.exp(self.log_theta(t))

    @property
    def epsilon_schedule(self) -> list[float]:
        return list(self.slopes)

    def check_slowly_increasing(self, tol: float = 1e-9) -> bool:
        """theta(t+u) <= e^{eps u} theta(t) for t >= t_n, eps = slopes[n], on breakpoints."""
        bp = self.breakpoints
        for n, eps in enumerate(self.slopes):
            for i in range(n, len(bp)):
                for j in range(i, len(bp)):
                    u = bp[j] - bp[i]
                    if self.log_values[j] - self.log_values[i] > eps * u + tol:
                        return False
        return True

    def to_dict(self) -> dict:
        return {"constant": self.constant, "breakpoints": self.breakpoints, "slopes": self.slopes}


def patterson_weight(counts: SphereCounts, h_target: float, max_blocks: int = 200,
                     eps0: float = 0.5) -> PattersonWeight:
    """Slowly increasing weight making the series diverge at ``h_target``.

    If the plain series already diverges the weight is constant.  Otherwise
    block n uses slope eps_n = eps0 / n and ends once its weighted mass at
    s = h_target reaches n.
    """
    est = estimate_growth(counts, basis="ball")
    if h_target < est.exponent - 0.05:
        raise DomainError(
            f"target {h_target} is below the growth exponent {est.exponent:.4f}; "
            "no weight can force divergence there"
        )
    plain = poincare_partial(counts, h_target)
    if plain.verdict == DIVERGING:
        return PattersonWeight([0], [0.0], [0.0], constant=True)
    log_terms = [
        math.log(c) - h_target * n if c > 0 else -math.inf for n, c in enumerate(counts.counts)
    ]
    bps, slopes, logv = [], [], []
    t, lv = 1, 0.0
    for blk in range(1, max_blocks + 1):
        eps = eps0 / blk
        bps.append(t)
        slopes.append(eps)
        logv.append(lv)
        mass = 0.0
        u = t
        while u <= counts.radius and mass < blk:
            mass += math.exp(log_terms[u] + lv + eps * (u - t))
            u += 1
        if mass < blk:
            break
        lv += eps * (u - t)
        t = u
    return PattersonWeight(bps, slopes, logv)


# -- lamp subgroup series ------------------------------------------------------
def _series_mul(a: list, b: list, n: int) -> list:
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def _series_inv(a: list, n: int) -> list:
    if a[0] == 0:
        raise DomainError("series with zero constant term is not invertible")
    inv = [Fraction(0)] * n
    inv[0] = 1 / Fraction(a[0])
    for k in range(1, n):
        acc = sum((a[j] * inv[k - j] for j in range(1, min(k, len(a) - 1) + 1)), Fraction(0))
        inv[k] = -acc * inv[0]
    return inv


def zeta_V_closed_form(n_terms: int) -> list[Fraction]:
    """Taylor coefficients of 1 + z + z^2 (1+z)(1-z)(2+3z+2z^2) / (1 - z^2 (1+z))^2."""
    if n_terms < 1:
        raise DomainError("need at least one term")
    n = n_terms
    f = lambda cs: [Fraction(c) for c in cs]  # noqa: E731
    num = _series_mul(_series_mul(f([0, 0, 1]), f([1, 1]), n + 3), f([1, -1]), n + 3)
    num = _series_mul(num, f([2, 3, 2]), n)
    den = f([1, 0, -1, -1])
    den2 = _series_mul(den, den, n)
    out = _series_mul(num, _series_inv(den2, n), n)
    out[0] += 1
    if n > 1:
        out[1] += 1
    return out[:n]


def zeta_V_singularity() -> float:
    """Smallest positive root of 1 - z^2 - z^3 (reciprocal of the plastic number)."""
    return brentq(lambda z: 1 - z * z - z**3, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def lamp_subgroup_counts(model, R: int) -> SphereCounts:
    """Counts of position-0 elements per sphere of the lamplighter Cayley graph."""
    return SphereCounts([len(model.lamp_subgroup_sphere(n)) for n in range(R + 1)], "lamplighter:V")


def zeta_coefficient_table(n_terms: int, bfs: SphereCounts) -> list[dict]:
    coeffs = zeta_V_closed_form(n_terms)
    rows = []
    for n, c in enumerate(coeffs):
        b = bfs.counts[n] if n <= bfs.radius else None
        rows.append({"n": n, "closed_form": str(c), "bfs_count": b,
                     "match": (b == c) if b is not None else None})
    return rows
