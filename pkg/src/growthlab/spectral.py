"""Random walks on truncated coset graphs.

Operators act on functions supported in the ball of radius R around the
identity coset (Dirichlet truncation).  Walks whose support has words of
length up to L are applied on a coset graph of radius R + L // 2, so the
truncated operator is exactly P M P with P the restriction to the R-ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import words as W
from .errors import ConvergenceError, DomainError, InvariantViolation, UsageError
from .models.cosets import CosetGraph, margin_for


@dataclass
class WalkMeasure:
    """Finitely supported symmetric probability measure on F_rank.

    ``radial`` (optional) gives the mass of each single element of length n
    when the measure is a function of word length only; it enables the
    sphere-recurrence fast path.
    """

    support: dict
    rank: int
    radial: list | None = None
    label: str = "walk"

    def __post_init__(self):
        total = math.fsum(self.support.values())
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"walk probabilities sum to {total}, not 1")
        for g, pg in self.support.items():
            if pg < 0:
                raise DomainError("negative walk probability")
            if abs(self.support.get(W.invert(g), 0.0) - pg) > 1e-15:
                raise DomainError(f"walk is not symmetric at {W.format_word(g)}")
            if any(abs(x) > self.rank for x in g):
                raise UsageError(f"walk support word {W.format_word(g)} exceeds rank {self.rank}")

    @property
    def max_length(self) -> int:
        return max(len(g) for g in self.support)


def uniform_generators(rank: int) -> WalkMeasure:
    p = 1.0 / (2 * rank)
    return WalkMeasure({(x,): p for x in W.letters(rank)}, rank, [0.0, p], "uniform-gens")


def annulus_walk(model, n: int, a: int = 1) -> WalkMeasure:
    """Uniform measure on {g : n - a < |g| <= n}."""
    if a < 1 or n < 1:
        raise DomainError("annulus needs n >= 1 and a >= 1")
    lo = max(n - a + 1, 0)
    elems = [g for m in range(lo, n + 1) for g in model.sphere(m)]
    if not elems:
        raise DomainError(f"annulus ({n - a}, {n}] is empty")
    p = 1.0 / len(elems)
    radial = [p if lo <= m <= n else 0.0 for m in range(n + 1)]
    rank = getattr(model, "rank", None)
    return WalkMeasure({g: p for g in elems}, rank, radial, f"annulus:{n},{a}")


def parse_walk(spec: str, model) -> WalkMeasure:
    s = spec.strip()
    if s == "uniform-gens":
        return uniform_generators(model.rank)
    if s.startswith("annulus:"):
        try:
            n, a = (int(t) for t in s[len("annulus:"):].split(","))
        except ValueError:
            raise UsageError(f"annulus walk spec must be annulus:n,a, got {spec!r}") from None
        return annulus_walk(model, n, a)
    raise UsageError(f"unknown walk {spec!r}", ["uniform-gens", "annulus:4,1"])


class TruncatedMarkov:
    """(M f)(y) = sum_g p(g) f(y g^-1) on the R-ball of the coset space."""

    def __init__(self, p: WalkMeasure, sub, R: int, graph: CosetGraph | None = None):
        if p.rank != sub.rank:
            raise UsageError("walk and subgroup live in different ranks")
        self.p = p
        self.R = R
        need = R + margin_for(p.max_length)
        if graph is None or (graph.radius < need and not graph.is_finite_complete()):
            graph = CosetGraph(sub, sub.rank, need)
        self.graph = graph
        self.n = graph.inner(R)
        # support words grouped for the generic path
        self._words = list(p.support.items())

    def apply(self, f: np.ndarray) -> np.ndarray:
        g = self.graph
        full = np.zeros(g.n_vertices)
        full[: self.n] = f
        if self.p.radial is not None:
            out = g.radial_apply(full, self.p.radial)
        else:
            out = np.zeros_like(full)
            pad_nbr = np.vstack([g._nbr_pad, np.full((1, g.nbr.shape[1]), g.n_vertices)])
            fpad = np.concatenate([full, [0.0]])
            for word, pw in self._words:
                idx = np.arange(g.n_vertices)
                for x in W.invert(word):
                    idx = pad_nbr[idx, g._col[x]]
                out += pw * fpad[idx]
        return out[: self.n]

    def check_symmetric(self, seed: int = 0, trials: int = 3) -> None:
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            u, v = rng.random(self.n), rng.random(self.n)
            a, b = u @ self.apply(v), self.apply(u) @ v
            if abs(a - b) > 1e-9 * max(1.0, abs(a)):
                raise InvariantViolation(f"assembled Markov operator is not symmetric ({a} vs {b})")


def markov_apply(p: WalkMeasure, graph: CosetGraph, f: np.ndarray) -> np.ndarray:
    """M f on the whole (truncated) graph; targets beyond the truncation count as 0."""
    if len(f) != graph.n_vertices:
        raise UsageError("function length does not match the coset graph")
    cols = graph._col
    for word in p.support:
        for x in word:
            if x not in cols:
                raise UsageError(f"unknown generator {x} in walk support")
    fpad = np.concatenate([f, [0.0]])
    pad_nbr = np.vstack([graph._nbr_pad, np.full((1, graph.nbr.shape[1]), graph.n_vertices)])
    out = np.zeros(graph.n_vertices)
    for word, pw in p.support.items():
        idx = np.arange(graph.n_vertices)
        for x in W.invert(word):
            idx = pad_nbr[idx, cols[x]]
        out += pw * fpad[idx]
    return out


@dataclass
class SpectralRadiusEstimate:
    value: float
    method: str
    R: int
    iterations: int
    residual: float
    return_probability: float | None = None
    return_probabilities: list = field(default_factory=list)
    disagreement: float | None = None
    flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "truncation_radius": self.R,
            "iterations": self.iterations,
            "residual": self.residual,
            "return_probability_estimate": self.return_probability,
            "disagreement": self.disagreement,
            "flagged": self.flagged,
        }


def power_radius(op: TruncatedMarkov, tol: float = 1e-10, max_iter: int = 200_000,
                 start: np.ndarray | None = None) -> tuple[float, int, float]:
    """Top eigenvalue of M^2 (positive semidefinite) by power iteration; returns sqrt."""
    v = np.ones(op.n) if start is None else start.astype(float)
    v /= np.linalg.norm(v)
    lam_old = -1.0
    for it in range(1, max_iter + 1):
        w = op.apply(op.apply(v))
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, it, 0.0
        residual = float(np.linalg.norm(w - lam * v))
        v = w / nw
        if abs(lam - lam_old) <= tol * max(lam, 1e-300) and residual <= math.sqrt(tol) * max(lam, 1e-300):
            return math.sqrt(max(lam, 0.0)), it, residual
        lam_old = lam
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps", residual=residual, iterations=max_iter
    )


def return_probabilities(op: TruncatedMarkov, n_max: int) -> list[float]:
    """(M^{2n} delta, delta) for n = 1..n_max."""
    v = np.zeros(op.n)
    v[0] = 1.0
    out = []
    for _ in range(n_max):
        v = op.apply(op.apply(v))
        out.append(float(v[0]))
    return out


def extrapolate_return(probs: list[float], lo: int | None = None) -> float:
    """rho from ln p_{2n} = a - alpha ln n + 2 n ln rho + b / n on n in [lo, len]."""
    n_max = len(probs)
    lo = lo or max(1, n_max // 2)
    n = np.arange(lo, n_max + 1, dtype=float)
    y = np.log(np.asarray(probs[lo - 1:], dtype=float))
    if len(n) < 4:
        # too few points for the four-term model: plain root of the last term
        return float(probs[-1] ** (1.0 / (2 * n_max)))
    A = np.column_stack([np.ones_like(n), -np.log(n), 2 * n, 1.0 / n])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(min(1.0, math.exp(coef[2])))


def spectral_radius(p: WalkMeasure, sub, R: int, tol: float = 1e-10, agree_tol: float = 0.02,
                    graph: CosetGraph | None = None) -> SpectralRadiusEstimate:
    """Power iteration on the truncated M^2 plus the return-probability cross estimate.

    Return probabilities are computed exactly for 2n <= 2R / (max walk length)
    steps, then extrapolated.  ``flagged`` is set when the two estimates differ
    by more than ``agree_tol``.
    """
    op = TruncatedMarkov(p, sub, R, graph)
    op.check_symmetric()
    value, iters, res = power_radius(op, tol)
    if value > 1 + 1e-9:
        raise InvariantViolation(f"spectral radius {value} exceeds 1")
    # a closed walk of 2n steps of length <= L stays within depth n L
    n_exact = max(1, R // p.max_length)
    if op.graph.is_finite_complete():
        n_exact = max(n_exact, 16)
    probs = return_probabilities(op, n_exact)
    rp = extrapolate_return(probs)
    diff = abs(rp - value)
    return SpectralRadiusEstimate(min(value, 1.0), "power-iteration", R, iters, res, rp, probs,
                                  diff, diff > agree_tol)


# -- Barta --------------------------------------------------------------------
def radial_phi(profile: Callable[[np.ndarray], np.ndarray]) -> Callable[[CosetGraph], np.ndarray]:
    """Lift a function of coset depth to a function on the coset graph."""
    return lambda graph: profile(graph.dist.astype(float))


def barta_bound(p: WalkMeasure, sub, phi: Callable[[CosetGraph], np.ndarray], R: int) -> float:
    """max over |y| <= R of (M phi)(y) / phi(y), phi given in closed form everywhere."""
    need = R + margin_for(p.max_length) + p.max_length
    graph = CosetGraph(sub, sub.rank, need)
    vals = phi(graph)
    if np.any(vals <= 0):
        raise DomainError("Barta test function must be positive")
    op = TruncatedMarkov(p, sub, need - margin_for(p.max_length), graph)
    Mphi = op.apply(vals[: op.n])
    inner = graph.inner(R)
    return float(np.max(Mphi[:inner] / vals[:inner]))


# -- asymptotic check ------------------------------------------------------------
def asymp_spec_rad_check(model, sub, n_range, h_sub: float, h_inf: float, h_gamma: float,
                         a: int = 1, R_Y: int = 6, slack: float = 0.05) -> list[dict]:
    """Rows (n, (1/n) ln tau(M_n), bound) with bound = max{-h', h_inf - h, h' - h}.

    ``h_inf`` is only an upper bound on the entropy at infinity, so the
    tested inequality is weaker than the sharp one.
    """
    bound = max(-h_sub, h_inf - h_gamma, h_sub - h_gamma) + 0.0  # no -0.0
    rows = []
    for n in n_range:
        p = annulus_walk(model, n, a)
        op = TruncatedMarkov(p, sub, R_Y)
        tau, _, _ = power_radius(op, tol=1e-10)
        measured = math.log(tau) / n if tau > 0 else -math.inf
        rows.append({"n": n, "tau": tau, "measured": measured, "bound": bound,
                     "pass": measured <= bound + slack, "R_Y": R_Y,
                     "note": "h_inf is an upper bound; the inequality is a weaker valid form"})
    return rows


def ball_growth_bound_check(model, points, r_range, h: float) -> list[dict]:
    """card {g : d(x, g o) <= r} e^{-r h} per (x, r).

    Cayley graphs use sphere counts (the count does not depend on x); other
    models run a BFS from x and keep orbit points.
    """
    from .metric import local_distances

    r_max = max(r_range)
    rows = []
    for x in points:
        depth = model.distance(model.basepoint, x)
        if model.vertex_transitive:
            sph = [model.sphere_count(r) for r in range(r_max + 1)]
        else:
            is_orbit = _orbit_test(model)
            sph = [0] * (r_max + 1)
            for v, d in local_distances(model, x, r_max).items():
                if is_orbit(v):
                    sph[d] += 1
        for r in r_range:
            card = sum(sph[: r + 1])
            rows.append({"x": repr(x), "d_x_orbit": depth, "r": r, "ball": card,
                         "ratio": card * math.exp(-r * h), "annulus": sph[r],
                         "annulus_ratio": sph[r] * math.exp(-r * h)})
    return rows


def _orbit_test(model):
    if model.vertex_transitive:
        return lambda v: True
    rep = model.decompose(model.basepoint)[1]
    return lambda v: model.decompose(v)[1] == rep
