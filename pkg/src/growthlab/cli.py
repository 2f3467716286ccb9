"""``growthlab`` command line.

Each subcommand runs one experiment family and writes either JSON (an
envelope with config, provenance, result and metadata, validated against
the shipped schemas) or CSV (a few ``#`` comment lines, a stable header and
rows).  Nothing depends on wall-clock entropy: ``--seed`` defaults to
DEFAULT_SEED, and the timestamp only appears in JSON metadata.

Exit codes: 0 success, 2 usage, 3 resource budget, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import GrowthLabError, InvariantViolation, ResourceExhausted, UsageError

DEFAULT_SEED = 12345

PROVENANCE = {
    "growth": "exponential growth rate of orbit spheres",
    "entropy-inf": "finiteness of Gamma_K for cocompact actions and the resulting SPR gap",
    "bm": "a finite Gamma_K series forces a finite Bowen-Margulis mass",
    "spectral-radius": "spectral radius 1 of the quotient walk iff the subgroup is co-amenable",
    "asymp": "upper bound on the exponential rate of annulus-walk spectral radii",
    "cogrowth": "cogrowth of a subgroup and the spectral radius of its coset walk",
    "twisted-norm": "critical exponent of the Koopman representation lies between subgroup and group growth",
    "shadow-check": "shadow lemma for the Patterson-Sullivan density",
    "flow-sim:first-return": "conservativity of the geodesic flow for radial limit sets",
    "flow-sim:hopf": "ratio ergodic averages along the geodesic flow (internal consistency)",
    "lamplighter-zeta": "growth of the lamp subgroup from the poles of its generating function",
    "horocone-series": "a parabolic Poincare series over Z^d diverges exactly when s <= d/2",
    "delta": "four-point hyperbolicity constant (lower bound from samples)",
}


# -- config --------------------------------------------------------------------
@dataclass
class ExperimentConfig:
    command: str
    model: str | None = None
    subgroup: str | None = None
    params: dict = field(default_factory=dict)
    format: str = "json"
    output: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
        unknown = set(data) - {"command", "model", "subgroup", "params", "format", "output"}
        if unknown or "command" not in data:
            raise UsageError(f"bad config keys: {sorted(unknown) or 'missing command'}")
        return cls(**data)


_COMMON = {"command", "model", "subgroup", "format", "output", "threads", "save_config", "handler", "config"}


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    params = {k: v for k, v in vars(ns).items() if k not in _COMMON}
    return ExperimentConfig(ns.command, getattr(ns, "model", None), getattr(ns, "subgroup", None),
                            params, ns.format, ns.output)


def args_from_config(cfg: ExperimentConfig) -> list[str]:
    """Rebuild an argv that reproduces ``cfg`` (unknown params are rejected by argparse)."""
    argv = [cfg.command]
    if cfg.model is not None:
        argv += ["--model", cfg.model]
    if cfg.subgroup is not None:
        argv += ["--subgroup", cfg.subgroup]
    argv += ["--format", cfg.format]
    if cfg.output:
        argv += ["--output", cfg.output]
    for key, val in sorted(cfg.params.items()):
        if val is None or val is False:
            continue
        flag = "--" + key.replace("_", "-")
        if val is True:
            argv.append(flag)
        elif isinstance(val, list):
            for item in val:
                argv += [flag, str(item)]
        else:
            argv += [flag, str(val)]
    return argv


# -- output ----------------------------------------------------------------------
def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _clean(obj):
    """NaN and infinities become null; tuples become lists."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def load_schema(command: str) -> dict:
    name = command.split(":")[0] + ".json"
    text = resources.files("growthlab").joinpath("schemas", name).read_text()
    return json.loads(text)


def validate(command: str, doc: dict) -> None:
    import jsonschema

    try:
        jsonschema.validate(doc, load_schema(command))
    except jsonschema.ValidationError as exc:
        raise GrowthLabError(f"output does not match the {command} schema: {exc.message}") from None


@dataclass
class Outcome:
    result: dict
    header: list[str]
    rows: list[list]
    provenance: str


def render(cfg: ExperimentConfig, out: Outcome, threads: int) -> str:
    if cfg.format == "csv":
        buf = io.StringIO()
        buf.write(f"# growthlab {cfg.command}\n# provenance: {out.provenance}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out.header)
        for row in out.rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
        return buf.getvalue()
    doc = {
        "command": cfg.command,
        "config": cfg.to_dict(),
        "provenance": {"tests": out.provenance},
        "result": out.result,
        "meta": {"version": __version__, "threads": threads,
                 "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")},
    }
    doc = _clean(json.loads(json.dumps(doc, default=_jsonable)))
    validate(cfg.command, doc)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit(cfg: ExperimentConfig, out: Outcome, threads: int) -> None:
    text = render(cfg, out, threads)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


# -- helpers ------------------------------------------------------------------------
def _window(text: str | None):
    if not text:
        return None
    try:
        lo, hi = (int(t) for t in text.replace("..", ",").split(","))
    except ValueError:
        raise UsageError(f"window must be lo,hi, got {text!r}") from None
    return lo, hi


def _int_range(text: str) -> list[int]:
    from .twisted import parse_schedule

    return parse_schedule(text)


def _model(ns):
    from .models import parse_model

    return parse_model(ns.model, ns.max_vertices)


def _cogrowth(sub, rank: int, R: int):
    """Return counts |H cap S(n)|, n <= R, and their exponential rate."""
    from .growth import estimate_growth, sequence_counts
    from .models.cosets import CosetGraph, margin_for

    if sub.is_trivial():
        return [1] + [0] * R, 0.0
    g = CosetGraph(sub, rank, R + margin_for(R))
    rc = [int(c) for c in g.return_counts(R, exact=True)]
    if sum(rc[R // 2:]) == 0:
        return rc, 0.0
    est = estimate_growth(sequence_counts(rc), (R // 2, R), basis="ball")
    return rc, max(0.0, est.exponent)


def _free_and_sub(ns):
    from .models.subgroups import parse_subgroup, require_free_base

    model = _model(ns)
    rank = require_free_base(model)
    return model, parse_subgroup(ns.subgroup, rank), rank


# -- commands -------------------------------------------------------------------------
def cmd_growth(ns) -> Outcome:
    from .growth import estimate_growth, sphere_counts

    model = _model(ns)
    try:
        counts = sphere_counts(model, ns.radius)
    except ResourceExhausted as exc:
        if exc.partial is not None:
            exc.partial_outcome = Outcome(
                {"counts": exc.partial.counts, "complete": False, "achieved_radius": exc.achieved},
                ["radius", "sphere_count", "ball_count", "log_ratio"],
                [[r[k] for k in ("radius", "sphere_count", "ball_count", "log_ratio")]
                 for r in exc.partial.rows()],
                PROVENANCE["growth"],
            )
        raise
    est = estimate_growth(counts, _window(ns.window), ns.method, ns.basis)
    rows = [[r[k] for k in ("radius", "sphere_count", "ball_count", "log_ratio")] for r in counts.rows()]
    return Outcome({"counts": counts.counts, "estimate": est.to_dict(), "complete": True},
                   ["radius", "sphere_count", "ball_count", "log_ratio"], rows, PROVENANCE["growth"])


def cmd_entropy(ns) -> Outcome:
    from .entropy import CompactSet, bm_finiteness_series, gamma_K, spr_test
    from .models import parse_compact_set

    model = _model(ns)
    Ks = ns.K or ["ball:2"]
    ladder = [CompactSet(parse_compact_set(k, model), k) for k in Ks]
    rep = spr_test(model, ladder, ns.radius, ns.margin, ns.growth_radius)
    result = rep.to_dict()
    rows = []
    for row in rep.per_K:
        for n, c in enumerate(row["counts"]):
            rows.append([row["K"], n, c])
    prov = PROVENANCE["entropy-inf"]
    if ns.bm:
        K = ladder[0]
        g = gamma_K(model, K, ns.radius)
        h = ns.bm_h if ns.bm_h is not None else rep.h_gamma.exponent
        base = Fraction(ns.bm_base) if ns.bm_base else None
        ev = bm_finiteness_series(model, K, h, ns.radius, base, g)
        result["bm_series"] = dict(ev.to_dict(), K=K.label, h=h)
        prov += "; " + PROVENANCE["bm"]
    return Outcome(result, ["K", "radius", "gammaK_count"], rows, prov)


def cmd_spectral(ns) -> Outcome:
    from .spectral import asymp_spec_rad_check, parse_walk, spectral_radius

    model, sub, rank = _free_and_sub(ns)
    if ns.asymp:
        n_range = _int_range(ns.asymp)
        h_gamma = math.log(2 * rank - 1)
        # subgroup growth from its return counts on a deep enough coset graph
        h_sub = _cogrowth(sub, rank, ns.cogrowth_radius)[1]
        h_inf = 0.0 if ns.h_inf is None else ns.h_inf
        rows = asymp_spec_rad_check(model, sub, n_range, h_sub, h_inf, h_gamma, ns.annulus_width,
                                    ns.radius)
        if ns.strict and not all(r["pass"] for r in rows):
            raise InvariantViolation("asymptotic spectral-radius bound violated")
        header = ["n", "tau", "measured", "bound", "pass"]
        return Outcome({"rows": rows, "h_sub": h_sub, "h_inf": h_inf, "h_gamma": h_gamma}, header,
                       [[r[k] for k in header] for r in rows], PROVENANCE["asymp"])
    walk = parse_walk(ns.walk, model)
    est = spectral_radius(walk, sub, ns.radius, ns.tol)
    d = est.to_dict()
    header = ["radius", "value", "return_probability_estimate", "disagreement", "flagged"]
    return Outcome(d, header, [[ns.radius, est.value, est.return_probability, est.disagreement,
                                est.flagged]], PROVENANCE["spectral-radius"])


def cmd_cogrowth(ns) -> Outcome:
    from .spectral import spectral_radius, uniform_generators

    model, sub, rank = _free_and_sub(ns)
    rc, h_sub = _cogrowth(sub, rank, ns.radius)
    est = spectral_radius(uniform_generators(rank), sub, ns.spectral_radius_R)
    result = {"return_counts": rc, "cogrowth_exponent": h_sub,
              "spectral_radius": est.to_dict()}
    return Outcome(result, ["n", "return_count"], [[n, c] for n, c in enumerate(rc)],
                   PROVENANCE["cogrowth"])


def cmd_twisted(ns) -> Outcome:
    from .twisted import estimate_h_rho, parse_grid, parse_schedule

    model, sub, _ = _free_and_sub(ns)
    grid = parse_grid(ns.s_grid)
    sched = parse_schedule(ns.R_schedule)
    ry = _parse_ry(ns.R_Y, sched)
    est = estimate_h_rho(model, sub, grid, sched, ry, ns.tol, ns.fit_points)
    by_s: dict = {}
    for row in est.table:
        by_s.setdefault(row["s"], []).append(row["norm"])
    for s, norms in by_s.items():
        if any(b < a * (1 - 1e-9) for a, b in zip(norms, norms[1:])):
            raise InvariantViolation(f"twisted norms decrease in R at s={s}")
    header = ["s", "R", "R_Y", "norm", "slope", "class"]
    return Outcome(est.to_dict(), header, [[r[k] for k in header] for r in est.table],
                   PROVENANCE["twisted-norm"])


def _parse_ry(text: str | None, sched: list[int]):
    if text is None or text == "R":
        return None
    if text.endswith("R"):
        try:
            ratio = float(text[:-1])
        except ValueError:
            raise UsageError(f"--R-Y must be an integer, 'R' or '<ratio>R', got {text!r}") from None
        return [max(1, int(ratio * r)) for r in sched]
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"--R-Y must be an integer, 'R' or '<ratio>R', got {text!r}") from None


def cmd_shadow(ns) -> Outcome:
    from .boundary import ConformalDensity, shadow_lemma_check

    rep = shadow_lemma_check(ConformalDensity(ns.rank), ns.r, _int_range(ns.n), ns.max_per_sphere,
                             ns.seed)
    if rep.C >= ns.C_max:
        raise InvariantViolation(f"empirical shadow constant {rep.C} >= {ns.C_max}")
    header = ["n", "elements", "min_ratio", "max_ratio"]
    return Outcome(rep.to_dict(), header, [[r[k] for k in header] for r in rep.rows],
                   PROVENANCE["shadow-check"])


def cmd_flow(ns) -> Outcome:
    from .boundary import ConformalDensity, first_return_experiment, hopf_ratio_experiment

    density = ConformalDensity(ns.rank)
    if ns.experiment == "first-return":
        sub = None
        if ns.subgroup:
            from .models.subgroups import parse_subgroup

            sub = parse_subgroup(ns.subgroup, ns.rank)
        st = first_return_experiment(density, ns.r, ns.samples, ns.horizon, ns.seed, sub)
        rows = [[i, t] for i, t in enumerate(st.times)]
        return Outcome(st.to_dict(), ["sample", "return_time"], rows,
                       PROVENANCE["flow-sim:first-return"])
    T_list = [float(t) for t in (ns.T or ["50", "200"])]
    hs = hopf_ratio_experiment(ns.f, ns.g, T_list, ns.samples, ns.seed, ns.rank)
    header = ["T", "dispersion", "mean_ratio"]
    d = hs.to_dict()
    rows = [[T, disp, m] for T, disp, m in zip(d["T"], d["dispersion"], d["mean_ratio"])]
    return Outcome(d, header, rows, PROVENANCE["flow-sim:hopf"])


def cmd_zeta(ns) -> Outcome:
    from .growth import (estimate_growth, lamp_subgroup_counts, zeta_coefficient_table,
                         zeta_V_singularity)
    from .models import parse_model

    z = zeta_V_singularity()
    result = {"singularity": z, "growth_base": 1 / z, "terms": ns.terms}
    rows_out = []
    bfs = None
    if ns.bfs_radius:
        model = parse_model("lamplighter", ns.max_vertices)
        bfs = lamp_subgroup_counts(model, ns.bfs_radius)
        lo = max(1, ns.bfs_radius - 8)
        result["bfs_counts"] = bfs.counts
        result["bfs_growth"] = estimate_growth(bfs, (lo, ns.bfs_radius), method="corrected").to_dict()
    from .growth import SphereCounts

    table = zeta_coefficient_table(ns.terms, bfs or SphereCounts([1]))
    result["coefficients"] = table
    result["note"] = "coefficient comparison is a diagnostic; only the singularity is a gate"
    for r in table:
        rows_out.append([r["n"], r["closed_form"], r["bfs_count"], r["match"]])
    return Outcome(result, ["n", "closed_form", "bfs_count", "match"], rows_out,
                   PROVENANCE["lamplighter-zeta"])


def cmd_horocone(ns) -> Outcome:
    from .growth import abelian_sphere_count, critical_exponent_scan, poincare_horocone
    from .twisted import parse_grid

    grid = parse_grid(ns.s_grid)
    counts = abelian_sphere_count(ns.d)
    evals = [poincare_horocone(counts, s, ns.K) for s in grid]
    scan = critical_exponent_scan(evals)
    header = ["s", "partial_sum", "verdict", "power_exponent"]
    rows = [[e.s, e.total, e.verdict, e.trend.get("power_exponent")] for e in evals]
    return Outcome({"d": ns.d, "K": ns.K, "flip": scan, "evaluations": [e.to_dict() for e in evals]},
                   header, rows, PROVENANCE["horocone-series"])


def cmd_delta(ns) -> Outcome:
    from .metric import estimate_delta

    est = estimate_delta(_model(ns), ns.radius, ns.samples, ns.seed)
    d = est.to_dict()
    return Outcome(d, ["radius", "samples", "seed", "lower_bound"],
                   [[ns.radius, ns.samples, ns.seed, d["lower_bound"]]], PROVENANCE["delta"])


# -- parser -----------------------------------------------------------------------------
def _common(p: argparse.ArgumentParser, model_default: str | None = "free:2"):
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"master seed (default {DEFAULT_SEED})")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--threads", type=int, default=1, help="worker cap (results do not depend on it)")
    p.add_argument("--save-config", help="also write the experiment config to this file")
    if model_default is not None:
        p.add_argument("--model", default=model_default)
        p.add_argument("--max-vertices", type=int, default=2_000_000)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="growthlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"growthlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("growth", help="sphere counts and growth exponent")
    _common(p)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--window", help="lo,hi (default: last 7 radii)")
    p.add_argument("--method", default="regression", choices=["regression", "log-ratio", "corrected"])
    p.add_argument("--basis", default="auto", choices=["auto", "sphere", "ball"])
    p.set_defaults(handler=cmd_growth)

    p = sub.add_parser("entropy-inf", help="Gamma_K enumeration, SPR verdict, BM series")
    _common(p)
    p.add_argument("--K", action="append", help="compact set (repeatable): o, ball:r, ring:r")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--growth-radius", type=int)
    p.add_argument("--margin", type=float, default=0.2)
    p.add_argument("--bm", action="store_true", help="also sum the BM finiteness series over Gamma_K")
    p.add_argument("--bm-h", type=float)
    p.add_argument("--bm-base", help="exact e^h as a rational, e.g. 3")
    p.set_defaults(handler=cmd_entropy)

    p = sub.add_parser("spectral-radius", help="spectral radius of a walk on a coset graph")
    _common(p)
    p.add_argument("--subgroup", default="trivial")
    p.add_argument("--walk", default="uniform-gens")
    p.add_argument("--radius", type=int, default=12)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--asymp", help="annulus sizes n (e.g. 4..8) for the asymptotic bound table")
    p.add_argument("--annulus-width", type=int, default=1)
    p.add_argument("--h-inf", type=float, help="upper bound on the entropy at infinity (default 0)")
    p.add_argument("--cogrowth-radius", type=int, default=12)
    p.add_argument("--strict", action="store_true", help="exit 4 if the asymptotic bound fails")
    p.set_defaults(handler=cmd_spectral)

    p = sub.add_parser("cogrowth", help="return counts, cogrowth exponent and spectral radius")
    _common(p)
    p.add_argument("--subgroup", default="commutator")
    p.add_argument("--radius", type=int, default=12)
    p.add_argument("--spectral-radius-R", type=int, default=10)
    p.set_defaults(handler=cmd_cogrowth)

    p = sub.add_parser("twisted-norm", help="truncated twisted-operator norms and the h_rho bracket")
    _common(p)
    p.add_argument("--subgroup", default="commutator")
    p.add_argument("--s-grid", default="0.4:1.3:0.05")
    p.add_argument("--R-schedule", default="4,6,8,10,12")
    p.add_argument("--R-Y", help="coset truncation: integer, 'R' (default) or '<ratio>R'")
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--fit-points", type=int, default=3)
    p.set_defaults(handler=cmd_twisted)

    p = sub.add_parser("shadow-check", help="exact shadow measures on the free-group boundary")
    _common(p, None)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--n", default="2..10")
    p.add_argument("--max-per-sphere", type=int)
    p.add_argument("--C-max", type=float, default=20.0)
    p.set_defaults(handler=cmd_shadow)

    p = sub.add_parser("flow-sim", help="geodesic-flow experiments on the free-group boundary")
    _common(p, None)
    p.add_argument("--experiment", choices=["first-return", "hopf"], required=True)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--r", type=int, default=0)
    p.add_argument("--subgroup", help="track returns to a subgroup orbit instead of the whole group")
    p.add_argument("--T", action="append", help="time horizon (repeatable)")
    p.add_argument("--f", default="a=2.5,future=a")
    p.add_argument("--g", default="a=2.5,future=b")
    p.set_defaults(handler=cmd_flow)

    p = sub.add_parser("lamplighter-zeta", help="lamp-subgroup series and its singularity")
    _common(p, None)
    p.add_argument("--terms", type=int, default=20)
    p.add_argument("--bfs-radius", type=int, default=0, help="also enumerate counts to this radius")
    p.add_argument("--max-vertices", type=int, default=2_000_000)
    p.set_defaults(handler=cmd_zeta)

    p = sub.add_parser("horocone-series", help="parabolic Poincare series over Z^d")
    _common(p, None)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--s-grid", default="0.1:1.6:0.05")
    p.add_argument("--K", type=int, default=4000)
    p.set_defaults(handler=cmd_horocone)

    p = sub.add_parser("delta", help="sampled four-point hyperbolicity lower bound")
    _common(p)
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--samples", type=int, default=10_000)
    p.set_defaults(handler=cmd_delta)

    p = sub.add_parser("run", help="rerun a saved experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.add_argument("--format", choices=["json", "csv"])
    return ap


def _dispatch(argv: list[str]) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "run":
        cfg = ExperimentConfig.load(ns.config)
        if cfg.command == "run":
            raise UsageError("a config cannot point at another run")
        if ns.output:
            cfg.output = ns.output
        if ns.format:
            cfg.format = ns.format
        ns = parser.parse_args(args_from_config(cfg))
    cfg = config_from_args(ns)
    if ns.save_config:
        cfg.save(ns.save_config)
    try:
        out = ns.handler(ns)
    except ResourceExhausted as exc:
        partial = getattr(exc, "partial_outcome", None)
        if partial is not None:
            emit(cfg, partial, ns.threads)
        raise
    emit(cfg, out, ns.threads)
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return _dispatch(argv)
    except SystemExit as exc:  # argparse usage errors already exit 2
        return int(exc.code or 0)
    except GrowthLabError as exc:
        print(f"growthlab: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
