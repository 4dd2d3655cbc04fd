"""
Command-line front end.

Every command writes its data files plus ``<prefix>.manifest.json`` into
``--out-dir``; ``hwlaw rerun MANIFEST`` repeats a run from its manifest.
Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
3 numeric non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .bessel import (
    BesselParams,
    clock_cdf_interpolant,
    density_clock,
    density_clock_reduced,
    survival_probability,
)
from .expfun import (
    NEGIBP_MUS,
    T_MAX,
    ExpFunctionalLaw,
    GCache,
    cdf_a_mu,
    density_a_mu,
    joint_density_b_a,
    joint_density_ratio_a,
    normalization,
)
from .identities import SUITE_TOL, run_identity_suite
from .montecarlo import (
    PathConfig,
    bougerol_check,
    ks_statistic,
    ks_threshold,
    mean_and_stderr,
    sample_bessel_clock,
    sample_bm_exp_functional,
)
from .quadrature import DomainError, QuadratureConfig
from .theta import (
    AVERAGED,
    COSCOS,
    DEFAULT_CFG,
    SINSIN,
    YOR,
    check_laplace_r,
    check_laplace_t,
    g_derivative,
    shifted,
    theta_values,
)

__all__ = ["main", "RunManifest", "NonConvergenceError", "parse_grid", "read_config"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONV = 0, 1, 2, 3
LAPLACE_R_TOL = 1e-6
LAPLACE_T_TOL = 1e-4
FLATNESS_TOL = 1e-4
MANIFEST_SUFFIX = ".manifest.json"


class NonConvergenceError(RuntimeError):
    """A quadrature missed its tolerance."""


class UsageError(ValueError):
    pass


@dataclass
class RunManifest:
    command: str
    params: dict
    tolerances: dict
    seed: int | None
    outputs: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    version: str = __version__
    argv: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path) as fh:
            data = json.load(fh)
        return cls(**{f.name: data[f.name] for f in fields(cls) if f.name in data})


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def parse_grid(text: str | list[str]) -> np.ndarray:
    """Comma lists, ``lin:lo:hi:n`` or ``geom:lo:hi:n``; repeated flags concatenate."""
    parts = text if isinstance(text, list) else [text]
    out: list[float] = []
    for part in parts:
        part = part.strip()
        if part.startswith(("lin:", "geom:")):
            kind, lo, hi, n = part.split(":")
            fn = np.linspace if kind == "lin" else np.geomspace
            out.extend(fn(float(lo), float(hi), int(n)).tolist())
        elif part:
            out.extend(float(s) for s in part.split(",") if s.strip())
    return np.array(out, float)


def read_config(path: str) -> dict:
    """key=value lines; '#' starts a comment. Keys are QuadratureConfig fields."""
    allowed = {f.name: f.type for f in fields(QuadratureConfig)}
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            k = k.replace("-", "_")
            if k not in allowed:
                raise UsageError(f"{path}:{n}: unknown key {k!r}")
            out[k] = int(v) if k in ("max_subdivisions", "osc_nodes_per_period") else float(v)
    return out


def _quad_config(args) -> QuadratureConfig:
    kw = {}
    if args.config:
        kw.update(read_config(args.config))
    if args.abs_tol is not None:
        kw["abs_tol"] = args.abs_tol
    if args.rel_tol is not None:
        kw["rel_tol"] = args.rel_tol
    return DEFAULT_CFG.with_(**kw)


def _require_grid(name: str, grid: np.ndarray) -> np.ndarray:
    if grid.size == 0:
        raise UsageError(f"--{name} grid is empty")
    if not np.all(np.isfinite(grid)):
        raise UsageError(f"--{name} grid has non-finite entries")
    return grid


class Run:
    """Collects outputs of one command and writes the manifest."""

    def __init__(self, args, command: str, params: dict, seed: int | None = None):
        self.args = args
        self.command = command
        self.params = params
        self.seed = seed
        self.outputs: list[str] = []
        self.start = time.perf_counter()
        prefix = args.prefix or command.replace(" ", "-")
        self.base = os.path.join(args.out_dir, prefix)

    def write(self, suffix: str, text: str) -> str:
        path = self.base + suffix
        write_atomic(path, text)
        self.outputs.append(path)
        if not self.args.quiet:
            print(path)
        return path

    def finish(self, cfg: QuadratureConfig, extra_tol: dict | None = None) -> None:
        tol = {"abs_tol": cfg.abs_tol, "rel_tol": cfg.rel_tol}
        tol.update(extra_tol or {})
        m = RunManifest(self.command, self.params, tol, self.seed, list(self.outputs),
                        time.perf_counter() - self.start, __version__, self.args.argv)
        write_atomic(self.base + MANIFEST_SUFFIX, m.to_json())


def _reps(name: str, nu: float):
    table = {"yor": [YOR], "coscos": [COSCOS], "sinsin": [SINSIN], "averaged": [AVERAGED],
             "shifted": [shifted(nu)]}
    if name == "all":
        return [YOR, COSCOS, SINSIN, AVERAGED, shifted(nu)]
    return table[name]


def cmd_theta(args) -> int:
    cfg = _quad_config(args)
    rs = _require_grid("r", parse_grid(args.r))
    ts = _require_grid("t", parse_grid(args.t))
    reps = _reps(args.rep, args.nu)
    rows = []
    for t in ts:
        for rep in reps:
            vals, errs, conv = theta_values(rs, float(t), rep, cfg)
            if not np.all(conv):
                raise NonConvergenceError(f"Theta({rep.label}) missed tolerance at t={t:g}")
            rows.extend((r, t, rep.label, v, e) for r, v, e in zip(rs, vals, errs))
    run = Run(args, "theta", {"r": rs.tolist(), "t": ts.tolist(), "rep": args.rep, "nu": args.nu})
    run.write(".csv", csv_text(["r", "t", "rep", "value", "abs_error"], rows))
    run.finish(cfg)
    return EXIT_OK


def _amu_methods(mu: float, method: str) -> list[str]:
    if method != "both":
        return [method]
    return ["hermite", "double"] if mu > -1 else (["negibp", "double"] if mu in NEGIBP_MUS else ["double"])


def cmd_density(args) -> int:
    cfg = _quad_config(args)
    kind = args.kind
    if kind == "amu":
        vs = _require_grid("v", parse_grid(args.v))
        methods = _amu_methods(args.mu, args.method)
        laws = [ExpFunctionalLaw(args.mu, args.t, m) for m in methods]
        cols = []
        for law in laws:
            cache = GCache(law.t, cfg) if law.method == "double" else None
            est = density_a_mu(vs, law, cfg, cache)
            cols.append(np.atleast_1d(np.asarray(est.value, float)))
        norm = [float(normalization(law, cfg).value) for law in laws]
        rows = [[v, *(c[i] for c in cols)] for i, v in enumerate(vs)]
        rows.append(["normalization", *norm])
        header = ["v", *methods]
        params = {"kind": kind, "mu": args.mu, "t": args.t, "method": args.method, "v": vs.tolist()}
    elif kind == "joint":
        xs = _require_grid("x", parse_grid(args.x))
        vs = _require_grid("v", parse_grid(args.v))
        rows = []
        for x in xs:
            d = np.atleast_1d(joint_density_b_a(float(x), vs, args.t, cfg))
            rows.extend((x, v, di) for v, di in zip(vs, d))
        header = ["x", "v", "density"]
        params = {"kind": kind, "t": args.t, "x": xs.tolist(), "v": vs.tolist()}
    elif kind == "ratio":
        us = _require_grid("u", parse_grid(args.u))
        vs = _require_grid("v", parse_grid(args.v))
        cache = GCache(args.t, cfg)
        rows = []
        for u in us:
            d = np.atleast_1d(joint_density_ratio_a(float(u), vs, args.t, cfg, cache))
            rows.extend((u, v, di) for v, di in zip(vs, d))
        header = ["u", "v", "density"]
        params = {"kind": kind, "t": args.t, "u": us.tolist(), "v": vs.tolist()}
    else:
        us = _require_grid("u", parse_grid(args.u))
        p = BesselParams(args.nu, args.a, args.t)
        rows = []
        for u in us:
            est = density_clock(p, float(u), cfg)
            if not est.converged:
                raise NonConvergenceError(f"clock density missed tolerance at u={u:g}")
            rows.append((u, float(est.value), density_clock_reduced(p, float(u), cfg)))
        total = 1.0 if p.nu >= 0 else float(survival_probability(p, cfg).value)
        rows.append(("normalization", total, total))
        header = ["u", "density", "reduced"]
        params = {"kind": kind, "nu": args.nu, "a": args.a, "t": args.t, "u": us.tolist()}
    run = Run(args, f"density {kind}", params)
    run.write(".csv", csv_text(header, rows))
    run.finish(cfg)
    return EXIT_OK


def _records_laplace(cfg) -> list[dict]:
    out = []
    for x in (0.0, 1.0, 2.0):
        for t in (0.5, 1.0, 2.0):
            c = check_laplace_r(x, t, cfg)
            out.append({"name": "laplace_r", "params": {"x": x, "t": t}, "residual": c["residual"],
                        "tolerance": LAPLACE_R_TOL})
    for r in (0.5, 1.0):
        for lam in (0.0, 1.0, 2.0):
            c = check_laplace_t(r, lam, cfg)
            out.append({"name": "laplace_t", "params": {"r": r, "lambda": lam}, "residual": c.residual,
                        "tolerance": LAPLACE_T_TOL})
    return out


def _records_flatness(cfg) -> list[dict]:
    out = []
    for n in range(5):
        near = abs(float(g_derivative(n, 1e-3, 1.0, cfg).value))
        far = abs(float(g_derivative(n, 1e-2, 1.0, cfg).value))
        out.append({"name": "flatness_bound", "params": {"n": n, "r": 1e-3, "t": 1.0}, "residual": near,
                    "tolerance": FLATNESS_TOL})
        out.append({"name": "flatness_decrease", "params": {"n": n, "r_near": 1e-3, "r_far": 1e-2, "t": 1.0},
                    "residual": max(0.0, near - far), "tolerance": 0.0})
    return out


def cmd_verify(args) -> int:
    cfg = _quad_config(args)
    suites = ["identities", "laplace", "flatness"] if args.suite == "all" else [args.suite]
    records: list[dict] = []
    for s in suites:
        if s == "identities":
            records += [r.to_dict() for r in run_identity_suite(args.draws, args.seed, SUITE_TOL)]
        elif s == "laplace":
            records += _records_laplace(cfg)
        else:
            records += _records_flatness(cfg)
    for rec in records:
        if args.tol is not None:
            rec["tolerance"] = args.tol
        rec["pass"] = bool(rec["residual"] <= rec["tolerance"])
    run = Run(args, f"verify {args.suite}", {"suite": args.suite, "draws": args.draws}, args.seed)
    run.write(".json", json.dumps(records, indent=1, sort_keys=True) + "\n")
    run.finish(cfg, {"override": args.tol})
    failed = [r for r in records if not r["pass"]]
    if not args.quiet:
        print(f"{len(records) - len(failed)}/{len(records)} checks passed")
    return EXIT_OK if not failed else EXIT_FAIL


def _stats_json(d: dict) -> str:
    return json.dumps(d, indent=1, sort_keys=True) + "\n"


def cmd_mc(args) -> int:
    if args.seed is None:
        raise UsageError("mc requires --seed")
    cfg = _quad_config(args)
    pc = PathConfig(args.t, args.steps, args.paths, args.seed)
    params = {"task": args.task, "t": args.t, "paths": args.paths, "steps": args.steps}
    status = EXIT_OK
    if args.task in ("expfun", "ks"):
        params["mu"] = args.mu
        ens = sample_bm_exp_functional(args.mu, pc)
        m, se = mean_and_stderr(ens.functional_a)
        stats = {"mean_a": m, "stderr_a": se, "n_paths": args.paths}
        if args.task == "ks":
            if args.mu not in (0.0, 1.0):
                raise DomainError("mc ks uses the closed-form CDF, available for mu in {0, 1}")
            d = ks_statistic(ens.functional_a, lambda V: cdf_a_mu(V, args.mu, args.t, cfg))
            thr = ks_threshold(args.paths)
            stats.update(ks_statistic=d, threshold=thr, passed=bool(d < thr))
            status = EXIT_OK if d < thr else EXIT_FAIL
        run = Run(args, f"mc {args.task}", params, args.seed)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["path_id", "terminal_b", "functional_a"])
        for i, (b, a) in enumerate(zip(ens.terminal_b, ens.functional_a)):
            w.writerow([i, _fmt(b), _fmt(a)])
        run.write(".csv", buf.getvalue())
    elif args.task == "bessel":
        params.update(nu=args.nu, a=args.a, horizon=args.horizon)
        p = BesselParams(args.nu, args.a, args.t)
        ens = sample_bessel_clock(p, pc, args.horizon)
        frac = ens.survival_fraction
        stats = {"survival_fraction": frac,
                 "survival_stderr": math.sqrt(frac * (1 - frac) / max(1, args.paths - ens.n_undecided)),
                 "survival_quadrature": 1.0 if p.nu >= 0 else float(survival_probability(p, cfg).value),
                 "n_undecided": ens.n_undecided, "horizon": ens.horizon}
        if p.nu in (0.0, 1.0):
            upper = min(ens.horizon, T_MAX)
            cdf = clock_cdf_interpolant(p, upper, cfg=cfg)
            d = ks_statistic(ens.clock, cdf, upper=upper)
            thr = ks_threshold(args.paths)
            stats.update(ks_statistic=d, threshold=thr, passed=bool(d < thr))
        run = Run(args, "mc bessel", params, args.seed)
        rows = ((i, ens.clock[i], ens.survived[i], ens.terminal_r[i], ens.undecided[i])
                for i in range(ens.clock.size))
        run.write(".csv", csv_text(["path_id", "clock", "survived", "terminal_r", "undecided"], rows))
    else:
        rows = []
        stats = {}
        for variant in ("plain", "drifted"):
            res = bougerol_check(args.t, variant, pc)
            rows.append((variant, res.statistic, res.threshold, res.passed))
            stats[variant] = {"ks_statistic": res.statistic, "threshold": res.threshold, "passed": res.passed}
        status = EXIT_OK if all(r[3] for r in rows) else EXIT_FAIL
        run = Run(args, "mc bougerol", params, args.seed)
        run.write(".csv", csv_text(["variant", "ks_statistic", "threshold", "passed"], rows))
    run.write(".stats.json", _stats_json(stats))
    run.finish(cfg)
    return status


def cmd_rerun(args) -> int:
    m = RunManifest.load(args.manifest)
    argv = list(m.argv) + ["--out-dir", args.out_dir]
    return main(argv)


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common options")
    g.add_argument("--out-dir", default=".", help="directory for outputs (default: .)")
    g.add_argument("--prefix", default=None, help="output file name stem (default: derived from the command)")
    g.add_argument("--config", default=None, help="key=value file presetting quadrature tolerances")
    g.add_argument("--abs-tol", type=float, default=None)
    g.add_argument("--rel-tol", type=float, default=None)
    g.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hwlaw",
        description=f"hwlaw {__version__}: Hartman-Watson density, exponential functional laws, "
                    "Bessel clocks and their verification. Set HW_NUM_THREADS to cap parallelism.",
        epilog="Exit codes: 0 success, 1 verification failure, 2 usage or domain error, 3 non-convergence.",
    )
    ap.add_argument("--version", action="version", version=f"hwlaw {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theta", help="Theta(r, t) on a grid")
    p.add_argument("--r", action="append", required=True, help="r grid: a,b,c or lin:lo:hi:n or geom:lo:hi:n")
    p.add_argument("--t", action="append", required=True, help="t grid, same syntax")
    p.add_argument("--rep", default="coscos", choices=["yor", "coscos", "sinsin", "averaged", "shifted", "all"])
    p.add_argument("--nu", type=float, default=1.0, help="phase of the shifted representation")
    _common(p)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("density", help="density curves")
    p.add_argument("kind", choices=["amu", "joint", "ratio", "bessel-clock"])
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--method", default="hermite", choices=["hermite", "double", "negibp", "both"])
    p.add_argument("--v", action="append", default=None, help="v grid (default geom:0.05:20:40)")
    p.add_argument("--x", action="append", default=None, help="x grid for joint (default lin:-2:2:9)")
    p.add_argument("--u", action="append", default=None, help="u grid (default geom:0.1:10:20)")
    _common(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("verify", help="run identity and consistency checks, emit a JSON report")
    p.add_argument("suite", choices=["identities", "laplace", "flatness", "all"])
    p.add_argument("--tol", type=float, default=None, help="override every check's tolerance")
    p.add_argument("--seed", type=int, default=20240611, help="seed of the random parameter draws")
    p.add_argument("--draws", type=int, default=20)
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mc", help="Monte Carlo ensembles and concordance statistics")
    p.add_argument("task", choices=["expfun", "bessel", "bougerol", "ks"])
    p.add_argument("--seed", type=int, default=None, help="required")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--horizon", type=float, default=None, help="Bessel clock horizon in Lamperti time")
    _common(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("rerun", help="repeat a run recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_rerun, quiet=False)
    return ap


def _strip_out_dir(argv: list[str]) -> list[str]:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out-dir":
            skip = True
            continue
        if a.startswith("--out-dir="):
            continue
        out.append(a)
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    args.argv = _strip_out_dir(argv)
    if args.command == "density":
        args.v = args.v or ["geom:0.05:20:40"]
        args.x = args.x or ["lin:-2:2:9"]
        args.u = args.u or ["geom:0.1:10:20"]
    try:
        return args.func(args)
    except (UsageError, DomainError, ValueError) as e:
        print(f"hwlaw: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as e:
        print(f"hwlaw: non-convergence: {e}", file=sys.stderr)
        return EXIT_NONCONV


if __name__ == "__main__":
    sys.exit(main())
