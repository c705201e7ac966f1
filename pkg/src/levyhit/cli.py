"""Command-line interface.

Exit codes: 0 success, 1 certificate or oracle failure, 2 usage error or a
model refused by the scaling check, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import DEFAULT, Tolerances
from .eigenfunction import f as eigen_f
from .hitting import (
    asymp_large_t,
    asymp_small_x,
    bound_corollary,
    bound_theorem,
    constants,
    tail,
    tail_grid,
    tilde_constants,
)
from .models import ExponentModel, ModelError, load_model, make_model, model_from_spec
from .numerics import NumericalError
from .oracle import brownian_mgf, brownian_tail, laplace_battery, laplace_mgf
from .phase import PhaseBracketError, theta_grid

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt(v) -> str:
    """17 significant digits: round-trips every binary64 value."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def parse_grid(text: str, default_spacing: str = "log") -> list[float]:
    """``lo:hi:count[:log|lin]`` or a comma-separated list."""
    text = text.strip()
    if ":" not in text:
        try:
            return [float(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"bad grid {text!r}: {exc}") from None
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"grid {text!r} must be lo:hi:count[:log|lin]")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None
    spacing = parts[3] if len(parts) == 4 else default_spacing
    if count < 1:
        raise UsageError("grid count must be positive")
    if spacing == "log":
        if lo <= 0 or hi <= 0:
            raise UsageError("log grid needs positive endpoints")
        return np.logspace(math.log10(lo), math.log10(hi), count).tolist()
    if spacing == "lin":
        return np.linspace(lo, hi, count).tolist()
    raise UsageError(f"grid spacing must be log or lin, got {spacing!r}")


@dataclass
class RunManifest:
    command: str
    argv: list
    model: dict | None
    grids: dict
    tolerances: dict
    version: str = __version__
    python: str = field(default_factory=platform.python_version)
    numpy: str = np.__version__
    started_at: str = ""
    wall_clock_seconds: float = 0.0
    artifact_hashes: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


class Table:
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        self.rows: list[list] = []

    def add(self, *values):
        self.rows.append(list(values))

    def render(self, kind: str) -> str:
        if kind == "json":
            recs = [{c: fmt(v) for c, v in zip(self.columns, r)} for r in self.rows]
            return json.dumps(recs, indent=2) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(v) for v in r])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _add_model_args(p: argparse.ArgumentParser):
    p.add_argument("--model", required=True, help='JSON file {"family": ..., "params": {...}}')
    p.add_argument("--alpha", type=float, help="override parameter alpha")
    p.add_argument("--beta", type=float, help="override parameter beta")
    p.add_argument("--c", type=float, help="override parameter c")


def _add_common(p: argparse.ArgumentParser, default):
    # accepted both before and after the subcommand
    p.add_argument("--tol-file", default=default, help="JSON file overriding numerical tolerances")
    p.add_argument("--dump-config", action="store_true", default=default or False,
                   help="print the active tolerances and exit")
    p.add_argument("--out", choices=("csv", "json"), default=default, help="table format (default csv)")
    p.add_argument("--output", default=default, help="write the table here (manifest goes next to it)")


def _sub_parser(common: argparse.ArgumentParser):
    class SubParser(argparse.ArgumentParser):
        def __init__(self, *a, **kw):
            kw.setdefault("parents", [common])
            super().__init__(*a, **kw)

    return SubParser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levyhit", description=__doc__.splitlines()[0])
    _add_common(p, None)
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", parser_class=_sub_parser(common))

    s = sub.add_parser("phase", help="phase shift theta on a lambda grid")
    _add_model_args(s)
    s.add_argument("--lambda-grid", required=True, help="lo:hi:count[:log|lin]")

    s = sub.add_parser("eigen", help="eigenfunction F and correction G on an x grid")
    _add_model_args(s)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--x-grid", required=True)

    s = sub.add_parser("tail", help="(-d/dt)^n P(tau_x > t) on a (t, x) grid")
    _add_model_args(s)
    s.add_argument("--n", type=int, default=0)
    s.add_argument("--t-grid", required=True)
    s.add_argument("--x-grid", required=True)

    s = sub.add_parser("bounds", help="certify the two-sided envelopes on a grid")
    _add_model_args(s)
    s.add_argument("--alpha-star", type=float, help="scaling index (default: certified value)")
    s.add_argument("--n", type=int, default=0)
    s.add_argument("--t-grid")
    s.add_argument("--x-grid")
    s.add_argument("--grid", nargs=2, metavar=("T_GRID", "X_GRID"), help="shorthand for --t-grid and --x-grid")

    s = sub.add_parser("asymp", help="asymptotic limits and convergence tables")
    _add_model_args(s)
    s.add_argument("--mode", choices=("small-x", "large-t"), required=True)
    s.add_argument("--n", type=int, default=0)
    s.add_argument("--t", type=float, default=1.0, help="time for small-x mode")
    s.add_argument("--x", type=float, default=1.0, help="point for large-t mode")
    s.add_argument("--index", type=float, help="regular-variation index (default: declared)")
    s.add_argument("--grid", help="x grid (small-x) or t grid (large-t) for the convergence table")

    s = sub.add_parser("verify", help="run the independent oracle battery")
    _add_model_args(s)
    s.add_argument("--tolerance", type=float, default=5e-5)

    s = sub.add_parser("constants", help="explicit bound constants")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--n", type=int, default=0)

    s = sub.add_parser("examples", help="regression sweeps over the built-in example families")
    s.add_argument("--outdir", default="examples_out")
    s.add_argument("--quick", action="store_true", help="smaller grids")
    return p


def _model(args, tol: Tolerances) -> tuple[ExponentModel, dict]:
    path = Path(args.model)
    if not path.exists():
        raise UsageError(f"model file {path} does not exist")
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"model file {path} is not valid JSON: {exc}") from None
    overrides = {"alpha": args.alpha, "beta": args.beta, "c": args.c}
    model = model_from_spec(spec, tol, **overrides)
    spec = {"family": model.family, "params": dict(model.params)}
    return model, spec


def _certified(model: ExponentModel) -> float:
    if model.alpha_star is None:
        raise ModelError(model.scaling.describe() if model.scaling else "scaling check failed")
    return model.alpha_star


# ---------------------------------------------------------------------------
# subcommands; each returns (table, exit code, grids, model spec)
# ---------------------------------------------------------------------------

def cmd_phase(args, tol):
    model, spec = _model(args, tol)
    lams = parse_grid(args.lambda_grid)
    t = Table(["lambda", "theta", "quad_error"])
    for r in theta_grid(model, lams, tol):
        t.add(r.lam, r.theta, r.quad_error)
    return t, EXIT_OK, {"lambda": lams}, spec


def cmd_eigen(args, tol):
    model, spec = _model(args, tol)
    xs = parse_grid(args.x_grid, "lin")
    t = Table(["x", "F", "G", "error"])
    for x in xs:
        s = eigen_f(model, args.lam, x, tol)
        t.add(x, s.f_value, s.g_value, s.quad_error)
    return t, EXIT_OK, {"lambda": [args.lam], "x": xs}, spec


def cmd_tail(args, tol):
    model, spec = _model(args, tol)
    _certified(model)
    ts, xs = parse_grid(args.t_grid), parse_grid(args.x_grid, "lin")
    pts = [(t, x) for x in xs for t in ts]
    table = Table(["n", "t", "x", "value", "quad_error", "lambda_max"])
    for r in tail_grid(model, args.n, pts, tol):
        table.add(r.n, r.t, r.x, r.value, r.quad_error, r.lambda_max)
    return table, EXIT_OK, {"t": ts, "x": xs}, spec


def cmd_bounds(args, tol):
    model, spec = _model(args, tol)
    a = args.alpha_star if args.alpha_star is not None else _certified(model)
    _certified(model)
    t_text, x_text = args.grid if args.grid else (args.t_grid, args.x_grid)
    if not t_text or not x_text:
        raise UsageError("bounds needs --grid T X or both --t-grid and --x-grid")
    ts, xs = parse_grid(t_text), parse_grid(x_text, "lin")
    cols = ["kind", "n", "t", "x", "C1", "C2", "C3", "applicable", "lower", "upper",
            "observed", "quad_error", "holds"]
    table = Table(cols)
    failed = False
    pts = [(t, x) for x in xs for t in ts]
    for (t, x), obs in zip(pts, tail_grid(model, args.n, pts, tol)):
        certs = [bound_theorem(model, args.n, t, x, a, tol, obs)]
        if args.n == 0:
            certs.append(bound_corollary(model, t, x, a, tol, obs))
        for c in certs:
            table.add(c.kind, c.n, c.t, c.x, c.C1, c.C2, c.C3, c.applicable, c.lower,
                      c.upper, c.observed, c.quad_error, c.holds)
            failed |= c.violated
    return table, EXIT_FAIL if failed else EXIT_OK, {"t": ts, "x": xs}, spec


def cmd_asymp(args, tol):
    model, spec = _model(args, tol)
    _certified(model)
    table = Table(["mode", "n", "t", "x", "scaled_value", "limit", "relative_gap"])
    if args.mode == "small-x":
        limit = asymp_small_x(model, args.index, args.n, args.t, tol)
        grid = parse_grid(args.grid, "log") if args.grid else [1e-2, 1e-3, 1e-4]
        for x in grid:
            v = abs(x) * model.psi_scalar(1.0 / abs(x)) * tail(model, args.n, args.t, x, tol).value
            table.add("small-x", args.n, args.t, x, v, limit, v / limit - 1.0)
        grids = {"x": grid, "t": [args.t]}
    else:
        limit = asymp_large_t(model, args.index, args.n, args.x, tol)
        grid = parse_grid(args.grid, "log") if args.grid else [1e2, 1e3, 1e4]
        for t in grid:
            v = t ** (args.n + 1) * model.inverse(1.0 / t, tol) * tail(model, args.n, t, args.x, tol).value
            table.add("large-t", args.n, t, args.x, v, limit, v / limit - 1.0)
        grids = {"t": grid, "x": [args.x]}
    return table, EXIT_OK, grids, spec


def cmd_verify(args, tol):
    model, spec = _model(args, tol)
    _certified(model)
    table = Table(["check", "lam", "x", "t", "computed", "reference", "discrepancy", "tolerance", "status"])
    ok = True
    lams, xs = [0.5, 1.0, 2.0], [0.5, 1.0]
    rep = laplace_battery(model, lams, xs, args.tolerance, tol)
    for pt in rep.points:
        st = "pass" if pt["discrepancy"] <= args.tolerance else "fail"
        table.add("laplace", pt["lam"], pt["x"], "", pt["from_tail"], pt["from_potential"],
                  pt["discrepancy"], args.tolerance, st)
    ok &= rep.status != "fail"
    for lam in lams:
        vals = [laplace_mgf(model, lam, x, tol) for x in (0.25, 0.5, 1.0, 2.0)]
        mono = all(0.0 <= v <= 1.0 for v in vals) and all(a > b for a, b in zip(vals, vals[1:]))
        table.add("mgf_range_monotone", lam, "0.25..2", "", "", "", "", "", "pass" if mono else "fail")
        ok &= mono
    if model.family == "stable" and model.params.get("alpha") == 2.0:
        for t in (0.1, 1.0, 10.0):
            for x in (0.1, 0.5, 1.0, 5.0):
                v, ref = tail(model, 0, t, x, tol).value, brownian_tail(t, x)
                d = abs(v / ref - 1.0)
                table.add("reflection", "", x, t, v, ref, d, 1e-6, "pass" if d <= 1e-6 else "fail")
                ok &= d <= 1e-6
        for lam in lams:
            for x in xs:
                v, ref = laplace_mgf(model, lam, x, tol), brownian_mgf(lam, x)
                d = abs(v - ref)
                table.add("mgf_closed_form", lam, x, "", v, ref, d, 1e-9, "pass" if d <= 1e-9 else "fail")
                ok &= d <= 1e-9
    return table, EXIT_OK if ok else EXIT_FAIL, {"lam": lams, "x": xs}, spec


def cmd_constants(args, tol):
    c = constants(args.alpha, args.n, tol)
    k1, k2 = tilde_constants(args.alpha, tol)
    table = Table(["alpha", "n", "C1", "C2", "C3", "C1_tilde", "C2_tilde"])
    table.add(c.alpha, c.n, c.C1, c.C2, c.C3, k1, k2)
    return table, EXIT_OK, {"alpha": [args.alpha], "n": [args.n]}, None


EXAMPLE_MODELS = [
    {"family": "relativistic", "params": {"alpha": 1.5, "beta": 2.0}},
    {"family": "mixed_stable", "params": {"alpha": 1.5, "beta": 2.0}},
    {"family": "log_corrected", "params": {}},
    {"family": "wiener_poisson", "params": {"c": 1.0}},
    {"family": "wiener_poisson", "params": {"c": 2.0}},
]


def cmd_examples(args, tol):
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ts = [1.0, 10.0, 100.0] if args.quick else [1.0, 10.0, 100.0, 1e3, 1e4]
    xs = [0.1, 0.5] if args.quick else [0.02, 0.1, 0.5]
    summary = Table(["model", "scaling_passes", "alpha_star", "violations", "laplace_discrepancy",
                     "small_x_gap", "large_t_gap", "status"])
    ok = True
    for spec in EXAMPLE_MODELS:
        model = make_model(spec["family"], spec["params"], tol=tol)
        slug = model.name.replace("(", "_").replace(")", "").replace(", ", "_").replace("=", "")
        if not model.certified:
            summary.add(model.name, False, model.scaling.alpha_star, "", "", "", "", "refused")
            continue
        a = model.alpha_star
        bt = Table(["kind", "n", "t", "x", "applicable", "lower", "upper", "observed", "holds"])
        viol = 0
        for n in (0, 1):
            for x in xs:
                for t in ts:
                    obs = tail(model, n, t, x, tol)
                    certs = [bound_theorem(model, n, t, x, a, tol, obs)]
                    if n == 0:
                        certs.append(bound_corollary(model, t, x, a, tol, obs))
                    for c in certs:
                        bt.add(c.kind, n, t, x, c.applicable, c.lower, c.upper, c.observed, c.holds)
                        viol += c.violated
        (outdir / f"{slug}_bounds.csv").write_text(bt.render("csv"))
        at = Table(["mode", "point", "scaled_value", "limit"])
        lim_x = asymp_small_x(model, None, 0, 1.0, tol)
        for x in (1e-2, 1e-3):
            at.add("small-x", x, x * model.psi_scalar(1 / x) * tail(model, 0, 1.0, x, tol).value, lim_x)
        lim_t = asymp_large_t(model, None, 0, 1.0, tol)
        for t in (1e2, 1e3):
            at.add("large-t", t, t * model.inverse(1 / t, tol) * tail(model, 0, t, 1.0, tol).value, lim_t)
        (outdir / f"{slug}_asymptotics.csv").write_text(at.render("csv"))
        rep = laplace_battery(model, [1.0], [1.0], 1e-4, tol)
        good = viol == 0 and rep.status != "fail"
        ok &= good
        summary.add(model.name, True, a, viol, rep.max_discrepancy,
                    at.rows[1][2] / lim_x - 1, at.rows[3][2] / lim_t - 1, "pass" if good else "fail")
    (outdir / "summary.csv").write_text(summary.render("csv"))
    return summary, EXIT_OK if ok else EXIT_FAIL, {"t": ts, "x": xs}, None


COMMANDS = {
    "phase": cmd_phase, "eigen": cmd_eigen, "tail": cmd_tail, "bounds": cmd_bounds,
    "asymp": cmd_asymp, "verify": cmd_verify, "constants": cmd_constants,
    "examples": cmd_examples,
}


def _emit(text: str, manifest: RunManifest, args) -> None:
    manifest.artifact_hashes["output_sha256"] = hashlib.sha256(text.encode()).hexdigest()
    model_path = getattr(args, "model", None)
    if model_path and Path(model_path).exists():
        manifest.artifact_hashes["model_sha256"] = hashlib.sha256(Path(model_path).read_bytes()).hexdigest()
    if args.command == "examples":
        path = Path(args.outdir) / "manifest.json"
        path.write_text(manifest.to_json() + "\n")
        sys.stdout.write(text)
        return
    if args.output:
        out = Path(args.output)
        out.write_text(text)
        out.with_name(out.name + ".manifest.json").write_text(manifest.to_json() + "\n")
    else:
        sys.stdout.write(text)
        sys.stderr.write(manifest.to_json() + "\n")


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        tol = Tolerances.from_file(args.tol_file) if args.tol_file else DEFAULT
    except (OSError, ValueError, TypeError) as exc:
        print(f"levyhit: cannot read tolerances: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.dump_config:
        print(tol.to_json())
        return EXIT_OK
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    started = time.time()
    try:
        table, code, grids, spec = COMMANDS[args.command](args, tol)
    except (UsageError, ModelError) as exc:
        print(f"levyhit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, PhaseBracketError, FloatingPointError) as exc:
        print(f"levyhit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"levyhit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    manifest = RunManifest(
        command=args.command, argv=argv, model=spec, grids=grids, tolerances=tol.to_dict(),
        started_at=datetime.fromtimestamp(started, timezone.utc).isoformat(),
        wall_clock_seconds=round(time.time() - started, 3),
    )
    if args.command == "constants" and args.out is None:
        text = "".join(f"{c} = {v:.12g}\n" for c, v in zip(table.columns[2:], table.rows[0][2:]))
    else:
        text = table.render(args.out or "csv")
    _emit(text, manifest, args)
    return code


def main() -> None:
    sys.exit(run())
