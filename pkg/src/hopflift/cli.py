"""hopflift command line: iterate, verify, liouville, sample, seeds.

Exit codes: 0 success, 1 verification failed, 2 usage or parse error,
3 no convergence (SizeBlowup or MaxIterations), 4 evaluation failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, parse_box, parse_constant
from .expr import EvaluationError, ExprSyntaxError, UnboundIdentifierError, free_symbols
from .export import TupleFormatError, read_tuple, tuple_to_dict, write_json
from .fields import COORDS, SamplingError, VectorField, sample_points, write_csv
from .iterate import EquationSystem, IterationConfigError, Status, run
from .lift import Section
from .liouville import (RealityError, liouville_residual, liouville_table, planar_alt, planar_ns,
                        PlanarSolution, omega_general, sector_grid, half_integer, write_liouville_csv,
                        zn_family)
from .seeds import SEEDS, get_seed
from .verify import (EQUATIONS, DegenerateFieldError, SolutionTuple, VerifyConfig, perturb_component,
                     solution_from_field, verify_tuple)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NO_CONVERGENCE, EXIT_EVALUATION = 0, 1, 2, 3, 4
DEFAULT_OUT = "hopflift-out"


class UsageError(Exception):
    pass


# -- argument plumbing ----------------------------------------------------------

def _run_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", help="key = value file; flags override it")
    g.add_argument("--const", action="append", default=[], metavar="NAME=VALUE",
                   help="bind a named constant (repeatable)")
    g.add_argument("--tolerance", type=float)
    g.add_argument("--max-iterations", type=int)
    g.add_argument("--node-budget", type=int)
    g.add_argument("--box", help="sample box 'lo,hi' or 'xlo,xhi,ylo,yhi,zlo,zhi'")
    g.add_argument("--count", type=int, help="number of sample points")
    g.add_argument("--rng-seed", type=int)
    g.add_argument("--section", choices=[s.value for s in Section])
    g.add_argument("--positive-domain", action="store_const", const=True, default=None,
                   help="simplify assuming x, y, z and constants are positive")
    g.add_argument("--out", help=f"output directory (default {DEFAULT_OUT})")
    return p


def _field_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("field")
    g.add_argument("--seed", help="registered seed name (see `hopflift seeds`)")
    g.add_argument("--H", dest="H", help="inline field '(Hx, Hy, Hz)'")
    g.add_argument("--Hx")
    g.add_argument("--Hy")
    g.add_argument("--Hz")
    g.add_argument("--system", help="sw (Seiberg-Witten) or freund")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopflift", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run_opts, field_opts = _run_options(), _field_options()

    it = sub.add_parser("iterate", parents=[field_opts, run_opts],
                        help="run the fixed-point iteration from a seed field")
    it.add_argument("--timing", action="store_true", help="record wall-clock per step in the trace")
    it.set_defaults(func=cmd_iterate)

    ve = sub.add_parser("verify", parents=[field_opts, run_opts],
                        help="residual checks for a field or a full tuple")
    ve.add_argument("--use-expected", action="store_true",
                    help="verify the seed's transcribed closed-form tuple")
    ve.add_argument("--tuple", help="JSON tuple file (as written by `iterate`)")
    ve.add_argument("--perturb", type=float, help="scale one component by (1 + EPS)")
    ve.add_argument("--perturb-target", default=None,
                    help="component to perturb: H1..H3, A1..A3, B1..B3, psi1..psi4 "
                         "(default: first nonzero H component)")
    ve.add_argument("--threshold", type=float, help="residual threshold for every equation")
    ve.add_argument("--csv", help="also write per-point residuals to this CSV file")
    ve.set_defaults(func=cmd_verify)

    li = sub.add_parser("liouville", help="planar solutions and their Liouville residual")
    mode = li.add_mutually_exclusive_group()
    mode.add_argument("--alt", action="store_true", help="h = 1/conj(g) ansatz (default)")
    mode.add_argument("--ns", action="store_true", help="h = conj(g) ansatz")
    mode.add_argument("--general", action="store_true", help="explicit pair g, h")
    mode.add_argument("--zn", help="the z^n family (n a nonzero multiple of 1/2)")
    li.add_argument("--g", default="zeta", help="analytic function of zeta")
    li.add_argument("--h", help="second function for --general, evaluated at conj(z)")
    li.add_argument("--grid", type=int, default=20, help="points per axis")
    li.add_argument("--box", help="u0,u1,v0,v1")
    li.add_argument("--step", type=float, default=1e-4, help="finite-difference step")
    li.add_argument("--threshold", type=float, default=1e-5)
    li.add_argument("--out", help=f"output directory (default {DEFAULT_OUT})")
    li.add_argument("--csv", help="CSV path (default OUT/liouville.csv)")
    li.set_defaults(func=cmd_liouville)

    sa = sub.add_parser("sample", parents=[field_opts, run_opts],
                        help="write the sample set and field values as CSV")
    sa.add_argument("--csv", help="CSV path (default OUT/samples.csv)")
    sa.set_defaults(func=cmd_sample)

    se = sub.add_parser("seeds", help="list registered seeds")
    se.set_defaults(func=cmd_seeds)
    return parser


def _run_config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    consts = dict(parse_constant(c) for c in getattr(args, "const", []) or [])
    box = parse_box(args.box) if getattr(args, "box", None) else None
    cfg = cfg.merged(tolerance=args.tolerance, max_iterations=args.max_iterations,
                     node_budget=args.node_budget, box=box, count=args.count,
                     rng_seed=args.rng_seed, section=args.section,
                     positive_domain=args.positive_domain, out=args.out, constants=consts)
    return cfg.validate()


def split_components(text: str) -> list:
    """'(a, b, c)' -> ['a', 'b', 'c'], splitting only at top-level commas."""
    t = text.strip()
    if not (t.startswith("(") and t.endswith(")")):
        raise UsageError(f"field must be written as '(Hx, Hy, Hz)', got {text!r}")
    parts, depth, cur = [], 0, []
    for ch in t[1:-1]:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise UsageError(f"unbalanced parentheses in {text!r}")
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise UsageError(f"unbalanced parentheses in {text!r}")
    parts.append("".join(cur))
    if len(parts) != 3 or any(not p.strip() for p in parts):
        raise UsageError(f"field needs exactly 3 components, got {len(parts)} in {text!r}")
    return [p.strip() for p in parts]


def _check_identifiers(F: VectorField, constants: dict):
    allowed = set(COORDS) | set(constants)
    unknown = sorted({s for c in F for s in free_symbols(c)} - allowed)
    if unknown:
        raise UsageError(f"unknown identifier(s) {', '.join(unknown)}; "
                         "bind constants with --const NAME=VALUE")


def resolve_field(args, cfg: RunConfig) -> tuple:
    """(field, system, constants, positive_domain, seed) from the command line."""
    seed = None
    if args.seed:
        try:
            seed = get_seed(args.seed)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        constants = {**seed.constants, **cfg.constants}
        comps, system, pd = seed.H0, seed.system, seed.positive_domain
    else:
        constants = dict(cfg.constants)
        if args.H:
            if args.Hx or args.Hy or args.Hz:
                raise UsageError("give either --H or --Hx/--Hy/--Hz, not both")
            comps = split_components(args.H)
        elif args.Hx or args.Hy or args.Hz:
            comps = [args.Hx or "0", args.Hy or "0", args.Hz or "0"]
        else:
            raise UsageError("no field given: use --seed, --H or --Hx/--Hy/--Hz")
        system, pd = None, False
    if args.system:
        try:
            system = EquationSystem.parse(args.system)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if system is None:
        raise UsageError("--system is required for inline fields")
    F = VectorField.parse(comps, constants.keys())
    _check_identifiers(F, constants)
    if cfg.positive_domain is not None:
        pd = cfg.positive_domain
    return F, system, constants, pd, seed


def _out_dir(args, cfg: RunConfig | None = None) -> Path:
    out = getattr(args, "out", None) or (cfg.out if cfg else None) or DEFAULT_OUT
    return Path(out)


def _print_table(rows, header):
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    print(fmt.format(*header))
    for r in rows:
        print(fmt.format(*(str(c) for c in r)))


# -- commands -------------------------------------------------------------------------

def cmd_iterate(args) -> int:
    cfg = _run_config(args)
    F, system, constants, pd, seed = resolve_field(args, cfg)
    itcfg = cfg.iteration_config(pd, constants)
    if seed is not None and seed.node_budget and args.node_budget is None:
        itcfg.node_budget = seed.node_budget
    try:
        trace = run(F, system, itcfg)
    except IterationConfigError as exc:
        raise UsageError(str(exc)) from None
    out = _out_dir(args, cfg)
    write_json(out / "trace.json", trace.to_dict(include_timing=args.timing))
    rows = [(k + 1, "-" if d != d else f"{d:.3e}", trace.node_counts[k + 1])
            for k, d in enumerate(trace.distances)]
    _print_table(rows, ("step", "distance", "nodes"))
    print(f"status: {trace.status.value}" + (f" ({trace.message})" if trace.message else ""))
    if trace.status.success:
        sol = solution_from_field(trace.final, system, pd, Section(cfg.section))
        write_json(out / "solution.json", tuple_to_dict(sol, system, constants))
        print(f"wrote {out / 'trace.json'} and {out / 'solution.json'}")
        return EXIT_OK
    print(f"wrote {out / 'trace.json'}")
    if trace.status is Status.EVALUATION_FAILURE:
        return EXIT_EVALUATION
    return EXIT_NO_CONVERGENCE


def perturb_tuple(sol: SolutionTuple, eps: float, target: str | None = None) -> tuple:
    """Scale one component by (1 + eps); returns (tuple, target name).

    The default target is the first nonzero component of H.
    """
    if target is None:
        target = next((f"H{i + 1}" for i, c in enumerate(sol.H)
                       if not (c.kind == "num" and c.payload == 0)), "H1")
    try:
        return perturb_component(sol, target, eps), target.strip()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_verify(args) -> int:
    cfg = _run_config(args)
    if args.tuple:
        if args.seed or args.H or args.Hx or args.Hy or args.Hz:
            raise UsageError("--tuple cannot be combined with a field")
        try:
            sol, doc_system, constants = read_tuple(args.tuple, cfg.constants)
        except (OSError, TupleFormatError) as exc:
            raise UsageError(str(exc)) from None
        system = EquationSystem.parse(args.system) if args.system else doc_system
        if system is None:
            raise UsageError("the tuple file has no system; pass --system")
        pd = bool(cfg.positive_domain)
    else:
        F, system, constants, pd, seed = resolve_field(args, cfg)
        if args.use_expected:
            if seed is None or not seed.has_expected:
                raise UsageError("--use-expected needs a --seed with a transcribed solution")
            sol = seed.expected_tuple()
        else:
            H = seed.expected_field() if seed is not None and seed.has_expected else F
            if all(c.kind == "num" and c.payload == 0 for c in H.simplify()):
                raise UsageError("field is identically zero")
            sol = solution_from_field(H, system, pd, Section(cfg.section))
    target = None
    if args.perturb is not None:
        sol, target = perturb_tuple(sol, args.perturb, args.perturb_target)
    thresholds = {}
    if args.threshold is not None:
        thresholds = {k: args.threshold for k in EQUATIONS}
    vcfg = VerifyConfig(pd, cfg.sample_config(), constants, thresholds, cfg.eps_mag)
    report = verify_tuple(sol, system, vcfg)
    out = _out_dir(args, cfg)
    doc = report.to_dict()
    if target:
        doc["perturbation"] = {"target": target, "factor": 1 + args.perturb}
    write_json(out / "report.json", doc)
    table = report.to_table()
    (out / "report.txt").write_text(table + "\n")
    if args.csv:
        report.to_csv(args.csv)
    print(table)
    return EXIT_OK if report.passed else EXIT_FAIL


def _grid_box(args, default) -> np.ndarray:
    if args.box:
        try:
            vals = [float(t) for t in args.box.split(",")]
        except ValueError:
            raise UsageError(f"bad box {args.box!r}") from None
        if len(vals) != 4 or vals[1] <= vals[0] or vals[3] <= vals[2]:
            raise UsageError("liouville box needs u0,u1,v0,v1 with u0 < u1 and v0 < v1")
    else:
        vals = default
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    u = np.linspace(vals[0], vals[1], args.grid)
    v = np.linspace(vals[2], vals[3], args.grid)
    U, V = np.meshgrid(u, v, indexing="ij")
    return np.stack([U.ravel(), V.ravel()], axis=-1)


def _parse_n(text: str) -> Fraction:
    try:
        n = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"n must be a number like 3/2 or 1.5, got {text!r}") from None
    try:
        return half_integer(n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_liouville(args) -> int:
    closed_form = None
    if args.zn is not None:
        n = _parse_n(args.zn)
        if args.grid < 2:
            raise UsageError("--grid must be at least 2")
        pts = sector_grid(n, args.grid)
        sol = planar_alt(f"zeta^({n.numerator}/{n.denominator})")
        closed_form = n
        label = f"z^n family, n = {n}"
    elif args.ns:
        pts = _grid_box(args, (-0.5, 0.5, -0.5, 0.5))
        sol = planar_ns(args.g)
        label = f"h = conj(g), g = {args.g}"
    elif args.general:
        if not args.h:
            raise UsageError("--general needs --h")
        g, h = args.g, args.h
        pts = _grid_box(args, (0.5, 1.5, 0.5, 1.5))
        sol = PlanarSolution(lambda p: omega_general(g, h, p), "g h = 1 or g' h' = 0")
        label = f"general pair g = {g}, h = {h}"
    else:
        pts = _grid_box(args, (0.5, 1.5, 0.5, 1.5))
        sol = planar_alt(args.g)
        label = f"h = 1/conj(g), g = {args.g}"
    stats = liouville_residual(sol.omega, pts, args.step, threshold=args.threshold)
    rows = liouville_table(sol, pts, args.step)
    csv_path = Path(args.csv) if args.csv else _out_dir(args) / "liouville.csv"
    write_liouville_csv(csv_path, rows)
    print(label)
    print(f"points: {stats.point_count}  max residual: {stats.max:.3e}  mean: {stats.mean:.3e}  "
          f"threshold: {stats.threshold:.1e}  {'pass' if stats.passed else 'FAIL'}")
    if closed_form is not None:
        rho = np.hypot(pts[:, 0], pts[:, 1])
        phi = np.arctan2(pts[:, 1], pts[:, 0]) % (2 * np.pi)
        dev = np.max(np.abs(np.array([r[3] for r in rows]) / zn_family(closed_form, rho, phi) - 1))
        print(f"closed form n^2/(rho^2 sin^2(n phi)): max relative deviation {dev:.3e}")
    print(f"wrote {csv_path}")
    return EXIT_OK if stats.passed else EXIT_FAIL


def cmd_sample(args) -> int:
    cfg = _run_config(args)
    F, system, constants, pd, seed = resolve_field(args, cfg)
    samples = sample_points(cfg.sample_config(), F, constants)
    vals = F.values(samples.points, constants).real
    path = Path(args.csv) if args.csv else _out_dir(args, cfg) / "samples.csv"
    write_csv(path, ["x", "y", "z", "H1", "H2", "H3"], np.hstack([samples.points, vals]))
    print(f"{len(samples)} points kept, {samples.rejected} rejected; wrote {path}")
    return EXIT_OK


def cmd_seeds(args) -> int:
    rows = [(s.name, s.system.value, "(" + ", ".join(s.H0) + ")",
             "yes" if s.has_expected else "no",
             ", ".join(f"{k}={v:g}" for k, v in s.constants.items()) or "-", s.note)
            for s in SEEDS]
    _print_table(rows, ("name", "system", "H0", "expected", "constants", "note"))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, ExprSyntaxError, DegenerateFieldError) as exc:
        print(f"hopflift: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EvaluationError, UnboundIdentifierError, SamplingError, RealityError) as exc:
        print(f"hopflift: evaluation failed: {exc}", file=sys.stderr)
        return EXIT_EVALUATION


if __name__ == "__main__":
    sys.exit(main())
