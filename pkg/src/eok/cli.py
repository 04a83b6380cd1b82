"""Command line front end: ``eok <subcommand> ...``.

Exit codes: 0 success, 1 domain/usage error, 2 I/O error.  Results go to
stdout (or ``--out``), diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from eok import bounds
from eok.errors import DomainError
from eok.experiment import ExperimentConfig, run_experiment
from eok.formula import (Assignment, ModelParams, generate, parse_formula, threshold_p, threshold_p_coefficient,
                         threshold_r, write_formula)
from eok.geometry import (cluster_components, find_holes, min_connect_l, min_cover_size, overlap_stats)
from eok.solver import DEFAULT_LIMIT, enumerate_solutions
from eok.structure import build_H, parity_consistent, path_via_H


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def cmd_gen(args) -> str:
    params = ModelParams(args.n, args.k, args.epsilon, args.seed, r=args.r, p=args.p)
    return write_formula(generate(params, args.mode))


def cmd_solve(args) -> str:
    f = parse_formula(_read(args.formula))
    return enumerate_solutions(f, limit=args.limit).to_text()


def cmd_geometry(args) -> str:
    f = parse_formula(_read(args.formula))
    s = enumerate_solutions(f, limit=args.limit)
    out = {
        "n": f.n, "solution_count": len(s), "complete": s.complete,
        "overlap": overlap_stats(s).to_dict(),
        "min_connect_l": min_connect_l(s),
        "min_cover_size": min_cover_size(f),
    }
    if args.l is not None:
        rep = cluster_components(s, args.l)
        out["clusters"] = {k: v for k, v in rep.to_dict().items() if k != "components" or args.members}
    return _json(out)


def cmd_holes(args) -> str:
    f = parse_formula(_read(args.formula))
    s = enumerate_solutions(f, limit=args.limit)
    return _json([h.to_dict() for h in find_holes(f, s, args.min_size)])


def cmd_hgraph(args) -> str:
    f = parse_formula(_read(args.formula))
    a, b = Assignment.from_string(args.a), Assignment.from_string(args.b)
    h = build_H(f, a, b)
    if args.dot:
        return h.to_dot()
    res = path_via_H(f, a, b)
    out = h.to_dict()
    out.update({
        "parity_consistent": parity_consistent(h),
        "largest_component": h.largest_component(),
        "path": [str(x) for x in res.path],
        "path_valid": res.valid,
        "max_step": res.max_step,
    })
    return _json(out)


def cmd_thresholds(args) -> str:
    coef = threshold_p_coefficient(args.k, args.epsilon)
    out = {"r": threshold_r(args.k, args.epsilon), "p_scale": f"{coef:g}*n^{1 - args.k}"}
    if args.n is not None:
        out["p"] = threshold_p(args.k, args.epsilon, args.n)
    return _json(out)


def _need(args, *names):
    missing = [nm for nm in names if getattr(args, nm) is None]
    if missing:
        raise DomainError(f"missing parameter(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")
    return [getattr(args, nm) for nm in names]


def _bounds_value(args):
    q = args.quantity
    if q == "lambda_c":
        (c,) = _need(args, "c")
        return bounds.lambda_c(c)
    if q == "condition_one":
        qq, eps, k = _need(args, "q", "epsilon", "k")
        return bounds.condition_one(qq, eps, k)
    if q == "mu":
        n, a, d, p, eps, k = _need(args, "n", "a", "d", "p", "epsilon", "k")
        eq, neq = bounds.mu_bounds(n, a, d, p, eps, k)
        return {"mu_eq": eq, "mu_neq": neq}
    if q == "epsilon_0":
        lo, hi = bounds.epsilon_0_roots()
        return {"epsilon_0": lo, "other_root": hi, "residual": bounds.mu_residual(lo)}
    if q == "epsilon_c":
        return bounds.epsilon_c().to_dict()
    if q == "connected":
        n, c = _need(args, "n", "c")
        return bounds.connected_prob_bound(n, c)
    if q == "cover_exponent":
        lam, c, k = _need(args, "lam", "c", "k")
        return bounds.cover_exponent(lam, c, k)
    if q == "q_c":
        c, k = _need(args, "c", "k")
        return bounds.q_c(c, k)
    if q == "hole":
        n, i, lam, k = _need(args, "n", "i", "lam", "k")
        return {"bound": bounds.hole_prob_bound(n, i, lam, k),
                "log_bound": bounds.log_hole_prob_bound(n, i, lam, k)}
    if q == "x_k":
        lam, k = _need(args, "lam", "k")
        _, g, root = bounds.f_g_and_root(lam, k)
        return {"x_k": root, "g_at_1": g(1.0)}
    if q == "stirling":
        alpha, lam, k = _need(args, "alpha", "lam", "k")
        return bounds.stirling_form_check(alpha, lam, k)
    raise DomainError(f"unknown quantity {q!r}")


def _bounds_scan(args) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    if args.scan in ("f", "g"):
        lam, k = _need(args, "lam", "k")
        f, g, _ = bounds.f_g_and_root(lam, k)
        w.writerow(["x", "f", "g"])
        for x in np.linspace(1 / args.points, 1.0, args.points).tolist():
            w.writerow([repr(x), repr(f(x)), repr(g(x))])
    else:
        c, k = _need(args, "c", "k")
        w.writerow(["lambda", "h"])
        for x in np.linspace(0.5 / args.points, 0.5, args.points)[:-1].tolist():
            w.writerow([repr(x), repr(bounds.cover_exponent(x, c, k))])
    return out.getvalue()


def cmd_bounds(args) -> str:
    if args.scan:
        return _bounds_scan(args)
    value = _bounds_value(args)
    return _json({"quantity": args.quantity, "value": value})


def cmd_experiment(args) -> str:
    cfg = ExperimentConfig.from_toml(_read(args.config))
    if args.trials is not None:
        cfg.trials = args.trials
    if args.timings:
        cfg.timings = True
    report = run_experiment(cfg, workers=args.workers)
    if args.aggregates:
        with open(args.aggregates, "w") as fh:
            fh.write(report.aggregates_csv())
    return report.to_json() if args.format == "json" else report.to_csv()


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eok", description="Random epsilon-1-in-k SAT: instances, solutions, geometry, bounds.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random formula")
    g.add_argument("--model", choices=["counting", "constant_prob"], default="counting")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--epsilon", type=float, default=0.5)
    g.add_argument("--r", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mode", choices=["multinomial", "exact-counts"], default="multinomial")
    g.set_defaults(func=cmd_gen)

    def with_formula(sp):
        sp.add_argument("formula", nargs="?", default="-", help="formula file, '-' for stdin")
        sp.add_argument("--limit", type=int, default=DEFAULT_LIMIT)

    s = sub.add_parser("solve", help="enumerate satisfying assignments")
    with_formula(s)
    s.set_defaults(func=cmd_solve)

    ge = sub.add_parser("geometry", help="overlaps, clusters and covers of the solution set")
    with_formula(ge)
    ge.add_argument("--l", type=int)
    ge.add_argument("--members", action="store_true", help="list cluster members")
    ge.set_defaults(func=cmd_geometry)

    h = sub.add_parser("holes", help="list holes")
    with_formula(h)
    h.add_argument("--min-size", type=int, default=2)
    h.set_defaults(func=cmd_holes)

    hg = sub.add_parser("hgraph", help="labelled graph H of a solution pair")
    hg.add_argument("formula", nargs="?", default="-")
    hg.add_argument("--a", required=True)
    hg.add_argument("--b", required=True)
    hg.add_argument("--dot", action="store_true")
    hg.set_defaults(func=cmd_hgraph)

    b = sub.add_parser("bounds", help="closed-form bounds and roots as JSON")
    b.add_argument("quantity", nargs="?", default="epsilon_c",
                   choices=["lambda_c", "condition_one", "mu", "epsilon_0", "epsilon_c", "connected",
                            "cover_exponent", "q_c", "hole", "x_k", "stirling"])
    for name, typ in [("n", int), ("k", int), ("i", int), ("a", int), ("d", int), ("epsilon", float),
                      ("c", float), ("lam", float), ("q", float), ("p", float), ("alpha", float)]:
        b.add_argument(f"--{name}", type=typ)
    b.add_argument("--scan", choices=["f", "g", "h"], help="emit a CSV grid instead")
    b.add_argument("--points", type=int, default=1000)
    b.set_defaults(func=cmd_bounds)

    t = sub.add_parser("thresholds", help="satisfiability thresholds")
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--epsilon", type=float, required=True)
    t.add_argument("--n", type=int)
    t.set_defaults(func=cmd_thresholds)

    e = sub.add_parser("experiment", help="run a config-driven experiment")
    e.add_argument("config")
    e.add_argument("--format", choices=["csv", "json"], default="csv")
    e.add_argument("--trials", type=int)
    e.add_argument("--workers", type=int)
    e.add_argument("--aggregates", help="also write aggregate rows as CSV here")
    e.add_argument("--timings", action="store_true", help="include wall_time (breaks byte reproducibility)")
    e.set_defaults(func=cmd_experiment)

    for sp in (g, s, ge, h, hg, b, t, e):
        sp.add_argument("--out")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage())
        text = args.func(args)
        _emit(text, args.out)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return 1
    except OSError as exc:
        sys.stderr.write(f"eok: I/O error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"eok: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
