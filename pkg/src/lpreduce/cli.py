"""Command line entry point: solve, reduce, verify, sample and gen."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .core import Basis, CvpInstance, LatticeVector, PNorm
from .errors import LatticeError
from .harness import (
    CSV_COLUMNS,
    REDUCTIONS,
    ExperimentConfig,
    InstanceFile,
    fraction_to_str,
    gen_lattice,
    gen_target,
    report_csv_rows,
    run_experiment,
)
from .oracles import exact_cvp, exact_svp, lambda1
from .supergaussian import ContinuousSupergaussian, ExactDSS, SvpDSS

EXIT_OK, EXIT_AUDIT, EXIT_INPUT = 0, 1, 2
log = logging.getLogger("lpreduce")


class InputError(Exception):
    """Bad user input; maps to exit code 2."""


def _emit(obj, fmt: str, out=None, columns=None, rows=None) -> None:
    stream = out or sys.stdout
    if fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
    else:
        stream.write(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _load_instance(path) -> InstanceFile:
    try:
        return InstanceFile.load(path)
    except (OSError, ValueError, KeyError, TypeError, LatticeError) as exc:
        raise InputError(f"cannot read instance {path}: {exc}") from exc


def _vector_dict(v: LatticeVector) -> dict:
    return {"coeffs": list(v.coeffs), "vector": [fraction_to_str(x) for x in v.embedding]}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    norm = PNorm.parse(args.norm or inst.norm)
    if args.problem == "svp":
        v, value = exact_svp(inst.basis, norm)
    else:
        if inst.target is None:
            raise InputError("cvp needs an instance with a target")
        v, value = exact_cvp(CvpInstance(inst.basis, inst.target, norm))
    rec = {"problem": args.problem, "norm": str(norm), "value": value, **_vector_dict(v)}
    rows = [[args.problem, str(norm), value, " ".join(map(str, v.coeffs))]]
    _emit(rec, args.format, columns=["problem", "norm", "value", "coeffs"], rows=rows)
    return EXIT_OK


def _config_from_args(args) -> ExperimentConfig:
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
    base["reduction"] = args.name
    overrides = {
        "seed": args.seed,
        "max_trials": args.max_trials,
        "Q_override": args.q_override,
        "p": args.p,
        "q": args.q,
        "eps": args.eps,
        "count": args.count,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.strict_promises:
        base["backend"] = "strict"
    try:
        return ExperimentConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def cmd_reduce(args) -> int:
    cfg = _config_from_args(args)
    instances = [_load_instance(args.instance)] if args.instance else None
    report = run_experiment(cfg, instances)
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n")
    if args.format == "csv":
        _emit(None, "csv", columns=list(CSV_COLUMNS), rows=report_csv_rows(report))
    else:
        _emit(report if not args.out else report["summary"], "json")
    return EXIT_OK if report["summary"]["pass_rate"] >= args.min_pass_rate else EXIT_AUDIT


def _random_instances(count: int, seed: int, max_rank: int = 3, bound: int = 4):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(1, max_rank + 1))
        out.append(gen_lattice("uniform", n, n, bound, rng))
    return out, rng


def default_grid(which: str, count: int, seed: int) -> list[dict]:
    """Built-in verification grids (used when no grid file is given)."""
    if which == "covering":
        return [{**g, "n_samples": 10_000} for g in analysis.COVERING_GRID]
    if which == "growth":
        return [{"c": c} for c in (4, 6)]
    return [{"p": p} for p in (1, 1.5, 2)]


def _grid_reports(which: str, grid: list[dict], count: int, seed: int) -> list[analysis.LemmaReport]:
    reports = []
    if which == "covering":
        rng = np.random.default_rng(seed)
        for g in grid:
            reports.append(analysis.covering_check(g["m"], g["p"], g["q"], g["alpha"], g.get("n_samples", 10_000), rng))
        return reports
    bases, rng = _random_instances(count, seed)
    for g in grid:
        for B in bases:
            p = g.get("p", 2)
            if which == "tail":
                reports.append(analysis.tail_check(B, p, g.get("a", 1.0)))
            elif which == "shifted-mass":
                reports.append(analysis.shifted_mass_check(B, gen_target(B, rng, 7), p))
            elif which == "projection":
                if B.n >= 2:
                    reports.append(analysis.projection_check(B))
            elif which == "counting":
                l1 = lambda1(B, p)
                for k in (2, 3):
                    reports.append(analysis.counting_check(B, p, l1, k * l1))
                reports.append(analysis.multiples_check(B, p, 3 * l1))
                reports.append(analysis.point_count_check(B, [0] * B.m, p, 3 * l1))
            elif which == "growth":
                l1 = lambda1(B, 2)
                c = g["c"]
                cd, ratio = analysis.growth_ladder(B, 2, l1, c)
                bound = analysis.growth_bound(B.m, c)
                reports.append(analysis.LemmaReport("growth", f"n={B.n} c={c}", ratio, bound, ratio <= bound, details={"c_dagger": cd}))
    return reports


def cmd_verify(args) -> int:
    if args.grid:
        try:
            grid = json.loads(Path(args.grid).read_text())
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read grid {args.grid}: {exc}") from exc
    else:
        grid = default_grid(args.which, args.count, args.seed)
    try:
        reports = _grid_reports(args.which, grid, args.count, args.seed)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad grid entry: {exc}") from exc
    recs = [r.as_dict() for r in reports]
    cols = ["lemma", "instance", "lhs", "rhs", "holds", "method"]
    _emit(recs, args.format, columns=cols, rows=[[r[c] for c in cols] for r in recs])
    return EXIT_OK if all(r.holds for r in reports) else EXIT_AUDIT


def cmd_sample(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.kind == "supergaussian":
        norm = PNorm.parse(args.norm or "2")
        xs = ContinuousSupergaussian(norm, args.dim).sample(rng, args.count)
        rows = [list(map(float, x)) for x in xs]
        _emit({"kind": args.kind, "samples": rows}, args.format, columns=[f"x{i}" for i in range(args.dim)], rows=rows)
        return EXIT_OK
    if not args.instance:
        raise InputError("discrete sampling needs --instance")
    inst = _load_instance(args.instance)
    norm = args.norm or inst.norm
    if args.kind == "dss-exact":
        sampler = ExactDSS(inst.basis, norm, 1e-6)
    else:
        sampler = SvpDSS(inst.basis, norm, args.f)
    coeffs = sampler.sample_coeffs(args.count, rng)
    rows = [[int(c) for c in row] for row in coeffs]
    _emit(
        {"kind": args.kind, "delta": sampler.delta, "coeffs": rows},
        args.format,
        columns=[f"c{i}" for i in range(inst.basis.n)],
        rows=rows,
    )
    return EXIT_OK


def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    basis = gen_lattice(args.kind, args.rank, args.dim, args.bound, rng, gap=args.gap, q=args.modulus)
    target = gen_target(basis, rng, args.target_den) if args.target else None
    inst = InstanceFile(basis, args.norm or "2", target, {"seed": args.seed, "kind": args.kind})
    if args.out:
        inst.save(args.out)
    else:
        sys.stdout.write(inst.dumps() + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lpreduce", description="Lattice problem reductions across l_p norms.")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="exact SVP or CVP by enumeration")
    s.add_argument("problem", choices=("svp", "cvp"))
    s.add_argument("--instance", required=True)
    s.add_argument("--norm")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("reduce", parents=[common], help="run a reduction with audits")
    r.add_argument("name", choices=REDUCTIONS)
    r.add_argument("--instance")
    r.add_argument("--config")
    r.add_argument("--out")
    r.add_argument("--max-trials", type=int)
    r.add_argument("--strict-promises", action="store_true")
    r.add_argument("--q-override", type=int)
    r.add_argument("--p")
    r.add_argument("--q")
    r.add_argument("--eps", type=float)
    r.add_argument("--count", type=int)
    r.add_argument("--min-pass-rate", type=float, default=0.95)
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", parents=[common], help="check lemma inequalities on a grid")
    v.add_argument("which", choices=("covering", "tail", "shifted-mass", "projection", "counting", "growth"))
    v.add_argument("--grid")
    v.add_argument("--count", type=int, default=10)
    v.set_defaults(func=cmd_verify)

    sm = sub.add_parser("sample", parents=[common], help="draw supergaussian samples")
    sm.add_argument("kind", choices=("dss-exact", "dss-svp", "supergaussian"))
    sm.add_argument("--count", type=int, required=True)
    sm.add_argument("--instance")
    sm.add_argument("--norm")
    sm.add_argument("--dim", type=int, default=2)
    sm.add_argument("--f", type=int, default=10)
    sm.set_defaults(func=cmd_sample)

    g = sub.add_parser("gen", parents=[common], help="generate an instance file")
    g.add_argument("--kind", choices=("uniform", "qary", "diagonal-gap"), default="uniform")
    g.add_argument("--rank", type=int, required=True)
    g.add_argument("--dim", type=int)
    g.add_argument("--bound", type=int, default=5)
    g.add_argument("--gap", type=int, default=5)
    g.add_argument("--modulus", type=int, default=7)
    g.add_argument("--norm")
    g.add_argument("--target", action="store_true")
    g.add_argument("--target-den", type=int, default=8)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (LatticeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
