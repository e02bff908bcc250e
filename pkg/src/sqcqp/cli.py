"""Command-line interface: ``sqcqp {solve,certify,witness,slemma,sample,oracle} FILE ...``.

Exit codes: 0 success, 1 candidate not certified / oracle infeasible,
2 solved but only conditionally optimal, 3 no convergence, 4 rank condition
fails, 5 dual divergence, 64 usage error, 65 invalid problem data,
66 unreadable input file, 70 internal contradiction.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .dual import SolveConfig, solve
from .errors import (
    DualDivergence,
    FullRank,
    InternalContradiction,
    NoConvergence,
    ParseError,
    QCQPError,
    ValidationError,
)
from .fileformat import dumps, parse_problem, write_csv
from .gis import SampleConfig, convexity_witness, sample_image
from .kkt import check_fritz_john, check_kkt, check_kkt_general
from .model import Multipliers, ToleranceSet, Verdict, shift_objective
from .oracle import GridSpec, grid_minimize
from .search import SearchConfig
from .slemma import alternative

EX_OK = 0
EX_NOT_CERTIFIED = 1
EX_CONDITIONAL = 2
EX_NO_CONVERGENCE = 3
EX_FULL_RANK = 4
EX_DIVERGENCE = 5
EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66
EX_SOFTWARE = 70


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sqcqp", description="Solve and certify scalar QCQP problems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="globally solve and certify")
    p.add_argument("file")
    p.add_argument("--gap", type=float, default=SolveConfig.gap, help="duality-gap tolerance")
    p.add_argument("--restarts", type=int, default=SolveConfig.restarts)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("certify", help="check the candidate block of a problem file")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=None, help="one tolerance for every residual")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("witness", help="build the image-set convexity witness")
    p.add_argument("file")
    p.add_argument("--xv", type=_floats, required=True)
    p.add_argument("--xw", type=_floats, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)

    p = sub.add_parser("slemma", help="decide the theorem of the alternative")
    p.add_argument("file")
    p.add_argument("--include-objective", dest="optimal_value", type=float, default=None,
                   metavar="J*", help="prepend f0 = J - J* to the constraints")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sample", help="write an image-set point cloud as CSV")
    p.add_argument("file")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--box", type=float, required=True, help="half-width of the sampling cube")
    p.add_argument("--shift", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle", help="brute-force grid minimization")
    p.add_argument("file")
    p.add_argument("--box", type=float, required=True, help="half-width of the grid cube")
    p.add_argument("--points", type=int, required=True, help="grid points per axis")
    return parser


def _report_dict(report) -> dict:
    return {
        "verdict": report.verdict,
        "stationarity_residual": report.stationarity_residual,
        "complementarity_residual": report.complementarity_residual,
        "feasibility_residual": report.feasibility_residual,
        "curvature_margin": report.curvature_margin,
        "slater_point": report.slater_point,
        "notes": list(report.notes),
    }


def _multipliers_dict(m: Multipliers) -> dict:
    out = {"gamma": m.gamma}
    if m.gamma0 is not None:
        out["gamma0"] = m.gamma0
    return out


def _solution_dict(sol) -> dict:
    cert = sol.certificate
    return {
        "value": sol.value,
        "x": sol.point,
        "gamma": sol.multipliers.gamma,
        "dual_value": sol.dual_value,
        "dual_status": sol.status,
        "certificate": {
            "verdict": cert.verdict,
            "point": cert.point,
            "multipliers": _multipliers_dict(cert.multipliers),
            "stationarity_residual": cert.stationarity_residual,
            "complementarity_residual": cert.complementarity_residual,
            "feasibility_residual": cert.feasibility_residual,
            "aggregated_curvature": cert.aggregated_curvature,
            "tolerances": vars(cert.tolerances),
            "notes": list(cert.notes),
        },
        "slater_point": sol.slater_point,
    }


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def _scalar_only(pf, command):
    if pf.matrix_mode:
        raise ValidationError([f"{command} needs a scalar problem; matrix_mode files only support certify"])
    return pf.problem


def _cmd_solve(args, pf) -> int:
    p = _scalar_only(pf, "solve")
    cfg = SolveConfig(gap=args.gap, restarts=args.restarts, seed=args.seed)
    try:
        sol = solve(p, cfg)
    except NoConvergence as exc:
        out = {"error": "NoConvergence", "message": str(exc)}
        if exc.best is not None:
            out["best"] = _solution_dict(exc.best)
        _emit(out)
        return EX_NO_CONVERGENCE
    except DualDivergence as exc:
        _emit({"error": "DualDivergence", "message": str(exc)})
        return EX_DIVERGENCE
    _emit(_solution_dict(sol))
    return EX_OK if sol.certificate.verdict == Verdict.GLOBALLY_OPTIMAL else EX_CONDITIONAL


def _cmd_certify(args, pf) -> int:
    if pf.candidate is None:
        raise ValidationError(["certify needs a candidate block with x and gamma"])
    tol = ToleranceSet() if args.tol is None else ToleranceSet.uniform(args.tol)
    search = SearchConfig(seed=args.seed)
    cand = pf.candidate
    mult = Multipliers(cand.gamma, cand.gamma0)
    p = pf.problem
    if pf.matrix_mode:
        J = p.objective
        report = check_kkt_general(J.A, J.b, J.c, p.constraints, cand.x, mult, tol, search=search)
    elif mult.fritz_john:
        report = check_fritz_john(p, cand.x, mult, tol, search=search)
    else:
        report = check_kkt(p, cand.x, mult, tol, search=search)
    _emit(_report_dict(report))
    return EX_OK if report.verdict == Verdict.GLOBALLY_OPTIMAL else EX_NOT_CERTIFIED


def _cmd_witness(args, pf) -> int:
    p = _scalar_only(pf, "witness")
    try:
        w = convexity_witness(list(p.functionals), args.xv, args.xw, args.lam)
    except FullRank as exc:
        _emit({"error": "FullRank", "message": str(exc), "rank": exc.rank, "n": exc.n})
        return EX_FULL_RANK
    _emit({
        "x_tilde": w.x_tilde,
        "alpha_roots": list(w.alpha_roots),
        "chosen_alpha": w.chosen_alpha,
        "discriminant": w.discriminant,
        "kernel_vector": w.kernel_vector,
        "slacks": w.slacks,
        "lambda": w.lam,
    })
    return EX_OK


def _cmd_slemma(args, pf) -> int:
    p = _scalar_only(pf, "slemma")
    fs = list(p.constraints)
    if args.optimal_value is not None:
        fs.insert(0, shift_objective(p, args.optimal_value))
    try:
        v = alternative(fs, SearchConfig(seed=args.seed))
    except InternalContradiction as exc:
        _emit({"error": "InternalContradiction", "message": str(exc)})
        return EX_SOFTWARE
    _emit({
        "outcome": v.outcome,
        "strict_point": v.strict_point,
        "multiplier": None if v.multiplier is None else _multipliers_dict(v.multiplier),
        "margin": v.margin,
        "best_max_value": v.best_max_value,
        "rank_condition": v.rank_condition,
        "budget_used": v.budget_used,
    })
    return EX_OK


def _cmd_sample(args, pf) -> int:
    p = _scalar_only(pf, "sample")
    rows = sample_image(list(p.functionals), SampleConfig(args.count, args.box, args.shift, args.seed))
    write_csv(args.out, rows)
    _emit({"rows": rows.shape[0], "columns": rows.shape[1], "out": args.out})
    return EX_OK


def _cmd_oracle(args, pf) -> int:
    p = _scalar_only(pf, "oracle")
    res = grid_minimize(p, GridSpec.cube(p.n, args.box, args.points))
    if res is None:
        _emit({"feasible": False})
        return EX_NOT_CERTIFIED
    _emit({"feasible": True, "x": res.point, "value": res.value,
           "raw_x": res.raw_point, "raw_value": res.raw_value})
    return EX_OK


COMMANDS = {
    "solve": _cmd_solve,
    "certify": _cmd_certify,
    "witness": _cmd_witness,
    "slemma": _cmd_slemma,
    "sample": _cmd_sample,
    "oracle": _cmd_oracle,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        sys.stderr.write(f"sqcqp: cannot read {args.file}: {exc}\n")
        return EX_NOINPUT
    try:
        pf = parse_problem(text)
        return COMMANDS[args.command](args, pf)
    except (ParseError, ValidationError) as exc:
        sys.stderr.write(f"sqcqp: invalid problem file {args.file}: {exc}\n")
        return EX_DATAERR
    except OSError as exc:
        sys.stderr.write(f"sqcqp: {exc}\n")
        return EX_NOINPUT
    except QCQPError as exc:
        sys.stderr.write(f"sqcqp: {type(exc).__name__}: {exc}\n")
        return EX_DATAERR


def run() -> None:
    sys.exit(main())
