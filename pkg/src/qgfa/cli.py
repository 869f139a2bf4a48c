"""Command-line entry point: ``qgfa {assemble,solve,sweep,phases,response}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .approx import TargetFunction, chebyshev_fit
from .errors import ParameterError
from .fem import FemProblem, cantilever_problem, pad_to_power_of_two, tensile_problem
from .flow import gradient_flow, relative_error, solve_direct
from .qcirc import run_qgfa
from .qmia import inverse_fit, relative_error_inv, run_qmia
from .qsp import PhaseSequence, find_phases, response_report
from .softabs import solve_epsilon_pair
from .sweep import RESPONSE_HEADER, SweepConfig, _write_rows, emit_csv, load_problem, run_sweep


def _dump(doc, path):
    text = json.dumps(doc, indent=2)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def cmd_assemble(args):
    if args.mesh:
        with open(args.mesh, encoding="utf-8") as fh:
            problem = FemProblem.from_json(json.load(fh))
    elif args.problem == "tensile":
        problem = tensile_problem()
    else:
        problem = cantilever_problem(tip=args.tip)
    system = problem.build()
    if args.pad:
        system = pad_to_power_of_two(system)
    meta = {"dim": system.dim, "kappa": system.kappa, "spectral_norm": system.spectral_norm,
            "n_dirichlet": system.n_dirichlet}
    if args.out:
        _dump(system.to_json(), args.out)
    print(json.dumps(meta))
    return 0


def cmd_solve(args):
    system = load_problem(args.problem)
    u_star = solve_direct(system)
    residual = float(np.linalg.norm(system.matrix @ u_star - system.load) / np.linalg.norm(system.load))
    if args.method == "classical":
        if args.t is None:
            u = u_star
        else:
            u = gradient_flow(system, args.t / system.spectral_norm).u_t
        report = {"method": "classical", "R": relative_error(u, u_star), "residual": residual}
    elif args.method == "qgfa":
        if args.t is None or args.p is None:
            raise ParameterError("qgfa needs --t and --p")
        if args.mode == "circuit":
            system = pad_to_power_of_two(system)
            u_star = solve_direct(system)
        degree = args.p // 2 - 1
        if args.t == 0:
            one = TargetFunction.constant(1.0)
            f1 = f2 = chebyshev_fit(one, degree)
        else:
            eps = solve_epsilon_pair(system.kappa, args.t, args.eta)
            f1 = chebyshev_fit(TargetFunction.g1(args.t, eps), degree)
            f2 = chebyshev_fit(TargetFunction.g2tilde(args.t, eps), degree)
        b1, b2 = (find_phases(f1), find_phases(f2)) if args.mode == "circuit" else (f1, f2)
        out = run_qgfa(system, b1, b2, args.t, args.mode)
        u = out.u_qc
        report = {"method": "qgfa", "mode": args.mode, "t": args.t, "p": args.p,
                  "R": relative_error(u, u_star), "success_probability": out.success_probability,
                  "sup_err_g1": f1.sup_error, "sup_err_g2": f2.sup_error}
    else:
        if args.p is None:
            raise ParameterError("qmia needs --p")
        if args.mode == "circuit":
            system = pad_to_power_of_two(system)
            u_star = solve_direct(system)
        fit = inverse_fit(system, args.p - 1, args.epsilon_apx)
        branch = find_phases(fit) if args.mode == "circuit" else fit
        out = run_qmia(system, branch, args.mode)
        u = out.u_inv
        report = {"method": "qmia", "mode": args.mode, "p": args.p,
                  "R": relative_error_inv(u, u_star), "success_probability": out.success_probability,
                  "epsilon_apx": args.epsilon_apx}
    if args.out:
        _dump({"u": u.tolist(), **report}, args.out)
    print(json.dumps(report))
    return 0


def cmd_sweep(args):
    config = SweepConfig.load(args.config)
    if args.workers is not None:
        config.workers = args.workers
    out = args.out or config.output
    if not out:
        raise ParameterError("no output path (set 'output' in the config or pass --out)")
    result = run_sweep(config)
    for path in emit_csv(result, out):
        print(path)
    return 0


def cmd_phases(args):
    if args.kind == "const":
        target = TargetFunction.constant(args.value)
    else:
        kappa = args.kappa if args.kappa is not None else load_problem(args.problem).kappa
        if args.kind == "ginv":
            target = TargetFunction.ginv(kappa, args.epsilon_apx)
        else:
            if args.t is None:
                raise ParameterError(f"{args.kind} needs --t")
            eps = args.epsilon_smooth or solve_epsilon_pair(kappa, args.t, args.eta)
            ctor = TargetFunction.g1 if args.kind == "g1" else TargetFunction.g2tilde
            target = ctor(args.t, eps)
    phases = find_phases(chebyshev_fit(target, args.degree), tol=args.tol)
    _dump(phases.to_json(), args.out)
    if args.out not in (None, "-"):
        print(json.dumps({"degree": phases.degree, "residual": phases.residual}))
    return 0


def cmd_response(args):
    with open(args.phases, encoding="utf-8") as fh:
        phases = PhaseSequence.from_json(json.load(fh))
    if phases.target is None:
        raise ParameterError("phases file carries no target")
    report = response_report(phases, phases.target, args.grid)
    _write_rows(args.out, RESPONSE_HEADER, report.rows())
    print(json.dumps({"max_abs_error": report.max_abs_error, "mean_abs_error": report.mean_abs_error}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgfa", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("assemble", help="build an SPD system from a mesh")
    a.add_argument("--problem", choices=("tensile", "cantilever"), default="tensile")
    a.add_argument("--mesh", help="mesh JSON (nodes, elements, dirichlet, loads, E, nu, thickness)")
    a.add_argument("--tip", choices=("corner", "edge"), default="corner")
    a.add_argument("--pad", action="store_true", help="pad to a power-of-two dimension")
    a.add_argument("--out", help="write the system JSON here")
    a.set_defaults(func=cmd_assemble)

    s = sub.add_parser("solve", help="solve one system")
    s.add_argument("--problem", default="tensile", help="tensile, cantilever, or a JSON file")
    s.add_argument("--method", choices=("classical", "qgfa", "qmia"), default="classical")
    s.add_argument("--t", type=float)
    s.add_argument("--p", type=int)
    s.add_argument("--mode", choices=("circuit", "ideal_polynomial"), default="ideal_polynomial")
    s.add_argument("--eta", type=float, default=1e-6)
    s.add_argument("--epsilon-apx", type=float, default=1e-3)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="run a (t, p) grid from a config JSON")
    w.add_argument("config")
    w.add_argument("--out")
    w.add_argument("--workers", type=int)
    w.set_defaults(func=cmd_sweep)

    h = sub.add_parser("phases", help="solve QSP phases for a target")
    h.add_argument("--kind", choices=("g1", "g2tilde", "ginv", "const"), required=True)
    h.add_argument("--degree", type=int, required=True)
    h.add_argument("--t", type=float)
    h.add_argument("--kappa", type=float)
    h.add_argument("--problem", default="cantilever")
    h.add_argument("--eta", type=float, default=1e-6)
    h.add_argument("--epsilon-smooth", type=float)
    h.add_argument("--epsilon-apx", type=float, default=1e-3)
    h.add_argument("--value", type=float, default=1.0)
    h.add_argument("--tol", type=float, default=1e-10)
    h.add_argument("--out", default="-")
    h.set_defaults(func=cmd_phases)

    r = sub.add_parser("response", help="tabulate the QSP response of a phases file")
    r.add_argument("phases")
    r.add_argument("--grid", type=int, default=2000)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_response)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, RuntimeError, ArithmeticError, OSError, KeyError) as exc:
        print(f"qgfa {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
