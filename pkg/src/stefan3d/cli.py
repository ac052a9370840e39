"""
Command line: ``stefan classify|solve|verify|export <problem-file> [flags]``.

Exit codes: 0 success, 2 parse or validation error, 3 no root found,
4 unsupported case, 5 audit failure. The first line on standard error of
a failing run is ``error[<code>]: <message>``. Logging verbosity comes
from the STEFAN_LOG environment variable (DEBUG, INFO, WARNING, ERROR).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import re
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fileio
from .errors import NoRoot, NonConvergence, StefanError, UnsupportedSubalgebra
from .fileio import ProblemFileError, format_float
from .material import invert_enthalpy
from .reduction import classify_omega, omega_of_point, surface_points
from .solver import ReducedStefanProblem, solve
from .symmetry import classify_diffusivities, classify_flux
from .verify import audit, audit_failures

log = logging.getLogger("stefan3d")

EXIT_OK, EXIT_PARSE, EXIT_NOROOT, EXIT_UNSUPPORTED, EXIT_AUDIT = 0, 2, 3, 4, 5

_SUBSCRIPTS = str.maketrans("01234567", "₀₁₂₃₄₅₆₇")


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def generator_name(g: str) -> str:
    """Display name of a generator, e.g. 'T5' -> 'T̃₅'."""
    return "T̃" + g[1:].translate(_SUBSCRIPTS)


def _setup_logging():
    level = os.environ.get("STEFAN_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _out_dir(args, problem) -> Path:
    return Path(args.out_dir) if args.out_dir else problem.default_out_dir


def _reduced_problem(problem) -> ReducedStefanProblem:
    report = classify_flux(problem.flux)
    if report.table2_case != 5:
        raise CliError(EXIT_UNSUPPORTED,
                       f"reduction not implemented for Table 2 case {report.table2_case}")
    if report.aligned_by_rotation:
        raise CliError(EXIT_UNSUPPORTED,
                       "reduction needs the constant flux along x3; rotate the frame first")
    return ReducedStefanProblem(problem.model, problem.R, problem.flux.axial_magnitude,
                                problem.ansatz)


# ------------------------------------------------------------------------------
# commands


def cmd_classify(args, problem) -> int:
    rep = classify_flux(problem.flux)
    row = classify_diffusivities(problem.model.d1, problem.model.d2)
    gens = list(rep.group_generators)
    print(f"Table 2 case {rep.table2_case}")
    print("generators: " + " ".join(gens))
    print("names: " + " ".join(generator_name(g) for g in gens))
    if rep.aligned_by_rotation:
        print("note: flux rotated onto the x3 axis by the equivalence group")
    print(f"Table 1 case {row}")
    doc = {"schema": fileio.SCHEMA_VERSION,
           "flux": {**rep.as_dict(), "names": [generator_name(g) for g in gens]},
           "diffusivities": {"table1_case": row}}
    fileio.write_text(_out_dir(args, problem) / "classification.toml",
                      fileio.dumps(doc, ["symmetry classification of the problem"]))
    return EXIT_OK


def cmd_solve(args, problem) -> int:
    red = _reduced_problem(problem)
    method = args.method or problem.method
    try:
        sol = solve(red, method, problem.solver)
    except ValueError as exc:
        raise CliError(EXIT_UNSUPPORTED, str(exc)) from None
    out = _out_dir(args, problem)
    fileio.write_solution(out, sol, problem)
    if red.geometry == "planar":
        print(f"solver: {sol.solver_tag}")
        print(f"z2 = {format_float(sol.z2)}")
    else:
        print(f"solver: {sol.solver_tag}")
        print(f"omega2 = {format_float(sol.omega2)}")
    print(f"mu = {format_float(sol.mu)}")
    log.info("wrote %s", out)
    return EXIT_OK


def _load_solution(args, problem):
    red = _reduced_problem(problem)
    if red.geometry != "paraboloid":
        raise CliError(EXIT_UNSUPPORTED, "verify and export support the paraboloid ansatz only")
    out = _out_dir(args, problem)
    sol = fileio.read_solution(out)
    if sol is None:
        raise CliError(EXIT_UNSUPPORTED, "verify and export support the paraboloid ansatz only")
    if not math.isclose(sol.R, problem.R, rel_tol=1e-15) or \
            not math.isclose(sol.v_inf, problem.model.v_inf, rel_tol=1e-15):
        raise CliError(EXIT_PARSE, f"{out / fileio.SOLUTION_TOML}: solution does not match "
                                   f"the problem (R or v_inf differ)")
    return red, sol, out


def cmd_verify(args, problem) -> int:
    red, sol, out = _load_solution(args, problem)
    cfg = problem.audit
    if args.grid is not None:
        cfg = replace(cfg, h=args.grid)
    if args.levels is not None:
        cfg = replace(cfg, levels=args.levels)
    report = audit(sol, problem.model, red.q, cfg)
    failed = audit_failures(report, cfg.tolerances)
    fileio.write_report(out, report, failed, cfg)
    for k, v in report.as_dict().items():
        print(f"{k} = {format_float(v) if isinstance(v, float) else v}")
    if failed:
        raise CliError(EXIT_AUDIT, "audit failed: " + ", ".join(failed))
    print("audit passed")
    return EXIT_OK


_PLANE = re.compile(r"^\s*x([123])\s*=\s*([-+0-9.eE]+)\s*$")


def parse_plane(spec: str):
    """'x2=0' -> (axis index 1, 0.0)."""
    m = _PLANE.match(spec or "")
    if not m:
        raise CliError(EXIT_PARSE, f"malformed plane spec {spec!r} (expected x1=c, x2=c or x3=c)")
    try:
        return int(m.group(1)) - 1, float(m.group(2))
    except ValueError:
        raise CliError(EXIT_PARSE, f"malformed plane spec {spec!r}") from None


def _temperature(problem, phase, value):
    if problem.material is None or phase not in ("liquid", "solid", "solid_far"):
        return value
    return invert_enthalpy(problem.model, "liquid" if phase == "liquid" else "solid", value)


def cmd_export(args, problem) -> int:
    what = args.what or "surfaces"
    if what == "field-slice":
        axis, c = parse_plane(args.plane if args.plane is not None else "x2=0")
    red, sol, out = _load_solution(args, problem)
    t = sol.frame.t0 + (args.t or 0.0)
    geom = sol.geometry
    if what == "surfaces":
        rows = []
        for sid, which in ((1, "evaporation"), (2, "melting")):
            for p in surface_points(geom, which, t, 400):
                rows.append((float(p[0]), float(p[1]), float(p[2]), sid, float(t)))
        fileio.write_text(out / fileio.SURFACES_CSV,
                          fileio._csv_text(("x1", "x2", "x3", "surface_id", "t"), rows))
        print(f"wrote {out / fileio.SURFACES_CSV}")
        return EXIT_OK

    n = 101
    span = 2.0 * sol.omega2
    ctr = np.array(sol.frame.center, dtype=float)
    ctr[2] += sol.mu * (t - sol.frame.t0)
    free = [k for k in range(3) if k != axis]
    a = np.linspace(ctr[free[0]] - span, ctr[free[0]] + span, n)
    b = np.linspace(ctr[free[1]] - span, ctr[free[1]] + span, n)
    label = "temperature" if problem.material is not None else "enthalpy"
    rows = []
    for bv in b:
        for av in a:
            x = np.empty(3)
            x[axis], x[free[0]], x[free[1]] = c, av, bv
            w = omega_of_point(x, t, sol.mu, sol.frame)
            phase, val = classify_omega(sol, geom, w, far_field="substitute")
            if phase != "gas":
                val = _temperature(problem, phase, val)
            rows.append((float(x[0]), float(x[1]), float(x[2]), float(t), phase, float(val)))
    fileio.write_text(out / fileio.SLICE_CSV,
                      fileio._csv_text(("x1", "x2", "x3", "t", "phase", label), rows))
    print(f"wrote {out / fileio.SLICE_CSV}")
    return EXIT_OK


COMMANDS = {"classify": cmd_classify, "solve": cmd_solve, "verify": cmd_verify,
            "export": cmd_export}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stefan", description=(
        "Traveling free-boundary solutions of the two-phase Stefan problem "
        "with evaporation and melting."))
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("problem", help="problem file (TOML, schema = 1)")
    p.add_argument("--method", choices=("auto", "closed-form", "shooting"),
                   help="solver path for solve (default: from the problem file, else auto)")
    p.add_argument("--grid", type=float, help="finite-difference spacing h for verify")
    p.add_argument("--levels", type=int, choices=(1, 2),
                   help="1 grid, or 2 grids (h and h/2) to estimate the convergence order")
    p.add_argument("--what", choices=("surfaces", "field-slice"), help="export target")
    p.add_argument("--t", type=float, default=0.0,
                   help="export time, relative to the solution frame (default 0)")
    p.add_argument("--plane", help="slice plane for field-slice export, e.g. x2=0")
    p.add_argument("--out-dir", help="directory for solution, report and export files")
    return p


def _error_code(exc) -> int:
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, (NoRoot, NonConvergence)):
        return EXIT_NOROOT
    if isinstance(exc, UnsupportedSubalgebra):
        return EXIT_UNSUPPORTED
    return EXIT_PARSE


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        problem = fileio.load_problem(args.problem)
        return COMMANDS[args.command](args, problem)
    except (CliError, ProblemFileError, StefanError, ValueError) as exc:
        code = _error_code(exc)
        msg = " ".join(str(exc).split())
        print(f"error[{code}]: {msg}", file=sys.stderr)
        log.debug("failure detail", exc_info=True)
        return code


if __name__ == "__main__":
    sys.exit(main())
