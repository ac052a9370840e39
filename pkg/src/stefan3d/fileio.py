"""
Problem files, solution files and reports.

Problem files and reports are TOML. Numbers are written with 17
significant digits so every double survives a write/read cycle exactly;
keys are emitted in a fixed order and no timestamps are written, so
identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli

from .material import EnthalpyModel, FunctionProfile, MaterialSpec, goodman_transform
from .reduction import Frame
from .solver import ParaboloidSolution, PlanarSolution, RootSolveConfig
from .symmetry import FluxComponent, FluxSpec, RotatingPair
from .verify import AuditConfig, AuditTolerances, ResidualReport

SCHEMA_VERSION = 1
UNITS_HEADER = ("units: SI throughout (lengths m, times s, diffusivities m^2/s, "
                "enthalpies and latent heats J/m^3, temperatures K, flux W/m^2)")


class ProblemFileError(ValueError):
    """Malformed or invalid input file; the message names file, line and key."""


# ------------------------------------------------------------------------------
# TOML emission


def format_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.17g}"
    if not any(c in s for c in ".e"):
        s += ".0"
    return s


def _value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k} = {_value(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(doc: dict, comments=()) -> str:
    """TOML text for a dict of scalars and (nested) tables, keys in insertion order."""
    out = [f"# {c}" for c in comments]

    def table(prefix, d):
        scalars = [(k, v) for k, v in d.items() if not isinstance(v, dict) or _inline(v)]
        tables = [(k, v) for k, v in d.items() if isinstance(v, dict) and not _inline(v)]
        if prefix and (scalars or not tables):
            out.append("")
            out.append(f"[{prefix}]")
        for k, v in scalars:
            out.append(f"{k} = {_value(v)}")
        for k, v in tables:
            table(f"{prefix}.{k}" if prefix else k, v)

    table("", doc)
    return "\n".join(out).lstrip("\n") + "\n"


def _inline(d):
    # profile descriptors and flux components are written inline
    return "family" in d


def write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_toml(path) -> tuple[dict, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        return tomli.loads(text), text
    except tomli.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is not None:
            raise ProblemFileError(f"{path}:{line}: TOML syntax error: {exc.msg} "
                                   f"(column {exc.colno})") from None
        raise ProblemFileError(f"{path}: TOML syntax error: {exc}") from None


# ------------------------------------------------------------------------------
# Problem files


def _key_line(text: str, section: str, key: str):
    """1-based line where ``key`` is set inside ``[section]`` (None if absent)."""
    current = ""
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[\s*([^\]]+?)\s*\]", s)
        if m:
            current = m.group(1)
            continue
        if current == section and re.match(rf"^{re.escape(key)}\s*=", s):
            return i
        if not section and current == "" and re.match(rf"^{re.escape(key)}\s*=", s):
            return i
    if section:
        for i, line in enumerate(text.splitlines(), 1):
            if re.match(rf"^\[\s*{re.escape(section)}\s*\]", line.strip()):
                return i
    return None


class _Reader:
    """Typed access to one section with line-anchored errors."""

    def __init__(self, path, text, section, data, allowed):
        self.path, self.text, self.section, self.data = path, text, section, data
        if not isinstance(data, dict):
            self.fail(section.split(".")[-1], "must be a table")
        for k in data:
            if k not in allowed:
                self.fail(k, f"unknown key (allowed: {', '.join(sorted(allowed))})")

    def fail(self, key, msg):
        line = _key_line(self.text, self.section, key)
        where = f"{self.path}:{line}" if line else str(self.path)
        name = f"{self.section}.{key}" if self.section else key
        raise ProblemFileError(f"{where}: key '{name}': {msg}")

    def has(self, key):
        return key in self.data

    def float(self, key, default=None, required=True):
        if key not in self.data:
            if default is not None or not required:
                return default
            self.fail(key, "missing required value")
        v = self.data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(key, f"expected a number, got {v!r}")
        return float(v)

    def int(self, key, default=None):
        if key not in self.data:
            return default
        v = self.data[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(key, f"expected an integer, got {v!r}")
        return v

    def str(self, key, default=None, choices=None):
        if key not in self.data:
            return default
        v = self.data[key]
        if not isinstance(v, str):
            self.fail(key, f"expected a string, got {v!r}")
        if choices and v not in choices:
            self.fail(key, f"must be one of {', '.join(choices)}")
        return v

    def pair(self, key):
        if key not in self.data:
            return None
        v = self.data[key]
        if (not isinstance(v, list) or len(v) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
            self.fail(key, "expected a two-element numeric array")
        return (float(v[0]), float(v[1]))

    def build(self, key, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, TypeError, KeyError) as exc:
            self.fail(key, str(exc).strip("'\""))


def _profile(rd: _Reader, key, required=True):
    if key not in rd.data:
        if required:
            rd.fail(key, "missing required profile")
        return None
    d = rd.data[key]
    if not isinstance(d, dict):
        rd.fail(key, "profile must be a table such as {family = \"constant\", value = 1.0}")
    return rd.build(key, FunctionProfile.from_dict, d)


def _flux_component(rd: _Reader, key):
    if key not in rd.data:
        return FluxComponent.zero()
    d = rd.data[key]
    if not isinstance(d, dict) or "family" not in d:
        rd.fail(key, "flux component must be a table with a 'family' key")
    extra = set(d) - {"family", "q", "samples"}
    if extra:
        rd.fail(key, f"unknown component keys {sorted(extra)}")
    fam = d["family"]
    if fam == "arbitrary":
        return rd.build(key, FluxComponent.arbitrary, d.get("samples", []))
    return rd.build(key, FluxComponent, fam, float(d.get("q", 0.0)))


@dataclass
class ProblemFile:
    """Parsed problem: the enthalpy model (derived when a material is given),
    the flux descriptor, geometry and the solver/audit settings."""

    path: Path
    model: EnthalpyModel
    flux: FluxSpec
    R: float
    ansatz: str = "paraboloid"
    material: MaterialSpec | None = None
    solver: RootSolveConfig = field(default_factory=RootSolveConfig)
    method: str = "auto"
    audit: AuditConfig = field(default_factory=AuditConfig)
    out_dir: Path | None = None

    @property
    def default_out_dir(self) -> Path:
        return self.out_dir or self.path.parent / f"{self.path.stem}_out"


_TOP = {"schema", "material", "enthalpy", "flux", "geometry", "solver", "tolerance",
        "verify", "output"}


def load_problem(path) -> ProblemFile:
    """Parse and validate a problem file (``schema = 1``)."""
    path = Path(path)
    doc, text = read_toml(path)
    top = _Reader(path, text, "", doc, _TOP)
    if "schema" not in doc:
        raise ProblemFileError(
            f"{path}:1: key 'schema': missing required key (expected schema = 1)")
    if top.int("schema") != SCHEMA_VERSION:
        top.fail("schema", f"unsupported schema version {doc['schema']!r} (expected 1)")
    has_mat, has_ent = "material" in doc, "enthalpy" in doc
    if has_mat == has_ent:
        raise ProblemFileError(f"{path}:1: key 'material/enthalpy': "
                               "exactly one of [material] or [enthalpy] is required")

    material = None
    if has_mat:
        rd = _Reader(path, text, "material", doc["material"],
                     {"lambda1", "lambda2", "c1", "c2", "H_v", "H_m", "T_v", "T_m", "T_inf",
                      "knots"})
        profs = {k: _profile(rd, k) for k in ("lambda1", "lambda2", "c1", "c2")}
        nums = {k: rd.float(k) for k in ("H_v", "H_m", "T_v", "T_m", "T_inf")}
        material = rd.build("T_v", MaterialSpec, *profs.values(), *nums.values())
        knots = rd.int("knots", 512)
        model = rd.build("c1", lambda: goodman_transform(material, n_knots=knots))
    else:
        rd = _Reader(path, text, "enthalpy", doc["enthalpy"],
                     {"d1", "d2", "u_v", "u_m", "v_m", "v_inf", "H_v", "H_m",
                      "d1v", "d1m", "d2m"})
        d1, d2 = _profile(rd, "d1"), _profile(rd, "d2")
        nums = [rd.float(k) for k in ("u_v", "u_m", "v_m", "v_inf", "H_v", "H_m")]
        opt = [rd.float(k, required=False) for k in ("d1v", "d1m", "d2m")]
        model = rd.build("u_v", EnthalpyModel, d1, d2, *nums, *opt)

    if "flux" not in doc:
        raise ProblemFileError(f"{path}:1: key 'flux': missing required section")
    rd = _Reader(path, text, "flux", doc["flux"], {"q1", "q2", "q3", "rotating"})
    q1, q2, q3 = (_flux_component(rd, k) for k in ("q1", "q2", "q3"))
    rot = None
    if rd.has("rotating"):
        r = doc["flux"]["rotating"]
        if not isinstance(r, dict):
            rd.fail("rotating", "must be a table")
        rot = rd.build("rotating", lambda: RotatingPair(
            r["family"], float(r["q1"]), float(r["q2"]), float(r["lam"])))
    flux = rd.build("q3", FluxSpec, q3, q1, q2, rot)

    if "geometry" not in doc:
        raise ProblemFileError(f"{path}:1: key 'geometry': missing required section")
    rd = _Reader(path, text, "geometry", doc["geometry"], {"R", "ansatz"})
    R = rd.float("R")
    if not R > 0:
        rd.fail("R", "must be positive")
    ansatz = rd.str("ansatz", "paraboloid", ("paraboloid", "planar"))

    rd = _Reader(path, text, "solver", doc.get("solver", {}),
                 {"method", "abs_tol", "max_iters", "omega2_bracket", "mu_bracket",
                  "multistart", "scan_points"})
    method = rd.str("method", "auto", ("auto", "closed-form", "shooting"))
    kw = {k: v for k, v in (("abs_tol", rd.float("abs_tol", required=False)),
                            ("max_iters", rd.int("max_iters")),
                            ("omega2_bracket", rd.pair("omega2_bracket")),
                            ("mu_bracket", rd.pair("mu_bracket")),
                            ("multistart", rd.int("multistart")),
                            ("scan_points", rd.int("scan_points"))) if v is not None}
    solver = rd.build("abs_tol", RootSolveConfig, **kw)

    rd = _Reader(path, text, "tolerance", doc.get("tolerance", {}),
                 {"pde_liquid_l2", "pde_solid_l2", "bc_flux", "bc_dirichlet", "farfield",
                  "order_min", "order_max"})
    kw = {k: rd.float(k, required=False) for k in rd.data}
    tol = rd.build("bc_flux", AuditTolerances, **kw)

    rd = _Reader(path, text, "verify", doc.get("verify", {}),
                 {"h", "levels", "n_points", "n_surface", "solid_span"})
    kw = {k: v for k, v in (("h", rd.float("h", required=False)),
                            ("levels", rd.int("levels")),
                            ("n_points", rd.int("n_points")),
                            ("n_surface", rd.int("n_surface")),
                            ("solid_span", rd.float("solid_span", required=False)))
          if v is not None}
    audit = rd.build("levels", AuditConfig, tolerances=tol, **kw)

    rd = _Reader(path, text, "output", doc.get("output", {}), {"dir"})
    out = rd.str("dir")
    out_dir = (path.parent / out) if out else None
    return ProblemFile(path, model, flux, R, ansatz, material, solver, method, audit, out_dir)


# ------------------------------------------------------------------------------
# Solution files

PROFILE_CSV = "profile.csv"
SOLUTION_TOML = "solution.toml"
REPORT_TOML = "report.toml"
SURFACES_CSV = "surfaces.csv"
SLICE_CSV = "field_slice.csv"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _diagnostics(diag: dict) -> dict:
    out = {}
    for k in sorted(diag):
        v = diag[k]
        if isinstance(v, (bool, np.bool_, int, np.integer, float, np.floating, str)):
            out[k] = v
        elif isinstance(v, (list, tuple)) and all(isinstance(x, (int, float)) for x in v):
            out[k] = list(v)
        elif isinstance(v, (list, tuple)):
            out[k] = [list(map(float, x)) for x in v]
    return out


def write_solution(out_dir: Path, sol, problem: ProblemFile):
    """profile.csv (omega,value,phase) and solution.toml for a solved problem."""
    out_dir = Path(out_dir)
    if isinstance(sol, PlanarSolution):
        rows = [(z, u, "liquid") for z, u in zip(sol.z_u, sol.u_values)]
        rows += [(z, v, "solid") for z, v in zip(sol.z_v, sol.v_values)]
        params = {"ansatz": "planar", "z2": float(sol.z2), "mu": float(sol.mu),
                  "solver_tag": sol.solver_tag}
        header = ("z", "value", "phase")
    else:
        rows = [(w, u, "liquid") for w, u in zip(sol.omega_u, sol.u_values)]
        rows += [(w, v, "solid") for w, v in zip(sol.omega_v, sol.v_values)]
        params = {"ansatz": "paraboloid", "omega2": float(sol.omega2), "mu": float(sol.mu),
                  "R": float(sol.R), "v_inf": float(sol.v_inf), "omega_max": sol.omega_max,
                  "solver_tag": sol.solver_tag, "t0": float(sol.frame.t0),
                  "center": [float(c) for c in sol.frame.center]}
        header = ("omega", "value", "phase")
    write_text(out_dir / PROFILE_CSV, _csv_text(header, rows))
    doc = {"schema": SCHEMA_VERSION, "problem": problem.path.name,
           "solution": params, "diagnostics": _diagnostics(sol.diagnostics)}
    write_text(out_dir / SOLUTION_TOML,
               dumps(doc, ["traveling solution: front parameters and root diagnostics",
                           "profile values are enthalpies; " + UNITS_HEADER]))


def read_solution(out_dir: Path):
    """Rebuild a ParaboloidSolution from profile.csv and solution.toml."""
    out_dir = Path(out_dir)
    doc, text = read_toml(out_dir / SOLUTION_TOML)
    sec = doc.get("solution")
    if not isinstance(sec, dict):
        raise ProblemFileError(f"{out_dir / SOLUTION_TOML}: key 'solution': missing section")
    rd = _Reader(out_dir / SOLUTION_TOML, text, "solution", sec,
                 {"ansatz", "omega2", "mu", "R", "v_inf", "omega_max", "solver_tag", "t0",
                  "center", "z2"})
    if rd.str("ansatz", "paraboloid") != "paraboloid":
        return None
    path = out_dir / PROFILE_CSV
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ProblemFileError(f"{path}: cannot read file ({exc.strerror})") from None
    if not rows or rows[0] != ["omega", "value", "phase"]:
        raise ProblemFileError(f"{path}:1: expected header omega,value,phase")
    liq, sol = [], []
    for i, row in enumerate(rows[1:], 2):
        try:
            w, v, ph = float(row[0]), float(row[1]), row[2]
        except (ValueError, IndexError):
            raise ProblemFileError(f"{path}:{i}: malformed row {row!r}") from None
        if ph == "liquid":
            liq.append((w, v))
        elif ph == "solid":
            sol.append((w, v))
        else:
            raise ProblemFileError(f"{path}:{i}: unknown phase {ph!r}")
    liq, sol = np.array(liq), np.array(sol)
    center = sec.get("center", [0.0, 0.0, 0.0])
    try:
        return ParaboloidSolution(
            liq[:, 0], liq[:, 1], sol[:, 0], sol[:, 1],
            omega2=rd.float("omega2"), mu=rd.float("mu"), R=rd.float("R"),
            v_inf=rd.float("v_inf"), solver_tag=rd.str("solver_tag", "unknown"),
            frame=Frame(rd.float("t0", 0.0), tuple(float(c) for c in center)),
            diagnostics=dict(doc.get("diagnostics", {})))
    except (ValueError, IndexError) as exc:
        raise ProblemFileError(
            f"{out_dir / SOLUTION_TOML}: inconsistent solution ({exc})") from None


def write_report(out_dir: Path, report: ResidualReport, failed: list, audit: AuditConfig):
    tol = audit.tolerances
    doc = {"schema": SCHEMA_VERSION,
           "audit": {"passed": not failed, "failed": list(failed)},
           "residuals": report.as_dict(),
           "thresholds": {k: v for k, v in vars(tol).items() if v is not None},
           "grid": {"levels": audit.levels, "n_points": audit.n_points,
                    "n_surface": audit.n_surface, "solid_span": audit.solid_span}}
    write_text(Path(out_dir) / REPORT_TOML,
               dumps(doc, ["residual audit of the reconstructed 3-D fields",
                           "flux residuals are per unit normal; " + UNITS_HEADER]))


def read_report(path) -> ResidualReport:
    doc, _ = read_toml(path)
    return ResidualReport.from_dict(doc["residuals"])
