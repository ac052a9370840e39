import math
from pathlib import Path

import numpy as np
import pytest
import tomli
from hypothesis import given, strategies as st

from stefan3d import fileio
from stefan3d.cli import _reduced_problem
from stefan3d.fileio import (ProblemFileError, dumps, format_float, load_problem, read_report,
                             read_solution, write_report, write_solution)
from stefan3d.solver import solve
from stefan3d.verify import AuditConfig, ResidualReport

ROOT = Path(__file__).resolve().parents[1]
PROBLEMS = ROOT / "problems"
FIXTURES = Path(__file__).resolve().parent / "fixtures"


# ---------------------------------------------------------------- emitter

@given(st.floats(allow_nan=False))
def test_float_formatting_round_trips_exactly(x):
    s = format_float(x)
    assert tomli.loads(f"a = {s}")["a"] == x


def test_float_formatting_is_toml_float():
    assert format_float(3) == "3.0"
    assert format_float(1e20) == "1e+20"
    assert format_float(math.inf) == "inf" and format_float(math.nan) == "nan"


def test_dumps_round_trips_nested_tables():
    doc = {"schema": 1, "a": {"x": 1.5, "flag": True, "names": ["p", "q"],
                              "d": {"family": "constant", "value": 2.0}, "sub": {"k": 3}}}
    text = dumps(doc, ["header line"])
    assert text.startswith("# header line\n")
    assert tomli.loads(text) == doc
    assert "d = {family" in text


# ---------------------------------------------------------------- problem files

@pytest.mark.parametrize("name", ["constant_diffusivity", "fast_diffusion", "material", "tabulated",
                                  "rotating_flux", "sampled_flux"])
def test_shipped_problems_load(name):
    prob = load_problem(PROBLEMS / f"{name}.toml")
    assert prob.R > 0
    assert prob.default_out_dir == PROBLEMS / f"{name}_out"


def test_material_problem_derives_enthalpy_model():
    prob = load_problem(PROBLEMS / "material.toml")
    assert prob.material is not None
    m = prob.model
    assert m.u_v > m.u_m and m.v_m > m.v_inf


@pytest.mark.parametrize("name, anchor", [
    ("wrong_type", "wrong_type.toml:7: key 'enthalpy.u_v': expected a number"),
    ("missing_schema", "missing_schema.toml:1: key 'schema'"),
    ("unknown_key", "unknown_key.toml:19: key 'geometry.radius': unknown key"),
    ("syntax_error", "syntax_error.toml:8: TOML syntax error"),
])
def test_malformed_files_name_file_line_and_key(name, anchor):
    with pytest.raises(ProblemFileError) as err:
        load_problem(FIXTURES / f"{name}.toml")
    assert anchor in str(err.value)


def test_material_and_enthalpy_are_exclusive(tmp_path):
    text = (PROBLEMS / "constant_diffusivity.toml").read_text()
    text += "\n[material]\nH_v = 1.0\n"
    p = tmp_path / "both.toml"
    p.write_text(text)
    with pytest.raises(ProblemFileError, match="exactly one"):
        load_problem(p)


def test_missing_file():
    with pytest.raises(ProblemFileError, match="cannot read"):
        load_problem(FIXTURES / "absent.toml")


def test_invalid_values_are_anchored(tmp_path):
    text = (PROBLEMS / "constant_diffusivity.toml").read_text().replace("R = 1.0", "R = -1.0")
    p = tmp_path / "neg.toml"
    p.write_text(text)
    with pytest.raises(ProblemFileError, match=r"neg.toml:\d+: key 'geometry.R'"):
        load_problem(p)


# ---------------------------------------------------------------- solutions and reports

def test_solution_round_trip(tmp_path):
    prob = load_problem(PROBLEMS / "constant_diffusivity.toml")
    sol = solve(_reduced_problem(prob))
    write_solution(tmp_path, sol, prob)
    back = read_solution(tmp_path)
    assert (back.omega2, back.mu, back.R) == (sol.omega2, sol.mu, sol.R)
    assert np.array_equal(back.omega_u, sol.omega_u)
    assert np.array_equal(back.v_values, sol.v_values)
    assert back.diagnostics["root_method"] == sol.diagnostics["root_method"]


def test_planar_solution_is_not_read_back(tmp_path):
    prob = load_problem(FIXTURES / "planar.toml")
    write_solution(tmp_path, solve(_reduced_problem(prob)), prob)
    assert read_solution(tmp_path) is None


def test_report_round_trip(tmp_path):
    rep = ResidualReport(pde_liquid_l2=1.25e-4, bc_stefan_flux=3e-11, n_points_liquid=7,
                         convergence_order=1.9999)
    write_report(tmp_path, rep, [], AuditConfig())
    assert read_report(tmp_path / fileio.REPORT_TOML) == rep
    doc = tomli.loads((tmp_path / fileio.REPORT_TOML).read_text())
    assert doc["audit"] == {"passed": True, "failed": []}


def test_corrupt_profile_is_reported(tmp_path):
    prob = load_problem(PROBLEMS / "constant_diffusivity.toml")
    write_solution(tmp_path, solve(_reduced_problem(prob)), prob)
    csv = tmp_path / fileio.PROFILE_CSV
    lines = csv.read_text().splitlines()
    lines[3] = "1.0,abc,liquid"
    csv.write_text("\n".join(lines) + "\n")
    with pytest.raises(ProblemFileError, match="profile.csv:4: malformed row"):
        read_solution(tmp_path)
