import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stefan3d.errors import RangeError, TransformError
from stefan3d.material import (EnthalpyModel, FunctionProfile as FP, MaterialSpec,
                               goodman_transform, invert_enthalpy)


def _spec(lam1=FP.constant(2.0), c1=FP.constant(2.0), lam2=FP.constant(3.0),
          c2=FP.constant(1.5), T=(3.0, 1.0, -1.0)):
    return MaterialSpec(lam1, lam2, c1, c2, H_v=1.0, H_m=2.0, T_v=T[0], T_m=T[1], T_inf=T[2])


def _brute_force_phi(cap, t_lo, t_hi, n=400001):
    # cumulative trapezoid from 0 on a fine grid, independent of the package quadrature
    T = np.linspace(min(t_lo, 0.0), max(t_hi, 0.0), n)
    c = cap(T)
    phi = np.concatenate([[0.0], np.cumsum(0.5 * (c[1:] + c[:-1]) * np.diff(T))])
    return T, phi - np.interp(0.0, T, phi)


# ---------------------------------------------------------------- profiles

def test_profile_families_evaluate():
    assert FP.constant(2.5)(7.0) == 2.5
    assert FP.power(2.0, -1.0, 1.0)(3.0) == pytest.approx(0.5)
    assert FP.exponential(2.0, 0.5)(2.0) == pytest.approx(2.0 * math.e)
    tab = FP.tabulated([0.0, 1.0, 2.0], [1.0, 3.0, 5.0])
    assert tab(1.5) == pytest.approx(4.0)


def test_profile_validation():
    with pytest.raises(ValueError):
        FP.power(0.0, 1.0)
    with pytest.raises(ValueError):
        FP.tabulated([0.0], [1.0])
    with pytest.raises(ValueError):
        FP.tabulated([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        FP("cubic")


def test_tabulated_profile_refuses_extrapolation():
    tab = FP.tabulated([0.0, 1.0], [1.0, 2.0])
    with pytest.raises(RangeError):
        tab(1.5)
    assert tab(1.5, extrapolate=True) == 2.0


@given(st.floats(-5, 5), st.floats(0.1, 5), st.floats(-3, 3))
def test_profile_dict_round_trip(shift, D, alpha):
    for p in (FP.constant(D), FP.power(D, alpha, shift), FP.exponential(D, alpha),
              FP.tabulated([0.0, 1.0 + D], [D, 2 * D])):
        assert FP.from_dict(p.as_dict()) == p


def test_tabulated_profile_stays_positive_between_knots():
    # monotone cubic interpolation cannot overshoot below the knot values
    tab = FP.tabulated([0.0, 1.0, 1.1, 3.0], [1.0, 1e-3, 1e-3, 2.0])
    x = np.linspace(0.0, 3.0, 3001)
    assert np.all(tab(x) >= 1e-3 - 1e-15)


# ---------------------------------------------------------------- specs

def test_material_spec_invariants():
    with pytest.raises(ValueError):
        _spec(T=(1.0, 2.0, 0.0))
    with pytest.raises(ValueError):
        MaterialSpec(FP.constant(1), FP.constant(1), FP.constant(1), FP.constant(1),
                     H_v=0.0, H_m=1.0, T_v=3, T_m=2, T_inf=1)


def test_enthalpy_model_invariants():
    d = FP.constant(1.0)
    with pytest.raises(ValueError):
        EnthalpyModel(d, d, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        EnthalpyModel(d, d, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        EnthalpyModel(FP.power(1.0, 1.0, -1.5), d, 2.0, 1.0, 1.0, 0.0, 1.0, 1.0)
    m = EnthalpyModel(FP.power(1.0, -1.0), d, 1.0, 2.0, 0.0, 1.0, 1.0, 1.0)
    assert (m.d1v, m.d1m, m.d2m) == (1.0, 0.5, 1.0)
    assert m.is_consistent
    assert not m.with_values(d1v=3.0).is_consistent


# ---------------------------------------------------------------- transform

def test_constant_capacity_gives_exact_linear_transform():
    m = goodman_transform(_spec())
    assert (m.u_v, m.u_m) == (6.0, 2.0)
    assert (m.v_m, m.v_inf) == (1.5, -1.5)
    assert m.d1 == FP.constant(1.0)
    assert m.d2 == FP.constant(2.0)
    assert invert_enthalpy(m, "liquid", 2.0 * 1.7) == pytest.approx(1.7, rel=1e-15)


def test_constant_capacity_with_power_conductivity_stays_closed_form():
    lam = FP.power(3.0, 0.5, 1.0)
    m = goodman_transform(_spec(lam1=lam, c1=FP.constant(2.0)))
    assert m.d1.family == "power"
    u = np.linspace(m.u_m, m.u_v, 7)
    assert np.allclose(m.d1(u), lam(u / 2.0) / 2.0, rtol=1e-14)


def test_linear_capacity_transform_matches_brute_force():
    # C1 = 2 (T + 1) gives u = T^2 + 2T and, with lambda1 = 2k, d1(u) = k / sqrt(u + 1)
    k = 0.7
    cap = FP.power(2.0, 1.0, 1.0)
    m = goodman_transform(_spec(lam1=FP.constant(2 * k), c1=cap))
    assert m.u_v == pytest.approx(15.0, rel=1e-13)
    assert m.u_m == pytest.approx(3.0, rel=1e-13)
    T, phi = _brute_force_phi(cap, 1.0, 3.0)
    u = np.linspace(m.u_m, m.u_v, 41)
    T_bf = np.interp(u, phi, T)
    d_bf = 2 * k / cap(T_bf)
    assert np.allclose(m.d1(u), d_bf, rtol=1e-6)
    assert np.allclose(m.d1(u), k / np.sqrt(u + 1.0), rtol=1e-7)


def test_square_enthalpy_inverts_to_root():
    # C1 = 2T vanishes at T = 0; a tiny shift keeps it positive, so phi(T) ~ T^2
    cap = FP.power(2.0, 1.0, 1e-9)
    m = goodman_transform(_spec(c1=cap, T=(3.0, 1.0, -1.0)))
    lo, hi = 0.0, 3.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if m.liquid_map.forward(mid) < 4.0:
            lo = mid
        else:
            hi = mid
    assert invert_enthalpy(m, "liquid", 4.0) == pytest.approx(lo, abs=1e-12)
    assert invert_enthalpy(m, "liquid", 4.0) == pytest.approx(2.0, rel=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 3.0))
def test_enthalpy_round_trip(T):
    m = _ROUND_TRIP_MODEL
    assert invert_enthalpy(m, "liquid", m.liquid_map.forward(T)) == pytest.approx(T, rel=1e-8)


_ROUND_TRIP_MODEL = goodman_transform(_spec(c1=FP.exponential(1.0, 0.3)))


def test_nonpositive_capacity_is_rejected():
    with pytest.raises(TransformError):
        goodman_transform(_spec(c1=FP.power(1.0, 1.0, -0.5)))
    with pytest.raises(TransformError):
        goodman_transform(_spec(c2=FP.constant(-1.0)))


def test_invert_enthalpy_out_of_range_and_bad_phase():
    m = _ROUND_TRIP_MODEL
    hi = m.liquid_map.enthalpy_range[1]
    with pytest.raises(RangeError):
        invert_enthalpy(m, "liquid", hi * 2 + 1)
    with pytest.raises(ValueError):
        invert_enthalpy(m, "gas", 1.0)


def test_tabulated_diffusivity_positive_at_every_knot():
    m = goodman_transform(_spec(c1=FP.exponential(1.0, 0.3),
                                lam1=FP.tabulated([-2, 0, 2, 4], [1.0, 0.8, 0.5, 0.4])))
    assert np.all(np.asarray(m.d1.values) > 0)
    assert np.all(np.diff(m.liquid_map.enthalpies) > 0)
