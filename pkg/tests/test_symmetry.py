import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from stefan3d.errors import GaugeError, TransformError
from stefan3d.material import EnthalpyModel, FunctionProfile as FP
from stefan3d.symmetry import (FluxComponent as FC, FluxSpec, GaugeRecord, GroupElement,
                               RotatingPair, apply_gauge, apply_group, classify_diffusivities,
                               classify_flux, denormalize_problem, normalize_problem)

finite = st.floats(-5, 5)


# ---------------------------------------------------------------- flux classification

@pytest.mark.parametrize("flux, case", [
    (FluxSpec(q3=FC.const(1.0), q1=FC.inv_sqrt_t(2.0)), 1),
    (FluxSpec(q3=FC.arbitrary([(0, 1), (1, 2)])), 2),
    (FluxSpec(q3=FC.const(1.0), rotating=RotatingPair("rot_const", 1.0, 0.5, 2.0)), 3),
    (FluxSpec(q3=FC.zero(), rotating=RotatingPair("rot_const", 1.0, 0.0, 2.0)), 3),
    (FluxSpec(q3=FC.inv_sqrt_t(1.0),
              rotating=RotatingPair("rot_inv_sqrt_t", 0.0, 1.0, -1.0)), 4),
    (FluxSpec.axial(3.0), 5),
    (FluxSpec(q3=FC.inv_sqrt_t(-2.0)), 6),
])
def test_flux_classification_rows(flux, case):
    rep = classify_flux(flux)
    assert rep.table2_case == case
    assert rep.dimension == len(rep.group_generators)


def test_flux_case_generators():
    assert classify_flux(FluxSpec.axial(1.0)).group_generators == ("T0", "T1", "T2", "T3", "T5")
    assert classify_flux(FluxSpec(q3=FC.inv_sqrt_t(1.0))).group_generators == (
        "T1", "T2", "T3", "T4", "T5")


def test_mismatched_rotating_families_fall_back_to_generic():
    flux = FluxSpec(q3=FC.inv_sqrt_t(1.0), rotating=RotatingPair("rot_const", 1.0, 0.0, 1.0))
    assert classify_flux(flux).table2_case == 1


def test_nonrotating_pair_reduces_to_constant_vector():
    flux = FluxSpec(q3=FC.const(1.0), rotating=RotatingPair("rot_const", 1.0, 1.0, 0.0))
    rep = classify_flux(flux)
    assert rep.table2_case == 5 and rep.aligned_by_rotation


def test_oblique_constant_flux_is_aligned_by_rotation():
    rep = classify_flux(FluxSpec(q3=FC.const(1.0), q1=FC.const(2.0)))
    assert rep.table2_case == 5 and rep.aligned_by_rotation
    assert not classify_flux(FluxSpec.axial(1.0)).aligned_by_rotation


def test_sampled_flux_is_never_promoted():
    constant_samples = FluxSpec(q3=FC.arbitrary([(0, 2.0), (1, 2.0)]))
    assert classify_flux(constant_samples).table2_case == 2
    assert classify_flux(FluxSpec(q3=FC.const(1), q1=FC.arbitrary([(0, 1)]))).table2_case == 1


def test_vanishing_flux_is_rejected():
    with pytest.raises(ValueError):
        FluxSpec(q3=FC.const(0.0))
    with pytest.raises(ValueError):
        RotatingPair("rot_const", 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        FC.arbitrary([(1, 0), (0, 1)])


@given(finite, finite, st.floats(-3, 3), st.floats(0.1, 10))
def test_rotating_pair_preserves_magnitude(q1, q2, lam, t):
    assume(q1 != 0 or q2 != 0)
    for fam in ("rot_const", "rot_inv_sqrt_t"):
        a, b = RotatingPair(fam, q1, q2, lam)(t)
        scale = 1.0 if fam == "rot_const" else 1.0 / math.sqrt(t)
        assert math.hypot(a, b) == pytest.approx(scale * math.hypot(q1, q2), rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------- diffusivity classification

@pytest.mark.parametrize("d1, d2, row", [
    (FP.tabulated([0, 1], [1, 2]), FP.tabulated([0, 1], [2, 1]), 1),
    (FP.constant(2.0), FP.power(1.0, 0.5), 2),
    (FP.exponential(1.0, 0.3), FP.constant(2.0), 3),
    (FP.exponential(1.0, 0.3), FP.exponential(2.0, -1.0), 4),
    (FP.exponential(1.0, 0.3), FP.power(1.0, 2.0), 5),
    (FP.power(1.0, -1.0), FP.exponential(1.0, 1.0), 6),
    (FP.power(1.0, -1.0), FP.power(2.0, 3.0), 7),
    (FP.power(1.0, -0.8), FP.power(3.0, -4 / 5), 8),
    (FP.constant(1.0), FP.constant(2.0), 9),
    (FP.constant(1.5), FP.constant(1.5), 10),
])
def test_diffusivity_rows(d1, d2, row):
    assert classify_diffusivities(d1, d2) == row


def test_zero_exponent_counts_as_constant():
    assert classify_diffusivities(FP.power(2.0, 0.0), FP.exponential(2.0, 0.0)) == 10
    assert classify_diffusivities(FP.power(1.0, -0.8), FP.power(1.0, -1.0)) == 7


# ---------------------------------------------------------------- group action

def test_group_examples():
    p = (1.0, 1.0, 2.0, 3.0)
    assert apply_group(GroupElement("T0", 0.5), p) == (1.5, 1.0, 2.0, 3.0)
    assert apply_group(GroupElement("T3", -1.0), p) == (1.0, 1.0, 2.0, 2.0)
    k = math.e
    assert apply_group(GroupElement("T4", 1.0), p) == pytest.approx((k * k, k, 2 * k, 3 * k))
    assert apply_group(GroupElement("T5", math.pi / 2), p) == pytest.approx((1.0, 2.0, -1.0, 3.0))
    assert apply_group(GroupElement("T6", 1.0, rate=math.pi), p) == pytest.approx(
        (2.0, -1.0, -2.0, 3.0))


def test_group_rejects_bad_input():
    with pytest.raises(ValueError):
        GroupElement("T9", 1.0)
    with pytest.raises(ValueError):
        GroupElement("T0", math.inf)
    with pytest.raises(ValueError):
        apply_group(GroupElement("T0", 1.0), (1.0, 2.0, 3.0))


@settings(max_examples=100)
@given(st.sampled_from(["T0", "T1", "T2", "T3", "T4", "T5", "T6", "T7"]),
       st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2),
       st.tuples(st.floats(0.1, 3), finite, finite, finite))
def test_one_parameter_group_law(gen, e1, e2, lam, p):
    a = apply_group(GroupElement(gen, e2, lam), apply_group(GroupElement(gen, e1, lam), p))
    b = apply_group(GroupElement(gen, e1 + e2, lam), p)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-10)
    back = apply_group(GroupElement(gen, -e1, lam), apply_group(GroupElement(gen, e1, lam), p))
    assert np.allclose(back, p, rtol=1e-10, atol=1e-10)


@given(st.floats(-10, 10), st.tuples(finite, finite, finite, finite))
def test_rotation_preserves_radius_and_axis(e, p):
    t, x1, x2, x3 = apply_group(GroupElement("T5", e), p)
    assert (t, x3) == (p[0], p[3])
    assert math.hypot(x1, x2) == pytest.approx(math.hypot(p[1], p[2]), rel=1e-12, abs=1e-12)


def test_group_acts_on_arrays():
    pts = np.arange(12.0).reshape(3, 4)
    out = apply_group(GroupElement("T1", 2.0), pts)
    assert out.shape == (3, 4)
    assert np.array_equal(out[:, 1], pts[:, 1] + 2.0)


# ---------------------------------------------------------------- equivalence scalings

def _model(**kw):
    base = dict(d1=FP.power(1.0, -1.0), d2=FP.constant(1.0), u_v=2.0, u_m=3.0, v_m=0.5,
                v_inf=1.5, H_v=1.0, H_m=2.0)
    base.update(kw)
    return EnthalpyModel(**base)


def test_pure_scaling_example():
    m, flux = _model(d1=FP.constant(1.0)), FluxSpec.axial(4.0)
    new, new_flux = apply_gauge(m, flux, GaugeRecord(alpha=4.0, beta=2.0))
    assert new.d1 == m.d1 and new.d2 == m.d2
    assert (new.H_v, new.H_m) == (2.0, 4.0)
    assert (new.d1v, new.d1m, new.d2m) == (2.0, 2.0, 2.0)
    assert new_flux == flux
    rec = GaugeRecord(alpha=4.0, beta=2.0)
    assert rec.map_speed(3.0) == 1.5 and rec.map_length(3.0) == 6.0


def test_normalization_gives_canonical_gauge():
    m, flux = _model(), FluxSpec.axial(-2.0)
    new, new_flux, rec = normalize_problem(m, flux)
    assert new.u_v == pytest.approx(1.0) and new.v_inf == 0.0
    assert new.u_m == pytest.approx(1.5)
    # d1 = 1/u becomes 1/(2 w) in w = u/2; still a power law with exponent -1
    assert new.d1.family == "power" and new.d1.alpha == -1.0
    assert new.d1(1.0) == pytest.approx(m.d1(2.0))
    # threshold diffusivities scale by beta/delta1, not by the profile rule
    assert new.d1v == pytest.approx(2.0 * m.d1v)
    assert not new.is_consistent
    assert new_flux == flux


@settings(max_examples=60, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0.2, 5), st.floats(-3, 3),
       st.floats(0.2, 5), st.floats(-3, 3))
def test_gauge_round_trip(alpha, beta, d1, g4, d2, g5):
    m = _model(d1=FP.exponential(1.3, 0.4), d2=FP.power(0.7, 1.5, 1.0))
    rec = GaugeRecord(alpha, beta, d1, g4, d2, g5)
    back, _ = apply_gauge(*apply_gauge(m, FluxSpec.axial(1.0), rec), rec.inverse())
    for name in ("u_v", "u_m", "v_m", "v_inf", "H_v", "H_m", "d1v", "d1m", "d2m"):
        assert getattr(back, name) == pytest.approx(getattr(m, name), rel=1e-12, abs=1e-12)
    u = np.linspace(m.u_v, m.u_m, 5)
    assert np.allclose(back.d1(u), m.d1(u), rtol=1e-12)
    assert np.allclose(back.d2(u), m.d2(u), rtol=1e-12)


def test_denormalize_inverts_normalize():
    m, flux = _model(d1=FP.tabulated([1.0, 2.0, 4.0], [1.0, 0.6, 0.3])), FluxSpec.axial(2.0)
    back, back_flux = denormalize_problem(*normalize_problem(m, flux))
    assert back.u_v == pytest.approx(m.u_v) and back.v_inf == pytest.approx(m.v_inf)
    assert np.allclose(back.d1.args, m.d1.args) and np.allclose(back.d1.values, m.d1.values)
    assert back_flux == flux


def test_gauge_rotation_aligns_flux():
    c, s = 0.6, 0.8
    rot = ((1.0, 0.0, 0.0), (0.0, c, -s), (0.0, s, c))
    flux = FluxSpec(q3=FC.const(3.0), q2=FC.const(4.0))
    _, new_flux = apply_gauge(_model(), flux, GaugeRecord(rotation=rot))
    assert new_flux.q2.is_zero and new_flux.q3.q == pytest.approx(5.0)


def test_gauge_errors():
    with pytest.raises(GaugeError):
        GaugeRecord(alpha=0.0)
    with pytest.raises(GaugeError):
        GaugeRecord(delta2=-1.0)
    with pytest.raises(GaugeError):
        GaugeRecord(rotation=((2, 0, 0), (0, 1, 0), (0, 0, 1)))
    with pytest.raises(GaugeError):
        normalize_problem(_model(u_v=-2.0, u_m=-1.0, d1=FP.constant(1.0)), FluxSpec.axial(1.0))
    sampled = FluxSpec(q3=FC.arbitrary([(0, 1), (1, 2)]), q1=FC.const(1.0))
    with pytest.raises(TransformError):
        apply_gauge(_model(), sampled, GaugeRecord(rotation=((0, 1, 0), (-1, 0, 0), (0, 0, 1))))


@pytest.mark.parametrize("d1, d2", [
    (FP.power(1.0, -1.0), FP.constant(1.0)),
    (FP.exponential(1.0, 0.5), FP.power(1.0, 2.0)),
    (FP.power(1.0, -0.8), FP.power(2.0, -0.8)),
    (FP.constant(2.0), FP.constant(2.0)),
])
def test_classification_survives_normalization(d1, d2):
    # shifts change the power-law offset but never the exponent or the family
    m = _model(d1=d1, d2=d2)
    new, flux, _ = normalize_problem(m, FluxSpec.axial(1.0))
    assert classify_diffusivities(new.d1, new.d2) == classify_diffusivities(d1, d2)
    assert classify_flux(flux).table2_case == classify_flux(FluxSpec.axial(1.0)).table2_case
