"""
Symmetry data for the two-phase problem: flux and diffusivity
classification lookups, the one-parameter transformation groups, and
the equivalence scalings used to bring a problem into a canonical gauge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GaugeError, TransformError
from .material import EnthalpyModel, FunctionProfile

GENERATORS = ("T0", "T1", "T2", "T3", "T4", "T5", "T6", "T7")

FLUX_CASE_GENERATORS = {
    1: ("T1", "T2", "T3"),
    2: ("T1", "T2", "T3", "T5"),
    3: ("T1", "T2", "T3", "T6"),
    4: ("T1", "T2", "T3", "T7"),
    5: ("T0", "T1", "T2", "T3", "T5"),
    6: ("T1", "T2", "T3", "T4", "T5"),
}

# (d1, d2) pattern for each diffusivity case
DIFFUSIVITY_CASES = {
    1: ("arbitrary", "arbitrary"),
    2: ("constant k1", "arbitrary"),
    3: ("arbitrary", "constant k2"),
    4: ("exp(u)", "exp(v)"),
    5: ("exp(u)", "v^m"),
    6: ("u^n", "exp(v)"),
    7: ("u^n", "v^m"),
    8: ("u^(-4/5)", "v^(-4/5)"),
    9: ("constant k1", "constant k2"),
    10: ("constant k1", "constant k1"),
}

CONFORMAL_EXPONENT = -0.8


# ------------------------------------------------------------------------------
# Flux descriptors

COMPONENT_FAMILIES = ("zero", "const", "inv_sqrt_t", "arbitrary")
PAIR_FAMILIES = ("rot_const", "rot_inv_sqrt_t")


@dataclass(frozen=True)
class FluxComponent:
    """One Cartesian component of the energy flux Q(t).

    ``const`` is q, ``inv_sqrt_t`` is q/sqrt(t), ``arbitrary`` is a sampled
    function given as (t, value) pairs (linear interpolation).
    """

    family: str
    q: float = 0.0
    samples: tuple = ()

    def __post_init__(self):
        if self.family not in COMPONENT_FAMILIES:
            raise ValueError(f"unknown flux component family {self.family!r}")
        if self.family in ("const", "inv_sqrt_t"):
            if not math.isfinite(self.q):
                raise ValueError("flux coefficient must be finite")
            if self.q == 0.0:
                # a vanishing coefficient is the zero component
                object.__setattr__(self, "family", "zero")
        if self.family == "arbitrary":
            s = np.asarray(self.samples, dtype=float)
            if s.ndim != 2 or s.shape[1] != 2 or s.shape[0] < 1:
                raise ValueError("arbitrary flux component needs (t, value) samples")
            if not np.all(np.isfinite(s)):
                raise ValueError("arbitrary flux samples must be finite")
            if s.shape[0] > 1 and not np.all(np.diff(s[:, 0]) > 0):
                raise ValueError("arbitrary flux sample times must increase")
            object.__setattr__(self, "samples", tuple(map(tuple, s.tolist())))
        if self.family == "zero":
            object.__setattr__(self, "q", 0.0)

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def const(cls, q):
        return cls("const", float(q))

    @classmethod
    def inv_sqrt_t(cls, q):
        return cls("inv_sqrt_t", float(q))

    @classmethod
    def arbitrary(cls, samples):
        return cls("arbitrary", samples=tuple(tuple(map(float, p)) for p in samples))

    @property
    def is_zero(self):
        return self.family == "zero"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "zero":
            out = np.zeros_like(t)
        elif self.family == "const":
            out = np.full_like(t, self.q)
        elif self.family == "inv_sqrt_t":
            out = self.q / np.sqrt(t)
        else:
            s = np.asarray(self.samples)
            out = np.interp(t, s[:, 0], s[:, 1])
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RotatingPair:
    """Jointly specified (Q1, Q2) rotating in the x1-x2 plane.

    rot_const:      Q1 = q1 cos(lam t) + q2 sin(lam t), Q2 = -q1 sin(lam t) + q2 cos(lam t)
    rot_inv_sqrt_t: the same with phase lam*log(t)/2, divided by sqrt(t)
    """

    family: str
    q1: float
    q2: float
    lam: float

    def __post_init__(self):
        if self.family not in PAIR_FAMILIES:
            raise ValueError(f"unknown rotating flux family {self.family!r}")
        if not all(math.isfinite(v) for v in (self.q1, self.q2, self.lam)):
            raise ValueError("rotating flux coefficients must be finite")
        if self.lam != 0 and self.q1 == 0 and self.q2 == 0:
            raise ValueError("rotating flux needs q1**2 + q2**2 != 0")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "rot_const":
            tau, amp = self.lam * t, np.ones_like(t)
        else:
            tau, amp = 0.5 * self.lam * np.log(t), 1.0 / np.sqrt(t)
        c, s = np.cos(tau), np.sin(tau)
        return (amp * (self.q1 * c + self.q2 * s), amp * (-self.q1 * s + self.q2 * c))


@dataclass(frozen=True)
class FluxSpec:
    """Energy flux Q(t) = (Q1, Q2, Q3) as family tags.

    Either q1 and q2 are given separately, or ``rotating`` binds them.
    """

    q3: FluxComponent
    q1: FluxComponent = field(default_factory=FluxComponent.zero)
    q2: FluxComponent = field(default_factory=FluxComponent.zero)
    rotating: RotatingPair | None = None

    def __post_init__(self):
        if self.rotating is not None and not (self.q1.is_zero and self.q2.is_zero):
            raise ValueError("rotating pair replaces q1 and q2; leave them zero")
        if self.rotating is None and all(c.is_zero for c in self.components):
            raise ValueError("flux must not vanish identically (q != 0)")
        if (self.rotating is not None and self.rotating.q1 == 0
                and self.rotating.q2 == 0 and self.q3.is_zero):
            raise ValueError("flux must not vanish identically (q != 0)")

    @classmethod
    def axial(cls, q):
        """Constant flux q along x3."""
        return cls(q3=FluxComponent.const(q))

    @property
    def components(self):
        return (self.q1, self.q2, self.q3)

    def __call__(self, t):
        if self.rotating is not None:
            a, b = self.rotating(t)
        else:
            a, b = self.q1(t), self.q2(t)
        return np.array([a, b, self.q3(t)], dtype=float)

    @property
    def axial_magnitude(self):
        """q for a constant flux along x3, else None."""
        if (self.rotating is None and self.q1.is_zero and self.q2.is_zero
                and self.q3.family == "const"):
            return self.q3.q
        return None


# ------------------------------------------------------------------------------
# Classification


@dataclass(frozen=True)
class SymmetryReport:
    table2_case: int
    group_generators: tuple
    dimension: int
    aligned_by_rotation: bool = False

    def __post_init__(self):
        if self.dimension != len(self.group_generators):
            raise ValueError("dimension must equal the number of generators")

    def as_dict(self):
        return {"table2_case": self.table2_case,
                "group_generators": list(self.group_generators),
                "dimension": self.dimension,
                "aligned_by_rotation": self.aligned_by_rotation}


def _report(case, aligned=False):
    gens = FLUX_CASE_GENERATORS[case]
    return SymmetryReport(case, gens, len(gens), aligned)


def classify_flux(flux: FluxSpec) -> SymmetryReport:
    """Invariance group of the boundary-value problem for the given flux.

    Pattern matching on family tags. A constant (or 1/sqrt(t)) vector that is
    not along x3 is first rotated onto the axis, which the equivalence group
    allows; sampled components are never promoted to a structured family.
    """
    comps = flux.components
    if flux.rotating is not None:
        pair = flux.rotating
        if pair.lam == 0:
            fam = "const" if pair.family == "rot_const" else "inv_sqrt_t"
            comps = (FluxComponent(fam, pair.q1), FluxComponent(fam, pair.q2), flux.q3)
        else:
            q3 = flux.q3.family
            if pair.family == "rot_const" and q3 in ("zero", "const"):
                return _report(3)
            if pair.family == "rot_inv_sqrt_t" and q3 in ("zero", "inv_sqrt_t"):
                return _report(4)
            return _report(1)

    c1, c2, c3 = comps
    if any(c.family == "arbitrary" for c in comps):
        if (c1.is_zero and c2.is_zero and c3.family == "arbitrary"
                and any(v != 0 for _, v in c3.samples)):
            return _report(2)
        return _report(1)
    families = {c.family for c in comps if not c.is_zero}
    if not families:
        raise ValueError("flux vanishes identically")
    if len(families) > 1:
        return _report(1)
    aligned = not (c1.is_zero and c2.is_zero)
    return _report(5 if families == {"const"} else 6, aligned)


def _profile_kind(p: FunctionProfile):
    if p.is_constant:
        return "constant"
    return p.family


def classify_diffusivities(d1: FunctionProfile, d2: FunctionProfile) -> int:
    """Row of the diffusivity-pair classification (1-10).

    Exponents/rates equal to zero count as constants; tabulated profiles
    are treated as arbitrary functions.
    """
    k1, k2 = _profile_kind(d1), _profile_kind(d2)
    if k1 == "constant" and k2 == "constant":
        return 10 if d1.constant_value() == d2.constant_value() else 9
    if k1 == "constant":
        return 2
    if k2 == "constant":
        return 3
    if k1 == "tabulated" or k2 == "tabulated":
        return 1
    if k1 == "exponential":
        return 4 if k2 == "exponential" else 5
    if k2 == "exponential":
        return 6
    if (math.isclose(d1.alpha, CONFORMAL_EXPONENT, rel_tol=0, abs_tol=1e-12)
            and math.isclose(d2.alpha, CONFORMAL_EXPONENT, rel_tol=0, abs_tol=1e-12)):
        return 8
    return 7


# ------------------------------------------------------------------------------
# Group action


@dataclass(frozen=True)
class GroupElement:
    """Element exp(eps X) of one of the groups T0..T7; ``rate`` is lambda for T6/T7."""

    generator: str
    parameter: float
    rate: float = 0.0

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if not (math.isfinite(self.parameter) and math.isfinite(self.rate)):
            raise ValueError("group parameters must be finite")


def _rotate(x1, x2, tau):
    c, s = np.cos(tau), np.sin(tau)
    return x1 * c + x2 * s, -x1 * s + x2 * c


def apply_group(elem: GroupElement, point):
    """Image of (t, x1, x2, x3) under the group element.

    ``point`` may be a 4-sequence or an array whose last axis has length 4.
    u, v, S1 and S2 are unchanged by every group in the list.
    """
    as_tuple = isinstance(point, (tuple, list))
    p = np.asarray(point, dtype=float)
    if p.shape[-1] != 4:
        raise ValueError("point must have 4 components (t, x1, x2, x3)")
    t, x1, x2, x3 = (p[..., i] for i in range(4))
    e, g, lam = elem.parameter, elem.generator, elem.rate
    if g == "T0":
        t = t + e
    elif g == "T1":
        x1 = x1 + e
    elif g == "T2":
        x2 = x2 + e
    elif g == "T3":
        x3 = x3 + e
    elif g == "T4":
        k = math.exp(e)
        t, x1, x2, x3 = k * k * t, k * x1, k * x2, k * x3
    elif g == "T5":
        x1, x2 = _rotate(x1, x2, e)
    elif g == "T6":
        t = t + e
        x1, x2 = _rotate(x1, x2, lam * e)
    else:
        k = math.exp(e)
        x1, x2 = _rotate(x1, x2, lam * e)
        t, x1, x2, x3 = k * k * t, k * x1, k * x2, k * x3
    out = np.stack(np.broadcast_arrays(t, x1, x2, x3), axis=-1)
    if as_tuple:
        return tuple(float(v) for v in out)
    return out


# ------------------------------------------------------------------------------
# Equivalence scalings


@dataclass(frozen=True)
class GaugeRecord:
    """Constants of an equivalence scaling.

    t -> alpha t, x -> beta R x (R a rotation), u -> delta1 u + gamma4,
    v -> delta2 v + gamma5. Diffusivities scale by beta**2/alpha, the
    threshold diffusivities d1v, d1m by beta/delta1 and d2m by beta/delta2,
    latent heats by alpha/beta; the flux is only rotated.
    """

    alpha: float = 1.0
    beta: float = 1.0
    delta1: float = 1.0
    gamma4: float = 0.0
    delta2: float = 1.0
    gamma5: float = 0.0
    rotation: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.delta1, self.gamma4, self.delta2, self.gamma5)
        if not all(math.isfinite(v) for v in vals):
            raise GaugeError("gauge constants must be finite")
        for name in ("alpha", "beta", "delta1", "delta2"):
            if not getattr(self, name) > 0:
                raise GaugeError(f"gauge needs {name} > 0, got {getattr(self, name)!r}")
        rot = np.asarray(self.rotation, dtype=float)
        if rot.shape != (3, 3) or not np.allclose(rot @ rot.T, np.eye(3), atol=1e-12):
            raise GaugeError("rotation must be an orthogonal 3x3 matrix")
        object.__setattr__(self, "rotation", tuple(map(tuple, rot.tolist())))

    def inverse(self) -> "GaugeRecord":
        return GaugeRecord(alpha=1.0 / self.alpha, beta=1.0 / self.beta,
                           delta1=1.0 / self.delta1, gamma4=-self.gamma4 / self.delta1,
                           delta2=1.0 / self.delta2, gamma5=-self.gamma5 / self.delta2,
                           rotation=tuple(map(tuple, np.asarray(self.rotation).T.tolist())))

    @property
    def diffusivity_factor(self):
        return self.beta ** 2 / self.alpha

    def map_length(self, x):
        return self.beta * x

    def map_speed(self, mu):
        return self.beta * mu / self.alpha

    def as_dict(self):
        return {"alpha": self.alpha, "beta": self.beta, "delta1": self.delta1,
                "gamma4": self.gamma4, "delta2": self.delta2, "gamma5": self.gamma5,
                "rotation": [list(r) for r in self.rotation]}


def _transform_profile(p: FunctionProfile, k: float, delta: float, gamma: float):
    # profile of the new variable w = delta*u + gamma: k * p((w - gamma)/delta)
    if p.family == "constant":
        return FunctionProfile.constant(k * p.c)
    if p.family == "power":
        return FunctionProfile.power(k * p.D * delta ** (-p.alpha), p.alpha,
                                     delta * p.shift - gamma)
    if p.family == "exponential":
        return FunctionProfile.exponential(k * p.D * math.exp(-p.alpha * gamma / delta),
                                           p.alpha / delta)
    return FunctionProfile.tabulated(delta * np.asarray(p.args) + gamma,
                                     k * np.asarray(p.values))


def _rotate_flux(flux: FluxSpec, rot: np.ndarray) -> FluxSpec:
    if np.array_equal(rot, np.eye(3)):
        return flux
    if flux.rotating is not None:
        if not (np.allclose(rot[2], [0, 0, 1], atol=1e-14)
                and np.allclose(rot[:, 2], [0, 0, 1], atol=1e-14)):
            raise TransformError("a rotating flux only admits rotations about x3")
        pair = flux.rotating
        q1, q2 = rot[:2, :2] @ np.array([pair.q1, pair.q2])
        return replace(flux, rotating=replace(pair, q1=float(q1), q2=float(q2)))
    fams = {c.family for c in flux.components if not c.is_zero}
    if len(fams) != 1 or fams & {"arbitrary"}:
        raise TransformError("rotation needs a constant or 1/sqrt(t) flux vector")
    fam = fams.pop()
    vec = rot @ np.array([c.q for c in flux.components])
    vec[np.abs(vec) < 1e-15 * np.max(np.abs(vec))] = 0.0
    c1, c2, c3 = (FluxComponent(fam, float(v)) for v in vec)
    return FluxSpec(q3=c3, q1=c1, q2=c2)


def apply_gauge(model: EnthalpyModel, flux: FluxSpec, rec: GaugeRecord):
    """Image of (model, flux) under the equivalence scaling ``rec``."""
    k = rec.diffusivity_factor
    new = EnthalpyModel(
        d1=_transform_profile(model.d1, k, rec.delta1, rec.gamma4),
        d2=_transform_profile(model.d2, k, rec.delta2, rec.gamma5),
        u_v=rec.delta1 * model.u_v + rec.gamma4,
        u_m=rec.delta1 * model.u_m + rec.gamma4,
        v_m=rec.delta2 * model.v_m + rec.gamma5,
        v_inf=rec.delta2 * model.v_inf + rec.gamma5,
        H_v=rec.alpha / rec.beta * model.H_v,
        H_m=rec.alpha / rec.beta * model.H_m,
        d1v=rec.beta / rec.delta1 * model.d1v,
        d1m=rec.beta / rec.delta1 * model.d1m,
        d2m=rec.beta / rec.delta2 * model.d2m,
    )
    return new, _rotate_flux(flux, np.asarray(rec.rotation))


def normalize_problem(model: EnthalpyModel, flux: FluxSpec, **overrides):
    """Bring a problem to the canonical gauge u_v = 1, v_inf = 0.

    Defaults: alpha = beta = 1, delta1 = 1/u_v, gamma4 = 0, delta2 = 1,
    gamma5 = -v_inf. Any GaugeRecord field may be overridden; an explicit
    ``gamma5`` or ``delta2`` keeps v_inf = 0 only if chosen consistently.

    Returns (model, flux, record); ``denormalize_problem`` undoes it.

    Raises GaugeError when the gauge would need a non-positive scaling,
    e.g. u_v <= 0.
    """
    params = dict(alpha=1.0, beta=1.0, gamma4=0.0, delta2=1.0)
    if "delta1" not in overrides:
        if not model.u_v > 0:
            raise GaugeError(f"u_v = 1 gauge needs u_v > 0, got {model.u_v!r}")
        params["delta1"] = 1.0 / model.u_v
    params.update(overrides)
    if "gamma5" not in overrides:
        params["gamma5"] = -params["delta2"] * model.v_inf
    rec = GaugeRecord(**params)
    new_model, new_flux = apply_gauge(model, flux, rec)
    return new_model, new_flux, rec


def denormalize_problem(model: EnthalpyModel, flux: FluxSpec, rec: GaugeRecord):
    """Inverse of ``normalize_problem`` for the same record."""
    return apply_gauge(model, flux, rec.inverse())
