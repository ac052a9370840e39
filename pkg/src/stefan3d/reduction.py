"""
Subalgebras of the constant-flux invariance algebra, the ansaetze they
induce, and the paraboloidal invariant omega = z + sqrt(z**2 + r**2).

Generators act on (t, x1, x2, x3):
    Pt = d/dt, Pa = d/dx_a, J12 = x2 d/dx1 - x1 d/dx2.
Parameterized families use Gamma = P3 cos(phi) + Pt sin(phi) and
Lambda = P3 sin(phi) - Pt cos(phi), with alpha >= 0, beta real and
0 <= phi < pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import RangeError, UnsupportedSubalgebra

_BASIS = ("Pt", "P1", "P2", "P3", "J12")


# ------------------------------------------------------------------------------
# Subalgebra catalog


def _gamma(phi, scale=1.0):
    return {"P3": scale * math.cos(phi), "Pt": scale * math.sin(phi)}


def _lam(phi):
    return {"P3": math.sin(phi), "Pt": -math.cos(phi)}


def _plus(*terms):
    out = {}
    for term in terms:
        for k, v in term.items():
            out[k] = out.get(k, 0.0) + v
    return out


def _shift_gamma(a, b, phi):
    return _plus({"P1": 1.0}, _gamma(phi, a))


def _screw_gamma(a, b, phi):
    return _plus({"J12": 1.0}, _gamma(phi, b))


_UNIT = {k: (lambda kk: (lambda a, b, phi: {kk: 1.0}))(k) for k in _BASIS}


@dataclass(frozen=True)
class SubalgebraFamily:
    """A parameterized family of subalgebras.

    ``builders`` map (alpha, beta, phi) to generator coefficient dicts.
    ``admits`` is the parameter constraint under which the family appears
    in the admissible list (None: the family never does).
    """

    key: str
    dimension: int
    labels: tuple
    builders: tuple
    params: tuple = ()
    constraint: str = ""
    admits: Callable | None = None

    def instance(self, alpha=0.0, beta=0.0, phi=0.0) -> "Subalgebra":
        return Subalgebra(self, float(alpha), float(beta), float(phi))


def _generic_angle(phi):
    return not (math.isclose(phi, 0.0, abs_tol=1e-12)
                or math.isclose(phi, math.pi / 2, abs_tol=1e-12))


def _always(a, b, phi):
    return True


_UNFILTERED = (
    SubalgebraFamily("travel", 1, ("P3 cos(phi) + Pt sin(phi)",),
                     (lambda a, b, phi: _gamma(phi),), ("phi",),
                     "phi not in {0, pi/2}", lambda a, b, phi: _generic_angle(phi)),
    SubalgebraFamily("shift_travel", 1, ("P1 + alpha Gamma",),
                     (_shift_gamma,), ("alpha", "phi"), "", _always),
    SubalgebraFamily("screw_travel", 1, ("J12 + beta Gamma",),
                     (_screw_gamma,), ("beta", "phi"), "", _always),
    SubalgebraFamily("axial_time", 2, ("P3", "Pt"),
                     (_UNIT["P3"], _UNIT["Pt"])),
    SubalgebraFamily("shift_travel_x2", 2, ("P1 + alpha Gamma", "P2"),
                     (_shift_gamma, _UNIT["P2"]), ("alpha", "phi"), "", _always),
    SubalgebraFamily("shift_travel_wave", 2, ("P1 + alpha Gamma", "Lambda"),
                     (_shift_gamma, lambda a, b, phi: _lam(phi)), ("alpha", "phi"),
                     "phi not in {0, pi/2}", lambda a, b, phi: _generic_angle(phi)),
    SubalgebraFamily("screw_wave", 2, ("J12 + beta Gamma", "Lambda"),
                     (_screw_gamma, lambda a, b, phi: _lam(phi)), ("beta", "phi"),
                     "phi not in {0, pi/2}", lambda a, b, phi: _generic_angle(phi)),
    SubalgebraFamily("x1_axial_time", 3, ("P1", "P3", "Pt"),
                     (_UNIT["P1"], _UNIT["P3"], _UNIT["Pt"])),
    SubalgebraFamily("rotation_axial_time", 3, ("J12", "P3", "Pt"),
                     (_UNIT["J12"], _UNIT["P3"], _UNIT["Pt"])),
    SubalgebraFamily("shift_travel_x2_wave", 3, ("P1 + alpha Gamma", "P2", "Lambda"),
                     (_shift_gamma, _UNIT["P2"], lambda a, b, phi: _lam(phi)),
                     ("alpha", "phi"), "phi not in {0, pi/2}",
                     lambda a, b, phi: _generic_angle(phi)),
    SubalgebraFamily("screw_plane", 3, ("J12 + beta Gamma", "P1", "P2"),
                     (_screw_gamma, _UNIT["P1"], _UNIT["P2"]), ("beta", "phi"),
                     "phi not in {0, pi/2} if beta != 0",
                     lambda a, b, phi: b == 0 or _generic_angle(phi)),
    SubalgebraFamily("translations", 4, ("P1", "P2", "P3", "Pt"),
                     (_UNIT["P1"], _UNIT["P2"], _UNIT["P3"], _UNIT["Pt"])),
    SubalgebraFamily("screw_plane_wave", 4, ("J12 + beta Gamma", "P1", "P2", "Lambda"),
                     (_screw_gamma, _UNIT["P1"], _UNIT["P2"], lambda a, b, phi: _lam(phi)),
                     ("beta", "phi"), "beta = 0 and phi not in {0, pi/2}",
                     lambda a, b, phi: b == 0 and _generic_angle(phi)),
    SubalgebraFamily("full", 5, ("J12", "P1", "P2", "P3", "Pt"),
                     tuple(_UNIT[k] for k in ("J12", "P1", "P2", "P3", "Pt"))),
)

CATALOG = {f.key: f for f in _UNFILTERED}


def unfiltered_subalgebras(dimension: int) -> list:
    """Every family of the optimal system of the given dimension (1-5)."""
    if dimension not in (1, 2, 3, 4, 5):
        raise ValueError("dimension must be in 1..5")
    return [f for f in _UNFILTERED if f.dimension == dimension]


def enumerate_subalgebras(dimension: int) -> list:
    """Families whose invariant solutions can meet the physical restrictions.

    Each family carries its parameter constraint in ``constraint`` and as
    the predicate ``admits(alpha, beta, phi)``.
    """
    if dimension not in (1, 2, 3, 4):
        raise ValueError("dimension must be in 1..4")
    return [f for f in unfiltered_subalgebras(dimension) if f.admits is not None]


@dataclass(frozen=True)
class Subalgebra:
    family: SubalgebraFamily
    alpha: float = 0.0
    beta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0 <= self.phi < math.pi:
            raise ValueError("phi must lie in [0, pi)")

    @property
    def id(self):
        return self.family.key

    @property
    def dimension(self):
        return self.family.dimension

    @property
    def generators(self):
        return tuple(b(self.alpha, self.beta, self.phi) for b in self.family.builders)

    def vector_fields(self, points):
        """Generator values at points (N, 4) -> array (n_gen, N, 4)."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((len(self.generators), p.shape[0], 4))
        for i, gen in enumerate(self.generators):
            out[i, :, 0] += gen.get("Pt", 0.0)
            out[i, :, 1] += gen.get("P1", 0.0) + gen.get("J12", 0.0) * p[:, 2]
            out[i, :, 2] += gen.get("P2", 0.0) - gen.get("J12", 0.0) * p[:, 1]
            out[i, :, 3] += gen.get("P3", 0.0)
        return out


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    reason: str

    def __bool__(self):
        return self.admissible


_SAMPLE_POINTS = np.array([[0.3, 0.7, -1.1, 0.4], [1.9, -0.6, 0.5, -2.3],
                           [-0.8, 1.3, 0.9, 1.7], [2.4, -1.4, -0.2, 0.1]])


def check_restrictions(sub: Subalgebra, points=None) -> Admissibility:
    """Can an invariant surface S_k of ``sub`` satisfy dS/dt != 0 and q.n1 != 0?

    At each sample point the differentials of invariants span the
    annihilator of the generator values. The restrictions need one
    covector in it with nonzero t- and x3-components (a moving surface
    that is not parallel to the flux q = (0, 0, q)); a generic covector
    of the annihilator has both iff neither coordinate is forced to zero.
    The remaining restrictions (|grad S| != 0, V.n != 0) follow.
    """
    pts = _SAMPLE_POINTS if points is None else np.atleast_2d(points)
    fields_ = sub.vector_fields(pts)
    no_t = no_x3 = False
    for j in range(pts.shape[0]):
        m = fields_[:, j, :]
        # annihilator = null space of m (rows are generator vectors)
        _, s, vt = np.linalg.svd(m)
        rank = int(np.sum(s > 1e-12 * max(1.0, s.max(initial=0.0))))
        null = vt[rank:]
        if null.shape[0] == 0:
            no_t = no_x3 = True
            break
        no_t |= bool(np.all(np.abs(null[:, 0]) < 1e-12))
        no_x3 |= bool(np.all(np.abs(null[:, 3]) < 1e-12))
    if no_t and no_x3:
        return Admissibility(False, "dS_k/dt = 0 and q.n1 = 0")
    if no_t:
        return Admissibility(False, "dS_k/dt = 0 (stationary surfaces)")
    if no_x3:
        return Admissibility(False, "q.n1 = 0 (surfaces parallel to the flux)")
    return Admissibility(True, "moving surfaces crossed by the flux")


# ------------------------------------------------------------------------------
# Ansatz


@dataclass(frozen=True)
class Ansatz:
    """Form of the invariant solution.

    PlanarWave:      z = alpha_star*x1 + x3 - mu*t
    HelicalRZ:       (r, z) with z = x3 - mu*t - beta_star*arctan(x1/x2)
    ParaboloidOmega: omega = z + sqrt(z**2 + r**2), z = x3 - mu*t
    ``mu`` is the wave speed fixed by phi when the family fixes it.
    """

    kind: str
    invariant_vars: str
    wave_speed_symbol: str = "mu"
    mu: float | None = None
    alpha_star: float = 0.0
    beta_star: float = 0.0

    def covector(self):
        """Differential of z in (t, x1, x2, x3) for the planar kinds (point independent)."""
        if self.kind != "PlanarWave" or self.mu is None:
            raise ValueError("covector is defined for planar waves with fixed mu")
        return np.array([-self.mu, self.alpha_star, 0.0, 1.0])


def build_ansatz(sub: Subalgebra, upgrade: bool = True) -> Ansatz:
    """Ansatz induced by an admissible subalgebra.

    With ``upgrade`` the rotation-invariant (beta = 0) two-dimensional family
    is replaced by the paraboloidal non-Lie ansatz in omega.

    Raises
    ------
    ValueError
        if ``sub`` is not admissible.
    UnsupportedSubalgebra
        for admissible families no solver here consumes.
    """
    adm = check_restrictions(sub)
    if not adm:
        raise ValueError(f"subalgebra {sub.id} is not admissible: {adm.reason}")
    key, phi = sub.id, sub.phi
    if key in ("screw_plane_wave", "screw_plane"):
        if key == "screw_plane" and sub.beta != 0:
            # invariants of (J12 + beta Gamma, P1, P2): x3 sin(phi) - t cos(phi)
            mu = math.cos(phi) / math.sin(phi)
        else:
            mu = -math.tan(phi) if _generic_angle(phi) else None
        return Ansatz("PlanarWave", "z = x3 - mu t", mu=mu)
    if key == "shift_travel_x2_wave":
        return Ansatz("PlanarWave", "z = alpha_star x1 + x3 - mu t", mu=-math.tan(phi),
                      alpha_star=-sub.alpha / math.cos(phi))
    if key == "screw_wave":
        beta_star = sub.beta / math.cos(phi)
        if beta_star == 0 and upgrade:
            return Ansatz("ParaboloidOmega", "omega = z + sqrt(z^2 + r^2), z = x3 - mu t",
                          mu=-math.tan(phi))
        return Ansatz("HelicalRZ", "r, z = x3 - mu t - beta_star arctan(x1/x2)",
                      mu=-math.tan(phi), beta_star=beta_star)
    raise UnsupportedSubalgebra(f"no reduction implemented for family {key}")


# ------------------------------------------------------------------------------
# Paraboloidal geometry


@dataclass(frozen=True)
class Frame:
    """Origin of the traveling solution: the apex axis passes through
    ``center`` and z = x3 - c3 - mu*(t - t0)."""

    t0: float = 0.0
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))


@dataclass(frozen=True)
class SurfaceGeometry:
    omega1: float
    omega2: float
    mu: float
    frame: Frame = field(default_factory=Frame)

    def __post_init__(self):
        if not self.omega2 > self.omega1 > 0:
            raise ValueError("surface levels must satisfy omega2 > omega1 > 0")
        if not self.mu > 0:
            raise ValueError("front speed mu must be positive")

    def level(self, which):
        if which in ("evaporation", 1):
            return self.omega1
        if which in ("melting", 2):
            return self.omega2
        raise ValueError("which must be 'evaporation' or 'melting'")


def local_coordinates(x, t, mu, frame: Frame | None = None):
    """(z, r) of points x (..., 3) at time t in the traveling frame."""
    frame = frame or Frame()
    x = np.asarray(x, dtype=float)
    c = frame.center
    dx1, dx2 = x[..., 0] - c[0], x[..., 1] - c[1]
    z = x[..., 2] - c[2] - mu * (np.asarray(t, dtype=float) - frame.t0)
    return z, np.hypot(dx1, dx2)


def omega_from_zr(z, r):
    """omega = z + sqrt(z**2 + r**2), evaluated without cancellation for z < 0."""
    z = np.asarray(z, dtype=float)
    r = np.asarray(r, dtype=float)
    rho = np.hypot(z, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = np.where(rho - z > 0, r * r / (rho - z), 0.0)
    out = np.where(z >= 0, z + rho, neg)
    return float(out) if out.ndim == 0 else out


def omega_of_point(x, t, mu, frame: Frame | None = None):
    """Invariant omega at point(s) x (..., 3), time t; 0 on the axis below the apex."""
    z, r = local_coordinates(x, t, mu, frame)
    return omega_from_zr(z, r)


def grad_omega(x, t, mu, frame: Frame | None = None):
    """Spatial gradient of omega (..., 3) and its time derivative."""
    frame = frame or Frame()
    x = np.asarray(x, dtype=float)
    c = frame.center
    z, r = local_coordinates(x, t, mu, frame)
    rho = np.hypot(z, r)
    w = omega_from_zr(z, r)
    g = np.stack([(x[..., 0] - c[0]) / rho, (x[..., 1] - c[1]) / rho, w / rho], axis=-1)
    return g, -mu * w / rho


def surface_points(geom: SurfaceGeometry, which, t: float, n_samples: int,
                   r_max: float | None = None):
    """Points on the paraboloid omega = omega_k at time t, shape (n, 3).

    Deterministic spiral sampling over radii in [0, r_max] (default
    2*omega_k), sqrt-spaced so the samples are roughly area-uniform.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    wk = geom.level(which)
    r_max = 2.0 * wk if r_max is None else float(r_max)
    i = np.arange(n_samples)
    r = r_max * np.sqrt(i / max(n_samples - 1, 1))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    ang = golden * i
    z = 0.5 * (wk - r * r / wk)
    c = geom.frame.center
    x3 = z + c[2] + geom.mu * (t - geom.frame.t0)
    return np.stack([c[0] + r * np.cos(ang), c[1] + r * np.sin(ang), x3], axis=-1)


def surface_function(geom: SurfaceGeometry, which, x, t):
    """S_k = r**2/omega_k**2 + 2 z/omega_k - 1 with its gradient and time derivative."""
    wk = geom.level(which)
    x = np.asarray(x, dtype=float)
    c = geom.frame.center
    z, r = local_coordinates(x, t, geom.mu, geom.frame)
    s = r * r / wk ** 2 + 2.0 * z / wk - 1.0
    grad = np.stack([2.0 * (x[..., 0] - c[0]) / wk ** 2, 2.0 * (x[..., 1] - c[1]) / wk ** 2,
                     np.full_like(z, 2.0 / wk)], axis=-1)
    return s, grad, np.full_like(z, -2.0 * geom.mu / wk)


def reconstruct_field(profiles, geom: SurfaceGeometry, t, x, far_field: str = "raise"):
    """Phase tag and field value at (t, x).

    ``profiles`` provides ``u(omega)``, ``v(omega)``, ``omega_max`` and
    ``v_inf``. Returns ("gas", nan) below the evaporation surface,
    ("liquid", u) between the surfaces and ("solid", v) beyond. With
    ``far_field="substitute"`` points past ``omega_max`` get v_inf and
    the tag "solid_far"; the default raises RangeError there.
    """
    w = omega_of_point(np.asarray(x, dtype=float), t, geom.mu, geom.frame)
    return classify_omega(profiles, geom, w, far_field)


def classify_omega(profiles, geom: SurfaceGeometry, w, far_field: str = "raise"):
    if far_field not in ("raise", "substitute"):
        raise ValueError("far_field must be 'raise' or 'substitute'")
    w = float(w)
    if w < geom.omega1:
        return "gas", math.nan
    if w <= geom.omega2:
        return "liquid", float(profiles.u(w))
    if w <= profiles.omega_max:
        return "solid", float(profiles.v(w))
    if far_field == "raise":
        raise RangeError(f"omega = {w:.6g} beyond the tabulated far field {profiles.omega_max:.6g}")
    return "solid_far", float(profiles.v_inf)
