"""
Independent residual audit of a traveling solution.

The auditor rebuilds u(t, x) and v(t, x) from the tabulated radial
profiles, the front parameters (omega2, mu, frame) and the enthalpy model
only. PDE residuals use central differences in both space and time, so
an error in the traveling-wave algebra itself shows up; boundary
residuals use the chain rule with the analytic gradient of omega.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import GridError
from .material import EnthalpyModel
from .reduction import (SurfaceGeometry, grad_omega, local_coordinates, omega_from_zr,
                        surface_function, surface_points)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_PLASTIC = (0.7548776662466927, 0.5698402909980532)   # R2 low-discrepancy constants


@dataclass
class ResidualReport:
    """Residual norms of the field equations and boundary conditions.

    PDE norms are max and root-mean-square over the sample points at the
    finest grid; boundary residuals are maxima over surface samples.
    Flux residuals are per unit normal (divided by |grad S|).
    """

    pde_liquid_max: float | None = None
    pde_liquid_l2: float | None = None
    pde_solid_max: float | None = None
    pde_solid_l2: float | None = None
    bc_evaporation_flux: float | None = None
    bc_evaporation_dirichlet: float | None = None
    bc_stefan_flux: float | None = None
    bc_stefan_dirichlet_u: float | None = None
    bc_stefan_dirichlet_v: float | None = None
    farfield: float | None = None
    grid_spacing: float | None = None
    convergence_order: float | None = None
    convergence_order_liquid: float | None = None
    convergence_order_solid: float | None = None
    n_points_liquid: int | None = None
    n_points_solid: int | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None and f.name.startswith(("pde_", "bc_", "farfield")) and v < 0:
                raise ValueError(f"{f.name} must be non-negative")

    def as_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown report fields: {sorted(unknown)}")
        return cls(**d)

    def merged(self, other: "ResidualReport") -> "ResidualReport":
        d = self.as_dict()
        d.update(other.as_dict())
        return ResidualReport(**d)


@dataclass(frozen=True)
class AuditTolerances:
    """Pass thresholds for ``audit``; None disables a check."""

    pde_liquid_l2: float | None = 5e-3
    pde_solid_l2: float | None = 5e-3
    bc_flux: float | None = 1e-7
    bc_dirichlet: float | None = 1e-9
    farfield: float | None = 1e-6
    order_min: float = 1.7
    order_max: float = 2.3


@dataclass(frozen=True)
class AuditConfig:
    """Grid and sampling controls.

    ``h=None`` picks h = (omega2 - R)/40; ``levels=2`` repeats the PDE
    residual at h/2 and estimates the convergence order. The solid is
    sampled for omega up to omega2 + ``solid_span`` kernel lengths 2 d2/mu.
    """

    h: float | None = None
    levels: int = 1
    n_points: int = 1000
    n_surface: int = 200
    solid_span: float = 2.0
    t: float = 0.0
    tolerances: AuditTolerances = field(default_factory=AuditTolerances)

    def __post_init__(self):
        if self.levels not in (1, 2):
            raise ValueError("levels must be 1 or 2")
        if self.h is not None and not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if self.n_points < 1 or self.n_surface < 1:
            raise ValueError("sample counts must be positive")


class Reconstruction:
    """Fields rebuilt from tabulated profiles (quintic interpolating splines)."""

    def __init__(self, solution):
        self.R = float(solution.R)
        self.omega2 = float(solution.omega2)
        self.mu = float(solution.mu)
        self.frame = solution.frame
        self.omega_max = float(solution.omega_v[-1])
        self.v_inf = float(solution.v_inf)
        self.u = make_interp_spline(np.asarray(solution.omega_u),
                                    np.asarray(solution.u_values), k=5)
        self.v = make_interp_spline(np.asarray(solution.omega_v),
                                    np.asarray(solution.v_values), k=5)
        self.du = self.u.derivative()
        self.dv = self.v.derivative()
        self.geometry = SurfaceGeometry(self.R, self.omega2, self.mu, self.frame)

    def omega(self, x, t):
        z, r = local_coordinates(x, t, self.mu, self.frame)
        return omega_from_zr(z, r)


def _candidates(rec: Reconstruction, lo, hi, n):
    # low-discrepancy samples on omega-shells in [lo, hi]
    k = np.arange(1, n + 1)
    s1 = (0.5 + _PLASTIC[0] * k) % 1.0
    s2 = (0.5 + _PLASTIC[1] * k) % 1.0
    w = lo + (hi - lo) * s1
    r = 2.0 * hi * s2
    z = 0.5 * (w - r * r / w)
    ang = 2.0 * math.pi * ((_GOLDEN * k) % 1.0)
    c = rec.frame.center
    return np.stack([c[0] + r * np.cos(ang), c[1] + r * np.sin(ang), c[2] + z], axis=-1)


def _band_ok(rec: Reconstruction, x, t, h, lo, hi):
    # distance to each bounding surface from |omega - omega_k| / |grad omega|
    w = rec.omega(x, t)
    g, _ = grad_omega(x, t, rec.mu, rec.frame)
    gn = 1.25 * np.linalg.norm(g, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        d_lo = np.abs(w - lo) / gn
        d_hi = np.abs(w - hi) / gn
    return (w > lo) & (w < hi) & (d_lo > 3 * h) & (d_hi > 3 * h)


def _stencil(x, t, h, dt):
    offs = np.array([[h, 0, 0], [-h, 0, 0], [0, h, 0], [0, -h, 0], [0, 0, h], [0, 0, -h]])
    space = x[:, None, :] + offs[None, :, :]
    return space, t + dt, t - dt


def _phase_residual(rec, profile, d, x, t, h):
    dt = h / rec.mu
    space, tp, tm = _stencil(x, t, h, dt)
    w0 = rec.omega(x, t)
    ws = rec.omega(space, t)
    wp, wm = rec.omega(x, tp), rec.omega(x, tm)
    f0, fs = profile(w0), profile(ws)
    fp, fm = profile(wp), profile(wm)
    d0, ds = d(f0), d(fs)
    dhalf = 0.5 * (ds + d0[:, None])
    div = np.sum(dhalf * (fs - f0[:, None]), axis=1) / (h * h)
    res = (fp - fm) / (2.0 * dt) - div
    return res, np.concatenate([ws, wp[:, None], wm[:, None]], axis=1)


def sample_points(rec: Reconstruction, phase: str, h: float, n: int, t: float,
                  solid_upper: float):
    """Deterministic interior sample points of one phase, clear of the 3h band."""
    lo, hi = (rec.R, rec.omega2) if phase == "liquid" else (rec.omega2, solid_upper)
    got, m = [], 4 * n
    for _ in range(6):
        cand = _candidates(rec, lo, hi, m)
        cand[:, 2] += rec.mu * (t - rec.frame.t0)
        cand = cand[_band_ok(rec, cand, t, h, lo, hi)]
        if cand.shape[0] >= n:
            return cand[:n]
        got, m = cand, 2 * m
    if len(got) == 0:
        raise GridError(f"no {phase} sample points clear the exclusion band at h = {h:.3g}")
    return got


def pde_residual(solution, model: EnthalpyModel, h: float | None = None, levels: int = 1,
                 n_points: int = 1000, t: float = 0.0, solid_span: float = 2.0,
                 points: dict | None = None) -> ResidualReport:
    """Residuals of u_t = div(d1(u) grad u) and v_t = div(d2(v) grad v).

    Second-order central differences in x (conservative, averaged d) and
    in t (dt = h/mu) at >= ``n_points`` interior points per phase. With
    ``levels=2`` the same points are re-evaluated at h/2 and the order
    p = log2(rms_h / rms_{h/2}) is reported per phase.

    ``points`` may give explicit {"liquid": (N, 3), "solid": (N, 3)} arrays;
    a point within 3h of a phase boundary raises GridError.
    """
    rec = Reconstruction(solution)
    h = (rec.omega2 - rec.R) / 40.0 if h is None else float(h)
    t = rec.frame.t0 + t
    a2 = float(model.d2(model.v_m, extrapolate=True))
    solid_upper = min(rec.omega2 + solid_span * 2.0 * a2 / rec.mu, rec.omega_max)
    out = {}
    for phase, prof, d in (("liquid", rec.u, model.d1), ("solid", rec.v, model.d2)):
        lo, hi = (rec.R, rec.omega2) if phase == "liquid" else (rec.omega2, solid_upper)
        if points is not None and phase in points:
            x = np.atleast_2d(np.asarray(points[phase], dtype=float))
            if not np.all(_band_ok(rec, x, t, h, lo, hi)):
                raise GridError(f"{phase} sample points intersect the 3h band around a surface")
        else:
            x = sample_points(rec, phase, h, n_points, t, solid_upper)
        dfun = lambda f, d=d: d(f, extrapolate=True)
        norms = []
        for k in range(levels):
            hk = h / 2 ** k
            res, ws = _phase_residual(rec, prof, dfun, x, t, hk)
            inside = np.all((ws > lo) & (ws < hi), axis=1) if phase == "liquid" \
                else np.all((ws > lo) & (ws <= rec.omega_max), axis=1)
            if not np.all(inside):
                raise GridError(f"{phase} stencil crosses a phase boundary at h = {hk:.3g}")
            norms.append((float(np.max(np.abs(res))), float(np.sqrt(np.mean(res ** 2)))))
        out[f"pde_{phase}_max"], out[f"pde_{phase}_l2"] = norms[-1]
        out[f"n_points_{phase}"] = int(x.shape[0])
        if levels == 2:
            out[f"convergence_order_{phase}"] = (math.log2(norms[0][1] / norms[1][1])
                                                 if norms[1][1] > 0 else math.inf)
    out["grid_spacing"] = h / 2 ** (levels - 1)
    if levels == 2:
        out["convergence_order"] = min(out["convergence_order_liquid"],
                                       out["convergence_order_solid"])
    return ResidualReport(**out)


def boundary_residual(solution, model: EnthalpyModel, q: float, n_surface_samples: int = 200,
                      t: float = 0.0) -> ResidualReport:
    """Boundary-condition residuals on sampled surface points.

    Evaporation surface S1 = 0:  d1v grad u . grad S1 + H_v dS1/dt + Q . grad S1 = 0, u = u_v
    Melting surface S2 = 0:      d2m grad v . grad S2 - d1m grad u . grad S2 + H_m dS2/dt = 0,
                                 u = u_m, v = v_m
    Far field:                   v(omega_max) = v_inf
    with Q = (0, 0, q) and S_k = r^2/omega_k^2 + 2z/omega_k - 1.
    """
    rec = Reconstruction(solution)
    geom = rec.geometry
    t = rec.frame.t0 + t
    Q = np.array([0.0, 0.0, q])

    def normal_flux(which, value):
        x = surface_points(geom, which, t, n_surface_samples)
        _, gs, st = surface_function(geom, which, x, t)
        gw, _ = grad_omega(x, t, rec.mu, rec.frame)
        w = np.clip(rec.omega(x, t), rec.R, rec.omega_max)
        return x, w, gs, st, gw, np.linalg.norm(gs, axis=-1)

    x1, w1, gs1, st1, gw1, n1 = normal_flux("evaporation", None)
    wl = np.clip(w1, rec.R, rec.omega2)
    grad_u = rec.du(wl)[:, None] * gw1
    evap = (model.d1v * np.sum(grad_u * gs1, axis=1) + model.H_v * st1 + gs1 @ Q) / n1
    evap_dir = np.abs(rec.u(wl) - model.u_v)

    x2, w2, gs2, st2, gw2, n2 = normal_flux("melting", None)
    wl2 = np.clip(w2, rec.R, rec.omega2)
    ws2 = np.clip(w2, rec.omega2, rec.omega_max)
    gu = rec.du(wl2)[:, None] * gw2
    gv = rec.dv(ws2)[:, None] * gw2
    stefan = (model.d2m * np.sum(gv * gs2, axis=1) - model.d1m * np.sum(gu * gs2, axis=1)
              + model.H_m * st2) / n2
    return ResidualReport(
        bc_evaporation_flux=float(np.max(np.abs(evap))),
        bc_evaporation_dirichlet=float(np.max(evap_dir)),
        bc_stefan_flux=float(np.max(np.abs(stefan))),
        bc_stefan_dirichlet_u=float(np.max(np.abs(rec.u(wl2) - model.u_m))),
        bc_stefan_dirichlet_v=float(np.max(np.abs(rec.v(ws2) - model.v_m))),
        farfield=float(abs(rec.v(rec.omega_max) - model.v_inf)),
    )


def audit(solution, model: EnthalpyModel, q: float,
          config: AuditConfig | None = None) -> ResidualReport:
    """Full report: PDE residuals (optionally two grids) plus boundary residuals."""
    config = config or AuditConfig()
    pde = pde_residual(solution, model, config.h, config.levels, config.n_points,
                       config.t, config.solid_span)
    bc = boundary_residual(solution, model, q, config.n_surface, config.t)
    return pde.merged(bc)


def audit_failures(report: ResidualReport, tol: AuditTolerances | None = None) -> list:
    """Names of the report entries that exceed their thresholds."""
    tol = tol or AuditTolerances()
    checks = [
        ("pde_liquid_l2", tol.pde_liquid_l2), ("pde_solid_l2", tol.pde_solid_l2),
        ("bc_evaporation_flux", tol.bc_flux), ("bc_stefan_flux", tol.bc_flux),
        ("bc_evaporation_dirichlet", tol.bc_dirichlet),
        ("bc_stefan_dirichlet_u", tol.bc_dirichlet),
        ("bc_stefan_dirichlet_v", tol.bc_dirichlet),
        ("farfield", tol.farfield),
    ]
    bad = []
    for name, limit in checks:
        val = getattr(report, name)
        if limit is not None and val is not None and not val <= limit:
            bad.append(name)
    for name in ("convergence_order_liquid", "convergence_order_solid"):
        p = getattr(report, name)
        if p is not None and not tol.order_min <= p <= tol.order_max:
            bad.append(name)
    return bad
