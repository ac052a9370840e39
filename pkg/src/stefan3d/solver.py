"""
Solvers for the reduced traveling-front problem in the paraboloidal
invariant omega:

    (omega d1(u) u')' + (mu omega / 2) u' = 0,          R < omega < omega2
    (omega d2(v) v')' + (mu omega / 2) v' = 0,          omega > omega2
    omega = R:       2 d1v u' = mu H_v - q,  u = u_v
    omega = omega2:  2 d2m v' = 2 d1m u' + mu H_m,  u = u_m,  v = v_m
    omega -> inf:    v -> v_inf

Closed forms cover constant diffusivities and the fast-diffusion pair
d1 = D/u, d2 = const; any other positive pair is handled by shooting.
The planar traveling wave z = x3 - mu t is solved by the same machinery.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import DomainError, NoRoot, NonConvergence, StiffnessError, TransformError
from .material import EnthalpyModel, FunctionProfile
from .reduction import Frame, SurfaceGeometry
from .specialfn import (QuadratureConfig, adaptive_integrate,
                        scaled_exp_integral_e1, wright_omega)
from .symmetry import GroupElement, apply_group

log = logging.getLogger(__name__)

N_PROFILE = 512
FAR_FIELD_LENGTHS = 40.0     # e-folding lengths 2a/mu of the solid kernel
_SOLID_CLUSTER = 6.0
_ODE_RTOL = 1e-12
_ODE_ATOL = 1e-14


@dataclass(frozen=True)
class RootSolveConfig:
    """Root finding controls. ``omega2_bracket=None`` means (R(1 + 1e-6), 20 R)."""

    abs_tol: float = 1e-10
    max_iters: int = 100
    omega2_bracket: tuple | None = None
    mu_bracket: tuple = (1e-3, 10.0)
    multistart: int = 8
    scan_points: int = 48

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_iters < 1 or self.multistart < 1 or self.scan_points < 2:
            raise ValueError("iteration counts must be positive")
        lo, hi = self.mu_bracket
        if not 0 < lo < hi:
            raise ValueError("mu bracket must satisfy 0 < lo < hi")
        if self.omega2_bracket is not None:
            wlo, whi = self.omega2_bracket
            if not 0 < wlo < whi:
                raise ValueError("omega2 bracket must satisfy 0 < lo < hi")

    def omega2_range(self, R):
        if self.omega2_bracket is None:
            return R * (1.0 + 1e-6), 20.0 * R
        lo, hi = self.omega2_bracket
        if not lo > R:
            raise ValueError("omega2 bracket must lie above R")
        return lo, hi


@dataclass(frozen=True)
class ReducedStefanProblem:
    model: EnthalpyModel
    R: float
    q: float
    geometry: str = "paraboloid"

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        if self.q == 0 or not math.isfinite(self.q):
            raise ValueError("flux magnitude q must be finite and nonzero")
        if self.geometry not in ("paraboloid", "planar"):
            raise ValueError("geometry must be 'paraboloid' or 'planar'")


@dataclass
class ParaboloidSolution:
    """Tabulated radial profiles and the solved front parameters.

    ``exact_u``/``exact_v`` are optional closed-form evaluators kept in
    memory only; ``u``/``v`` fall back to cubic splines of the tables.
    """

    omega_u: np.ndarray
    u_values: np.ndarray
    omega_v: np.ndarray
    v_values: np.ndarray
    omega2: float
    mu: float
    R: float
    v_inf: float
    solver_tag: str
    frame: Frame = field(default_factory=Frame)
    diagnostics: dict = field(default_factory=dict)
    exact_u: Callable | None = field(default=None, repr=False)
    exact_v: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        self.omega_u = np.asarray(self.omega_u, dtype=float)
        self.u_values = np.asarray(self.u_values, dtype=float)
        self.omega_v = np.asarray(self.omega_v, dtype=float)
        self.v_values = np.asarray(self.v_values, dtype=float)
        if not (self.omega2 > self.R > 0 and self.mu > 0):
            raise ValueError("solution needs omega2 > R > 0 and mu > 0")
        self._su = CubicSpline(self.omega_u, self.u_values)
        self._sv = CubicSpline(self.omega_v, self.v_values)

    @property
    def omega_max(self):
        return float(self.omega_v[-1])

    @property
    def geometry(self):
        return SurfaceGeometry(self.R, self.omega2, self.mu, self.frame)

    def u(self, w):
        return self.exact_u(w) if self.exact_u is not None else self._su(w)

    def v(self, w):
        return self.exact_v(w) if self.exact_v is not None else self._sv(w)

    def transported(self, elem: GroupElement) -> "ParaboloidSolution":
        """Image of the solution under a translation (T0-T3) or rotation about x3 (T5)."""
        if elem.generator not in ("T0", "T1", "T2", "T3", "T5"):
            raise TransformError(f"{elem.generator} is not a symmetry of the constant-flux problem")
        t0, *c = apply_group(elem, (self.frame.t0, *self.frame.center))
        return replace(self, frame=Frame(t0, tuple(c)), diagnostics=dict(self.diagnostics))


@dataclass
class PlanarSolution:
    """Planar traveling wave: liquid on [0, z2], solid on [z2, z_max]."""

    z_u: np.ndarray
    u_values: np.ndarray
    z_v: np.ndarray
    v_values: np.ndarray
    z2: float
    mu: float
    solver_tag: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self._su = CubicSpline(self.z_u, self.u_values)
        self._sv = CubicSpline(self.z_v, self.v_values)

    def u(self, z):
        return self._su(z)

    def v(self, z):
        return self._sv(z)


# ------------------------------------------------------------------------------
# family detection


def _constant(p: FunctionProfile):
    return p.constant_value() if p.is_constant else None


def is_constant_pair(model: EnthalpyModel):
    return model.d1.is_constant and model.d2.is_constant


def is_fast_diffusion(model: EnthalpyModel):
    d1 = model.d1
    return (d1.family == "power" and d1.alpha == -1.0 and d1.shift == 0.0 and d1.D > 0
            and model.d2.is_constant and model.u_v > 0 and model.u_m > 0)


# ------------------------------------------------------------------------------
# tabulation grids


def liquid_grid(R, omega2, n=N_PROFILE):
    s = 0.5 * (1.0 - np.cos(np.linspace(0.0, math.pi, n)))
    w = R + (omega2 - R) * s
    w[0], w[-1] = R, omega2
    return w


def solid_grid(omega2, omega_max, n=N_PROFILE):
    s = np.linspace(0.0, 1.0, n)
    w = omega2 + (omega_max - omega2) * np.expm1(_SOLID_CLUSTER * s) / math.expm1(_SOLID_CLUSTER)
    w[0], w[-1] = omega2, omega_max
    return w


def far_field_radius(omega2, mu, a2):
    return omega2 + FAR_FIELD_LENGTHS * 2.0 * a2 / mu


# ------------------------------------------------------------------------------
# constant diffusivities


def _check_domain(problem, omega2, mu):
    if not (omega2 > problem.R and mu > 0):
        raise DomainError("residuals need omega2 > R and mu > 0")


def _liquid_kernel(R, omega2, mu, a1):
    # e^{-xR} / (Phi1(R) - Phi1(omega2)) and the same with e^{-x2}
    xr, x2 = mu * R / (2 * a1), mu * omega2 / (2 * a1)
    if omega2 < 2.0 * R:
        d = adaptive_integrate(lambda s: np.exp(-(s - R) * mu / (2 * a1)) / s, R, omega2,
                               QuadratureConfig(1e-16, 1e-14), vectorized=True)
    else:
        d = scaled_exp_integral_e1(xr) - math.exp(xr - x2) * scaled_exp_integral_e1(x2)
    return 1.0 / d, math.exp(xr - x2) / d


def constant_diffusivity_slopes(problem, omega2, mu):
    """u'(R), u'(omega2), v'(omega2) of the closed-form constant-diffusivity profiles."""
    m, R = problem.model, problem.R
    a1, a2 = _constant(m.d1), _constant(m.d2)
    kr, k2 = _liquid_kernel(R, omega2, mu, a1)
    du = m.u_v - m.u_m
    up_r = -du * kr / R
    up_2 = -du * k2 / omega2
    vp_2 = -(m.v_m - m.v_inf) / (omega2 * scaled_exp_integral_e1(mu * omega2 / (2 * a2)))
    return up_r, up_2, vp_2


def _residuals_constant(problem, omega2, mu):
    m = problem.model
    up_r, up_2, vp_2 = constant_diffusivity_slopes(problem, omega2, mu)
    f1 = 2.0 * m.d1v * up_r - (mu * m.H_v - problem.q)
    f2 = 2.0 * m.d2m * vp_2 - 2.0 * m.d1m * up_2 - mu * m.H_m
    return f1, f2


def constant_profiles(problem, omega2, mu):
    """Closed-form evaluators u(omega), v(omega) for constant diffusivities."""
    m, R = problem.model, problem.R
    a1, a2 = _constant(m.d1), _constant(m.d2)
    xr, x2 = mu * R / (2 * a1), mu * omega2 / (2 * a1)
    s2 = scaled_exp_integral_e1(x2)
    den = scaled_exp_integral_e1(xr) - math.exp(xr - x2) * s2
    y2 = mu * omega2 / (2 * a2)
    sy2 = scaled_exp_integral_e1(y2)

    def u(w):
        w = np.asarray(w, dtype=float)
        x = mu * w / (2 * a1)
        num = np.exp(xr - x) * scaled_exp_integral_e1(x) - math.exp(xr - x2) * s2
        out = m.u_m + (m.u_v - m.u_m) * num / den
        return float(out) if out.ndim == 0 else out

    def v(w):
        w = np.asarray(w, dtype=float)
        y = mu * w / (2 * a2)
        out = m.v_inf + (m.v_m - m.v_inf) * np.exp(y2 - y) * scaled_exp_integral_e1(y) / sy2
        return float(out) if out.ndim == 0 else out

    return u, v


# ------------------------------------------------------------------------------
# fast diffusion d1 = D/u


class _FastDiffusion:
    """Pieces of the fast-diffusion closed form at a fixed speed mu.

    With p = omega u'/u and nu = omega u: ln p + p = A(nu) and
    int_{R u_v}^{omega u} dnu / (nu (1 + W(exp A))) = ln(omega/R).
    """

    def __init__(self, problem, mu):
        m, R = problem.model, problem.R
        self.problem, self.mu = problem, mu
        self.D = m.d1.D
        p_r = R * (mu * m.H_v - problem.q) / (2.0 * m.d1v * m.u_v)
        if not p_r > 0:
            raise DomainError("fast diffusion needs mu*H_v - q > 0")
        self.c = mu / (2.0 * self.D)
        self.const = math.log(p_r) + p_r + self.c * R * m.u_v
        self.nu0 = R * m.u_v
        self.quad = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-14)

    def A(self, nu):
        return -self.c * np.asarray(nu, dtype=float) + self.const

    def p(self, nu):
        return wright_omega(self.A(nu))

    def integrand(self, nu):
        nu = np.asarray(nu, dtype=float)
        return 1.0 / (nu * (1.0 + wright_omega(self.A(nu))))

    def integral(self, lo, hi):
        if lo == hi:
            return 0.0
        if hi < lo:
            return -adaptive_integrate(self.integrand, hi, lo, self.quad, vectorized=True)
        return adaptive_integrate(self.integrand, lo, hi, self.quad, vectorized=True)

    def implicit_residual(self, omega, u):
        return self.integral(self.nu0, omega * u) - math.log(omega / self.problem.R)


def _residuals_fast(problem, omega2, mu):
    m = problem.model
    fd = _FastDiffusion(problem, mu)
    nu2 = omega2 * m.u_m
    f1 = fd.integral(fd.nu0, nu2) - math.log(omega2 / problem.R)
    up_2 = fd.p(nu2) * m.u_m / omega2
    a2 = _constant(m.d2)
    vp_2 = -(m.v_m - m.v_inf) / (omega2 * scaled_exp_integral_e1(mu * omega2 / (2 * a2)))
    f2 = 2.0 * m.d2m * vp_2 - 2.0 * m.d1m * up_2 - mu * m.H_m
    return f1, f2


def fast_diffusion_profile(problem, omega2, mu, n_knots=257):
    """Evaluator u(omega) inverting the implicit relation by bracketed root finding."""
    m, R = problem.model, problem.R
    fd = _FastDiffusion(problem, mu)
    nu_lo, nu_hi = fd.nu0, omega2 * m.u_m
    knots = nu_lo + (nu_hi - nu_lo) * 0.5 * (1 - np.cos(np.linspace(0, math.pi, n_knots)))
    pieces = [fd.integral(a, b) for a, b in zip(knots[:-1], knots[1:])]
    cum = np.concatenate([[0.0], np.cumsum(pieces)])

    def one(w):
        if w == R:
            return m.u_v
        target = math.log(w / R)
        k = int(np.clip(np.searchsorted(cum, target) - 1, 0, n_knots - 2))
        g = lambda nu: cum[k] + fd.integral(knots[k], nu) - target
        lo, hi = knots[k], knots[k + 1]
        # widen when the target sits past the last knot (omega slightly beyond omega2)
        while g(hi) < 0:
            lo, hi = hi, hi + (hi - knots[0]) * 0.01
        nu = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
        return nu / w

    def u(w):
        if np.ndim(w) == 0:
            return one(float(w))
        wa = np.asarray(w, dtype=float)
        return np.array([one(x) for x in wa.ravel()]).reshape(wa.shape)

    return u, fd


# ------------------------------------------------------------------------------
# residual dispatch and the 2x2 root solve


def transcendental_residuals(problem: ReducedStefanProblem, omega2: float, mu: float):
    """(F1, F2): evaporation and Stefan balances of the closed-form profiles.

    Dispatches on the diffusivity families (constant pair or fast
    diffusion). Raises DomainError outside omega2 > R, mu > 0 and, for
    fast diffusion, mu*H_v - q > 0.
    """
    _check_domain(problem, omega2, mu)
    if is_constant_pair(problem.model):
        return _residuals_constant(problem, omega2, mu)
    if is_fast_diffusion(problem.model):
        return _residuals_fast(problem, omega2, mu)
    raise ValueError("closed-form residuals need a constant pair or d1 = D/u with constant d2")


def _safe_residuals(problem, w, mu):
    try:
        f = transcendental_residuals(problem, w, mu)
    except (DomainError, NonConvergence, ZeroDivisionError, OverflowError, ValueError):
        return None
    if not all(math.isfinite(v) for v in f):
        return None
    return np.array(f)


def _newton(problem, w, mu, cfg, wlo, whi, mlo, mhi):
    f = _safe_residuals(problem, w, mu)
    if f is None:
        return None
    for it in range(cfg.max_iters):
        norm = np.max(np.abs(f))
        if norm <= cfg.abs_tol:
            return w, mu, f, it
        jac = np.empty((2, 2))
        for j, (dw, dm) in enumerate(((1e-6 * w, 0.0), (0.0, 1e-6 * mu))):
            fj = _safe_residuals(problem, w + dw, mu + dm)
            if fj is None:
                fj = _safe_residuals(problem, w - dw, mu - dm)
                if fj is None:
                    return None
                dw, dm = -dw, -dm
            jac[:, j] = (fj - f) / (dw + dm)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-10:
            wn, mn = w + lam * step[0], mu + lam * step[1]
            if wlo * 0.5 + problem.R * 0.5 < wn and 0 < mn:
                fn = _safe_residuals(problem, wn, mn)
                if fn is not None and np.max(np.abs(fn)) < (1 - 1e-4 * lam) * norm:
                    break
            lam *= 0.5
        else:
            return None
        w, mu, f = wn, mn, fn
    return (w, mu, f, cfg.max_iters) if np.max(np.abs(f)) <= cfg.abs_tol else None


def _nested_roots(problem, cfg, wlo, whi, mlo, mhi):
    def omega2_of(mu):
        f_lo = _safe_residuals(problem, wlo, mu)
        f_hi = _safe_residuals(problem, whi, mu)
        if f_lo is None or f_hi is None or f_lo[0] * f_hi[0] > 0:
            return None
        return brentq(lambda w: transcendental_residuals(problem, w, mu)[0], wlo, whi,
                      xtol=1e-15, rtol=1e-15, maxiter=cfg.max_iters * 2)

    def g(mu):
        w = omega2_of(mu)
        return None if w is None else transcendental_residuals(problem, w, mu)[1]

    mus = np.geomspace(mlo, mhi, cfg.scan_points)
    vals = [g(m) for m in mus]
    roots = []
    for a, b, ga, gb in zip(mus[:-1], mus[1:], vals[:-1], vals[1:]):
        if ga is None or gb is None or ga * gb > 0:
            continue
        mu = brentq(lambda m: g(m), a, b, xtol=1e-15, rtol=1e-15, maxiter=cfg.max_iters * 2) \
            if ga * gb < 0 else (a if ga == 0 else b)
        roots.append((omega2_of(mu), mu))
    return roots


def _dedupe(roots):
    out = []
    for r in sorted(roots, key=lambda r: r[1]):
        if not any(abs(r[0] - s[0]) <= 1e-7 * s[0] and abs(r[1] - s[1]) <= 1e-7 * s[1]
                   for s in out):
            out.append(r)
    return out


def solve_transcendental(problem, cfg: RootSolveConfig | None = None):
    """All (omega2, mu) roots found in the bracket, smallest mu first, plus diagnostics."""
    cfg = cfg or RootSolveConfig()
    wlo, whi = cfg.omega2_range(problem.R)
    mlo, mhi = cfg.mu_bracket
    n = max(1, math.ceil(math.sqrt(cfg.multistart)))
    seeds = [(w, m) for w in np.geomspace(wlo, whi, n + 2)[1:-1]
             for m in np.geomspace(mlo, mhi, n + 2)[1:-1]][:cfg.multistart]
    found, iters = [], 0
    for w0, m0 in seeds:
        res = _newton(problem, w0, m0, cfg, wlo, whi, mlo, mhi)
        if res is not None:
            w, mu, _, it = res
            iters += it
            if wlo <= w <= whi and mlo <= mu <= mhi:
                found.append((w, mu))
    method = "newton"
    if not found:
        method = "nested"
        for w, mu in _nested_roots(problem, cfg, wlo, whi, mlo, mhi):
            res = _newton(problem, w, mu, cfg, wlo, whi, mlo, mhi)
            found.append((res[0], res[1]) if res is not None else (w, mu))
    roots = _dedupe(found)
    if not roots:
        raise NoRoot("no (omega2, mu) root in the bracket "
                     f"omega2 in [{wlo:.6g}, {whi:.6g}], mu in [{mlo:.6g}, {mhi:.6g}]")
    w, mu = roots[0]
    f1, f2 = transcendental_residuals(problem, w, mu)
    if max(abs(f1), abs(f2)) > cfg.abs_tol:
        raise NoRoot(f"root polish failed: |F| = {max(abs(f1), abs(f2)):.3e}")
    diag = {"F1": f1, "F2": f2, "root_method": method, "newton_iterations": iters,
            "roots_found": len(roots), "multiple_roots": len(roots) > 1}
    if len(roots) > 1:
        log.warning("multiple roots found; returning the smallest mu")
        diag["other_roots"] = [list(r) for r in roots[1:]]
    return w, mu, diag


def solve_constant_diffusivity(problem: ReducedStefanProblem,
                               cfg: RootSolveConfig | None = None) -> ParaboloidSolution:
    """Closed-form solution for constant d1 = a1, d2 = a2 (E1 kernels)."""
    if not is_constant_pair(problem.model):
        raise ValueError("solve_constant_diffusivity needs constant d1 and d2")
    w2, mu, diag = solve_transcendental(problem, cfg)
    u, v = constant_profiles(problem, w2, mu)
    m = problem.model
    wu = liquid_grid(problem.R, w2)
    wv = solid_grid(w2, far_field_radius(w2, mu, _constant(m.d2)))
    uu, vv = u(wu), v(wv)
    uu[0], uu[-1], vv[0] = m.u_v, m.u_m, m.v_m
    return ParaboloidSolution(wu, uu, wv, vv, w2, mu, problem.R, m.v_inf,
                              "ClosedFormConstant", diagnostics=diag, exact_u=u, exact_v=v)


def solve_fast_diffusion(problem: ReducedStefanProblem,
                         cfg: RootSolveConfig | None = None) -> ParaboloidSolution:
    """Closed-form solution for d1 = D/u, constant d2 (Lambert W kernel)."""
    if not is_fast_diffusion(problem.model):
        raise ValueError("solve_fast_diffusion needs d1 = D/u (u > 0) and constant d2")
    w2, mu, diag = solve_transcendental(problem, cfg)
    u, _ = fast_diffusion_profile(problem, w2, mu)
    _, v = constant_profiles_solid(problem, w2, mu)
    m = problem.model
    wu = liquid_grid(problem.R, w2)
    wv = solid_grid(w2, far_field_radius(w2, mu, _constant(m.d2)))
    uu = u(wu)
    vv = v(wv)
    uu[0], uu[-1], vv[0] = m.u_v, m.u_m, m.v_m
    return ParaboloidSolution(wu, uu, wv, vv, w2, mu, problem.R, m.v_inf,
                              "ClosedFormFastDiffusion", diagnostics=diag, exact_u=u, exact_v=v)


def constant_profiles_solid(problem, omega2, mu):
    """Solid-phase closed form for constant d2 (the liquid factor is unused)."""
    m = problem.model
    a2 = _constant(m.d2)
    y2 = mu * omega2 / (2 * a2)
    sy2 = scaled_exp_integral_e1(y2)

    def v(w):
        w = np.asarray(w, dtype=float)
        y = mu * w / (2 * a2)
        out = m.v_inf + (m.v_m - m.v_inf) * np.exp(y2 - y) * scaled_exp_integral_e1(y) / sy2
        return float(out) if out.ndim == 0 else out

    return None, v


# ------------------------------------------------------------------------------
# shooting


def _d(profile, x):
    return profile(x, extrapolate=True)


def _solid_reference_diffusivity(model):
    return max(float(_d(model.d2, model.v_m)), float(_d(model.d2, model.v_inf)))


def _ivp(fun, span, y0, events=None, t_eval=None):
    sol = solve_ivp(fun, span, y0, method="DOP853", rtol=_ODE_RTOL, atol=_ODE_ATOL,
                    events=events, t_eval=t_eval)
    if sol.status == -1:
        raise StiffnessError(f"ODE integration failed: {sol.message}")
    return sol


class _Shooter:
    """Integrates both phases for a trial speed mu.

    With g(x) = x, c = 1/2 (paraboloid) or g = 1, c = 1 (planar):
    liquid, u as independent variable, state (x, F) with F = g d1 u':
        dx/du = g d1 / F,  dF/du = -c mu g;
    solid, outward in x, state (v, G) with G = g d2 v':
        dv/dx = G / (g d2),  dG/dx = -c mu G / d2.
    The far-field mismatch v(x_max) - v_inf is the scalar residual in mu.
    """

    def __init__(self, problem: ReducedStefanProblem, x_cap: float):
        self.p = problem
        self.m = problem.model
        self.planar = problem.geometry == "planar"
        self.cap = x_cap
        self.c = 1.0 if self.planar else 0.5
        self.bc = 1.0 if self.planar else 2.0   # factor from grad(omega).grad(S)

    def g(self, x):
        return 1.0 if self.planar else x

    def liquid(self, mu, u_eval=None):
        m, p = self.m, self.p
        slope = (mu * m.H_v - p.q) / (self.bc * m.d1v)
        if slope == 0 or math.copysign(1, slope) != math.copysign(1, m.u_m - m.u_v):
            return None
        x0 = 0.0 if self.planar else p.R
        f0 = self.g(x0) * _d(m.d1, m.u_v) * slope

        def rhs(u, y):
            x, f = y
            gx = self.g(x)
            return [gx * _d(m.d1, u) / f, -self.c * mu * gx]

        def runaway(u, y):
            return self.cap - y[0]
        runaway.terminal = True

        def stall(u, y):
            return y[1]
        stall.terminal = True

        sol = _ivp(rhs, (m.u_v, m.u_m), [x0, f0], events=[runaway, stall], t_eval=u_eval)
        if sol.status == 1:
            return None
        x2, f2 = float(sol.y[0, -1]), float(sol.y[1, -1])
        if u_eval is not None:
            return x2, f2, sol
        return x2, f2

    def solid(self, mu, x2, f2, x_eval=None):
        m = self.m
        up2 = f2 / (self.g(x2) * _d(m.d1, m.u_m))
        vp2 = (self.bc * m.d1m * up2 + mu * m.H_m) / (self.bc * m.d2m)
        g0 = self.g(x2) * _d(m.d2, m.v_m) * vp2
        x_max = x2 + FAR_FIELD_LENGTHS * _solid_reference_diffusivity(m) / (self.c * mu)

        def rhs(x, y):
            v, gv = y
            dv = _d(m.d2, v)
            return [gv / (self.g(x) * dv), -self.c * mu * gv / dv]

        sol = _ivp(rhs, (x2, x_max), [m.v_m, g0], t_eval=x_eval)
        return float(sol.y[0, -1]) - m.v_inf, x_max, sol

    def mismatch(self, mu):
        try:
            liq = self.liquid(mu)
            if liq is None:
                return None
            r, _, _ = self.solid(mu, *liq)
        except (StiffnessError, ValueError, FloatingPointError):
            return None
        return r if math.isfinite(r) else None


def _shoot_roots(shooter, cfg):
    mlo, mhi = cfg.mu_bracket
    mus = np.geomspace(mlo, mhi, cfg.scan_points)
    vals = [shooter.mismatch(m) for m in mus]
    roots = []
    for a, b, ra, rb in zip(mus[:-1], mus[1:], vals[:-1], vals[1:]):
        if ra is None or rb is None or ra * rb > 0:
            continue
        if ra == 0 or rb == 0:
            roots.append(a if ra == 0 else b)
            continue

        def f(m):
            r = shooter.mismatch(m)
            if r is None:
                raise NoRoot("shooting residual undefined inside a bracket")
            return r
        try:
            roots.append(brentq(f, a, b, xtol=1e-15, rtol=1e-15, maxiter=cfg.max_iters * 2))
        except NoRoot:
            continue
    return sorted(set(roots)), int(sum(v is not None for v in vals))


def solve_shooting(problem: ReducedStefanProblem,
                   cfg: RootSolveConfig | None = None) -> ParaboloidSolution:
    """Shooting solution for arbitrary positive d1, d2.

    The liquid phase is integrated with u as independent variable, which
    pins u(R) = u_v, u(omega2) = u_m and the evaporation balance exactly;
    the Stefan balance seeds the outward solid integration, and mu is
    adjusted until the far-field value v(omega_max) = v_inf.
    """
    if problem.geometry != "paraboloid":
        raise ValueError("solve_shooting handles the paraboloidal geometry; use solve_planar")
    cfg = cfg or RootSolveConfig()
    _, whi = cfg.omega2_range(problem.R)
    shooter = _Shooter(problem, whi)
    roots, n_valid = _shoot_roots(shooter, cfg)
    if not roots:
        raise NoRoot(f"shooting found no speed in mu bracket {cfg.mu_bracket}")
    mu = roots[0]
    m = problem.model
    s = 0.5 * (1.0 - np.cos(np.linspace(0.0, math.pi, N_PROFILE)))
    u_knots = m.u_v + (m.u_m - m.u_v) * s
    u_knots[-1] = m.u_m
    w2, f2, liq = shooter.liquid(mu, u_eval=u_knots)
    r, w_max, _ = shooter.solid(mu, w2, f2)
    wv = solid_grid(w2, w_max)
    _, _, sol = shooter.solid(mu, w2, f2, x_eval=wv)
    wu = liq.y[0].copy()
    wu[0], wu[-1] = problem.R, w2
    vv = sol.y[0].copy()
    vv[0] = m.v_m
    diag = {"far_field_mismatch": float(r), "root_method": "shooting",
            "roots_found": len(roots), "multiple_roots": len(roots) > 1,
            "scan_valid_points": n_valid}
    if len(roots) > 1:
        diag["other_roots"] = [float(x) for x in roots[1:]]
    return ParaboloidSolution(wu, liq.t.copy(), wv, vv, float(w2), float(mu), problem.R,
                              m.v_inf, "Shooting", diagnostics=diag)


def solve_planar(problem: ReducedStefanProblem, cfg: RootSolveConfig | None = None,
                 method: str = "auto") -> PlanarSolution:
    """Planar traveling wave z = x3 - mu t with the evaporation plane at z = 0.

    Constant diffusivities have the elementary closed form
        mu = q / (H_v + d1v A / a1),  A = (u_v - u_m) + a1/d1m (H_m + d2m (v_m - v_inf)/a2),
        z2 = -(a1/mu) log(1 - (u_v - u_m)/A);
    other pairs, or method="shooting", use the shooting solver.
    """
    cfg = cfg or RootSolveConfig()
    m = problem.model
    if method not in ("auto", "closed-form", "shooting"):
        raise ValueError("method must be auto, closed-form or shooting")
    closed = is_constant_pair(m) and method != "shooting"
    if method == "closed-form" and not is_constant_pair(m):
        raise ValueError("planar closed form needs constant diffusivities")
    if closed:
        a1, a2 = _constant(m.d1), _constant(m.d2)
        du = m.u_v - m.u_m
        A = du + a1 / m.d1m * (m.H_m + m.d2m * (m.v_m - m.v_inf) / a2)
        mu = problem.q / (m.H_v + m.d1v * A / a1)
        ratio = 1.0 - du / A
        if not (mu > 0 and 0 < ratio < 1 or mu > 0 and ratio > 1 and du < 0):
            raise NoRoot("planar closed form has no admissible (z2, mu)")
        z2 = -(a1 / mu) * math.log(ratio)
        if not z2 > 0:
            raise NoRoot("planar closed form gives a non-positive liquid layer")
        k1 = (mu * m.H_v - problem.q) / m.d1v
        zu = liquid_grid(0.0 + 1e-300, z2)
        zu[0] = 0.0
        z_max = z2 + FAR_FIELD_LENGTHS * a2 / mu
        zv = z2 + (z_max - z2) * np.expm1(_SOLID_CLUSTER * np.linspace(0, 1, N_PROFILE)) \
            / math.expm1(_SOLID_CLUSTER)
        zv[-1] = z_max
        uu = m.u_v + k1 * (a1 / mu) * (-np.expm1(-mu * zu / a1))
        vv = m.v_inf + (m.v_m - m.v_inf) * np.exp(-mu * (zv - z2) / a2)
        uu[-1] = m.u_m
        return PlanarSolution(zu, uu, zv, vv, z2, mu, "ClosedFormConstant",
                              {"A": A})
    shooter = _Shooter(problem, math.inf)
    roots, _ = _shoot_roots(shooter, cfg)
    if not roots:
        raise NoRoot(f"planar shooting found no speed in mu bracket {cfg.mu_bracket}")
    mu = roots[0]
    s = 0.5 * (1.0 - np.cos(np.linspace(0.0, math.pi, N_PROFILE)))
    u_knots = m.u_v + (m.u_m - m.u_v) * s
    u_knots[-1] = m.u_m
    z2, f2, liq = shooter.liquid(mu, u_eval=u_knots)
    r, z_max, _ = shooter.solid(mu, z2, f2)
    zv = z2 + (z_max - z2) * np.expm1(_SOLID_CLUSTER * np.linspace(0, 1, N_PROFILE)) \
        / math.expm1(_SOLID_CLUSTER)
    zv[0], zv[-1] = z2, z_max
    _, _, sol = shooter.solid(mu, z2, f2, x_eval=zv)
    zu = liq.y[0].copy()
    zu[0], zu[-1] = 0.0, z2
    vv = sol.y[0].copy()
    vv[0] = m.v_m
    return PlanarSolution(zu, liq.t.copy(), zv, vv, float(z2), float(mu), "Shooting",
                          {"far_field_mismatch": float(r), "roots_found": len(roots)})


def choose_method(model: EnthalpyModel) -> str:
    if is_constant_pair(model):
        return "ClosedFormConstant"
    if is_fast_diffusion(model):
        return "ClosedFormFastDiffusion"
    return "Shooting"


def solve(problem: ReducedStefanProblem, method: str = "auto",
          cfg: RootSolveConfig | None = None):
    """Dispatch: closed form when the diffusivities match a known family, else shooting."""
    if problem.geometry == "planar":
        return solve_planar(problem, cfg, method)
    if method not in ("auto", "closed-form", "shooting"):
        raise ValueError("method must be auto, closed-form or shooting")
    tag = choose_method(problem.model)
    if method == "shooting":
        return solve_shooting(problem, cfg)
    if tag == "Shooting" and method == "closed-form":
        raise ValueError("no closed form for these diffusivities; use shooting")
    if tag == "ClosedFormConstant":
        return solve_constant_diffusivity(problem, cfg)
    if tag == "ClosedFormFastDiffusion":
        return solve_fast_diffusion(problem, cfg)
    return solve_shooting(problem, cfg)
