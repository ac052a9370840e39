"""
Special functions and quadrature used by the closed-form traveling solutions.

Lambert W (principal branch), the exponential integral E1, the tail
integral Phi(omega) = E1(mu*omega/(2a)), and an adaptive Gauss-Kronrod
integrator that handles a semi-infinite upper limit by substitution.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NonConvergence

EULER_GAMMA = 0.57721566490153286060651209008240243
INV_E = math.exp(-1.0)
_EPS = np.finfo(float).eps
_MAX_HALLEY = 50


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


# ------------------------------------------------------------------------------
# Lambert W


def _lambert_guess(x):
    w = np.empty_like(x)
    near = x < -0.32
    mid = (~near) & (x <= 3.0)
    big = x > 3.0
    # branch-point series in p = sqrt(2(ex + 1))
    p = np.sqrt(np.maximum(2.0 * (math.e * x[near] + 1.0), 0.0))
    w[near] = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    w[mid] = np.log1p(x[mid])
    l1 = np.log(x[big])
    l2 = np.log(l1)
    w[big] = l1 - l2 + l2 / l1
    return w


def lambert_w0(x, tol: float = 1e-14):
    """Principal branch W0 of the Lambert function, w*exp(w) = x, w >= -1.

    Halley iteration from a series/asymptotic initial guess. Accepts
    scalars or arrays; scalars come back as float.

    Raises
    ------
    DomainError
        if any x < -1/e.
    NonConvergence
        if the residual is still above ``tol*max(1, |x|)`` after 50 steps
        (the bound is widened to the rounding floor (1 + |w|) eps for large w).
    """
    scalar = np.ndim(x) == 0
    xa = np.asarray(x, dtype=float).ravel().copy()
    if np.any(np.isnan(xa)):
        raise DomainError("lambert_w0 of NaN")
    # allow the branch point itself to be off by rounding
    if np.any(xa < -INV_E - 4 * _EPS):
        raise DomainError("lambert_w0 needs x >= -1/e")
    xa = np.maximum(xa, -INV_E)

    w = _lambert_guess(xa)
    at_branch = xa <= -INV_E
    w[at_branch] = -1.0
    zero = xa == 0.0
    w[zero] = 0.0
    active = ~(at_branch | zero)

    for _ in range(_MAX_HALLEY):
        if not active.any():
            break
        wa = w[active]
        ew = np.exp(wa)
        f = wa * ew - xa[active]
        wp1 = wa + 1.0
        denom = ew * wp1 - (wa + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w[active] = wa - step
        done = np.abs(step) <= 4 * _EPS * (1.0 + np.abs(wa))
        idx = np.flatnonzero(active)
        active[idx[done]] = False

    resid = np.abs(w * np.exp(w) - xa)
    # rounding of w alone moves w*exp(w) by about (1 + |w|) eps relative
    scale = np.maximum(1.0, np.abs(xa))
    bound = np.maximum(tol, 8 * _EPS * (1.0 + np.abs(w))) * scale
    if np.any(resid > bound):
        raise NonConvergence("lambert_w0 did not converge")
    return float(w[0]) if scalar else w.reshape(np.shape(x))


def wright_omega(a):
    """W(exp(a)) for real a without forming exp(a).

    Solves y + exp(y) = a for y = log W by Newton's method started to the
    right of the root (the map is convex and increasing, so the iterates
    decrease monotonically). Returns exp(y).
    """
    scalar = np.ndim(a) == 0
    aa = np.asarray(a, dtype=float).ravel()
    y = np.where(aa > 1.0, np.log(np.maximum(aa, 1.0)), aa)
    for _ in range(_MAX_HALLEY):
        ey = np.exp(y)
        step = (y + ey - aa) / (1.0 + ey)
        y = y - step
        if np.all(np.abs(step) <= 2 * _EPS * np.maximum(1.0, np.abs(y))):
            break
    else:
        raise NonConvergence("wright_omega did not converge")
    w = np.exp(y)
    return float(w[0]) if scalar else w.reshape(np.shape(a))


# ------------------------------------------------------------------------------
# Exponential integral


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, 200):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def _e1_continued_fraction(x: float) -> float:
    return _e1_cf_scaled(x) * math.exp(-x)


def _e1_cf_scaled(x: float) -> float:
    # modified Lentz evaluation of the Legendre continued fraction for exp(x) E1(x)
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise NonConvergence("E1 continued fraction did not converge")


def _e1_scalar(x: float) -> float:
    if not x > 0:
        raise DomainError(f"exp_integral_e1 needs x > 0, got {x!r}")
    if x <= 1.0:
        return _e1_series(x)
    if x > 745.0:
        return 0.0
    return _e1_continued_fraction(x)


def exp_integral_e1(x):
    """E1(x) = integral from x to infinity of exp(-t)/t dt, for x > 0."""
    if np.ndim(x) == 0:
        return _e1_scalar(float(x))
    xa = np.asarray(x, dtype=float)
    return np.array([_e1_scalar(v) for v in xa.ravel()]).reshape(xa.shape)


def scaled_exp_integral_e1(x):
    """exp(x) * E1(x) for x > 0; finite where E1 itself underflows."""
    def one(v):
        if not v > 0:
            raise DomainError(f"scaled_exp_integral_e1 needs x > 0, got {v!r}")
        return math.exp(v) * _e1_series(v) if v <= 1.0 else _e1_cf_scaled(v)
    if np.ndim(x) == 0:
        return one(float(x))
    xa = np.asarray(x, dtype=float)
    return np.array([one(v) for v in xa.ravel()]).reshape(xa.shape)


def phi_integral(omega, mu: float, a: float):
    """Tail integral of exp(-mu*s/(2a))/s from omega to infinity.

    This is the kernel of the constant-diffusivity radial profile; its
    derivative in omega is -exp(-mu*omega/(2a))/omega.
    """
    if not (mu > 0 and a > 0):
        raise DomainError("phi_integral needs mu > 0 and a > 0")
    if np.any(np.asarray(omega) <= 0):
        raise DomainError("phi_integral needs omega > 0")
    return exp_integral_e1(np.asarray(omega, dtype=float) * mu / (2.0 * a)
                           if np.ndim(omega) else float(omega) * mu / (2.0 * a))


# ------------------------------------------------------------------------------
# Adaptive quadrature

# 15-point Kronrod nodes / weights and embedded 7-point Gauss weights
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(g, a, b, vectorized):
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    x = center + half * _NODES
    if vectorized:
        fx = np.asarray(g(x), dtype=float)
    else:
        fx = np.array([g(v) for v in x], dtype=float)
    if not np.all(np.isfinite(fx)):
        raise NonConvergence(f"integrand not finite on [{a}, {b}]")
    k = half * np.dot(_KW, fx)
    gauss = half * np.dot(_GW, fx)
    return k, abs(k - gauss)


def adaptive_integrate(f: Callable, lo: float, hi: float,
                       cfg: QuadratureConfig | None = None,
                       vectorized: bool = False) -> float:
    """Integrate f over [lo, hi] by globally adaptive Gauss-Kronrod (7/15).

    ``hi`` may be ``math.inf``; the tail is mapped onto [0, 1) with
    t = lo + s/(1-s). With ``vectorized=True`` f is called once per panel
    on an array of nodes.

    Raises NonConvergence when the subdivision cap is exceeded.
    """
    cfg = cfg or QuadratureConfig()
    if not lo < hi:
        raise ValueError("adaptive_integrate needs lo < hi")

    if math.isinf(hi):
        def g(s):
            s = np.asarray(s, dtype=float)
            one_minus = 1.0 - s
            t = lo + s / one_minus
            val = f(t) if vectorized else f(float(t))
            return np.asarray(val, dtype=float) / (one_minus * one_minus)
        a, b = 0.0, 1.0
    else:
        g = f
        a, b = float(lo), float(hi)

    val, err = _gk15(g, a, b, vectorized)
    heap = [(-err, a, b, val, err)]
    total, total_err = val, err
    frozen = []
    n_sub = 0
    min_width = 64 * _EPS * max(abs(a), abs(b), b - a)
    while total_err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if n_sub >= cfg.max_subdivisions:
            raise NonConvergence(
                f"adaptive_integrate: {n_sub} subdivisions, error {total_err:.3e}")
        _, pa, pb, pval, perr = heapq.heappop(heap)
        mid = 0.5 * (pa + pb)
        if pb - pa < min_width:
            # cannot refine further; accept the panel as is
            frozen.append(pval)
            total_err -= perr
            continue
        lv, le = _gk15(g, pa, mid, vectorized)
        rv, re = _gk15(g, mid, pb, vectorized)
        total += lv + rv - pval
        total_err += le + re - perr
        heapq.heappush(heap, (-le, pa, mid, lv, le))
        heapq.heappush(heap, (-re, mid, pb, rv, re))
        n_sub += 1
    # re-sum to shed accumulated rounding from the running updates
    return float(math.fsum([item[3] for item in heap] + frozen))
