"""
Physical material description and the enthalpy (Goodman/Kirchhoff) substitution.

The substitution u = phi_1(T) = int_0^T C_1, v = phi_2(T) = int_0^T C_2 turns
the two heat equations with temperature-dependent conductivity and capacity
into divergence-form equations u_t = div(d_1(u) grad u) with diffusivity
d_k = lambda_k / C_k evaluated at phi_k^{-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import RangeError, TransformError
from .specialfn import QuadratureConfig, adaptive_integrate

FAMILIES = ("constant", "power", "exponential", "tabulated")
DEFAULT_KNOTS = 512


@dataclass(frozen=True, eq=False)
class FunctionProfile:
    """A scalar coefficient function of one variable.

    family is one of ``constant`` (c), ``power`` D*(x + shift)**alpha,
    ``exponential`` D*exp(alpha*x) or ``tabulated`` (monotone cubic through
    knots; evaluation outside the knot range is an error).
    """

    family: str
    c: float = 0.0
    D: float = 0.0
    alpha: float = 0.0
    shift: float = 0.0
    args: tuple = ()
    values: tuple = ()
    _interp: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown profile family {self.family!r}")
        if self.family == "constant":
            if not math.isfinite(self.c):
                raise ValueError("constant profile needs a finite value")
        elif self.family in ("power", "exponential"):
            if not (math.isfinite(self.D) and math.isfinite(self.alpha)
                    and math.isfinite(self.shift)):
                raise ValueError(f"{self.family} profile needs finite coefficients")
            if self.D == 0:
                raise ValueError(f"{self.family} profile needs D != 0")
        else:
            x = np.asarray(self.args, dtype=float)
            y = np.asarray(self.values, dtype=float)
            if x.ndim != 1 or x.size < 2 or x.shape != y.shape:
                raise ValueError("tabulated profile needs >= 2 matching knots")
            if not np.all(np.diff(x) > 0):
                raise ValueError("tabulated knots must be strictly increasing")
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
                raise ValueError("tabulated knots must be finite")
            object.__setattr__(self, "_interp", PchipInterpolator(x, y, extrapolate=True))

    # constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, c):
        return cls("constant", c=float(c))

    @classmethod
    def power(cls, D, alpha, shift=0.0):
        return cls("power", D=float(D), alpha=float(alpha), shift=float(shift))

    @classmethod
    def exponential(cls, D, alpha):
        return cls("exponential", D=float(D), alpha=float(alpha))

    @classmethod
    def tabulated(cls, args, values):
        return cls("tabulated", args=tuple(float(a) for a in args),
                   values=tuple(float(v) for v in values))

    # evaluation -------------------------------------------------------------

    @property
    def domain(self):
        if self.family == "tabulated":
            return self.args[0], self.args[-1]
        if self.family == "power" and self.alpha != int(self.alpha):
            return -self.shift, math.inf
        return -math.inf, math.inf

    def __call__(self, x, extrapolate: bool = False):
        """Evaluate at x (scalar or array).

        With ``extrapolate=True`` tabulated profiles are held constant
        beyond their end knots instead of raising RangeError.
        """
        xa = np.asarray(x, dtype=float)
        if self.family == "constant":
            out = np.full_like(xa, self.c)
        elif self.family == "power":
            base = xa + self.shift
            if self.alpha != int(self.alpha) and np.any(base < 0):
                raise RangeError("power profile evaluated at negative base")
            with np.errstate(divide="ignore"):
                out = self.D * np.power(base, self.alpha)
        elif self.family == "exponential":
            out = self.D * np.exp(self.alpha * xa)
        else:
            lo, hi = self.args[0], self.args[-1]
            if extrapolate:
                xa = np.clip(xa, lo, hi)
            else:
                span = hi - lo
                if np.any(xa < lo - 1e-12 * span) or np.any(xa > hi + 1e-12 * span):
                    raise RangeError(
                        f"tabulated profile evaluated outside [{lo:.6g}, {hi:.6g}]")
                xa = np.clip(xa, lo, hi)
            out = self._interp(xa)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def is_constant(self):
        return (self.family == "constant"
                or (self.family in ("power", "exponential") and self.alpha == 0))

    def constant_value(self):
        if self.family == "constant":
            return self.c
        if self.is_constant:
            return self.D
        raise ValueError(f"{self.family} profile is not constant")

    def as_dict(self):
        if self.family == "constant":
            return {"family": "constant", "value": self.c}
        if self.family == "power":
            return {"family": "power", "D": self.D, "alpha": self.alpha, "shift": self.shift}
        if self.family == "exponential":
            return {"family": "exponential", "D": self.D, "alpha": self.alpha}
        return {"family": "tabulated", "args": list(self.args), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d):
        fam = d.get("family")
        if fam == "constant":
            return cls.constant(d["value"])
        if fam == "power":
            return cls.power(d["D"], d["alpha"], d.get("shift", 0.0))
        if fam == "exponential":
            return cls.exponential(d["D"], d["alpha"])
        if fam == "tabulated":
            return cls.tabulated(d["args"], d["values"])
        raise ValueError(f"unknown profile family {fam!r}")

    def __eq__(self, other):
        if not isinstance(other, FunctionProfile):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(repr(self.as_dict()))


@dataclass(frozen=True)
class MaterialSpec:
    """Physical two-phase material (liquid = 1, solid = 2), SI units."""

    lambda1: FunctionProfile
    lambda2: FunctionProfile
    c1: FunctionProfile
    c2: FunctionProfile
    H_v: float
    H_m: float
    T_v: float
    T_m: float
    T_inf: float

    def __post_init__(self):
        if not (self.H_v > 0 and self.H_m > 0):
            raise ValueError("latent heats H_v, H_m must be positive")
        if not self.T_v > self.T_m > self.T_inf:
            raise ValueError("temperatures must satisfy T_v > T_m > T_inf")


class EnthalpyMap:
    """Monotone map T -> phi(T) = int_0^T C for one phase, with its inverse."""

    def __init__(self, temps, enthalpies, slope=None):
        self.slope = slope
        self.temps = np.asarray(temps, dtype=float)
        self.enthalpies = np.asarray(enthalpies, dtype=float)
        if slope is None:
            self._fwd = PchipInterpolator(self.temps, self.enthalpies, extrapolate=False)

    @property
    def enthalpy_range(self):
        if self.slope is not None:
            return -math.inf, math.inf
        return float(self.enthalpies[0]), float(self.enthalpies[-1])

    def forward(self, T):
        if self.slope is not None:
            return self.slope * np.asarray(T, dtype=float)
        Ta = np.asarray(T, dtype=float)
        if np.any(Ta < self.temps[0]) or np.any(Ta > self.temps[-1]):
            raise RangeError("temperature outside tabulated range")
        out = self._fwd(Ta)
        return float(out) if np.ndim(out) == 0 else out

    def inverse(self, value: float) -> float:
        value = float(value)
        if self.slope is not None:
            return value / self.slope
        lo, hi = self.enthalpy_range
        if not lo <= value <= hi:
            raise RangeError(f"enthalpy {value:.6g} outside [{lo:.6g}, {hi:.6g}]")
        i = int(np.searchsorted(self.enthalpies, value))
        if i == 0:
            return float(self.temps[0])
        if self.enthalpies[i - 1] == value:
            return float(self.temps[i - 1])
        a, b = self.temps[i - 1], self.temps[min(i, len(self.temps) - 1)]
        return brentq(lambda T: self._fwd(T) - value, a, b, xtol=1e-15, rtol=1e-15)


@dataclass(frozen=True)
class EnthalpyModel:
    """Enthalpy-form problem data.

    d1v, d1m, d2m default to d1(u_v), d1(u_m), d2(v_m). They are stored
    separately because the equivalence scalings act on them differently
    from the diffusivity functions.
    """

    d1: FunctionProfile
    d2: FunctionProfile
    u_v: float
    u_m: float
    v_m: float
    v_inf: float
    H_v: float
    H_m: float
    d1v: Optional[float] = None
    d1m: Optional[float] = None
    d2m: Optional[float] = None
    liquid_map: Optional[EnthalpyMap] = field(default=None, compare=False, repr=False)
    solid_map: Optional[EnthalpyMap] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.u_v == self.u_m:
            raise ValueError("u_v and u_m must differ")
        if self.v_m == self.v_inf:
            raise ValueError("v_m and v_inf must differ")
        if not (self.H_v > 0 and self.H_m > 0):
            raise ValueError("latent heats must be positive")
        for name, prof, a, b in (("d1", self.d1, self.u_v, self.u_m),
                                 ("d2", self.d2, self.v_m, self.v_inf)):
            grid = np.linspace(min(a, b), max(a, b), 65)
            vals = np.asarray(prof(grid))
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                raise ValueError(f"{name} must be strictly positive on its phase range")
        if self.d1v is None:
            object.__setattr__(self, "d1v", float(self.d1(self.u_v)))
        if self.d1m is None:
            object.__setattr__(self, "d1m", float(self.d1(self.u_m)))
        if self.d2m is None:
            object.__setattr__(self, "d2m", float(self.d2(self.v_m)))

    @property
    def is_consistent(self):
        """True when the threshold diffusivities equal d_k at the thresholds."""
        return (math.isclose(self.d1v, self.d1(self.u_v), rel_tol=1e-12)
                and math.isclose(self.d1m, self.d1(self.u_m), rel_tol=1e-12)
                and math.isclose(self.d2m, self.d2(self.v_m), rel_tol=1e-12))

    def with_values(self, **changes):
        return replace(self, **changes)


# ------------------------------------------------------------------------------
# Goodman substitution


def _composed_constant_capacity(lam: FunctionProfile, c: float) -> FunctionProfile:
    """lambda(u/c)/c in closed form when the capacity is the constant c."""
    if lam.family == "constant":
        return FunctionProfile.constant(lam.c / c)
    if lam.family == "power":
        return FunctionProfile.power(lam.D * c ** (-lam.alpha - 1.0), lam.alpha, c * lam.shift)
    if lam.family == "exponential":
        return FunctionProfile.exponential(lam.D / c, lam.alpha / c)
    return FunctionProfile.tabulated(np.asarray(lam.args) * c, np.asarray(lam.values) / c)


def _phase_transform(lam, cap, t_lo, t_hi, quad, n_knots):
    # returns (enthalpy map, diffusivity profile) over [t_lo, t_hi]
    if cap.is_constant:
        c = cap.constant_value()
        if c <= 0:
            raise TransformError("heat capacity must be positive")
        return EnthalpyMap(None, None, slope=c), _composed_constant_capacity(lam, c)

    t_lo, t_hi = min(t_lo, 0.0), max(t_hi, 0.0)
    temps = np.union1d(np.linspace(t_lo, t_hi, n_knots), [0.0])
    probe = np.linspace(t_lo, t_hi, 4 * n_knots)
    if np.any(np.asarray(cap(probe)) <= 0) or np.any(np.asarray(cap(temps)) <= 0):
        raise TransformError("heat capacity is not positive on the temperature range")

    pieces = np.array([
        adaptive_integrate(cap, a, b, quad, vectorized=True)
        for a, b in zip(temps[:-1], temps[1:])])
    i0 = int(np.flatnonzero(temps == 0.0)[0])
    phi = np.zeros_like(temps)
    phi[i0 + 1:] = np.cumsum(pieces[i0:])
    phi[:i0] = -np.cumsum(pieces[:i0][::-1])[::-1]

    lam_vals = np.asarray(lam(temps), dtype=float)
    if np.any(lam_vals <= 0):
        raise TransformError("conductivity is not positive on the temperature range")
    d = FunctionProfile.tabulated(phi, lam_vals / np.asarray(cap(temps)))
    return EnthalpyMap(temps, phi), d


def goodman_transform(spec: MaterialSpec, quad: QuadratureConfig | None = None,
                      n_knots: int = DEFAULT_KNOTS) -> EnthalpyModel:
    """Map a physical material onto the enthalpy formulation.

    Constant capacities give exact closed-form diffusivities; otherwise the
    enthalpy maps and diffusivities are tabulated on ``n_knots`` temperatures
    (monotone cubic). The lower limit of the enthalpy integrals is 0.
    """
    quad = quad or QuadratureConfig(abs_tol=1e-14, rel_tol=1e-13)
    liq_map, d1 = _phase_transform(spec.lambda1, spec.c1, spec.T_m, spec.T_v, quad, n_knots)
    sol_map, d2 = _phase_transform(spec.lambda2, spec.c2, spec.T_inf, spec.T_m, quad, n_knots)

    def integral(cap, T):
        if cap.is_constant:
            return cap.constant_value() * T
        if T == 0:
            return 0.0
        val = adaptive_integrate(cap, min(0.0, T), max(0.0, T), quad, vectorized=True)
        return val if T > 0 else -val

    u_v = integral(spec.c1, spec.T_v)
    u_m = integral(spec.c1, spec.T_m)
    v_m = integral(spec.c2, spec.T_m)
    v_inf = integral(spec.c2, spec.T_inf)
    return EnthalpyModel(d1=d1, d2=d2, u_v=u_v, u_m=u_m, v_m=v_m, v_inf=v_inf,
                         H_v=spec.H_v, H_m=spec.H_m,
                         liquid_map=liq_map, solid_map=sol_map)


def invert_enthalpy(model: EnthalpyModel, phase: str, value: float) -> float:
    """Temperature whose enthalpy in ``phase`` ('liquid' or 'solid') is ``value``."""
    if phase not in ("liquid", "solid"):
        raise ValueError("phase must be 'liquid' or 'solid'")
    emap = model.liquid_map if phase == "liquid" else model.solid_map
    if emap is None:
        raise ValueError("model carries no enthalpy map; build it with goodman_transform")
    return emap.inverse(value)
