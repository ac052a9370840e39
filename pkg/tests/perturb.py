"""Deliberately wrong solutions used as negative controls for the audit."""

from dataclasses import replace


def tabulated(sol):
    """The same solution without its closed-form evaluators."""
    return replace(sol, exact_u=None, exact_v=None)


def scale_u(sol, factor):
    base = tabulated(sol)
    return replace(base, u_values=base.u_values * factor)


def remap_omega2(sol, factor):
    # stretch the liquid profile onto [R, factor*omega2] and shift the solid with it
    base = tabulated(sol)
    w2 = sol.omega2 * factor
    wu = sol.R + (base.omega_u - sol.R) * (w2 - sol.R) / (sol.omega2 - sol.R)
    return replace(base, omega_u=wu, omega_v=base.omega_v + (w2 - sol.omega2), omega2=w2)


def scale_mu(sol, factor):
    return replace(tabulated(sol), mu=sol.mu * factor)


PERTURBATIONS = {"u-scale": scale_u, "omega2": remap_omega2, "mu": scale_mu}


def amplification(report, baseline):
    """Largest ratio of a residual to its baseline value (floored at 1e-300)."""
    pert, base = report.as_dict(), baseline.as_dict()
    keys = [k for k in base if k.startswith(("pde_", "bc_", "farfield"))]
    return max(pert[k] / max(base[k], 1e-300) for k in keys)
