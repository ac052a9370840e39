"""
Show how far the audit residuals move when a correct solution is
perturbed by 1% in the u-scale, in omega2 and in mu.

    python demos/negative_controls.py
"""

from dataclasses import replace

from stefan3d.material import EnthalpyModel, FunctionProfile
from stefan3d.solver import ReducedStefanProblem, solve
from stefan3d.verify import AuditConfig, audit, audit_failures

d = FunctionProfile.constant(1.0)
model = EnthalpyModel(d, d, u_v=2.0, u_m=1.0, v_m=1.0, v_inf=0.0, H_v=1.0, H_m=1.0)
problem = ReducedStefanProblem(model, R=1.0, q=5.0)
sol = replace(solve(problem), exact_u=None, exact_v=None)
cfg = AuditConfig(n_points=400)


def stretched(s, f):
    w2 = s.omega2 * f
    wu = s.R + (s.omega_u - s.R) * (w2 - s.R) / (s.omega2 - s.R)
    return replace(s, omega_u=wu, omega_v=s.omega_v + (w2 - s.omega2), omega2=w2)


cases = {
    "exact": sol,
    "u x 1.01": replace(sol, u_values=sol.u_values * 1.01),
    "omega2 x 1.01": stretched(sol, 1.01),
    "mu x 1.01": replace(sol, mu=sol.mu * 1.01),
}
keys = ("pde_liquid_l2", "bc_evaporation_flux", "bc_stefan_flux", "bc_stefan_dirichlet_u")
print(f"{'case':<14}" + "".join(f"{k:>24}" for k in keys))
for name, s in cases.items():
    rep = audit(s, model, problem.q, cfg)
    row = "".join(f"{getattr(rep, k):>24.2e}" for k in keys)
    print(f"{name:<14}{row}   failed: {', '.join(audit_failures(rep)) or '-'}")
