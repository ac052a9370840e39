"""
Solve a constant-flux evaporation/melting problem, audit the 3-D fields
and print a few profile values.

    python demos/traveling_front.py
"""

import numpy as np

from stefan3d.material import FunctionProfile, MaterialSpec, goodman_transform
from stefan3d.solver import ReducedStefanProblem, solve
from stefan3d.symmetry import FluxSpec, classify_diffusivities, classify_flux
from stefan3d.verify import AuditConfig, audit, audit_failures

# temperature-dependent liquid conductivity, constant heat capacities
material = MaterialSpec(
    lambda1=FunctionProfile.power(2.0, 0.5, 1.0),
    lambda2=FunctionProfile.constant(3.0),
    c1=FunctionProfile.constant(1.0),
    c2=FunctionProfile.constant(1.5),
    H_v=1.0, H_m=1.0, T_v=3.0, T_m=2.0, T_inf=1.0,
)
model = goodman_transform(material)
flux = FluxSpec.axial(8.0)

print("flux case:", classify_flux(flux).table2_case,
      "diffusivity case:", classify_diffusivities(model.d1, model.d2))

problem = ReducedStefanProblem(model, R=1.0, q=8.0)
sol = solve(problem)
print(f"{sol.solver_tag}: omega2 = {sol.omega2:.12f}, mu = {sol.mu:.12f}")

w = np.linspace(sol.R, sol.omega2, 5)
for wi, ui in zip(w, sol.u(w)):
    print(f"  omega = {wi:.4f}  u = {ui:.6f}")

report = audit(sol, model, problem.q, AuditConfig(levels=2, n_points=500))
print(f"PDE order {report.convergence_order:.2f}, "
      f"Stefan flux residual {report.bc_stefan_flux:.1e}")
print("audit:", "passed" if not audit_failures(report) else audit_failures(report))
