"""Nonlinear capacities: primal value, independent dual certificate,
KKT residual, and the ball upper bound.

Cap(E) = inf { sum sigma_j g_j^p : g >= 0, K(g sigma) >= 1 on E }.
On the two-point fixture with E = {x1} the closed form is 0.2 with
optimizer g = (0.2, 0.4).
"""

import numpy as np

from qms.capacity import (capacity, capacity_ball_bounds_check,
                          capacity_ball_upper, capacity_condition_constant)
from qms.kernel import KernelModel
from qms.space import AtomicMeasure, QuasiMetricSpace

sp = QuasiMetricSpace(["x1", "x2"], np.array([[1.0, 0.5], [0.5, 1.0]]))
kern = KernelModel(sp)
sigma = AtomicMeasure(sp, [1.0, 1.0])

res = capacity(kern, sigma, 2.0, [0])
print(f"Cap({{x1}}) = {res.value:.10f}  (exact 0.2)")
print(f"  g* = {np.round(res.g_star, 6)}")
print(f"  dual bound = {res.dual_bound:.10f}  (weak duality, solver-free)")
print(f"  kkt residual = {res.kkt_residual:.2e}")

# upper bound Cap B <= (2 kappa)^p N^{-p/q} on a ball, with the explicit
# feasible test function that proves it
ub = capacity_ball_upper(kern, sigma, 2.0, 2.0, "x1", 0.5)
print(f"\nball B_0.5(x1): feasible energy {ub.feasible_value:.4f} "
      f"<= bound {ub.bound:.4f}")

rows, band = capacity_ball_bounds_check(kern, sigma, 2.0, 2.0)
print("observed Cap * N^(p/q) band over all breakpoint balls:", band)

best, witness = capacity_condition_constant(kern, sigma, 2.0, sigma)
print(f"\ncapacity condition constant sup |E|_omega / Cap E = {best:.4f} "
      f"at E = {witness}")
