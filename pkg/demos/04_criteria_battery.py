"""Run every solvability criterion on one instance and get a verdict.

The two-point fixture with full forcing sits far above the sharp
threshold, so the battery certifies unsolvability; scaling the forcing
down pushes it into the certified-solvable regime.
"""

import numpy as np

from qms.criteria import (hardy_property_check, infinitesimal_constant,
                          iterated_weight_constants, phi_ball,
                          pointwise_constant, structural_conditions,
                          verdict, weighted_norm_constant)
from qms.kernel import KernelModel
from qms.space import AtomicMeasure, QuasiMetricSpace

sp = QuasiMetricSpace(["x1", "x2"], np.array([[1.0, 0.5], [0.5, 1.0]]))
kern = KernelModel(sp)
sigma = AtomicMeasure(sp, [1.0, 1.0])
omega = AtomicMeasure(sp, [1.0, 1.0])
q = 2.0

print("pointwise constant    :", pointwise_constant(kern, sigma, q, omega))
print("infinitesimal constant:", infinitesimal_constant(kern, sigma, q, omega))
print("weighted norm constant:", weighted_norm_constant(kern, sigma, q, omega))
print("hardy ratio (s=2, g=1):", hardy_property_check(kern, sigma, 2.0,
                                                      np.ones(2)))
print("iterated constants    :", iterated_weight_constants(kern, sigma, q,
                                                           omega, 3))
print("structural            :", structural_conditions(kern, sigma, q))
print("phi ball at x1, a=1   :", phi_ball(kern, sigma, q, "x1", 1.0).c)

rep = verdict(kern, sigma, q, omega)
print(f"\nfull forcing : {rep.verdict} (C = {rep.pointwise_C}, "
      f"threshold = {rep.threshold})")

small = AtomicMeasure(sp, [0.01, 0.01])
rep = verdict(kern, sigma, q, small)
print(f"small forcing: {rep.verdict} (C = {rep.pointwise_C:.4f})")
