"""Bracket the solvability-gauge norm and evaluate its dual program.

|f|_Z is the gauge of the solvable set: the infimum of lambda such that
f / lambda still admits a solution.  On the single atom with q = 2 the
threshold f* = 1/4 gives |f|_Z = f / f* = 4 f exactly, which the
bisection bracket reproduces.  The dual program is evaluated by
projected gradient; the constant placement between the raw infimum and
the dual norm is an open question, so both scalings are reported.
"""

import numpy as np

from qms.kernel import KernelModel
from qms.solver import apply_A, znorm, zprime_norm
from qms.space import AtomicMeasure, QuasiMetricSpace

sp = QuasiMetricSpace(["x"], np.array([[1.0]]))
kern, sigma = KernelModel(sp), AtomicMeasure(sp, [1.0])
q = 2.0

f = np.array([0.1])
br = znorm(kern, sigma, q, f, tol=1e-3)
print(f"|f|_Z bracket: [{br.lower:.5f}, {br.upper:.5f}]  (exact 0.4, "
      f"method={br.method})")

# norm relation under the nonlinear operator: |Af| <= |f|^q up to the
# sharp constant in the converse direction
baf = znorm(kern, sigma, q, apply_A(kern, sigma, q, f), tol=1e-3)
print(f"|Af|_Z bracket: [{baf.lower:.6f}, {baf.upper:.6f}]  "
      f"(|f|^q = {br.upper ** q:.6f})")

# dual program on g = 1: raw infimum 1, scaled value p q^{p-1} = 4
res = zprime_norm(kern, sigma, q, np.array([1.0]))
print(f"Z' program: raw = {res.raw}, scaled = {res.scaled}, "
      f"duality ratio = {res.raw / res.scaled}")
print("(constant placement reported, not asserted: open question)")
