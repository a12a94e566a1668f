"""Build quasi-metric spaces and kernels, and check their certificates.

Walks the two smallest fixtures used throughout the test suite: a single
atom (everything computable by hand) and a symmetric two-point space.
"""

import numpy as np

from qms import (AtomicMeasure, KernelModel, QuasiMetricSpace,
                 estimate_kappa, local_profile, make_kernel,
                 potential_via_balls, split)

# --- two-point space: rho(x,x) = 1, rho(x1,x2) = 1/2 --------------------
space = QuasiMetricSpace(["x1", "x2"], np.array([[1.0, 0.5], [0.5, 1.0]]))
kern = KernelModel(space)
sigma = AtomicMeasure(space, [1.0, 1.0])

kap, exact, witness = estimate_kappa(space)
print(f"quasi-triangle constant: {kap} (exact={exact}, witness={witness})")

# potential two ways: direct sum of K against weights, and the
# ball-representation integral of |B_r| / r^2
direct = kern.potential(sigma.weights)
balls = potential_via_balls(kern, sigma)
print("K(sigma) direct      :", direct)          # [3, 3]
print("K(sigma) via balls   :", balls)
assert np.allclose(direct, balls, rtol=1e-14)

# lower/upper split at scale a: L_a = min(K, 1/a) tails, U_a singularity
L, U = split(kern, 2.0)
print("L_2 sigma:", L @ sigma.weights, " U_2 sigma:", U @ sigma.weights)

# local profile at x1: M(x,a) mass of the singular part, N(x,a) tail
prof = local_profile(kern, sigma, 2.0, "x1")
print(f"M(x1, 2) = {prof.M(2.0)}, N(x1, 2) = {prof.N(2.0)}")

# --- generated families --------------------------------------------------
rng = np.random.default_rng(0)
pts = rng.uniform(size=(40, 3))
riesz = make_kernel("riesz", alpha=2.0, dim=3, coords=pts)
print("riesz kernel on 40 random points, kappa_hat =",
      estimate_kappa(riesz.space)[0])
