import numpy as np
import pytest

from qms.kernel import KernelModel, make_kernel
from qms.space import AtomicMeasure, QuasiMetricSpace


@pytest.fixture
def fix1():
    """Single atom, K = 1, sigma = 1."""
    sp = QuasiMetricSpace(["x0"], np.array([[1.0]]))
    kern = KernelModel(sp)
    sig = AtomicMeasure(sp, [1.0])
    return kern, sig


@pytest.fixture
def fix2():
    """Two atoms at quasi-distance 0.5, self-distance 1, unit weights."""
    sp = QuasiMetricSpace(["x1", "x2"], np.array([[1.0, 0.5], [0.5, 1.0]]))
    kern = KernelModel(sp)
    sig = AtomicMeasure(sp, [1.0, 1.0])
    return kern, sig


def scalar_kernel(k, w):
    """One-atom instance with K = k and sigma-weight w."""
    sp = QuasiMetricSpace(["x0"], np.array([[1.0 / k]]))
    return KernelModel(sp), AtomicMeasure(sp, [w])


def random_riesz(rng, n=8, alpha=None, dim=3):
    """Random Riesz instance: n points in a cube, random positive weights."""
    alpha = alpha if alpha is not None else float(rng.uniform(0.5, 2.5))
    coords = rng.uniform(0.0, 1.0, size=(n, dim))
    kern = make_kernel("riesz", coords=coords, alpha=alpha)
    sig = AtomicMeasure(kern.space, rng.uniform(0.1, 1.0, size=n))
    return kern, sig
