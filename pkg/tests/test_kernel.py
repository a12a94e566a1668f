import numpy as np
import pytest

from qms.kernel import (KernelModel, harnack_check, local_profile, make_kernel,
                        naim_transform, potential, potential_via_balls,
                        riesz_constant, split, lower_potential)
from qms.space import AtomicMeasure, QuasiMetricSpace

from conftest import random_riesz


def test_potential_fix2(fix2):
    kern, sig = fix2
    assert potential(kern, sig).tolist() == [3.0, 3.0]
    assert kern.potential(sig.weights).tolist() == [3.0, 3.0]


def test_ball_representation_fix2(fix2):
    kern, sig = fix2
    np.testing.assert_allclose(potential_via_balls(kern, sig), [3.0, 3.0],
                               rtol=1e-13)


def test_ball_representation_random():
    rng = np.random.default_rng(11)
    for _ in range(20):
        kern, sig = random_riesz(rng, n=int(rng.integers(2, 25)))
        np.testing.assert_allclose(potential_via_balls(kern, sig),
                                   potential(kern, sig), rtol=1e-12)


def test_split_identity(fix2):
    kern, sig = fix2
    L, U = split(kern, 2.0)
    np.testing.assert_allclose(L + U, kern.K, rtol=1e-15)
    # FIX-2 at x1, a = 2: far field 0.5 + 0.5, local 2
    assert (L @ sig.weights)[0] == pytest.approx(1.0)
    assert (U @ sig.weights)[0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        split(kern, 0.0)


def test_local_profile_fix2(fix2):
    kern, sig = fix2
    prof = local_profile(kern, sig, 2.0, 0)
    assert prof.M(2.0) == pytest.approx(2.0)        # (2 - 0.5) + (1 - 0.5)
    assert prof.N(0.5) == pytest.approx(2.5)        # (1/2)(1/0.25 + 1)
    assert prof.Mstar(2.0) >= prof.M(2.0)
    # N via the lower-split identity: L_a(g dsigma)(x) = q N with
    # g = L_a(x,.)^{q-1}
    a = 0.5
    g = np.minimum(kern.K[0], 1.0 / a)
    la = float(np.minimum(kern.K, 1.0 / a)[0] @ (g * sig.weights))
    assert la == pytest.approx(2.0 * prof.N(a))


def test_harnack_fix2(fix2):
    kern, sig = fix2
    assert harnack_check(kern, sig) <= 1.0


def test_harnack_random():
    rng = np.random.default_rng(5)
    for _ in range(10):
        kern, sig = random_riesz(rng, n=12)
        assert harnack_check(kern, sig) <= 1.0 + 1e-12


def test_riesz_constant():
    assert riesz_constant(3, 2.0) == pytest.approx(1.0 / (4.0 * np.pi), rel=1e-14)


def test_make_kernel_validation():
    coords = np.random.default_rng(0).uniform(size=(4, 3))
    with pytest.raises(ValueError):
        make_kernel("riesz", coords=coords, alpha=3.5)
    with pytest.raises(ValueError):
        make_kernel("green1d", grid=[0.0, 0.5])
    with pytest.raises(ValueError):
        make_kernel("modelC11", coords=coords, delta=np.ones(4), n=2)
    with pytest.raises(ValueError):
        make_kernel("poisson", coords=coords, t=[-1, 0, 0, 0])
    with pytest.raises(ValueError):
        make_kernel("wavelet")


def test_riesz_diagonal_fill():
    coords = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
    kern = make_kernel("riesz", coords=coords, alpha=2.0)
    rho = kern.space.rho
    # default self-distance = nearest-neighbor off-diagonal entry
    assert rho[0, 0] == pytest.approx(rho[0, 1])
    assert rho[2, 2] == pytest.approx(rho[1, 2])
    kern2 = make_kernel("riesz", coords=coords, alpha=2.0, self_distance=0.1)
    assert np.all(np.diag(kern2.space.rho) == 0.1)
    with pytest.raises(ValueError):
        make_kernel("riesz", coords=coords[:1], alpha=2.0)


def test_naim_transform_roundtrip():
    grid = np.linspace(0.1, 0.9, 9)
    kern = make_kernel("green1d", grid=grid)
    s = 1.0 / (grid * (1.0 - grid))
    nt = naim_transform(kern, s, s, 2.0)
    np.testing.assert_allclose(nt.kernel.K, s[:, None] * kern.K * s[None, :],
                               rtol=1e-13)
    sig = AtomicMeasure(kern.space, np.full(9, 0.1))
    f = np.linspace(0.2, 0.4, 9)
    np.testing.assert_allclose(nt.pull_back(nt.transform_f(f)), f, rtol=1e-14)
    # substituted measure keeps the nonlinear term aligned:
    # Kt(ft^q dsigmat) = s1 * K(f^q dsigma)
    lhs = nt.kernel.K @ (nt.transform_f(f) ** 2 * nt.transform_sigma(sig).weights)
    rhs = s * (kern.K @ (f ** 2 * sig.weights))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


def test_naim_transform_asymmetric_rejected():
    grid = np.linspace(0.1, 0.9, 5)
    kern = make_kernel("green1d", grid=grid)
    with pytest.raises(ValueError, match="symmetric"):
        naim_transform(kern, np.ones(5), np.linspace(1, 2, 5), 2.0)
    with pytest.raises(ValueError):
        naim_transform(kern, -np.ones(5), -np.ones(5), 2.0)
