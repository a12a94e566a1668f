import numpy as np
import pytest

from qms.capacity import (capacity, capacity_ball_bounds_check,
                          capacity_ball_upper, capacity_condition_constant,
                          lemma_5_5_check)
from qms.kernel import KernelModel
from qms.space import AtomicMeasure, QuasiMetricSpace

from conftest import random_riesz


def test_capacity_fix2_closed_form(fix2):
    kern, sig = fix2
    # min g1^2 + g2^2 subject to g1 + 2 g2 >= 1: least-norm solution
    res = capacity(kern, sig, 2.0, [0])
    assert res.value == pytest.approx(0.2, abs=1e-8)
    np.testing.assert_allclose(res.g_star, [0.2, 0.4], atol=1e-6)
    assert res.dual_bound <= res.value + 1e-12
    assert res.value - res.dual_bound <= 1e-6
    assert res.kkt_residual <= 1e-6


def test_capacity_fix1_all_p(fix1):
    kern, sig = fix1
    for p in (1.5, 2.0, 3.0):
        res = capacity(kern, sig, p, [0])
        assert res.value == pytest.approx(1.0, rel=1e-7)


def test_capacity_sigma_homogeneity(fix2):
    # sigma -> c*sigma with g -> g/c leaves the constraint invariant and
    # scales the energy by c^{1-p}
    kern, sig = fix2
    for p in (1.5, 2.0, 3.0):
        doubled = AtomicMeasure(kern.space, 2.0 * sig.weights)
        r1 = capacity(kern, sig, p, [0])
        r2 = capacity(kern, doubled, p, [0])
        assert r2.value == pytest.approx(2.0 ** (1 - p) * r1.value, rel=1e-6)


def test_capacity_kernel_scaling():
    # K -> lambda K means rho -> rho/lambda; Cap scales as lambda^{-p}
    rho = np.array([[1.0, 0.5], [0.5, 1.0]])
    lam, p = 3.0, 2.0
    for scale, expect in [(1.0, None), (lam, None)]:
        pass
    sp1 = QuasiMetricSpace(["a", "b"], rho)
    sp2 = QuasiMetricSpace(["a", "b"], rho / lam)
    sig1 = AtomicMeasure(sp1, [1.0, 1.0])
    sig2 = AtomicMeasure(sp2, [1.0, 1.0])
    r1 = capacity(KernelModel(sp1), sig1, p, [0])
    r2 = capacity(KernelModel(sp2), sig2, p, [0])
    assert r2.value == pytest.approx(lam ** (-p) * r1.value, rel=1e-6)


def test_capacity_monotone_nested(fix2):
    kern, sig = fix2
    r_small = capacity(kern, sig, 2.0, [1])
    r_big = capacity(kern, sig, 2.0, [0, 1])
    assert r_small.value <= r_big.value + 1e-9


def test_capacity_edge_cases(fix2):
    kern, sig = fix2
    assert capacity(kern, sig, 2.0, []).value == 0.0
    assert capacity(kern, sig, 2.0, [0], weight=[0.0]).value == 0.0
    zero_sig = AtomicMeasure(kern.space, [0.0, 1.0])
    res = capacity(kern, zero_sig, 2.0, [0])
    assert res.value == 0.0 and res.status == "degenerate-zero-cost"
    with pytest.raises(ValueError):
        capacity(kern, sig, 1.0, [0])
    with pytest.raises(ValueError):
        capacity(kern, sig, 2.0, [5])


def test_ball_upper_fix2(fix2):
    kern, sig = fix2
    ub = capacity_ball_upper(kern, sig, 2.0, 2.0, 0, 0.5)
    assert ub.bound == pytest.approx(1.6)          # 4 / 2.5
    assert ub.feasible_value <= ub.bound + 1e-12
    cap = capacity(kern, sig, 2.0, [1])            # B_0.5(x1) = {x2}
    assert cap.value == pytest.approx(0.2, abs=1e-7)
    assert cap.value <= ub.bound


def test_ball_upper_single_atom():
    # one-atom ball with diagonal K = k <= 1/a: closed form within (2k)^p
    sp = QuasiMetricSpace(["x"], np.array([[2.0]]))
    kern, sig = KernelModel(sp), AtomicMeasure(sp, [1.0])
    ub = capacity_ball_upper(kern, sig, 2.0, 2.0, 0, 2.0)
    cap = capacity(kern, sig, 2.0, [0])
    assert cap.value <= ub.bound + 1e-9


def test_ball_bounds_check_fix2(fix2):
    kern, sig = fix2
    rows, band = capacity_ball_bounds_check(kern, sig, 2.0, 2.0)
    for r in rows:
        assert r["cap"] <= r["upper"] * (1 + 1e-8)
        assert r["feasible"] <= r["upper"] * (1 + 1e-12)
    assert band[0] > 0 and np.isfinite(band[1])


def test_condition_constant_fix2(fix2):
    kern, sig = fix2
    best, witness = capacity_condition_constant(kern, sig, 2.0, sig)
    # single atom {x1} gives 1/0.2 = 5; the full ball {x1, x2} gives
    # 2/(2/9) = 9, which is the sup over the family
    assert best == pytest.approx(9.0, rel=1e-5)
    assert witness == [0, 1]
    atoms_only, _ = capacity_condition_constant(kern, sig, 2.0, sig,
                                                family="atoms")
    assert atoms_only == pytest.approx(5.0, rel=1e-5)
    zero = AtomicMeasure(kern.space, [0.0, 0.0])
    assert capacity_condition_constant(kern, sig, 2.0, zero)[0] == 0.0


def test_condition_constant_unions():
    rng = np.random.default_rng(6)
    kern, sig = random_riesz(rng, n=6)
    omg = AtomicMeasure(kern.space, rng.uniform(0.1, 1.0, size=6))
    base, _ = capacity_condition_constant(kern, sig, 2.0, omg)
    with_unions, _ = capacity_condition_constant(
        kern, sig, 2.0, omg, family="balls+atoms+unions", max_unions=20)
    assert with_unions >= base - 1e-9


def test_lemma_5_5_truncated(fix2):
    kern, sig = fix2
    rep = lemma_5_5_check(kern, sig, 2.0, 2.0)
    assert np.isfinite(rep.worst)
    assert rep.skipped == []


def test_lemma_5_5_single_atom_skipped(fix1):
    # one distinct distance only: the t-integral has no in-range window
    # (to infinity it diverges like t^{p-2} on any finite atomic sigma)
    kern, sig = fix1
    rep = lemma_5_5_check(kern, sig, 2.0, 2.0)
    assert rep.skipped == [0]
    assert rep.rows == []


def test_capacity_random_duality():
    rng = np.random.default_rng(17)
    for _ in range(10):
        n = int(rng.integers(2, 12))
        kern, sig = random_riesz(rng, n=n)
        E = sorted(set(rng.integers(0, n, size=2).tolist()))
        res = capacity(kern, sig, 2.0, E)
        assert res.dual_bound <= res.value + 1e-9
        assert res.value - res.dual_bound <= 1e-6 * max(res.value, 1.0)
        kg = kern.K[np.array(E)] @ (res.g_star * sig.weights)
        assert np.all(kg >= 1.0 - 1e-6)
