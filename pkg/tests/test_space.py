import numpy as np
import pytest

from qms.space import (AtomicMeasure, ConjugatePair, QuasiMetricSpace,
                       QuasiMetricViolation, ball_measure, breakpoints,
                       estimate_kappa, load_space_file)


RHO2 = np.array([[1.0, 0.5], [0.5, 1.0]])


def test_kappa_exact_fix2():
    sp = QuasiMetricSpace(["x1", "x2"], RHO2)
    kap, exact, witness = estimate_kappa(sp)
    assert exact
    # worst triple routes x1 -> x1 through x2: 1 / (0.5 + 0.5)
    assert kap == 1.0
    i, j, z = witness
    assert sp.rho[i, j] / (sp.rho[i, z] + sp.rho[z, j]) == kap


def test_declared_kappa_too_small_rejected():
    # a--b and b--c close, a--c far: worst triple (a, c) through b
    rho = np.array([[1.0, 1.0, 10.0],
                    [1.0, 1.0, 1.0],
                    [10.0, 1.0, 1.0]])
    with pytest.raises(QuasiMetricViolation) as exc:
        QuasiMetricSpace(["a", "b", "c"], rho, kappa=2.0)
    assert exc.value.kappa_hat == pytest.approx(5.0)
    assert exc.value.declared == 2.0


def test_sampled_kappa_is_lower_bound():
    rng = np.random.default_rng(3)
    pts = rng.uniform(size=(30, 2))
    d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2) ** 2
    off = d + np.diag(np.full(30, np.inf))
    np.fill_diagonal(d, off.min(axis=1))
    sp = QuasiMetricSpace(range(30), d)
    exact_kap, _, _ = estimate_kappa(sp)
    sampled_kap, exact, _ = estimate_kappa(sp, sample=2000, rng=0)
    assert not exact
    assert sampled_kap <= exact_kap + 1e-15


def test_rho_validation():
    with pytest.raises(ValueError):
        QuasiMetricSpace(["a", "b"], np.array([[1.0, 2.0], [3.0, 1.0]]))
    with pytest.raises(ValueError):
        QuasiMetricSpace(["a", "b"], np.array([[1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        QuasiMetricSpace(["a", "a"], RHO2)


def test_ball_measure_fix2():
    sp = QuasiMetricSpace(["x1", "x2"], RHO2)
    sig = AtomicMeasure(sp, [1.0, 1.0])
    assert ball_measure(sp, sig, "x1", 0.5) == 1.0
    assert ball_measure(sp, sig, "x1", 1.0) == 2.0
    with pytest.raises(ValueError):
        ball_measure(sp, sig, "x1", 0.0)


def test_breakpoints_fix2():
    sp = QuasiMetricSpace(["x1", "x2"], RHO2)
    assert breakpoints(sp, "x1").tolist() == [0.5, 1.0]


def test_measure_validation_and_algebra():
    sp = QuasiMetricSpace(["x1", "x2"], RHO2)
    with pytest.raises(ValueError):
        AtomicMeasure(sp, [-1.0, 0.0])
    m = AtomicMeasure(sp, {"x2": 2.0})
    assert m.weights.tolist() == [0.0, 2.0]
    assert m.total == 2.0
    assert (m + m.scaled(0.5)).weights.tolist() == [0.0, 3.0]


def test_conjugate_pair():
    pair = ConjugatePair(q=2.0)
    assert pair.p == 2.0
    pair = ConjugatePair(p=3.0)
    assert pair.q == pytest.approx(1.5)
    with pytest.raises(ValueError):
        ConjugatePair(p=1.0)
    with pytest.raises(ValueError):
        ConjugatePair(p=3.0, q=3.0)


def test_load_space_file_roundtrip():
    doc = {
        "points": [{"id": "x1"}, {"id": "x2"}],
        "rho": {"entries": [["x1", "x1", 1.0], ["x2", "x2", 1.0],
                            ["x1", "x2", 0.5]]},
        "kappa": 1.0,
        "measures": {"sigma": [{"id": "x1", "weight": 1.0},
                               {"id": "x2", "weight": 1.0}]},
    }
    space, measures = load_space_file(doc)
    assert space.kappa == 1.0
    assert measures["sigma"].total == 2.0


def test_load_space_file_missing_pair():
    doc = {"points": [{"id": "a"}, {"id": "b"}],
           "rho": {"entries": [["a", "a", 1.0], ["b", "b", 1.0]]}}
    with pytest.raises(ValueError, match="missing"):
        load_space_file(doc)
