"""Nonlinear capacities: Cap E = inf { sum g_j^p sigma_j : K(g dsigma) >= w on E }.

The primal program is solved as a disciplined convex program; every
answer ships with an independently computed Lagrangian dual bound and a
KKT residual, so the reported value is certified from both sides
without trusting the solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .kernel import local_profile
from .space import breakpoints

__all__ = [
    "CapacityResult",
    "capacity",
    "capacity_ball_upper",
    "capacity_ball_bounds_check",
    "capacity_condition_constant",
    "lemma_5_5_check",
]


@dataclass
class CapacityResult:
    value: float
    g_star: np.ndarray
    dual_bound: float
    kkt_residual: float
    status: str = "optimal"


def _dual_bound(K_E, sw, wvec, lam, p):
    """Lagrangian value at multipliers lam >= 0, evaluated in closed
    form: sum lam_e w_e + sum_j min_{g>=0} (sigma_j g^p - c_j g) with
    c_j the lam-weighted kernel column sums."""
    lam = np.maximum(lam, 0.0)
    c = K_E.T @ lam
    val = float(lam @ wvec)
    pos = (c > 0) & (sw > 0)
    if np.any((c > 0) & (sw <= 0)):
        return -np.inf
    gj = (c[pos] / (p * sw[pos])) ** (1.0 / (p - 1.0))
    val += float(np.sum(sw[pos] * gj ** p - c[pos] * gj))
    return val


def capacity(kernel, sigma, p, E, weight=None, tol=1e-9):
    """Capacity of the atom set E with constraint K(g dsigma) >= weight
    on E (weight defaults to 1).

    Returns the primal value, the minimizer, an independent dual lower
    bound, and the KKT stationarity/complementarity residual.
    """
    import cvxpy as cp

    if p <= 1.0:
        raise ValueError("p must be > 1")
    E = np.asarray(sorted(set(int(e) for e in np.atleast_1d(E))), dtype=int)
    n = kernel.K.shape[0]
    if len(E) == 0:
        return CapacityResult(0.0, np.zeros(n), 0.0, 0.0, "empty-set")
    if E.min() < 0 or E.max() >= n:
        raise ValueError("E must index atoms of the space")
    sw = sigma.weights
    wvec = (np.ones(len(E)) if weight is None
            else np.broadcast_to(np.asarray(weight, float), (len(E),)).copy())
    if np.any(wvec < 0):
        raise ValueError("weight must be nonnegative")
    if not np.any(wvec > 0):
        return CapacityResult(0.0, np.zeros(n), 0.0, 0.0, "zero-weight")
    if np.any(sw <= 0):
        # free mass at a zero-cost atom covers E at no objective cost
        g = np.zeros(n)
        j = int(np.argmin(sw))
        g[j] = float(np.max(wvec / kernel.K[E, j]))
        return CapacityResult(0.0, g, 0.0, 0.0, "degenerate-zero-cost")

    K_E = kernel.K[E, :] * sw[None, :]
    g = cp.Variable(n, nonneg=True)
    cons = [K_E @ g >= wvec]
    prob = cp.Problem(cp.Minimize(cp.sum(cp.multiply(sw, cp.power(g, p)))), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.SolverError:
        prob.solve(solver=cp.ECOS, abstol=1e-10, reltol=1e-10)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"capacity program did not solve: {prob.status}")
    gstar = np.maximum(np.asarray(g.value, float), 0.0)
    value = float(np.sum(sw * gstar ** p))
    lam = np.asarray(cons[0].dual_value, float).reshape(-1)
    dual = _dual_bound(K_E, sw, wvec, lam, p)

    grad = p * sw * gstar ** (p - 1.0) - K_E.T @ np.maximum(lam, 0.0)
    active = gstar > tol * (1.0 + gstar.max())
    slack = K_E @ gstar - wvec
    scale = 1.0 + abs(value)
    kkt = max(
        float(np.max(np.abs(grad[active]), initial=0.0)),
        float(np.max(-grad, initial=0.0)),          # g = 0 needs grad >= 0
        float(np.max(-slack, initial=0.0)),         # primal feasibility
        float(np.max(np.maximum(lam, 0.0) * np.abs(slack), initial=0.0)),
    ) / scale
    return CapacityResult(value, gstar, dual, kkt, prob.status)


@dataclass
class BallUpperBound:
    feasible_value: float
    bound: float
    x: int
    a: float
    N: float


def capacity_ball_upper(kernel, sigma, p, q, x, a):
    """Explicit feasible competitor for Cap(B_a(x)): the truncated-kernel
    power g = L_a(x,.)^{q-1} scaled so its lower potential covers the
    ball, giving Cap <= (2 kappa)^p N(x,a)^{-p/q}."""
    space = kernel.space
    kap = space.kappa
    x = space.index(x)
    prof = local_profile(kernel, sigma, q, x)
    nv = prof.N(a)
    if nv <= 0:
        raise ValueError("N(x,a) must be positive")
    La = np.minimum(kernel.K[x], 1.0 / a)
    g = 2.0 * kap * La ** (q - 1.0) / (q * nv)
    members = space.rho[x] <= a
    kg = kernel.K @ (g * sigma.weights)
    if np.any(kg[members] < 1.0 - 1e-9):
        raise AssertionError("competitor fails to cover the ball")
    feasible = float(np.sum(sigma.weights * g ** p))
    return BallUpperBound(feasible, (2.0 * kap) ** p * nv ** (-p / q), x, a, nv)


def capacity_ball_bounds_check(kernel, sigma, p, q, pairs=None):
    """Compare Cap(B_a(x)) * N(x,a)^{p/q} against the two-sided band
    [lower, (2 kappa)^p] over a sample of (center, radius) pairs; the
    lower edge is not a theorem for general finite measures, so the
    table reports the observed band."""
    if pairs is None:
        pairs = [(i, a) for i in range(len(kernel.space.rho))
                 for a in breakpoints(kernel.space, i)]
    rows = []
    for x, a in pairs:
        prof = local_profile(kernel, sigma, q, x)
        nv = prof.N(a)
        if nv <= 0:
            continue
        E = np.flatnonzero(kernel.space.rho[x] <= a)
        cap = capacity(kernel, sigma, p, E)
        ub = capacity_ball_upper(kernel, sigma, p, q, x, a)
        rows.append({"x": x, "a": float(a), "cap": cap.value, "N": nv,
                     "ratio": cap.value * nv ** (p / q),
                     "upper": ub.bound, "feasible": ub.feasible_value})
    band = (min(r["ratio"] for r in rows), max(r["ratio"] for r in rows))
    return rows, band


def capacity_condition_constant(kernel, sigma, p, omega, family="balls+atoms",
                                max_unions=200, seed=0):
    """Least C with |E|_omega <= C Cap E over a test family of sets:
    single atoms, breakpoint balls, and optionally unions of up to three
    balls (sampled when the enumeration is large)."""
    rho = kernel.space.rho
    ww = omega.weights
    n = len(rho)
    ball_sets = []
    seen = set()
    for i in range(n):
        for a in breakpoints(kernel.space, i):
            members = frozenset(np.flatnonzero(rho[i] <= a).tolist())
            if members not in seen:
                seen.add(members)
                ball_sets.append(members)
    sets = []
    if "atoms" in family:
        sets += [frozenset([i]) for i in range(n)]
    if "balls" in family:
        sets += ball_sets
    if "unions" in family:
        triples = list(itertools.combinations(range(len(ball_sets)), 3))
        if len(triples) > max_unions:
            rng = np.random.default_rng(seed)
            triples = [triples[k] for k in
                       rng.choice(len(triples), max_unions, replace=False)]
        sets += [ball_sets[a] | ball_sets[b] | ball_sets[c]
                 for a, b, c in triples]
    best = 0.0
    witness = None
    for E in dict.fromkeys(sets):
        mass = float(ww[list(E)].sum())
        if mass <= 0:
            continue
        cap = capacity(kernel, sigma, p, list(E))
        ratio = np.inf if cap.value <= 0 else mass / cap.value
        if ratio > best:
            best, witness = ratio, sorted(E)
    return best, witness


@dataclass
class Lemma55Report:
    worst: float
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def lemma_5_5_check(kernel, sigma, p, q):
    """Check M(x,a)^{p/q} * int_a^{b_max} N(x,t)^{-p/q} t^{-2} dt stays
    comparable to 1 over breakpoint radii.

    On a finite atomic measure N(x,t) ~ c t^{-q} as t grows, so the full
    integral to infinity diverges (integrand ~ t^{p-2}); the comparison
    is therefore truncated at the largest distance from x, and centers
    with fewer than two distinct distances are skipped as degenerate.
    """
    rho = kernel.space.rho
    rows, skipped = [], []
    worst = 0.0
    for i in range(len(rho)):
        bps = breakpoints(kernel.space, i)
        if len(bps) < 2:
            skipped.append(i)
            continue
        prof = local_profile(kernel, sigma, q, i)
        bmax = bps[-1]
        for a in bps[:-1]:
            m = prof.M(a)
            if m <= 0:
                continue
            integral = 0.0
            cuts = np.concatenate(([a], bps[bps > a]))
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                part, _ = quad(lambda t: prof.N(t) ** (-p / q) / t ** 2, lo, hi)
                integral += part
            val = m ** (p / q) * integral
            rows.append({"x": i, "a": float(a), "value": val})
            worst = max(worst, val)
    return Lemma55Report(worst, rows, skipped)
