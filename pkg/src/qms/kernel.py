"""Kernel evaluation, potentials, the lower/upper split, and local profiles.

The kernel of a space is K(x, y) = 1/rho(x, y), finite and positive on
all atom pairs.  Potentials of atomic measures are finite sums; the
ball representation

    K w(x) = integral_0^inf |B_r(x)|_w / r^2 dr

is evaluated exactly through the step structure of r -> |B_r(x)|_w.

Model families: Riesz potentials on R^n, the exact Green and Naim
kernels of the unit interval, the model C^{1,1} Green-type kernel, and
the half-space Poisson kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from .space import AtomicMeasure, QuasiMetricSpace, estimate_kappa_table

__all__ = [
    "KernelModel",
    "LocalProfile",
    "NaimTransform",
    "potential",
    "potential_via_balls",
    "split",
    "local_profile",
    "harnack_check",
    "make_kernel",
    "naim_transform",
    "riesz_constant",
]


@dataclass(frozen=True)
class KernelModel:
    """A space together with its kernel matrix K = 1/rho and a family tag."""

    space: QuasiMetricSpace
    K: np.ndarray
    family: str = "custom"
    params: dict = None

    def __init__(self, space, family="custom", params=None):
        K = 1.0 / space.rho
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", dict(params or {}))
        K.setflags(write=False)

    @property
    def kappa(self):
        return self.space.kappa

    def measure(self, weights):
        return AtomicMeasure(self.space, weights)

    def potential(self, weights):
        """K w as an array over points, for a raw weight vector."""
        return self.K @ np.asarray(weights, dtype=float)


def potential(kernel, measure):
    """K w as an array over points: (K w)_i = sum_j w_j K(i, j)."""
    return kernel.K @ measure.weights


def potential_via_balls(kernel, measure):
    """K w evaluated through the exact ball-integral step structure.

    For each center the map r -> |B_r|_w is a step function jumping at
    the breakpoints; integral of |B_r|_w / r^2 over each interval is
    mass * (1/r_k - 1/r_{k+1}), summed in closed form.  Must agree with
    :func:`potential` to relative 1e-12.
    """
    rho = kernel.space.rho
    w = measure.weights
    out = np.empty(rho.shape[0])
    for i in range(rho.shape[0]):
        order = np.argsort(rho[i], kind="stable")
        r = rho[i][order]
        cum = np.cumsum(w[order])
        last = np.flatnonzero(np.r_[r[1:] != r[:-1], True])
        rk, mass = r[last], cum[last]
        inv = 1.0 / rk
        # sum_k mass_k * (1/r_k - 1/r_{k+1}), last interval closes at infinity
        out[i] = float(mass[:-1] @ (inv[:-1] - inv[1:]) + mass[-1] * inv[-1])
    return out


def split(kernel, a):
    """Lower/upper kernel split at scale a: L_a = min(K, 1/a), U_a = K - L_a."""
    if a <= 0:
        raise ValueError("split scale must be > 0")
    L = np.minimum(kernel.K, 1.0 / a)
    U = kernel.K - L
    return L, U


def lower_potential(kernel, measure, a):
    """L_a w(x) = sum_j w_j min(K(x,j), 1/a)."""
    return np.minimum(kernel.K, 1.0 / a) @ measure.weights


def _m_at(rho_row, sw, a):
    """M(x, a) = sum_{rho_j <= a} sigma_j (1/rho_j - 1/a)."""
    mask = rho_row <= a
    if not np.any(mask):
        return 0.0
    return float(np.sum(sw[mask] * (1.0 / rho_row[mask] - 1.0 / a)))


def _n_at(rho_row, sw, a, q):
    """N(x, a) = (1/q) sum_j sigma_j max(rho_j, a)^(-q)."""
    return float(np.sum(sw * np.maximum(rho_row, a) ** (-q)) / q)


@dataclass(frozen=True)
class LocalProfile:
    """Local quantities at a center x: M, M*, N as functions of the radius."""

    kernel: KernelModel
    sigma: AtomicMeasure
    q: float
    x: object
    i: int

    def M(self, a):
        if a <= 0:
            raise ValueError("radius must be > 0")
        return _m_at(self.kernel.space.rho[self.i], self.sigma.weights, a)

    def Mstar(self, a):
        """sup of M(y, a) over the closed ball B_a(x); at least M(x, a)."""
        if a <= 0:
            raise ValueError("radius must be > 0")
        rho = self.kernel.space.rho
        members = np.flatnonzero(rho[self.i] <= a)
        best = self.M(a)
        for j in members:
            best = max(best, _m_at(rho[j], self.sigma.weights, a))
        return best

    def N(self, a):
        if a <= 0:
            raise ValueError("radius must be > 0")
        return _n_at(self.kernel.space.rho[self.i], self.sigma.weights, a, self.q)


def local_profile(kernel, sigma, q, x):
    if q <= 1:
        raise ValueError("q must exceed 1")
    return LocalProfile(kernel, sigma, float(q), x, kernel.space.index(x))


def harnack_check(kernel, measure, samples=None, rng=None):
    """Worst Harnack ratio of L_a w over balls; <= 1 means the two-sided
    bound with factor 2*kappa holds on every checked (x, a).

    By default checks every center against every breakpoint radius;
    ``samples`` limits to that many random (x, a) pairs.
    """
    rho = kernel.space.rho
    kap = kernel.kappa
    n = rho.shape[0]
    pairs = []
    if samples is None:
        for i in range(n):
            for a in np.unique(rho[i]):
                pairs.append((i, a))
    else:
        gen = np.random.default_rng(rng)
        allr = np.unique(rho)
        for _ in range(samples):
            pairs.append((int(gen.integers(0, n)), float(gen.choice(allr))))
    worst = 0.0
    for i, a in pairs:
        lw = lower_potential(kernel, measure, a)
        members = rho[i] <= a
        if not np.any(members):
            continue
        hi, lo = lw[members].max(), lw[members].min()
        if lw[i] > 0:
            worst = max(worst, hi / (2.0 * kap * lw[i]))
        if lo > 0:
            worst = max(worst, lw[i] / (2.0 * kap * lo))
    return worst


# ---------------------------------------------------------------------------
# model families


def riesz_constant(n, alpha):
    """Normalizing constant of the Riesz potential of order alpha on R^n."""
    return np.pi ** (-n / 2.0) * 2.0 ** (-alpha) * gamma((n - alpha) / 2.0) / gamma(alpha / 2.0)


def _fill_diagonal(rho, self_distance):
    """Replace nonpositive diagonal entries; atoms carry K(x,x) < infinity."""
    n = rho.shape[0]
    diag = np.diag(rho).copy()
    need = diag <= 0.0
    if not np.any(need):
        return rho
    if self_distance is not None:
        fill = np.broadcast_to(np.asarray(self_distance, dtype=float), (n,))
        if np.any(fill[need] <= 0):
            raise ValueError("self_distance must be positive")
        diag[need] = fill[need]
    else:
        if n < 2:
            raise ValueError("single-point family kernels need an explicit self_distance")
        off = rho + np.diag(np.full(n, np.inf))
        diag[need] = off.min(axis=1)[need]
    out = rho.copy()
    np.fill_diagonal(out, diag)
    return out


def make_kernel(family, **params):
    """Build a model kernel.

    Families
    --------
    custom : params space=QuasiMetricSpace
    riesz : params coords (m, n), alpha in (0, n); n defaults to the
        coordinate dimension.  rho = C(n, alpha)^{-1} |x - y|^{n - alpha};
        diagonal entries default to the nearest-neighbor quasi-distance
        (override with self_distance).
    green1d : params grid, strictly inside (0, 1); K = G(x, y) =
        min[x(1-y), y(1-x)].
    naim1d : params grid; rho = [1 - min(x, y)] max(x, y), kappa = 1.
    modelC11 : params coords (m, n), delta (boundary distances > 0),
        n >= 3; rho = |x-y|^{n-2} (|x-y|^2 + delta_x^2 + delta_y^2).
    poisson : params coords (m, n), t (heights >= 0); rho =
        (|x-y|^2 + (t+tau)^2)^{(n+1)/2}.
    """
    if family == "custom":
        return KernelModel(params["space"], "custom")

    if family == "riesz":
        coords = np.asarray(params["coords"], dtype=float)
        n = int(params.get("n", coords.shape[1]))
        alpha = float(params["alpha"])
        if not 0.0 < alpha < n:
            raise ValueError("riesz requires 0 < alpha < n")
        c = riesz_constant(n, alpha)
        dist = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=2)
        rho = dist ** (n - alpha) / c
        rho = _fill_diagonal(rho, params.get("self_distance"))
        space = QuasiMetricSpace(range(len(coords)), rho, coords=coords)
        return KernelModel(space, "riesz", {"n": n, "alpha": alpha, "C": c})

    if family in ("green1d", "naim1d"):
        grid = np.asarray(params["grid"], dtype=float)
        if np.any(grid <= 0.0) or np.any(grid >= 1.0):
            raise ValueError("grid points must lie strictly inside (0, 1)")
        x, y = grid[:, None], grid[None, :]
        if family == "green1d":
            rho = 1.0 / np.minimum(x * (1.0 - y), y * (1.0 - x))
        else:
            rho = (1.0 - np.minimum(x, y)) * np.maximum(x, y)
        space = QuasiMetricSpace(range(len(grid)), rho, coords=grid[:, None])
        return KernelModel(space, family, {"grid": grid})

    if family == "modelC11":
        coords = np.asarray(params["coords"], dtype=float)
        delta = np.asarray(params["delta"], dtype=float)
        n = int(params.get("n", coords.shape[1]))
        if n < 3:
            raise ValueError("modelC11 requires n >= 3")
        if np.any(delta <= 0.0):
            raise ValueError("boundary-limit atoms (delta = 0) are rejected: "
                             "K must stay finite and positive")
        dist = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=2)
        rho = dist ** (n - 2) * (dist ** 2 + delta[:, None] ** 2 + delta[None, :] ** 2)
        rho = _fill_diagonal(rho, params.get("self_distance"))
        space = QuasiMetricSpace(range(len(coords)), rho, coords=coords)
        return KernelModel(space, "modelC11", {"n": n, "delta": delta})

    if family == "poisson":
        coords = np.asarray(params["coords"], dtype=float)
        t = np.asarray(params["t"], dtype=float)
        n = int(params.get("n", coords.shape[1]))
        if np.any(t < 0.0):
            raise ValueError("heights must be >= 0")
        dist2 = np.sum((coords[:, None, :] - coords[None, :, :]) ** 2, axis=2)
        rho = (dist2 + (t[:, None] + t[None, :]) ** 2) ** ((n + 1) / 2.0)
        rho = _fill_diagonal(rho, params.get("self_distance"))
        space = QuasiMetricSpace(range(len(coords)), rho, coords=coords)
        return KernelModel(space, "poisson", {"n": n, "t": t})

    raise ValueError(f"unknown kernel family {family!r}")


@dataclass(frozen=True)
class NaimTransform:
    """Weighted conjugation K(x,y) = s1(x) G(x,y) s2(y) of a base kernel.

    Carries the induced measure substitutions: a solve of
    u = G^sigma u^q + f becomes ut = K^sigmat ut^q + ft with ut = s1 u,
    ft = s1 f and d(sigmat) = s2^{-1} s1^{-q} d(sigma).  The companion
    weighted-norm substitution is d(sigma1) = s2^{1-q} d(sigma),
    d(omega1) = s1^{-p} d(omega).
    """

    kernel: KernelModel
    s1: np.ndarray
    s2: np.ndarray
    q: float

    def transform_sigma(self, sigma):
        w = sigma.weights / (self.s2 * self.s1 ** self.q)
        return AtomicMeasure(self.kernel.space, w)

    def transform_omega(self, omega):
        """Substitution making K^(omegat) 1 = s1 * G^omega 1 pointwise."""
        return AtomicMeasure(self.kernel.space, omega.weights / self.s2)

    def transform_f(self, f):
        return self.s1 * np.asarray(f, dtype=float)

    def pull_back(self, u_tilde):
        return np.asarray(u_tilde, dtype=float) / self.s1

    def weighted_norm_measures(self, sigma, omega, p):
        sigma1 = AtomicMeasure(self.kernel.space, self.s2 ** (1.0 - self.q) * sigma.weights)
        omega1 = AtomicMeasure(self.kernel.space, self.s1 ** (-p) * omega.weights)
        return sigma1, omega1


def naim_transform(base, s1, s2, q):
    """Conjugate a kernel by positive weights: K = s1(x) G(x,y) s2(y).

    ``base`` is a KernelModel (or a raw symmetric matrix plus ids via a
    KernelModel).  The result's rho is recomputed as 1/K and its kappa
    re-estimated.  The transformed kernel must come out symmetric, which
    holds when s1 = s2 (the Naim case s1 = s2 = 1/delta) or when G
    compensates the asymmetry.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    if np.any(s1 <= 0.0) or np.any(s2 <= 0.0):
        raise ValueError("transform weights must be positive")
    G = base.K
    K = s1[:, None] * G * s2[None, :]
    if not np.allclose(K, K.T, rtol=1e-10, atol=0.0):
        raise ValueError("transformed kernel is not symmetric; use s1 = s2 "
                         "or a compensating base kernel")
    K = 0.5 * (K + K.T)
    rho = 1.0 / K
    space = QuasiMetricSpace(base.space.ids, rho, coords=base.space.coords)
    kern = KernelModel(space, "naim-transform", {"base": base.family})
    return NaimTransform(kern, s1, s2, float(q))
