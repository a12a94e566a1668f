"""Finite quasi-metric point sets and atomic measures.

A quasi-metric space here is a finite list of points together with a
symmetric positive table rho of pairwise quasi-distances satisfying

    rho(x, y) <= kappa * (rho(x, z) + rho(z, y))

for every (ordered) triple of points.  rho(x, x) > 0 is allowed and in
fact required: the associated kernel K = 1/rho must be finite and
positive on every pair of atoms.  Balls are closed, B_a(x) = {y :
rho(x, y) <= a}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuasiMetricSpace",
    "AtomicMeasure",
    "ConjugatePair",
    "QuasiMetricViolation",
    "ball_measure",
    "estimate_kappa",
    "breakpoints",
    "load_space_file",
]


class QuasiMetricViolation(ValueError):
    """The declared kappa is violated; carries the witnessing triple."""

    def __init__(self, kappa_hat, triple, declared):
        self.kappa_hat = kappa_hat
        self.triple = triple
        self.declared = declared
        i, j, z = triple
        super().__init__(
            f"quasi-metric violation: empirical kappa {kappa_hat:.6g} > declared "
            f"{declared:.6g}, witness triple (x={i}, y={j}, z={z})"
        )


def _min_through(rho, chunk=64):
    """min over z of rho[i, z] + rho[z, j], as an (n, n) array."""
    n = rho.shape[0]
    out = np.full((n, n), np.inf)
    arg = np.zeros((n, n), dtype=int)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        # (n, hi-lo, n) block of rho[i, z] + rho[z, j]
        block = rho[:, lo:hi, None] + rho[None, lo:hi, :]
        bmin = block.min(axis=1)
        barg = block.argmin(axis=1) + lo
        better = bmin < out
        out = np.where(better, bmin, out)
        arg = np.where(better, barg, arg)
    return out, arg


@dataclass(frozen=True)
class QuasiMetricSpace:
    """Finite point set with symmetric quasi-distance table and constant kappa.

    Parameters
    ----------
    ids : list of point ids (hashable, unique)
    rho : (n, n) symmetric array, all entries finite and > 0
    kappa : declared quasi-metric constant (>= 1); validated exactly on
        construction unless ``validate=False``
    coords : optional (n, d) array of Euclidean coordinates
    """

    ids: tuple
    rho: np.ndarray
    kappa: float
    coords: np.ndarray | None = None
    _index: dict = field(repr=False, default=None)

    def __init__(self, ids, rho, kappa=None, coords=None, validate=True):
        ids = tuple(ids)
        if len(set(ids)) != len(ids):
            raise ValueError("point ids must be unique")
        rho = np.asarray(rho, dtype=float)
        n = len(ids)
        if rho.shape != (n, n):
            raise ValueError(f"rho must be {n}x{n}, got {rho.shape}")
        if not np.allclose(rho, rho.T, rtol=1e-12, atol=0.0):
            raise ValueError("rho must be symmetric")
        rho = 0.5 * (rho + rho.T)
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0.0):
            raise ValueError("rho entries must be finite and > 0 (K = 1/rho must "
                             "be finite and positive on atoms)")
        kappa_hat, witness = estimate_kappa_table(rho)
        if kappa is None:
            kappa = max(1.0, kappa_hat)
        elif validate and kappa_hat > kappa * (1.0 + 1e-12):
            raise QuasiMetricViolation(kappa_hat, witness, kappa)
        if coords is not None:
            coords = np.asarray(coords, dtype=float)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "kappa", float(kappa))
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "_index", {pid: k for k, pid in enumerate(ids)})
        rho.setflags(write=False)

    def __len__(self):
        return len(self.ids)

    @property
    def n(self):
        return len(self.ids)

    def index(self, point_id):
        try:
            return self._index[point_id]
        except (KeyError, TypeError):
            # positional fallback so numeric row indices work when the
            # ids are not integers
            if isinstance(point_id, (int, np.integer)) and 0 <= point_id < len(self.ids):
                return int(point_id)
            raise KeyError(f"unknown point id {point_id!r}") from None


def estimate_kappa_table(rho):
    """Exact kappa over a distance table: returns (kappa_hat, witness triple indices)."""
    msum, marg = _min_through(np.asarray(rho, dtype=float))
    ratio = rho / msum
    i, j = np.unravel_index(np.argmax(ratio), ratio.shape)
    return float(ratio[i, j]), (int(i), int(j), int(marg[i, j]))


def estimate_kappa(space, sample=None, rng=None):
    """Best quasi-metric constant of a space.

    Exact O(n^3) scan by default.  With ``sample`` set, scans that many
    random triples and returns a lower bound on kappa (flagged by the
    second return value being False).

    Returns
    -------
    kappa_hat : float
    exact : bool
    witness : (i, j, z) index triple attaining kappa_hat
    """
    rho = space.rho
    n = rho.shape[0]
    if sample is None or sample >= n ** 3:
        kappa_hat, witness = estimate_kappa_table(rho)
        return kappa_hat, True, witness
    rng = np.random.default_rng(rng)
    i = rng.integers(0, n, size=sample)
    j = rng.integers(0, n, size=sample)
    z = rng.integers(0, n, size=sample)
    ratio = rho[i, j] / (rho[i, z] + rho[z, j])
    k = int(np.argmax(ratio))
    return float(ratio[k]), False, (int(i[k]), int(j[k]), int(z[k]))


@dataclass(frozen=True)
class AtomicMeasure:
    """Nonnegative weights on the points of a space."""

    space: QuasiMetricSpace
    weights: np.ndarray

    def __init__(self, space, weights):
        w = np.zeros(space.n)
        if isinstance(weights, dict):
            for pid, val in weights.items():
                w[space.index(pid)] = val
        else:
            weights = np.asarray(weights, dtype=float)
            if weights.shape != (space.n,):
                raise ValueError("weights length must match the point count")
            w = weights.copy()
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and >= 0")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "weights", w)
        w.setflags(write=False)

    @property
    def total(self):
        return float(self.weights.sum())

    def scaled(self, factor):
        if factor < 0:
            raise ValueError("scale factor must be >= 0")
        return AtomicMeasure(self.space, self.weights * factor)

    def __add__(self, other):
        if other.space is not self.space:
            raise ValueError("measures live on different spaces")
        return AtomicMeasure(self.space, self.weights + other.weights)


@dataclass(frozen=True)
class ConjugatePair:
    """Holder-conjugate exponents, 1/p + 1/q = 1."""

    p: float
    q: float

    def __init__(self, p=None, q=None):
        if q is None and p is None:
            raise ValueError("give p or q")
        if (p is not None and p <= 1.0) or (q is not None and q <= 1.0):
            raise ValueError("exponents must exceed 1")
        if q is None:
            q = p / (p - 1.0)
        elif p is None:
            p = q / (q - 1.0)
        if p <= 1.0 or q <= 1.0:
            raise ValueError("exponents must exceed 1")
        if abs(1.0 / p + 1.0 / q - 1.0) > 1e-12:
            raise ValueError("1/p + 1/q must equal 1")
        object.__setattr__(self, "p", float(p))
        object.__setattr__(self, "q", float(q))

    @classmethod
    def from_q(cls, q):
        return cls(q=q)


def ball_measure(space, measure, x, r):
    """Mass of the closed ball B_r(x) = {y : rho(x, y) <= r}."""
    if r <= 0:
        raise ValueError("radius must be > 0")
    i = space.index(x)
    mask = space.rho[i] <= r
    return float(measure.weights[mask].sum())


def breakpoints(space, x):
    """Strictly increasing distinct values of {rho(x, y) : y in space}.

    ball_measure(., x, r) is constant for r between consecutive entries
    and jumps exactly at them.
    """
    i = space.index(x)
    return np.unique(space.rho[i])


# ---------------------------------------------------------------------------
# file format


def _rho_from_spec(ids, rho_spec, coords):
    n = len(ids)
    if isinstance(rho_spec, dict) and "generator" in rho_spec:
        # named generators are handled by the kernel module families; the
        # space file only supports the explicit table
        raise ValueError("named rho generators belong in the kernel spec; "
                         "give an explicit 'entries' table here")
    if isinstance(rho_spec, (list, np.ndarray)):
        # full matrix given directly
        rho = np.asarray(rho_spec, dtype=float)
        if rho.shape != (n, n):
            raise ValueError("rho matrix shape must match the point count")
        return rho
    rho = np.zeros((n, n))
    for entry in rho_spec["entries"]:
        a, b, val = entry
        i, j = ids.index(a), ids.index(b)
        rho[i, j] = rho[j, i] = float(val)
    return rho


def load_space_file(doc):
    """Build (space, measures dict) from a parsed scenario/space JSON object.

    Schema::

        {"points": [{"id": ..., "coords": [...]?}, ...],
         "rho": {"entries": [[id_a, id_b, value], ...]} or full matrix,
         "kappa": number?,
         "measures": {"name": [{"id": ..., "weight": ...}, ...], ...}}

    With the entries form, every unordered pair including the diagonal
    must get an entry.
    """
    pts = doc["points"]
    ids = [p["id"] for p in pts]
    coords = None
    if all("coords" in p for p in pts) and pts:
        coords = np.array([p["coords"] for p in pts], dtype=float)
    rho = _rho_from_spec(ids, doc["rho"], coords)
    if np.any(rho == 0.0):
        missing = np.argwhere(rho == 0.0)
        i, j = missing[0]
        raise ValueError(f"rho entry missing or zero for pair ({ids[i]!r}, {ids[j]!r})")
    space = QuasiMetricSpace(ids, rho, kappa=doc.get("kappa"), coords=coords)
    measures = {}
    for name, atoms in doc.get("measures", {}).items():
        measures[name] = AtomicMeasure(space, {a["id"]: a["weight"] for a in atoms})
    return space, measures
