"""Finite sampled metric measure spaces.

A :class:`SampledSpace` is a weighted point cloud with either planar
coordinates or an explicit distance table.  Balls are open everywhere:
``B(c, r) = {i : d(c, p_i) < r}``.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy import sparse

METRICS = ("euclidean-2d", "table")

# kd-tree candidates are gathered with this relative slack, then filtered
# with the same distance formula the brute-force scan uses
_CANDIDATE_SLACK = 1e-9


def _euclid(P, c):
    diff = P - np.asarray(c, dtype=np.float64)
    return np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)


@dataclass(frozen=True)
class Ball:
    center: object
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")

    def dilate(self, tau):
        return Ball(self.center, tau * self.radius)


@dataclass(eq=False)
class SampledSpace:
    weights: np.ndarray
    metric_kind: str = "euclidean-2d"
    points: np.ndarray = None
    table: np.ndarray = None
    _tree: cKDTree = field(default=None, repr=False)

    @property
    def n(self):
        return self.weights.shape[0]

    @property
    def total_mass(self):
        return float(self.weights.sum())

    def distances_from(self, center, idx=None):
        """Distances from ``center`` (site index or free point) to sites ``idx``."""
        if self.metric_kind == "table":
            if not isinstance(center, (int, np.integer)):
                raise TypeError("table metric only supports site-index centers")
            row = self.table[int(center)]
            return row if idx is None else row[idx]
        c = self.points[int(center)] if isinstance(center, (int, np.integer)) else center
        P = self.points if idx is None else self.points[idx]
        return _euclid(P, c)

    def pairwise(self, idx_a, idx_b=None):
        idx_b = idx_a if idx_b is None else idx_b
        if self.metric_kind == "table":
            return self.table[np.ix_(idx_a, idx_b)]
        A = self.points[idx_a]
        B = self.points[idx_b]
        return _euclid(A[:, None, :], B[None, :, :])

    def distance(self, i, j):
        return float(self.distances_from(i, np.array([j]))[0])


def build_space(points=None, weights=None, metric="euclidean-2d", table=None,
                triangle_checks=2000, seed=0):
    """Validate inputs and build the spatial index."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    weights = np.asarray(weights, dtype=np.float64)
    if metric == "euclidean-2d":
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValueError("euclidean-2d points must have shape (n, 2)")
        n = points.shape[0]
    else:
        table = np.asarray(table, dtype=np.float64)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValueError("distance table must be square")
        n = table.shape[0]
    if n < 2:
        raise ValueError("a space needs at least 2 sites")
    if weights.shape != (n,):
        raise ValueError(f"expected {n} weights, got shape {weights.shape}")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValueError("weights must be finite and nonnegative")
    if not weights.sum() > 0:
        raise ValueError("total mass must be positive")

    if metric == "euclidean-2d":
        return SampledSpace(weights, metric, points=points, _tree=cKDTree(points))

    if not np.all(np.isfinite(table)) or np.any(table < 0):
        raise ValueError("distance table must be finite and nonnegative")
    if np.any(np.diag(table) != 0):
        raise ValueError("distance table must vanish on the diagonal")
    if not np.array_equal(table, table.T):
        raise ValueError("distance table is not symmetric")
    rng = np.random.default_rng(seed)
    i, j, k = rng.integers(0, n, size=(3, triangle_checks))
    slack = table[i, j] + table[j, k] - table[i, k]
    if np.any(slack < -1e-12 * max(1.0, float(table.max()))):
        raise ValueError("distance table violates the triangle inequality")
    return SampledSpace(weights, metric, table=table)


def brute_ball(space, center, r):
    d = space.distances_from(center)
    return np.flatnonzero(d < r)


def ball_query(space, center, r, idx=None):
    """Sites of the open ball ``B(center, r)``, ascending.

    With ``idx`` the query is restricted to that subset (still returning
    global site indices).
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    if space.metric_kind == "table":
        d = space.distances_from(center)
        hits = np.flatnonzero(d < r)
    else:
        c = space.points[int(center)] if isinstance(center, (int, np.integer)) else center
        cand = np.asarray(space._tree.query_ball_point(c, r * (1 + _CANDIDATE_SLACK)), dtype=np.int64)
        if cand.size:
            cand = cand[_euclid(space.points[cand], c) < r]
        hits = np.sort(cand)
    if idx is not None:
        hits = hits[np.isin(hits, idx, assume_unique=True)]
    return hits


def measure_of(space, idx):
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= space.n):
        raise IndexError("site index out of range")
    # ascending-index summation keeps reductions order independent
    return float(space.weights[np.sort(idx)].sum())


def neighbor_csr(space, idx, rho):
    """Open-ball neighbor lists among the sites ``idx`` (positions into ``idx``).

    Returns ``(indptr, indices, dist)`` with the site itself excluded.
    """
    idx = np.asarray(idx, dtype=np.int64)
    if space.metric_kind == "table":
        D = space.table[np.ix_(idx, idx)]
        M = sparse.csr_matrix((D < rho) & (D > 0))
        M.sort_indices()
        rows = np.repeat(np.arange(idx.size), np.diff(M.indptr))
        return M.indptr, M.indices, D[rows, M.indices]
    P = space.points[idx]
    pairs = cKDTree(P).query_pairs(rho * (1 + _CANDIDATE_SLACK), output_type="ndarray")
    if pairs.size == 0:
        pairs = np.zeros((0, 2), dtype=np.int64)
    d = _euclid(P[pairs[:, 0]], P[pairs[:, 1]])
    keep = (d < rho) & (d > 0)
    a, b, d = pairs[keep, 0], pairs[keep, 1], d[keep]
    rows = np.concatenate([a, b])
    cols = np.concatenate([b, a])
    dd = np.concatenate([d, d])
    order = np.lexsort((cols, rows))
    rows, cols, dd = rows[order], cols[order], dd[order]
    indptr = np.zeros(idx.size + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    return np.cumsum(indptr), cols.astype(np.int64), dd


@dataclass
class DoublingEstimate:
    constant: float
    witness: tuple
    skipped: list
    samples: int


def estimate_doubling_constant(space, centers, radii):
    """Largest sampled ratio ``mu(B(z, 2r)) / mu(B(z, r))``.

    Pairs whose inner ball has zero mass are skipped and reported.
    """
    best, witness, skipped, count = 0.0, None, [], 0
    for z in centers:
        for r in radii:
            inner = measure_of(space, ball_query(space, z, r))
            if inner <= 0:
                skipped.append((z, float(r)))
                continue
            ratio = measure_of(space, ball_query(space, z, 2 * r)) / inner
            count += 1
            if ratio > best:
                best, witness = ratio, (z, float(r))
    return DoublingEstimate(best, witness, skipped, count)


def space_to_json(space):
    return {
        "metric": "table" if space.metric_kind == "table" else "euclidean-2d",
        "points": None if space.points is None else space.points.tolist(),
        "table": None if space.table is None else space.table.tolist(),
        "weights": space.weights.tolist(),
    }


def space_from_json(obj):
    return build_space(points=obj.get("points"), weights=obj["weights"],
                       metric=obj["metric"], table=obj.get("table"))
