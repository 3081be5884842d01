"""Discrete uniform domains: interior/boundary split, boundary measure, codimension audit.

Presets are planar grids with spacing ``h``:

* ``halfplane`` -- the window [0,8] x [0,4] of the upper half-plane; only the
  y = 0 edge is true boundary, the other three window edges are artificial.
* ``square`` -- the unit square, all four edges true boundary.
* ``lshape`` -- [0,1]^2 minus (1/2,1] x (1/2,1].

Interior sites carry mu-weight h^2 (cell area); boundary sites carry
mu-weight 0 and nu-weights equal to trapezoid arclength.
"""
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from besovtrace.space import build_space, ball_query, space_to_json

PRESETS = ("halfplane", "square", "lshape")
PRESET_ALIASES = {"halfplane-window": "halfplane"}

# geometric tolerance for "site lies on a boundary edge"
_ON_EDGE = 1e-12


def segment_distance(P, segments):
    """Euclidean distance from points ``P`` (m, 2) to the union of ``segments`` (s, 2, 2)."""
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    best = np.full(P.shape[0], np.inf)
    for a, b in np.asarray(segments, dtype=np.float64):
        v = b - a
        t = np.clip(((P - a) @ v) / (v @ v), 0.0, 1.0)
        proj = a + t[:, None] * v
        diff = P - proj
        best = np.minimum(best, np.sqrt(diff[:, 0] ** 2 + diff[:, 1] ** 2))
    return best


def _path_segments(path):
    path = np.asarray(path, dtype=np.float64)
    return np.stack([path[:-1], path[1:]], axis=1)


def path_parameter(P, path):
    """Arclength along the polyline ``path`` of the closest point to each of ``P``."""
    segs = _path_segments(path)
    lens = np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1)
    offsets = np.concatenate(([0.0], np.cumsum(lens)))
    P = np.atleast_2d(P)
    best = np.full(P.shape[0], np.inf)
    t_out = np.zeros(P.shape[0])
    for s, (a, b) in enumerate(segs):
        v = b - a
        t = np.clip(((P - a) @ v) / (v @ v), 0.0, 1.0)
        d = np.linalg.norm(P - (a + t[:, None] * v), axis=1)
        better = d < best - _ON_EDGE
        best = np.where(better, d, best)
        t_out = np.where(better, offsets[s] + t * lens[s], t_out)
    return t_out


@dataclass(eq=False)
class Domain:
    space: object
    interior: np.ndarray
    boundary: np.ndarray
    nu_weights: np.ndarray
    theta: float
    A: float
    window: dict = field(default_factory=dict)
    artificial: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        self.interior = np.asarray(self.interior, dtype=np.int64)
        self.boundary = np.asarray(self.boundary, dtype=np.int64)
        self.artificial = np.asarray(self.artificial, dtype=np.int64)
        self.nu_weights = np.asarray(self.nu_weights, dtype=np.float64)
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        n = self.space.n
        both = np.concatenate([self.interior, self.boundary])
        if both.size != n or np.unique(both).size != n:
            raise ValueError("interior and boundary must partition the sites")
        if self.nu_weights.shape != self.boundary.shape or np.any(self.nu_weights <= 0):
            raise ValueError("boundary nu-weights must be positive, one per boundary site")
        if np.any(self.space.weights[self.interior] <= 0):
            raise ValueError("interior mu-weights must be positive")
        if np.any(self.space.weights[self.boundary] != 0):
            raise ValueError("mu must vanish on the boundary")
        if not np.all(np.isin(self.artificial, self.interior)):
            raise ValueError("artificial sites must be interior sites")

    @property
    def preset(self):
        return self.window.get("preset")

    @cached_property
    def h(self):
        if "h" in self.window:
            return float(self.window["h"])
        # nearest-neighbor spacing of the sample
        if self.space.metric_kind == "table":
            T = self.space.table + np.diag(np.full(self.space.n, np.inf))
            return float(T.min())
        d, _ = self.space._tree.query(self.space.points, k=2)
        return float(d[:, 1].min())

    @cached_property
    def mu(self):
        return self.space.weights[self.interior]

    @cached_property
    def interior_space(self):
        return _subspace(self.space, self.interior, self.mu)

    @cached_property
    def boundary_space(self):
        return _subspace(self.space, self.boundary, self.nu_weights)

    @cached_property
    def boundary_distances(self):
        """Dense pairwise distances among boundary sites."""
        return self.space.pairwise(self.boundary)

    @cached_property
    def boundary_diameter(self):
        return float(self.boundary_distances.max())

    @cached_property
    def boundary_t(self):
        """Arclength coordinate of each boundary site along the true boundary path."""
        if "boundary_path" in self.window and self.space.points is not None:
            return path_parameter(self.space.points[self.boundary], self.window["boundary_path"])
        return None

    @cached_property
    def d_omega(self):
        """Distance to the true boundary for every interior site."""
        if self.space.metric_kind == "table":
            return self.space.table[np.ix_(self.interior, self.boundary)].min(axis=1)
        return self.distance_to_boundary_points(self.space.points[self.interior])

    def distance_to_boundary_points(self, P):
        """Continuum distance to the true boundary when the window carries it."""
        if "boundary_path" in self.window:
            return segment_distance(P, _path_segments(self.window["boundary_path"]))
        d, _ = self.boundary_space._tree.query(np.atleast_2d(P), k=1)
        return d

    def is_boundary(self, site):
        return bool(np.isin(site, self.boundary))

    def boundary_position(self, site):
        pos = np.flatnonzero(self.boundary == site)
        if pos.size == 0:
            raise ValueError(f"site {site} is not a boundary site")
        return int(pos[0])

    def interior_position(self, site):
        pos = np.flatnonzero(self.interior == site)
        if pos.size == 0:
            raise ValueError(f"site {site} is not an interior site")
        return int(pos[0])

    def with_theta(self, theta):
        return Domain(self.space, self.interior, self.boundary, self.nu_weights, theta,
                      self.A, dict(self.window), self.artificial)


def _subspace(space, idx, weights):
    if space.metric_kind == "table":
        return build_space(weights=weights, metric="table", table=space.table[np.ix_(idx, idx)])
    return build_space(points=space.points[idx], weights=weights)


def distance_to_boundary(domain, site):
    """d_Omega of one interior site."""
    return float(domain.d_omega[domain.interior_position(site)])


def _grid_count(length, h):
    n = round(length / h)
    if n < 1 or abs(n * h - length) > 1e-9 * length:
        raise ValueError(f"h={h} does not divide length {length}")
    return n


def _trapezoid_nu(t, closed, total):
    order = np.argsort(t, kind="mergesort")
    ts = t[order]
    if closed:
        prev = np.roll(ts, 1)
        prev[0] -= total
        nxt = np.roll(ts, -1)
        nxt[-1] += total
        w = (nxt - prev) / 2
    else:
        gaps = np.diff(ts)
        w = np.zeros_like(ts)
        w[:-1] += gaps / 2
        w[1:] += gaps / 2
    out = np.empty_like(w)
    out[order] = w
    return out


def _preset_geometry(preset):
    if preset == "halfplane":
        return dict(
            bounds=[0.0, 0.0, 8.0, 4.0],
            boundary_path=[[0.0, 0.0], [8.0, 0.0]],
            closed=False,
            polygon=[[0.0, 0.0], [8.0, 0.0], [8.0, 4.0], [0.0, 4.0]],
            artificial_edges=[[[8.0, 0.0], [8.0, 4.0]], [[8.0, 4.0], [0.0, 4.0]],
                              [[0.0, 4.0], [0.0, 0.0]]],
            corners=[],
            core=[4.0, 2.0],
        ), math.sqrt(2.0)
    if preset == "square":
        sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
        return dict(
            bounds=[0.0, 0.0, 1.0, 1.0],
            boundary_path=sq + [sq[0]],
            closed=True,
            polygon=sq,
            artificial_edges=[],
            corners=sq,
            core=[0.5, 0.5],
        ), 2.0
    if preset == "lshape":
        poly = [[0.0, 0.0], [1.0, 0.0], [1.0, 0.5], [0.5, 0.5], [0.5, 1.0], [0.0, 1.0]]
        return dict(
            bounds=[0.0, 0.0, 1.0, 1.0],
            boundary_path=poly + [poly[0]],
            closed=True,
            polygon=poly,
            artificial_edges=[],
            corners=poly,
            core=[0.25, 0.25],
        ), 4.0
    raise ValueError(f"unknown preset {preset!r}; choose from {PRESETS}")


def build_domain(preset, h, theta=1.0):
    """Grid-sampled preset domain with spacing ``h``."""
    preset = PRESET_ALIASES.get(preset, preset)
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    geom, A = _preset_geometry(preset)
    x0, y0, x1, y1 = geom["bounds"]
    nx, ny = _grid_count(x1 - x0, h), _grid_count(y1 - y0, h)
    if preset == "lshape":
        _grid_count(0.5, h)
    jj, ii = np.meshgrid(np.arange(ny + 1), np.arange(nx + 1), indexing="ij")
    X = x0 + ii.ravel() * h
    Y = y0 + jj.ravel() * h
    if preset == "lshape":
        keep = ~((X > 0.5 + _ON_EDGE) & (Y > 0.5 + _ON_EDGE))
        X, Y = X[keep], Y[keep]
    P = np.column_stack([X, Y])

    on_bdry = segment_distance(P, _path_segments(geom["boundary_path"])) <= _ON_EDGE
    boundary = np.flatnonzero(on_bdry)
    interior = np.flatnonzero(~on_bdry)
    if geom["artificial_edges"]:
        on_art = segment_distance(P[interior], geom["artificial_edges"]) <= _ON_EDGE
        artificial = interior[on_art]
    else:
        artificial = np.zeros(0, dtype=np.int64)

    weights = np.where(on_bdry, 0.0, h * h)
    space = build_space(points=P, weights=weights)
    path = np.asarray(geom["boundary_path"])
    total = float(np.linalg.norm(np.diff(path, axis=0), axis=1).sum())
    t = path_parameter(P[boundary], path)
    if geom["closed"]:
        t = np.mod(t, total)
    nu = _trapezoid_nu(t, geom["closed"], total)
    window = dict(geom, preset=preset, h=float(h), boundary_length=total)
    return Domain(space, interior, boundary, nu, float(theta), A, window, artificial)


@dataclass
class CodimReport:
    theta: float
    samples: list
    min_ratio: float
    max_ratio: float
    C: float
    skipped: list

    def to_json(self):
        return {
            "theta": self.theta,
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "C": self.C,
            "n_samples": len(self.samples),
            "skipped": len(self.skipped),
        }


def default_codim_radii(domain):
    h = domain.h
    x0, y0, x1, y1 = domain.window.get("bounds", [0, 0, 1, 1])
    top = min(1.0, min(x1 - x0, y1 - y0) / 4)
    # powers of sqrt(2) from an exact base so even steps land on lattice radii exactly
    radii, k = [], 0
    while 4 * h * 2.0 ** (k / 2) <= top * (1 + 1e-12):
        radii.append(4 * h * 2.0 ** (k / 2))
        k += 1
    return radii


def codim_centers(domain, r):
    """Boundary sites whose r-ball clears artificial edges and polygon corners."""
    if domain.space.points is None:
        return domain.boundary
    Pb = domain.space.points[domain.boundary]
    ok = np.ones(domain.boundary.size, dtype=bool)
    if domain.window.get("artificial_edges"):
        ok &= segment_distance(Pb, domain.window["artificial_edges"]) >= r
    for c in domain.window.get("corners", []):
        ok &= np.linalg.norm(Pb - np.asarray(c), axis=1) >= r
    return domain.boundary[ok]


def check_codimension(domain, centers=None, radii=None):
    """Ratios mu(B(z,r) & Omega) / (r^theta nu(B(z,r) & bdry)) over sampled (z, r)."""
    radii = default_codim_radii(domain) if radii is None else list(radii)
    Pb_weights = np.zeros(domain.space.n)
    Pb_weights[domain.boundary] = domain.nu_weights
    samples, skipped = [], []
    for r in radii:
        zs = codim_centers(domain, r) if centers is None else centers
        for z in zs:
            hit = ball_query(domain.space, int(z), r)
            mu = float(domain.space.weights[hit].sum())
            nu = float(Pb_weights[hit].sum())
            if nu <= 0:
                skipped.append((int(z), float(r)))
                continue
            samples.append((int(z), float(r), mu, nu, mu / (r ** domain.theta * nu)))
    if not samples:
        raise ValueError("no codimension samples: every boundary ball was empty")
    ratios = np.array([s[4] for s in samples])
    lo, hi = float(ratios.min()), float(ratios.max())
    C = max(hi, 1.0 / lo if lo > 0 else math.inf, 1.0)
    return CodimReport(domain.theta, samples, lo, hi, C, skipped)


def domain_to_json(domain):
    obj = space_to_json(domain.space)
    obj.update(
        interior=domain.interior.tolist(),
        boundary=domain.boundary.tolist(),
        artificial=domain.artificial.tolist(),
        nu_weights=domain.nu_weights.tolist(),
        theta=domain.theta,
        A=domain.A,
        window=domain.window,
    )
    return obj


def domain_from_json(obj):
    space = build_space(points=obj.get("points"), weights=obj["weights"],
                        metric=obj["metric"], table=obj.get("table"))
    return Domain(space, obj["interior"], obj["boundary"], obj["nu_weights"],
                  float(obj["theta"]), float(obj.get("A", 1.0)), obj.get("window", {}),
                  obj.get("artificial", []))
