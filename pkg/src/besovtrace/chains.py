"""Uniform curves between boundary points and the chains of balls built along them.

The chain construction walks from the curve midpoint toward each endpoint.
Each new center is the first point of the curve (seen from the endpoint)
that touches the closure of the balls placed so far; it is found by exact
segment/circle intersection, so the chain does not depend on the grid
beyond the truncation radius.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from shapely.geometry import LineString, Point, Polygon

from besovtrace.domain import _path_segments

_REL = 1e-12


@dataclass
class Curve:
    vertices: np.ndarray
    xi: int = None
    zeta: int = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64)
        seg = np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)
        self.cumlen = np.concatenate(([0.0], np.cumsum(seg)))

    @property
    def length(self):
        return float(self.cumlen[-1])

    def point_at(self, s):
        s = min(max(s, 0.0), self.length)
        k = int(np.searchsorted(self.cumlen, s, side="right") - 1)
        k = min(k, len(self.vertices) - 2)
        seg = self.cumlen[k + 1] - self.cumlen[k]
        t = 0.0 if seg == 0 else (s - self.cumlen[k]) / seg
        return self.vertices[k] + t * (self.vertices[k + 1] - self.vertices[k])

    def sub(self, s0, s1):
        """Polyline of the piece between arclengths ``s0 < s1``."""
        inner = [v for v, c in zip(self.vertices, self.cumlen) if s0 < c < s1]
        return np.array([self.point_at(s0), *inner, self.point_at(s1)])

    def reversed(self):
        return Curve(self.vertices[::-1].copy(), self.zeta, self.xi)

    def samples(self, per_segment=64):
        pts, arc = [], []
        for k in range(len(self.vertices) - 1):
            t = np.linspace(0.0, 1.0, per_segment, endpoint=False)
            a, b = self.vertices[k], self.vertices[k + 1]
            pts.append(a + t[:, None] * (b - a))
            arc.append(self.cumlen[k] + t * (self.cumlen[k + 1] - self.cumlen[k]))
        pts.append(self.vertices[-1:])
        arc.append([self.length])
        return np.vstack(pts), np.concatenate(arc)


def _edge_of(domain, point):
    """Index of the true-boundary path segment containing ``point`` (or None)."""
    segs = _path_segments(domain.window["boundary_path"])
    for k, (a, b) in enumerate(segs):
        v = b - a
        t = np.clip((point - a) @ v / (v @ v), 0, 1)
        if np.linalg.norm(point - (a + t * v)) <= 1e-12:
            return k, segs
    return None, segs


def _inward_normal(domain, a, b):
    v = b - a
    n = np.array([-v[1], v[0]]) / np.linalg.norm(v)
    probe = (a + b) / 2 + 1e-6 * n
    if not Polygon(domain.window["polygon"]).contains(Point(probe)):
        n = -n
    return n


def uniformity_constant(curve, domain):
    """Smallest A for which the curve passes both uniformity checks on dense samples."""
    P0 = domain.space.points[curve.xi]
    P1 = domain.space.points[curve.zeta]
    d = float(np.linalg.norm(P1 - P0))
    pts, arc = curve.samples()
    dO = domain.distance_to_boundary_points(pts)
    side = np.minimum(arc, curve.length - arc)
    inner = side > 0
    if np.any(dO[inner] <= 0):
        return math.inf
    return max(curve.length / d, float((side[inner] / dO[inner]).max()))


def uniform_curve(domain, xi, zeta):
    """Explicit polyline between two true-boundary sites.

    Sites on a common boundary edge are joined by the tent over that edge
    (apex at the midpoint pushed inward by half the separation); other pairs
    are routed through the preset's core point.
    """
    if "boundary_path" not in domain.window:
        raise ValueError("uniform curves need a preset window")
    if xi == zeta:
        raise ValueError("curve endpoints coincide")
    for s in (xi, zeta):
        if not domain.is_boundary(s):
            raise ValueError(f"site {s} is not a true boundary site")
    P0 = domain.space.points[xi]
    P1 = domain.space.points[zeta]
    k0, segs = _edge_of(domain, P0)
    k1, _ = _edge_of(domain, P1)
    shared = None
    for k in (k0, k1):
        a, b = segs[k]
        v = b - a
        if all(np.linalg.norm(p - (a + np.clip((p - a) @ v / (v @ v), 0, 1) * v)) <= 1e-12 for p in (P0, P1)):
            shared = k
            break
    if shared is not None:
        n = _inward_normal(domain, *segs[shared])
        apex = (P0 + P1) / 2 + np.linalg.norm(P1 - P0) / 2 * n
        verts = [P0, apex, P1]
    else:
        verts = [P0, np.asarray(domain.window["core"], dtype=np.float64), P1]
    curve = Curve(np.array(verts), int(xi), int(zeta))
    region = Polygon(domain.window["polygon"]).buffer(1e-9)
    if not region.covers(LineString(curve.vertices)):
        raise ValueError("curve leaves the closed window")
    return curve


def _first_touch(poly, centers, radii):
    """Smallest arclength along ``poly`` lying in the closure of some ball."""
    s0 = 0.0
    for a, b in zip(poly[:-1], poly[1:]):
        v = b - a
        L = float(np.linalg.norm(v))
        if L == 0:
            continue
        best = math.inf
        for c, r in zip(centers, radii):
            # |a + t v - c|^2 <= r^2 with t in [0, 1]
            w = a - c
            qa, qb, qc = v @ v, 2 * (w @ v), w @ w - r * r
            disc = qb * qb - 4 * qa * qc
            if disc < 0:
                continue
            sq = math.sqrt(disc)
            t1, t2 = (-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)
            if t2 < 0 or t1 > 1:
                continue
            best = min(best, max(t1, 0.0))
        if best < math.inf:
            return s0 + best * L
        s0 += L
    return None


@dataclass
class ConeChain:
    tau: float
    labels: np.ndarray
    centers: np.ndarray
    radii: np.ndarray
    d_centers: np.ndarray
    generations: np.ndarray
    x0: np.ndarray
    d0: float
    curve: Curve
    cutoff: float
    notes: list = field(default_factory=list)

    def ball(self, k):
        i = int(np.flatnonzero(self.labels == k)[0])
        return self.centers[i], self.radii[i]


def _walk(domain, curve, tau, r0, x0, cutoff, max_balls):
    """Balls B_1, B_2, ... from the midpoint toward ``curve``'s start."""
    half = curve.sub(0.0, curve.length / 2)
    centers, radii, gens = [x0], [r0], [0]
    while len(centers) < max_balls:
        s = _first_touch(half, centers, radii)
        if s is None or s <= 0:
            break
        x = Curve(half).point_at(s)
        dx = float(domain.distance_to_boundary_points(x[None])[0])
        if dx >= 8 * tau * radii[-1]:
            r, g = radii[-1], gens[-1]
        else:
            r, g = dx / (16 * tau), gens[-1] + 1
        if r < cutoff:
            break
        centers.append(x)
        radii.append(r)
        gens.append(g)
    return centers[1:], radii[1:], gens[1:]


def build_cone_chain(domain, curve, tau=1.0, h=None, max_balls=100000):
    """Two-sided chain B_k along ``curve``; k > 0 toward xi, k < 0 toward zeta.

    Balls with radius below ``h / 2`` are not produced.
    """
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    h = domain.h if h is None else h
    cutoff = h / 2
    region = Polygon(domain.window["polygon"]).buffer(1e-9)
    if not region.covers(LineString(curve.vertices)):
        raise ValueError("curve leaves the closed window")
    x0 = curve.point_at(curve.length / 2)
    d0 = float(domain.distance_to_boundary_points(x0[None])[0])
    r0 = d0 / (16 * tau)
    if r0 < cutoff:
        raise ValueError(f"chain unresolvable: r0={r0:.3g} below h/2={cutoff:.3g}")
    cp, rp, gp = _walk(domain, curve, tau, r0, x0, cutoff, max_balls)
    cn, rn, gn = _walk(domain, curve.reversed(), tau, r0, x0, cutoff, max_balls)
    labels = np.concatenate([-np.arange(len(cn), 0, -1), [0], np.arange(1, len(cp) + 1)])
    centers = np.array(cn[::-1] + [x0] + cp)
    radii = np.array(rn[::-1] + [r0] + rp)
    gens = np.array(gn[::-1] + [0] + gp)
    dc = domain.distance_to_boundary_points(centers)
    notes = [f"truncated below radius {cutoff:.6g}"]
    return ConeChain(float(tau), labels, centers, radii, dc, gens, x0, d0, curve, cutoff, notes)


def chain_cover_counts(chain, points, dilation=None):
    """Number of dilated balls ``dilation * B_k`` containing each point."""
    dil = 4 * chain.tau if dilation is None else dilation
    P = np.atleast_2d(points)
    diff = P[:, None, :] - chain.centers[None, :, :]
    d = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)
    return (d < dil * chain.radii[None, :]).sum(axis=1)


def verify_chain_properties(chain, domain, A=None):
    """Evaluate the chain inequalities with measured constants (report only)."""
    tau = chain.tau
    A = domain.A if A is None else A
    k = chain.labels
    r = chain.radii
    dc = chain.d_centers
    per_k = []

    rad_ok = dc >= 8 * tau * r * (1 - _REL)
    scale = 2.0 ** (-np.abs(k)) * chain.d0
    lit = np.maximum(r / scale, scale / r)
    gscale = 2.0 ** (-chain.generations) * chain.d0
    gen = np.maximum(r / gscale, gscale / r)
    ratio_dc = dc / r

    D = np.linalg.norm(chain.centers[:, None] - chain.centers[None], axis=2)
    consecutive = [bool(D[i, i + 1] < r[i] + r[i + 1]) for i in range(len(k) - 1)]

    # same-side decay within ceil(16 tau A) steps
    step = int(math.ceil(16 * tau * A))
    decay_ok = True
    for ordered in (r[k >= 0], r[k <= 0][::-1]):
        decay_ok &= bool(np.all(ordered[step:] < ordered[:-step])) if ordered.size > step else True

    dil = 4 * tau
    inter = D < dil * (r[:, None] + r[None, :])
    li, lj = np.nonzero(inter)
    N0 = int(np.abs(k[li] - k[lj]).max()) if li.size else 0

    pts = np.vstack([domain.space.points[domain.interior], chain.centers])
    overlap = int(chain_cover_counts(chain, pts).max())

    for i, kk in enumerate(k):
        per_k.append({
            "k": int(kk), "r": float(r[i]), "d_omega": float(dc[i]),
            "generation": int(chain.generations[i]),
            "rad_d_omega": bool(rad_ok[i]),
            "K_literal": float(lit[i]), "K_generation": float(gen[i]),
        })
    xi = domain.space.points[chain.curve.xi]
    zeta = domain.space.points[chain.curve.zeta]
    return {
        "n_balls": int(k.size),
        "rad_d_omega_ok": bool(rad_ok.all()),
        "K_literal": float(lit.max()),
        "K_generation": float(gen.max()),
        "K_d_omega": float(ratio_dc.max()),
        "consecutive_intersect": bool(all(consecutive)),
        "decay_step": step,
        "decay_ok": bool(decay_ok),
        "N0": N0,
        "overlap": overlap,
        "d0_over_separation": chain.d0 / float(np.linalg.norm(zeta - xi)),
        "per_k": per_k,
    }


def sample_boundary_pairs(domain, n, seed=0, min_sep=None, max_tries=10000):
    """``n`` random boundary pairs joined by a valid curve with a resolvable chain."""
    from besovtrace.rng import SplitMix64

    rng = SplitMix64(seed)
    min_sep = 16 * domain.h if min_sep is None else min_sep
    P = domain.space.points
    out = []
    for _ in range(max_tries):
        if len(out) == n:
            break
        a = int(domain.boundary[rng.integers(0, domain.boundary.size)])
        b = int(domain.boundary[rng.integers(0, domain.boundary.size)])
        if np.linalg.norm(P[a] - P[b]) < min_sep:
            continue
        try:
            curve = uniform_curve(domain, a, b)
        except ValueError:
            continue
        x0 = curve.point_at(curve.length / 2)
        if domain.distance_to_boundary_points(x0[None])[0] / 16 < domain.h / 2:
            continue
        out.append((a, b))
    return out
