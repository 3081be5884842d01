"""Whitney cover of the interior, its partition of unity, and boundary anchors.

Balls are emitted greedily in ascending site order: an interior site not
yet inside an emitted ball becomes a center with radius ``d_Omega / 8``.
Incidence is kept as sparse (ball x interior-site) matrices.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import sparse

from besovtrace.space import ball_query, neighbor_csr

ANCHOR_DILATION = 2.0 ** 8


def whitney_level(r):
    """Integer i with 2**(i-1) < r <= 2**i, exact at powers of two."""
    m, e = math.frexp(r)
    return e - 1 if m == 0.5 else e


@dataclass
class WhitneyBall:
    level: int
    index: int
    center: int
    radius: float
    anchor: int = -1
    U: np.ndarray = None
    Ustar: np.ndarray = None
    subgrid: bool = False
    flagged: bool = False


@dataclass(eq=False)
class WhitneyCover:
    balls: list
    centers: np.ndarray      # global site indices
    radii: np.ndarray
    levels: np.ndarray
    in_ball: sparse.csr_matrix      # (n_balls, n_interior) site in B
    in_double: sparse.csr_matrix    # (n_balls, n_interior) site in 2B
    double_dist: sparse.csr_matrix  # distances for the 2B incidences
    warnings: list = field(default_factory=list)

    @property
    def n_balls(self):
        return len(self.balls)

    @property
    def overlap(self):
        return np.asarray(self.in_double.sum(axis=0)).ravel()

    def anchors(self):
        return np.array([b.anchor for b in self.balls])

    def to_json(self):
        return [
            {"i": b.level, "j": b.index, "center": int(b.center), "r": b.radius,
             "anchor": int(b.anchor), "U_size": 0 if b.U is None else int(b.U.size),
             "Ustar_size": 0 if b.Ustar is None else int(b.Ustar.size)}
            for b in self.balls
        ]


def _incidence(domain, centers_pos, radii, dilation):
    ispace = domain.interior_space
    rows, cols, dist = [], [], []
    for b, (c, r) in enumerate(zip(centers_pos, radii)):
        hit = ball_query(ispace, int(c), dilation * r)
        rows.append(np.full(hit.size, b))
        cols.append(hit)
        dist.append(ispace.distances_from(int(c), hit))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    dist = np.concatenate(dist)
    shape = (len(radii), domain.interior.size)
    inc = sparse.csr_matrix((np.ones(rows.size, dtype=bool), (rows, cols)), shape=shape)
    # explicit zeros (center to itself) must survive, so store d + 1 and subtract later
    dm = sparse.csr_matrix((dist + 1.0, (rows, cols)), shape=shape)
    return inc, dm


def build_whitney(domain):
    """Greedy Whitney cover of the interior sites."""
    if domain.interior.size == 0:
        raise ValueError("domain has no interior sites")
    ispace = domain.interior_space
    d = domain.d_omega
    h = domain.h
    covered = np.zeros(domain.interior.size, dtype=bool)
    centers_pos, radii, warnings = [], [], []
    subgrid = 0
    for pos in range(domain.interior.size):
        if covered[pos]:
            continue
        r = d[pos] / 8
        if not r > 0:
            raise ValueError(f"interior site {domain.interior[pos]} has d_Omega = 0")
        covered[ball_query(ispace, pos, r)] = True
        centers_pos.append(pos)
        radii.append(r)
        subgrid += d[pos] < 4 * h
    if subgrid:
        warnings.append(f"{subgrid} balls centered at sites with d_Omega < 4h (sub-grid balls)")
    radii = np.array(radii)
    levels = np.array([whitney_level(r) for r in radii])
    per_level = {}
    balls = []
    for c, r, lv in zip(centers_pos, radii, levels):
        j = per_level.get(lv, 0)
        per_level[lv] = j + 1
        balls.append(WhitneyBall(int(lv), j, int(domain.interior[c]), float(r),
                                 subgrid=bool(8 * r < 4 * h)))
    in_ball, _ = _incidence(domain, centers_pos, radii, 1.0)
    in_double, dd = _incidence(domain, centers_pos, radii, 2.0)
    return WhitneyCover(balls, domain.interior[centers_pos], radii, levels,
                        in_ball, in_double, dd, warnings)


def _pairs_sharing_sites(A, B):
    """Ball pairs (a, b) with some site in both A-row a and B-row b."""
    M = (A.astype(np.int32) @ B.T.astype(np.int32)).tocoo()
    return M.row, M.col


def sigma_overlap(cover, domain, sigma):
    """Max over balls of #{same-level k : sigma B_ij meets sigma B_ik} (self included)."""
    P = domain.space.points
    worst = 0
    for lv in np.unique(cover.levels):
        sel = np.flatnonzero(cover.levels == lv)
        C = P[cover.centers[sel]]
        r = cover.radii[sel]
        best = 0
        for start in range(0, sel.size, 512):
            blk = slice(start, start + 512)
            D = np.linalg.norm(C[blk, None] - C[None], axis=2)
            cnt = (D < sigma * (r[blk, None] + r[None])).sum(axis=1)
            best = max(best, int(cnt.max()))
        worst = max(worst, best)
    return worst


def verify_whitney(cover, domain, sigmas=(1.0, 2.0, 2.0 ** 11)):
    """Check the cover properties and the level-adjacency lemma on the sample."""
    violations = []
    n_int = domain.interior.size
    in_any = np.asarray(cover.in_ball.sum(axis=0)).ravel() > 0
    if not in_any.all():
        violations.append(f"coverage: {int((~in_any).sum())} uncovered interior sites")
    d = domain.d_omega
    cpos = np.searchsorted(domain.interior, cover.centers)
    if not np.all(cover.radii == d[cpos] / 8):
        violations.append("radius rule r = d_Omega/8 broken")
    lo = np.ldexp(1.0, cover.levels - 1)
    hi = np.ldexp(1.0, cover.levels)
    if not np.all((lo < cover.radii) & (cover.radii <= hi)):
        violations.append("level bins 2^(i-1) < r <= 2^i broken")
    bset = set(domain.boundary.tolist())
    inside_bad = 0
    for b in cover.balls:
        if bset.intersection(ball_query(domain.space, b.center, 2 * b.radius).tolist()):
            inside_bad += 1
    if inside_bad:
        violations.append(f"{inside_bad} balls whose 2B contains a boundary site")

    a, b = _pairs_sharing_sites(cover.in_double, cover.in_ball)
    gap = np.abs(cover.levels[a] - cover.levels[b])
    lemma_bad = int((gap > 3).sum())
    if lemma_bad:
        violations.append(f"{lemma_bad} intersecting pairs with |i - l| > 3")

    # far-level pairs must be separated in the continuum: d - 2 r_a - r_b > 0
    far_checked, far_bad = 0, 0
    if domain.space.points is not None:
        C = domain.space.points[cover.centers]
        for start in range(0, cover.n_balls, 512):
            blk = slice(start, start + 512)
            far = np.abs(cover.levels[blk, None] - cover.levels[None]) > 3
            D = np.linalg.norm(C[blk, None] - C[None], axis=2)
            sep = D - 2 * cover.radii[blk, None] - cover.radii[None]
            far_checked += int(far.sum())
            far_bad += int((far & (sep <= 0)).sum())
    if far_bad:
        violations.append(f"{far_bad} far-level pairs not separated")

    overlap = cover.overlap
    hist = np.bincount(overlap)
    report = {
        "n_balls": cover.n_balls,
        "n_interior": int(n_int),
        "levels": [int(cover.levels.min()), int(cover.levels.max())],
        "overlap_max": int(overlap.max()),
        "overlap_histogram": hist.tolist(),
        "lemma_pairs_checked": int(a.size),
        "lemma_violations": lemma_bad,
        "far_pairs_checked": far_checked,
        "far_pairs_violations": far_bad,
        "N_sigma": {str(s): sigma_overlap(cover, domain, s) for s in sigmas}
        if domain.space.points is not None else {},
        "warnings": list(cover.warnings),
        "violations": violations,
    }
    return report


@dataclass(eq=False)
class PartitionOfUnity:
    phi: sparse.csr_matrix   # (n_interior, n_balls)
    cover: WhitneyCover

    def evaluate(self, ball):
        return self.phi[:, ball].toarray().ravel()

    def sums(self):
        return np.asarray(self.phi.sum(axis=1)).ravel()


def build_partition(cover):
    """Normalized clamped tents: psi = clip(2 - d/r, 0, 1), phi = psi / sum(psi)."""
    dd = cover.double_dist.tocoo()
    d = dd.data - 1.0
    psi = np.clip(2.0 - d / cover.radii[dd.row], 0.0, 1.0)
    Psi = sparse.csr_matrix((psi, (dd.col, dd.row)),
                            shape=(cover.double_dist.shape[1], cover.n_balls))
    S = np.asarray(Psi.sum(axis=1)).ravel()
    if np.any(S <= 0):
        raise RuntimeError(f"{int((S <= 0).sum())} interior sites outside every ball: cover broken")
    phi = sparse.diags(1.0 / S) @ Psi
    return PartitionOfUnity(phi.tocsr(), cover)


def partition_lipschitz(pou, domain, rho=None):
    """sup |phi_b(x) - phi_b(y)| r_b / d(x, y) over neighbor pairs with d < rho."""
    rho = 2 * domain.h if rho is None else rho
    indptr, indices, dist = neighbor_csr(domain.interior_space, np.arange(domain.interior.size), rho)
    rows = np.repeat(np.arange(indptr.size - 1), np.diff(indptr))
    keep = rows < indices
    x, y, dd = rows[keep], indices[keep], dist[keep]
    diff = (pou.phi[x] - pou.phi[y]).tocoo()
    if diff.nnz == 0:
        return 0.0
    q = np.abs(diff.data) * pou.cover.radii[diff.col] / dd[diff.row]
    return float(q.max())


def boundary_anchors(cover, domain):
    """Fill anchors, U and U* on every ball; returns the overlap report."""
    bspace = domain.boundary_space
    Pb = domain.space.points[domain.boundary] if domain.space.points is not None else None
    flagged = 0
    for b in cover.balls:
        if Pb is not None:
            c = domain.space.points[b.center]
            dmin, _ = bspace._tree.query(c, k=1)
            cand = ball_query(bspace, c, dmin * (1 + 1e-9) + 1e-300)
            dist = bspace.distances_from(c, cand)
            ties = cand[dist == dist.min()]
        else:
            row = domain.space.table[b.center, domain.boundary]
            ties = np.flatnonzero(row == row.min())
        pos = int(ties[np.argmin(domain.boundary[ties])])
        b.anchor = int(domain.boundary[pos])
        b.U = ball_query(bspace, pos, b.radius)
        b.Ustar = ball_query(bspace, pos, ANCHOR_DILATION * b.radius)
        if b.U.size == 0:
            b.flagged = True
            b.U = np.array([pos])
            flagged += 1
    if flagged:
        cover.warnings.append(f"{flagged} balls with empty U widened to their anchor")
    return anchor_report(cover, domain)


def _sets_matrix(cover, domain, attr, sel=None):
    sel = range(cover.n_balls) if sel is None else sel
    rows, cols = [], []
    for k, b in enumerate(sel):
        s = getattr(cover.balls[b], attr)
        rows.append(np.full(s.size, k))
        cols.append(s)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    return sparse.csr_matrix((np.ones(rows.size, dtype=np.int32), (rows, cols)),
                             shape=(len(sel), domain.boundary.size))


def anchor_report(cover, domain):
    nu = domain.nu_weights
    nuU = np.array([nu[b.U].sum() for b in cover.balls])
    nuUs = np.array([nu[b.Ustar].sum() for b in cover.balls])
    per_level = {}
    for lv in np.unique(cover.levels):
        sel = np.flatnonzero(cover.levels == lv)
        M = _sets_matrix(cover, domain, "Ustar", sel)
        meets = (M @ M.T) > 0
        per_level[int(lv)] = int(np.asarray(meets.sum(axis=1)).max())

    # U_{i,j} inside U*_{l,m} whenever 2B_{i,j} meets B_{l,m}
    a, b = _pairs_sharing_sites(cover.in_double, cover.in_ball)
    U = _sets_matrix(cover, domain, "U")
    Us = _sets_matrix(cover, domain, "Ustar")
    inside = np.asarray((U[a].multiply(Us[b])).sum(axis=1)).ravel()
    sizes = np.asarray(U[a].sum(axis=1)).ravel()
    nested_bad = int((inside != sizes).sum())
    ratio = cover.radii[a] / cover.radii[b]
    return {
        "n_flagged": int(sum(bb.flagged for bb in cover.balls)),
        "flagged_fraction": float(np.mean([bb.flagged for bb in cover.balls])),
        "nu_ratio_max": float((nuUs / nuU).max()),
        "Ustar_overlap_per_level": per_level,
        "Ustar_overlap_max": max(per_level.values()),
        "U_nested_violations": nested_bad,
        "neighbor_radius_ratio": [float(ratio.min()), float(ratio.max())],
    }


def whitney_pipeline(domain):
    cover = build_whitney(domain)
    boundary_anchors(cover, domain)
    return cover, build_partition(cover)
