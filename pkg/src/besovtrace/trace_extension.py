"""Extension by Whitney averages, trace by shrinking ball averages, and audits of both."""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import sparse

from besovtrace.besov import BesovParams, besov_dyadic, dirichlet_energy, local_lip
from besovtrace.space import ball_query


@dataclass
class TraceParams:
    schedule: tuple = None
    m_min: int = 3
    tol: float = 1e-2

    def resolve(self, domain):
        h = domain.h
        sched = tuple(self.schedule) if self.schedule is not None else (8 * h, 4 * h, 2 * h)
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise ValueError("trace schedule must be strictly decreasing")
        if sched[-1] < 2 * h * (1 - 1e-12):
            raise ValueError(f"smallest trace radius {sched[-1]} below 2h={2 * h}")
        if self.m_min < 1:
            raise ValueError("m_min must be at least 1")
        return sched


def _check_pair(cover, pou, domain):
    if pou.cover is not cover:
        raise ValueError("partition was built from a different cover")
    if pou.phi.shape != (domain.interior.size, cover.n_balls):
        raise ValueError("cover/partition do not match the domain")
    if any(b.U is None for b in cover.balls):
        raise ValueError("cover has no boundary anchors; run boundary_anchors first")


def averaging_matrix(cover, domain):
    """Row b holds the nu-average weights of U_b (n_balls x n_boundary)."""
    nu = domain.nu_weights
    rows, cols, vals = [], [], []
    for k, b in enumerate(cover.balls):
        w = nu[b.U]
        rows.append(np.full(b.U.size, k))
        cols.append(b.U)
        vals.append(w / w.sum())
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(cover.n_balls, domain.boundary.size))


def extend(f, cover, pou, domain):
    """F(x) = sum_b (nu-average of f over U_b) phi_b(x) at every interior site."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != domain.boundary.shape:
        raise ValueError(f"boundary field has {f.size} values, expected {domain.boundary.size}")
    if not np.all(np.isfinite(f)):
        raise ValueError("boundary field has non-finite values")
    _check_pair(cover, pou, domain)
    cache = cover.__dict__.setdefault("_avg", None)
    if cache is None:
        cache = cover._avg = averaging_matrix(cover, domain)
    return pou.phi @ (cache @ f)


@dataclass
class TraceResult:
    values: np.ndarray
    radius: np.ndarray
    converged: np.ndarray
    admissible: np.ndarray
    sites: np.ndarray

    @property
    def missing(self):
        return int((~self.admissible).sum())


def trace(u, domain, params=None, sites=None):
    """Ball averages of ``u`` at boundary sites (positions into ``domain.boundary``).

    The value is the average over the smallest scheduled radius that still
    holds ``m_min`` interior samples; ``converged`` compares it with the
    previous admissible average.
    """
    params = TraceParams() if params is None else params
    sched = params.resolve(domain)
    u = np.asarray(u, dtype=np.float64)
    if u.shape != domain.interior.shape:
        raise ValueError(f"interior field has {u.size} values, expected {domain.interior.size}")
    sites = np.arange(domain.boundary.size) if sites is None else np.asarray(sites, dtype=np.int64)
    ispace = domain.interior_space
    mu = domain.mu
    bpts = domain.space.points[domain.boundary] if domain.space.points is not None else None
    vals = np.full(sites.size, np.nan)
    rad = np.full(sites.size, np.nan)
    conv = np.zeros(sites.size, dtype=bool)
    ok = np.zeros(sites.size, dtype=bool)
    for i, s in enumerate(sites):
        avgs = []
        for r in sched:
            if bpts is not None:
                hit = ball_query(ispace, bpts[s], r)
            else:
                row = domain.space.table[domain.boundary[s], domain.interior]
                hit = np.flatnonzero(row < r)
            if hit.size < params.m_min:
                break
            w = mu[hit]
            avgs.append((r, float(np.sum(w * u[hit]) / w.sum())))
        if not avgs:
            continue
        ok[i] = True
        rad[i], vals[i] = avgs[-1]
        conv[i] = len(avgs) >= 2 and abs(avgs[-1][1] - avgs[-2][1]) <= params.tol
    return TraceResult(vals, rad, conv, ok, sites)


def flagged_boundary_sites(cover, domain):
    """Boundary positions anchored only by flagged (widened) balls."""
    good, bad = set(), set()
    for b in cover.balls:
        (bad if b.flagged else good).update(b.U.tolist())
    return np.array(sorted(bad - good), dtype=np.int64)


def roundtrip_error(f, domain, cover, pou, params=None, p=2.0):
    f = np.asarray(f, dtype=np.float64)
    F = extend(f, cover, pou, domain)
    tr = trace(F, domain, params)
    keep = tr.admissible.copy()
    keep[flagged_boundary_sites(cover, domain)] = False
    err = np.abs(tr.values - f)
    nu = domain.nu_weights
    e = err[keep]
    return {
        "sup_err": float(e.max()) if e.size else math.nan,
        "lp_err": float((np.sum(nu[keep] * e ** p)) ** (1 / p)) if e.size else math.nan,
        "argmax": int(np.flatnonzero(keep)[np.argmax(e)]) if e.size else -1,
        "n_flagged": int(sum(b.flagged for b in cover.balls)),
        "n_sites": int(keep.sum()),
        "per_site": np.where(keep, err, np.nan),
    }


# locality audits

def local_ratios(F, f, cover, domain, p=2.0):
    """Per ball: sum_{B} mu|F|^p / (2^(l theta) sum_{U*} nu|f|^p)."""
    mu, nu = domain.mu, domain.nu_weights
    if cover.in_ball.shape[1] != np.size(F):
        raise ValueError("cover incidence does not match the interior field")
    lhs = cover.in_ball.astype(np.float64) @ (mu * np.abs(F) ** p)
    out = np.full(cover.n_balls, np.nan)
    for k, b in enumerate(cover.balls):
        if b.flagged:
            continue
        rhs = 2.0 ** (b.level * domain.theta) * float(np.sum(nu[b.Ustar] * np.abs(f[b.Ustar]) ** p))
        if rhs > 0:
            out[k] = lhs[k] / rhs
        elif lhs[k] > 0:
            out[k] = math.inf
    return out


def layer_ratios(F, f, domain, centers, radii, p=2.0, dilation=2.0 ** 8):
    """sum_{B(z,r) cap Omega} mu|F|^p / (r^theta sum_{B(z, 256 r) cap dOmega} nu|f|^p)."""
    mu, nu = domain.mu, domain.nu_weights
    bpts = domain.space.points[domain.boundary]
    out = []
    for z in centers:
        for r in radii:
            inner = ball_query(domain.interior_space, bpts[z], r)
            outer = ball_query(domain.boundary_space, int(z), dilation * r)
            lhs = float(np.sum(mu[inner] * np.abs(F[inner]) ** p))
            rhs = r ** domain.theta * float(np.sum(nu[outer] * np.abs(f[outer]) ** p))
            if rhs > 0:
                out.append(lhs / rhs)
            elif lhs > 0:
                out.append(math.inf)
    return np.array(out)


# chain oscillation

@dataclass
class ChainEstimate:
    lhs: float
    rhs_raw: float
    ratio: float
    telescoping_gap: float
    ball_averages: np.ndarray = field(repr=False)
    epsilon: float = None


def chain_oscillation_estimate(u, chain, domain, p=2.0, epsilon=None, lam=1.0,
                               trace_params=None, lip=None):
    """Both sides of the telescoped oscillation bound along one chain.

    ``rhs_raw`` is the bound without its hidden constant; ``ratio`` is
    ``lhs / rhs_raw`` so a calibration constant is just a max of ratios.

    The truncated chain is closed at both ends by the trace balls
    ``B(zeta, r_m)`` and ``B(xi, r_m)``, so the telescoped differences sum
    exactly to ``Tu(zeta) - Tu(xi)``.  Chain-ball averages use radius
    ``max(r_k, h)`` so balls between the truncation radius and the grid
    spacing still hold samples.
    """
    theta = domain.theta
    if epsilon is None:
        epsilon = (p - theta) / 2
    if p == 1 and epsilon >= 1 - theta:
        raise ValueError("p = 1 needs theta + epsilon < 1")
    if not theta + epsilon < p:
        raise ValueError(f"need theta + epsilon < p, got {theta} + {epsilon} >= {p}")
    u = np.asarray(u, dtype=np.float64)
    lip = local_lip(u, domain) if lip is None else lip
    ispace = domain.interior_space
    mu = domain.mu

    ends = np.array([domain.boundary_position(chain.curve.zeta),
                     domain.boundary_position(chain.curve.xi)])
    tr = trace(u, domain, trace_params, sites=ends)
    if not tr.admissible.all():
        raise ValueError("trace undefined at a chain endpoint")
    pts = domain.space.points
    # labels ascend from the zeta side to the xi side
    centers = [pts[chain.curve.zeta], *chain.centers, pts[chain.curve.xi]]
    r = np.array([tr.radius[0], *chain.radii, tr.radius[1]])
    sample_r = np.maximum(r, domain.h)
    sample_r[[0, -1]] = r[[0, -1]]

    avg_u, avg_g = [], []
    for c, rk, rs in zip(centers, r, sample_r):
        hit = ball_query(ispace, c, rs)
        big = ball_query(ispace, c, 4 * lam * chain.tau * rs)
        if hit.size == 0 or big.size == 0:
            raise ValueError(f"chain ball at {c} with radius {rk} holds no interior samples")
        w = mu[hit]
        avg_u.append(np.sum(w * u[hit]) / w.sum())
        wb = mu[big]
        avg_g.append(np.sum(wb * lip[big] ** p) / wb.sum())
    avg_u = np.array(avg_u)
    avg_g = np.array(avg_g)
    telescoped = float(np.sum(avg_u[:-1] - avg_u[1:]))
    gap = abs(telescoped - (avg_u[0] - avg_u[-1]))

    if p == 1:
        rhs = float(np.sum(r * avg_g))
    else:
        first = float(np.sum(r ** (theta + epsilon) * avg_g)) ** (1 / p)
        second = float(np.sum(r ** ((p - theta - epsilon) / (p - 1)))) ** (1 - 1 / p)
        rhs = first * second

    lhs = abs(float(tr.values[0] - tr.values[1]))
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    return ChainEstimate(lhs, rhs, ratio, gap, avg_u, epsilon)


# empirical operator norms

@dataclass
class OperatorNormReport:
    operator: str
    per_function: list
    K: float
    refinement: tuple = None

    def to_json(self):
        return {"operator": self.operator, "K": self.K, "per_function": self.per_function,
                "refinement": list(self.refinement) if self.refinement else None}


def extension_norms(domain, cover, pou, family, p=2.0, params=None):
    params = BesovParams.for_trace(domain.theta, p) if params is None else params
    rows = []
    for name, f in family.items():
        bn = besov_dyadic(f, domain, params).value
        if bn == 0:
            raise ValueError(f"family member {name!r} has zero seminorm")
        en = dirichlet_energy(extend(f, cover, pou, domain), domain, p)
        rows.append({"name": name, "input": bn, "output": en, "ratio": en / bn})
    return OperatorNormReport("E", rows, max(r["ratio"] for r in rows))


def trace_norms(domain, family, p=2.0, params=None, trace_params=None):
    params = BesovParams.for_trace(domain.theta, p) if params is None else params
    rows = []
    for name, u in family.items():
        en = dirichlet_energy(u, domain, p)
        if en == 0:
            raise ValueError(f"family member {name!r} has zero energy")
        tr = trace(u, domain, trace_params)
        if not tr.admissible.all():
            raise ValueError(f"trace of {name!r} undefined at {tr.missing} sites")
        bn = besov_dyadic(tr.values, domain, params).value
        rows.append({"name": name, "input": en, "output": bn, "ratio": bn / en})
    return OperatorNormReport("T", rows, max(r["ratio"] for r in rows))


def estimate_operator_norms(domain, boundary_fam, interior_fam, cover, pou, p=2.0,
                            coarse=None):
    """K_E and K_T on ``domain``; with ``coarse = (domain, cover, pou, bfam, ifam)`` also the refinement pair."""
    KE = extension_norms(domain, cover, pou, boundary_fam, p)
    KT = trace_norms(domain, interior_fam, p)
    if coarse is not None:
        cd, cc, cp, cb, ci = coarse
        KE.refinement = (extension_norms(cd, cc, cp, cb, p).K, KE.K)
        KT.refinement = (trace_norms(cd, ci, p).K, KT.K)
    return KE, KT
