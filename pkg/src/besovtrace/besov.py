"""Nonlocal seminorms on the boundary and gradient surrogates on the interior.

Three forms of the homogeneous Besov seminorm (q = p) are computed from
the same dense boundary distance matrix:

* dyadic: ``sum_l 2^(-l alpha p) sum_y nu_y avg_{B(y, C 2^l)} |f(y) - f(x)|^p``
* pairwise: ``sum_y sum_{x != y} nu_y nu_x |f(y)-f(x)|^p / (d^(alpha p) nu(B(y, d)))``
* continuous: log-trapezoid quadrature of the ``dr / r`` integral.

Every form returns the p-th power in ``value_p`` and its root in ``value``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from besovtrace import kernels
from besovtrace.space import ball_query, neighbor_csr


@dataclass
class BesovParams:
    alpha: float
    p: float = 2.0
    q: float = None
    C: float = 1.0
    l_min: int = None
    l_max: int = None

    def __post_init__(self):
        if self.q is None:
            self.q = self.p
        if self.q != self.p:
            raise NotImplementedError("only q = p is implemented")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.C > 0:
            raise ValueError("dyadic base C must be positive")

    @classmethod
    def for_trace(cls, theta, p, **kw):
        if not 0 < theta < p:
            raise ValueError(f"need 0 < theta < p, got theta={theta}, p={p}")
        return cls(alpha=1 - theta / p, p=p, **kw)


@dataclass
class BesovResult:
    form: str
    alpha: float
    p: float
    C: float
    value_p: float
    per_level: list = field(default_factory=list)
    skipped: int = 0

    @property
    def value(self):
        return self.value_p ** (1 / self.p)

    def to_json(self):
        return {"form": self.form, "alpha": self.alpha, "p": self.p, "C": self.C,
                "value": self.value, "value_p": self.value_p,
                "per_level": self.per_level, "skipped": self.skipped}


def _boundary_field(f, domain):
    f = np.asarray(f, dtype=np.float64)
    if f.shape != domain.boundary.shape:
        raise ValueError(f"boundary field has {f.size} values, expected {domain.boundary.size}")
    if not np.all(np.isfinite(f)):
        raise ValueError("boundary field has non-finite values")
    return f


def level_range(domain, params):
    lo = params.l_min if params.l_min is not None else math.ceil(math.log2(domain.h))
    hi = params.l_max if params.l_max is not None else math.ceil(math.log2(domain.boundary_diameter)) + 1
    return lo, hi


def besov_dyadic(f, domain, params):
    f = _boundary_field(f, domain)
    lo, hi = level_range(domain, params)
    levels = np.arange(lo, hi + 1)
    radii = params.C * np.ldexp(1.0, levels)
    nu = domain.nu_weights
    num, den = kernels.ball_sums(domain.boundary_distances, nu, f, params.p, radii)
    ap = params.alpha * params.p
    per_level, total, skipped = [], 0.0, 0
    for k, l in enumerate(levels):
        ok = den[:, k] > 0
        skipped += int((~ok).sum())
        inner = float((nu[ok] * num[ok, k] / den[ok, k]).sum())
        term = 2.0 ** (-l * ap) * inner
        per_level.append({"l": int(l), "term": term})
        total += term
    if skipped == den.size:
        raise ValueError("every dyadic level was empty")
    return BesovResult("dyadic", params.alpha, params.p, params.C, total, per_level, skipped)


def besov_double_integral(f, domain, params):
    f = _boundary_field(f, domain)
    D = domain.boundary_distances
    off = ~np.eye(D.shape[0], dtype=bool)
    if np.any(D[off] <= 0):
        raise ValueError("distinct boundary sites at zero distance (duplicate points)")
    rows = kernels.double_integral_rows(D, domain.nu_weights, f, params.p, params.alpha * params.p)
    return BesovResult("integral", params.alpha, params.p, params.C, float(rows.sum()))


def default_r_grid(domain, per_octave=32):
    D = domain.boundary_distances
    start = min(domain.h, float(D[D > 0].min()))
    stop = domain.boundary_diameter
    octaves = math.log2(stop / start)
    n = max(2, int(math.ceil(octaves * per_octave)) + 1)
    return start * 2.0 ** (np.linspace(0.0, octaves, n))


def besov_continuous(f, domain, params, r_grid=None, tail=True):
    """Log-trapezoid quadrature of the defining ``dr/r`` integral.

    With ``tail`` and a grid reaching the boundary diameter, the saturated
    range ``r > r_max`` is added in closed form.
    """
    f = _boundary_field(f, domain)
    r = default_r_grid(domain) if r_grid is None else np.asarray(r_grid, dtype=np.float64)
    if r.ndim != 1 or r.size < 2 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ValueError("r-grid must be positive and strictly increasing")
    nu = domain.nu_weights
    num, den = kernels.ball_sums(domain.boundary_distances, nu, f, params.p, r)
    ap = params.alpha * params.p
    inner = (nu[:, None] * num / np.where(den > 0, den, 1.0)).sum(axis=0)
    g = inner * r ** (-ap)
    logr = np.log(r)
    value = float(np.sum((g[1:] + g[:-1]) / 2 * np.diff(logr)))
    if tail and ap > 0 and r[-1] >= domain.boundary_diameter:
        value += float(g[-1] / ap)
    return BesovResult("continuous", params.alpha, params.p, params.C, value)


BESOV_FORMS = {
    "dyadic": besov_dyadic,
    "integral": besov_double_integral,
    "continuous": besov_continuous,
}


# interior gradient surrogate

def _interior_field(u, domain):
    u = np.asarray(u, dtype=np.float64)
    if u.shape != domain.interior.shape:
        raise ValueError(f"interior field has {u.size} values, expected {domain.interior.size}")
    if not np.all(np.isfinite(u)):
        raise ValueError("interior field has non-finite values")
    return u


_NEIGHBOR_CACHE_ATTR = "_neighbor_cache"


def interior_neighbors(domain, rho):
    cache = domain.__dict__.setdefault(_NEIGHBOR_CACHE_ATTR, {})
    if rho not in cache:
        cache[rho] = neighbor_csr(domain.interior_space, np.arange(domain.interior.size), rho)
    return cache[rho]


def local_lip(u, domain, rho=None):
    """Largest difference quotient to interior neighbors within distance ``rho``."""
    u = _interior_field(u, domain)
    rho = 2 * domain.h if rho is None else rho
    if rho < 2 * domain.h * (1 - 1e-12):
        raise ValueError(f"rho={rho} below 2h={2 * domain.h}: stencils would be empty")
    indptr, indices, dist = interior_neighbors(domain, rho)
    return kernels.local_lip(indptr, indices, dist, u)


def dirichlet_energy(u, domain, p=2.0, rho=None, lip=None):
    lip = local_lip(u, domain, rho) if lip is None else lip
    return float(np.sum(domain.mu * lip ** p)) ** (1 / p)


@dataclass
class PoincareReport:
    worst: float
    witness: tuple
    n_balls: int
    skipped: int


def check_poincare(domain, u, p=2.0, lam=1.0, balls=None, rho=None):
    """Max over sampled balls of avg|u - u_B| / (r (avg_{lam B} Lip^p)^(1/p))."""
    u = _interior_field(u, domain)
    lip = local_lip(u, domain, rho)
    ispace = domain.interior_space
    worst, witness, used, skipped = 0.0, None, 0, 0
    for c, r in balls:
        hit = ball_query(ispace, c, r)
        big = ball_query(ispace, c, lam * r)
        if hit.size == 0 or big.size == 0:
            skipped += 1
            continue
        w = domain.mu[hit]
        uB = np.sum(w * u[hit]) / w.sum()
        osc = np.sum(w * np.abs(u[hit] - uB)) / w.sum()
        wb = domain.mu[big]
        grad = (np.sum(wb * lip[big] ** p) / wb.sum()) ** (1 / p)
        if grad == 0:
            skipped += 1
            continue
        ratio = osc / (r * grad)
        used += 1
        if ratio > worst:
            worst, witness = ratio, (tuple(np.atleast_1d(c).tolist()), float(r))
    return PoincareReport(worst, witness, used, skipped)
