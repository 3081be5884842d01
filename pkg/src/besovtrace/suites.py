"""Verification suites shared by the CLI and the acceptance tests.

Each suite returns ``{"checks": [...], "ok": bool, ...}``.  A check is hard
unless marked soft; soft checks are reported but never fail a suite.
"""
import math

import numpy as np

from besovtrace.besov import (BesovParams, besov_continuous, besov_double_integral, besov_dyadic,
                              local_lip)
from besovtrace.chains import (build_cone_chain, sample_boundary_pairs, uniform_curve,
                               verify_chain_properties)
from besovtrace.domain import build_domain, check_codimension
from besovtrace.families import boundary_family, interior_family, roundtrip_family
from besovtrace.trace_extension import (chain_oscillation_estimate, estimate_operator_norms,
                                        roundtrip_error)
from besovtrace.whitney import partition_lipschitz, verify_whitney, whitney_pipeline

SUITES = ("whitney", "cones", "codim", "besov-equiv", "roundtrip", "opnorm")

OVERLAP_BOUND = 40
CHAIN_K_BOUND = 64
CHAIN_OVERLAP_BOUND = 32
C_EQ_BOUND = 4.0
CODIM_BOUND = 1.5
FLAGGED_FRACTION = 0.01


def check(name, value, ok, bound=None, hard=True):
    return {"name": name, "value": value, "bound": bound, "ok": bool(ok), "hard": hard}


def finish(checks, **extra):
    ok = all(c["ok"] for c in checks if c["hard"])
    return dict(extra, checks=checks, ok=ok)


def _pipeline(domain, cache):
    if "pipeline" not in cache:
        cache["pipeline"] = whitney_pipeline(domain)
    return cache["pipeline"]


def suite_whitney(domain, cache=None, **_):
    cache = {} if cache is None else cache
    cover, pou = _pipeline(domain, cache)
    rep = verify_whitney(cover, domain)
    err = float(np.abs(pou.sums() - 1).max())
    cpou = partition_lipschitz(pou, domain)
    checks = [
        check("whitney_violations", len(rep["violations"]), not rep["violations"], 0),
        check("lemma_pairs_checked", rep["lemma_pairs_checked"], rep["lemma_pairs_checked"] > 0),
        check("lemma_violations", rep["lemma_violations"], rep["lemma_violations"] == 0, 0),
        check("overlap_max", rep["overlap_max"], rep["overlap_max"] <= OVERLAP_BOUND, OVERLAP_BOUND),
        check("partition_sum_error", err, err <= 1e-9, 1e-9),
        check("C_pou", cpou, math.isfinite(cpou)),
    ]
    rep.pop("overlap_histogram")
    return finish(checks, report=rep)


def chain_pairs(domain, n=10, seed=0):
    return sample_boundary_pairs(domain, n, seed=seed)


def calibrate_chain_constant(preset, h, n_pairs=10, seed=1, p=2.0, tau=1.0, safety=2.0):
    """Safety factor times the largest lhs/rhs ratio on a reference resolution."""
    ref = build_domain(preset, h)
    fam = interior_family(ref)
    lips = {k: local_lip(u, ref) for k, u in fam.items()}
    worst = 0.0
    for xi, ze in chain_pairs(ref, n_pairs, seed):
        chain = build_cone_chain(ref, uniform_curve(ref, xi, ze), tau)
        for k, u in fam.items():
            worst = max(worst, chain_oscillation_estimate(u, chain, ref, p, lip=lips[k]).ratio)
    return safety * worst


def suite_cones(domain, seed=0, tau=1.0, p=2.0, n_pairs=10, chain_C=None, **_):
    pairs = chain_pairs(domain, n_pairs, seed)
    if not pairs:
        return finish([check("resolvable_pairs", 0, True, hard=False)],
                      note="no boundary pair resolvable at this resolution")
    fam = interior_family(domain, seed)
    lips = {k: local_lip(u, domain) for k, u in fam.items()}
    if chain_C is None:
        chain_C = calibrate_chain_constant(domain.preset, 2 * domain.h, n_pairs, seed + 1, p, tau)
    rows, worst, gap = [], 0.0, 0.0
    for xi, ze in pairs:
        chain = build_cone_chain(domain, uniform_curve(domain, xi, ze), tau)
        v = verify_chain_properties(chain, domain)
        v.pop("per_k")
        ratios = {}
        for k, u in fam.items():
            est = chain_oscillation_estimate(u, chain, domain, p, lip=lips[k])
            ratios[k] = est.ratio
            gap = max(gap, est.telescoping_gap)
        worst = max(worst, max(ratios.values()))
        rows.append(dict(v, xi=xi, zeta=ze, ratio_max=max(ratios.values())))
    checks = [
        check("rad_d_omega", all(r["rad_d_omega_ok"] for r in rows),
              all(r["rad_d_omega_ok"] for r in rows)),
        check("consecutive_intersect", all(r["consecutive_intersect"] for r in rows),
              all(r["consecutive_intersect"] for r in rows)),
        check("overlap_max", max(r["overlap"] for r in rows),
              max(r["overlap"] for r in rows) <= CHAIN_OVERLAP_BOUND, CHAIN_OVERLAP_BOUND),
        check("K_literal", max(r["K_literal"] for r in rows),
              max(r["K_literal"] for r in rows) <= CHAIN_K_BOUND, CHAIN_K_BOUND, hard=False),
        check("K_generation", max(r["K_generation"] for r in rows),
              max(r["K_generation"] for r in rows) <= CHAIN_K_BOUND, CHAIN_K_BOUND),
        check("telescoping_gap", gap, gap <= 1e-12, 1e-12),
        check("oscillation_ratio_over_C", worst / chain_C, worst <= chain_C, 1.0),
    ]
    return finish(checks, chain_C=chain_C, pairs=rows)


def suite_codim(domain, **_):
    try:
        rep = check_codimension(domain)
    except ValueError as exc:
        return finish([check("codim_samples", 0, True, hard=False)], note=str(exc))
    checks = [check("C", rep.C, rep.C <= CODIM_BOUND, CODIM_BOUND)]
    if domain.preset in ("halfplane", "halfplane-window") and domain.theta == 1:
        checks.append(check("ratio_range", [rep.min_ratio, rep.max_ratio],
                            0.6 <= rep.min_ratio and rep.max_ratio <= 1.0, [0.6, 1.0]))
    return finish(checks, report=rep.to_json())


def besov_equivalence(domain, alpha=0.5, p=2.0, seed=0):
    params = BesovParams(alpha, p)
    rows = []
    for name, f in boundary_family(domain, seed).items():
        a = besov_dyadic(f, domain, params).value
        b = besov_double_integral(f, domain, params).value
        c = besov_continuous(f, domain, params).value
        rows.append({"name": name, "dyadic": a, "integral": b, "continuous": c})
    r = np.array([[x["dyadic"] / x["integral"], x["dyadic"] / x["continuous"],
                   x["integral"] / x["continuous"]] for x in rows])
    C_eq = float(max(r.max(), 1 / r.min()))
    dc = r[:, 1]
    return C_eq, float(max(dc.max(), 1 / dc.min())), rows


def suite_besov_equiv(domain, alpha=0.5, p=2.0, seed=0, **_):
    C_eq, C_dc, rows = besov_equivalence(domain, alpha, p, seed)
    checks = [
        check("C_eq", C_eq, C_eq <= C_EQ_BOUND, C_EQ_BOUND),
        check("dyadic_vs_continuous", C_dc, C_dc <= 2.0, 2.0),
    ]
    return finish(checks, per_function=rows)


def suite_roundtrip(domain, cache=None, **_):
    cache = {} if cache is None else cache
    cover, pou = _pipeline(domain, cache)
    const = roundtrip_error(np.full(domain.boundary.size, 1.0), domain, cover, pou)
    frac = sum(b.flagged for b in cover.balls) / cover.n_balls
    rows = {}
    if domain.boundary_t is not None:
        for name, f in roundtrip_family(domain).items():
            rt = roundtrip_error(f, domain, cover, pou)
            rows[name] = {"sup_err": rt["sup_err"], "lp_err": rt["lp_err"]}
    checks = [
        check("constant_sup_err", const["sup_err"], const["sup_err"] <= 1e-9, 1e-9),
        check("flagged_fraction", frac, frac < FLAGGED_FRACTION, FLAGGED_FRACTION),
    ]
    return finish(checks, per_function=rows, n_flagged=const["n_flagged"])


def suite_opnorm(domain, cache=None, p=2.0, seed=0, **_):
    cache = {} if cache is None else cache
    cover, pou = _pipeline(domain, cache)
    KE, KT = estimate_operator_norms(domain, boundary_family(domain, seed),
                                     interior_family(domain, seed), cover, pou, p)
    checks = [
        check("K_E", KE.K, math.isfinite(KE.K) and KE.K > 0),
        check("K_T", KT.K, math.isfinite(KT.K) and KT.K > 0),
    ]
    return finish(checks, K_E=KE.to_json(), K_T=KT.to_json())


RUNNERS = {
    "whitney": suite_whitney,
    "cones": suite_cones,
    "codim": suite_codim,
    "besov-equiv": suite_besov_equiv,
    "roundtrip": suite_roundtrip,
    "opnorm": suite_opnorm,
}


def run_suites(domain, names, **kw):
    cache = {}
    out = {}
    for name in names:
        out[name] = RUNNERS[name](domain, cache=cache, **kw)
    return out
