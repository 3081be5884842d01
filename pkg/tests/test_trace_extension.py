import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import domain, pipeline
from besovtrace.besov import check_poincare
from besovtrace.chains import build_cone_chain, uniform_curve
from besovtrace.families import interior_family
from besovtrace.trace_extension import (TraceParams, chain_oscillation_estimate, extend,
                                        extension_norms, layer_ratios, local_ratios,
                                        roundtrip_error, trace)

H = 1 / 16


def site_at(d, x, y):
    P = d.space.points
    return int(np.flatnonzero((P[:, 0] == x) & (P[:, 1] == y))[0])


@pytest.fixture(scope="module")
def hp():
    d = domain("halfplane", H)
    cover, pou = pipeline("halfplane", H)
    return d, cover, pou


def test_extension_of_constant(hp):
    d, cover, pou = hp
    F = extend(np.full(d.boundary.size, -2.25), cover, pou, d)
    assert np.max(np.abs(F + 2.25)) <= 1e-12


@given(st.integers(0, 2 ** 32), st.floats(-4, 4), st.floats(-4, 4))
def test_extension_is_linear(seed, a, b):
    d, cover, pou = (domain("halfplane", H), *pipeline("halfplane", H))
    rng = np.random.default_rng(seed)
    f, g = rng.normal(size=(2, d.boundary.size))
    lhs = extend(a * f + b * g, cover, pou, d)
    rhs = a * extend(f, cover, pou, d) + b * extend(g, cover, pou, d)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + abs(a) + abs(b)) * 10


def test_extension_of_t_tracks_x_near_boundary(hp):
    d, cover, pou = hp
    F = extend(d.boundary_t, cover, pou, d)
    P = d.space.points[d.interior]
    near = (P[:, 1] <= 0.5) & (P[:, 0] > 1) & (P[:, 0] < 7)
    # ball averages of a linear function over nearly centered sets
    assert np.all(np.abs(F[near] - P[near, 0]) <= P[near, 1] + 2 * d.h)


def test_extension_rejects_bad_field(hp):
    d, cover, pou = hp
    with pytest.raises(ValueError):
        extend(np.zeros(3), cover, pou, d)
    f = np.zeros(d.boundary.size)
    f[3] = np.inf
    with pytest.raises(ValueError):
        extend(f, cover, pou, d)


def test_trace_of_constant(hp):
    d, _, _ = hp
    tr = trace(np.full(d.interior.size, 4.0), d)
    assert np.all(tr.values == 4.0) and tr.converged.all() and tr.missing == 0


def test_trace_of_x_and_y(hp):
    d, _, _ = hp
    P = d.space.points[d.interior]
    tb = d.space.points[d.boundary, 0]
    tr = trace(P[:, 0], d)
    inner = (tb >= 1) & (tb <= 7)
    # symmetric half-disk average of x is the center's x
    assert np.max(np.abs(tr.values[inner] - tb[inner])) <= 1e-12
    ty = trace(P[:, 1], d)
    r = ty.radius[inner]
    # average of y over a half-disk of radius r is 4r/(3 pi), up to lattice effects
    assert np.all(np.abs(ty.values[inner] / r - 4 / (3 * math.pi)) < 0.15)


def test_trace_of_y_shrinks_with_schedule(hp):
    d, _, _ = hp
    y = d.space.points[d.interior, 1]
    coarse = trace(y, d, TraceParams((16 * d.h, 8 * d.h, 4 * d.h)))
    fine = trace(y, d, TraceParams((8 * d.h, 4 * d.h, 2 * d.h)))
    assert np.mean(fine.values) < np.mean(coarse.values)


def test_trace_params_validation(hp):
    d, _, _ = hp
    with pytest.raises(ValueError):
        TraceParams((2 * d.h, 4 * d.h)).resolve(d)
    with pytest.raises(ValueError):
        TraceParams((4 * d.h, d.h)).resolve(d)


def test_trace_reports_missing_sites():
    d = domain("halfplane", H)
    tr = trace(np.zeros(d.interior.size), d, TraceParams(m_min=10 ** 6))
    assert tr.missing == d.boundary.size


def test_roundtrip_constant_and_refinement():
    errs = []
    for h in (1 / 8, 1 / 16):
        d = domain("halfplane", h)
        cover, pou = pipeline("halfplane", h)
        assert roundtrip_error(np.ones(d.boundary.size), d, cover, pou)["sup_err"] <= 1e-9
        errs.append(roundtrip_error(np.cos(2 * np.pi * d.boundary_t), d, cover, pou))
    assert errs[1]["lp_err"] < errs[0]["lp_err"]


def test_roundtrip_argmax_scale_invariant(hp):
    d, cover, pou = hp
    f = np.cos(2 * np.pi * d.boundary_t)
    a = roundtrip_error(f, d, cover, pou)["argmax"]
    assert roundtrip_error(3.5 * f, d, cover, pou)["argmax"] == a


def test_local_and_layer_ratios_finite(hp):
    d, cover, pou = hp
    f = np.cos(2 * np.pi * d.boundary_t / 8)
    F = extend(f, cover, pou, d)
    loc = local_ratios(F, f, cover, d)
    assert np.all(np.isfinite(loc[~np.isnan(loc)])) and np.nanmax(loc) > 0
    lay = layer_ratios(F, f, d, np.arange(0, d.boundary.size, 16), [2 * d.h, 0.5])
    assert np.all(np.isfinite(lay))


def test_chain_estimate_for_x():
    d = domain("halfplane", H)
    ch = build_cone_chain(d, uniform_curve(d, site_at(d, 2, 0), site_at(d, 3, 0)))
    x = d.space.points[d.interior, 0]
    est = chain_oscillation_estimate(x, ch, d, p=2, epsilon=0.5)
    assert math.isclose(est.lhs, 1.0, abs_tol=1e-12)
    assert 0 < est.rhs_raw < math.inf
    assert est.telescoping_gap <= 1e-12
    # end balls are the trace balls, ordered from zeta to xi
    assert math.isclose(est.ball_averages[0] - est.ball_averages[-1], 1.0, abs_tol=1e-12)


def test_chain_estimate_at_window_corner():
    # at (0, 0) the trace ball is a quarter disk, so Tx there is 4r/(3 pi) rather than 0
    d = domain("halfplane", H)
    ch = build_cone_chain(d, uniform_curve(d, site_at(d, 0, 0), site_at(d, 1, 0)))
    x = d.space.points[d.interior, 0]
    est = chain_oscillation_estimate(x, ch, d)
    assert 0.85 < est.lhs < 1.0
    assert est.telescoping_gap <= 1e-12


def test_chain_estimate_constant_and_p_one():
    d = domain("halfplane", H)
    ch = build_cone_chain(d, uniform_curve(d, site_at(d, 2, 0), site_at(d, 5, 0)))
    est = chain_oscillation_estimate(np.ones(d.interior.size), ch, d)
    assert est.lhs == 0 and est.rhs_raw == 0 and est.ratio == 0
    half = domain("halfplane", H, theta=0.5)
    x = half.space.points[half.interior, 0]
    assert chain_oscillation_estimate(x, ch, half, p=1, epsilon=0.25).ratio > 0
    with pytest.raises(ValueError):
        chain_oscillation_estimate(x, ch, half, p=1, epsilon=0.6)


def test_extension_ratio_scale_invariant(hp):
    d, cover, pou = hp
    f = np.cos(2 * np.pi * d.boundary_t / 8)
    a = extension_norms(d, cover, pou, {"f": f}).K
    b = extension_norms(d, cover, pou, {"f": -7 * f}).K
    assert abs(a - b) <= 1e-10 * a


def test_poincare_family_stable_under_refinement():
    worst = []
    balls = [((x, y), r) for x in (1.0, 3.0, 5.0) for y in (1.0, 2.0) for r in (0.25, 0.5)]
    for h in (1 / 16, 1 / 32):
        d = domain("halfplane", h)
        worst.append(max(check_poincare(d, u, balls=balls).worst for u in interior_family(d).values()))
    assert abs(worst[1] / worst[0] - 1) < 0.2
