import math

import numpy as np
import pytest

from conftest import domain
from besovtrace.chains import (Curve, build_cone_chain, chain_cover_counts, sample_boundary_pairs,
                               uniform_curve, uniformity_constant, verify_chain_properties)


def site_at(d, x, y):
    P = d.space.points
    return int(np.flatnonzero((P[:, 0] == x) & (P[:, 1] == y))[0])


@pytest.fixture(scope="module")
def unit_chain():
    d = domain("halfplane", 1 / 16)
    curve = uniform_curve(d, site_at(d, 0, 0), site_at(d, 1, 0))
    return d, build_cone_chain(d, curve)


def test_tent_curve_shape():
    d = domain("halfplane", 1 / 16)
    c = uniform_curve(d, site_at(d, 0, 0), site_at(d, 1, 0))
    assert np.allclose(c.vertices[1], [0.5, 0.5])
    assert math.isclose(c.length, math.sqrt(2))
    assert uniformity_constant(c, d) <= d.A + 1e-12


def test_curve_errors():
    d = domain("halfplane", 1 / 16)
    a = site_at(d, 0, 0)
    with pytest.raises(ValueError):
        uniform_curve(d, a, a)
    with pytest.raises(ValueError):
        uniform_curve(d, a, site_at(d, 1, 1))


def test_lshape_curve_routes_through_core():
    d = domain("lshape", 1 / 8)
    c = uniform_curve(d, site_at(d, 1, 0), site_at(d, 0, 1))
    assert len(c.vertices) == 3
    assert math.isfinite(uniformity_constant(c, d))


def test_curve_sub_and_reverse():
    c = Curve(np.array([[0, 0], [1, 1], [2, 0]], dtype=float))
    s = c.sub(0.5, c.length - 0.5)
    assert np.allclose(s[1], [1, 1])
    assert math.isclose(c.reversed().length, c.length)


def test_unit_chain_basics(unit_chain):
    d, ch = unit_chain
    assert np.allclose(ch.x0, [0.5, 0.5])
    assert ch.radii[ch.labels == 0][0] == 0.5 / 16
    assert np.all(ch.radii >= ch.cutoff)
    # symmetric curve, symmetric chain
    assert np.sum(ch.labels > 0) == np.sum(ch.labels < 0)
    rep = verify_chain_properties(ch, d)
    assert rep["rad_d_omega_ok"] and rep["consecutive_intersect"] and rep["decay_ok"]
    assert rep["overlap"] <= 32


def test_radii_nonincreasing_away_from_center(unit_chain):
    _, ch = unit_chain
    for side in (ch.radii[ch.labels >= 0], ch.radii[ch.labels <= 0][::-1]):
        assert np.all(np.diff(side) <= 0)


def test_chain_is_resolution_independent(unit_chain):
    # balls above the cutoff do not depend on the grid
    d, ch = unit_chain
    fine = domain("halfplane", 1 / 64)
    c2 = build_cone_chain(fine, uniform_curve(fine, site_at(fine, 0, 0), site_at(fine, 1, 0)))
    for k in ch.labels:
        a = ch.ball(k)
        b = c2.ball(k)
        assert np.allclose(a[0], b[0], atol=1e-12) and math.isclose(a[1], b[1])
    assert c2.labels.size > ch.labels.size


def test_generation_envelope_bounded(unit_chain):
    d, ch = unit_chain
    rep = verify_chain_properties(ch, d)
    # radius halves once per generation, not once per index
    assert rep["K_generation"] <= 32
    assert rep["K_literal"] >= 64


def test_tau_below_one_rejected(unit_chain):
    d, ch = unit_chain
    with pytest.raises(ValueError):
        build_cone_chain(d, ch.curve, tau=0.5)


def test_unresolvable_chain_raises():
    d = domain("halfplane", 1 / 16)
    c = uniform_curve(d, site_at(d, 0, 0), site_at(d, 0.25, 0))
    with pytest.raises(ValueError):
        build_cone_chain(d, c)


def test_cover_counts():
    d = domain("halfplane", 1 / 16)
    ch = build_cone_chain(d, uniform_curve(d, site_at(d, 0, 0), site_at(d, 1, 0)))
    assert chain_cover_counts(ch, ch.x0[None])[0] >= 1
    assert chain_cover_counts(ch, np.array([[7.0, 3.0]]))[0] == 0


def test_pair_sampler_is_deterministic():
    d = domain("halfplane", 1 / 16)
    a = sample_boundary_pairs(d, 5, seed=3)
    assert a == sample_boundary_pairs(d, 5, seed=3)
    P = d.space.points
    assert all(np.linalg.norm(P[x] - P[y]) >= 16 * d.h for x, y in a)
