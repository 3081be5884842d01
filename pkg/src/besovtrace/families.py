"""Test-function families on the boundary and in the interior."""
import math

import numpy as np

from besovtrace.rng import SplitMix64


def _boundary_coordinate(domain):
    t = domain.boundary_t
    if t is None:
        raise ValueError("boundary families need a preset with an arclength coordinate")
    return t, float(domain.window.get("boundary_length", t.max()))


def tent(t, center, half_width):
    return np.maximum(0.0, 1.0 - np.abs(t - center) / half_width)


def random_piecewise_linear(t, L, rng, knots=9):
    xs = np.linspace(0.0, L, knots)
    ys = np.array([rng.uniform() * 2 - 1 for _ in range(knots)])
    return np.interp(t, xs, ys)


def boundary_family(domain, seed=0):
    """Twelve named boundary fields: cos/sin modes 1..4, two tents, two random PL fields."""
    t, L = _boundary_coordinate(domain)
    fam = {}
    for k in range(1, 5):
        fam[f"cos{k}"] = np.cos(2 * math.pi * k * t / L)
        fam[f"sin{k}"] = np.sin(2 * math.pi * k * t / L)
    fam["tent_mid"] = tent(t, L / 2, L / 4)
    fam["tent_narrow"] = tent(t, L / 4, L / 16)
    rng = SplitMix64(seed)
    fam["random_pl0"] = random_piecewise_linear(t, L, rng)
    fam["random_pl1"] = random_piecewise_linear(t, L, rng, knots=17)
    return fam


def roundtrip_family(domain):
    """The three boundary fields of the roundtrip audit: t, cos(2 pi t) and a tent."""
    t, L = _boundary_coordinate(domain)
    return {"t": t.copy(), "cos2pit": np.cos(2 * math.pi * t), "tent": tent(t, L / 2, L / 4)}


def interior_family(domain, seed=0):
    """Smooth interior fields: harmonic modes, a coordinate, a bump and a random Fourier sum."""
    P = domain.space.points[domain.interior]
    x, y = P[:, 0], P[:, 1]
    x0, y0, x1, y1 = domain.window["bounds"]
    L = x1 - x0
    fam = {}
    for k in (1, 2):
        w = 2 * math.pi * k / L
        fam[f"harmonic{k}"] = np.cos(w * (x - x0)) * np.exp(-w * (y - y0))
    fam["x"] = x.copy()
    cx, cy = (x0 + x1) / 2, y0
    rad = min(L, y1 - y0) / 2
    fam["bump"] = np.maximum(0.0, 1.0 - ((x - cx) ** 2 + (y - cy) ** 2) / rad ** 2) ** 2
    rng = SplitMix64(seed + 1)
    u = np.zeros_like(x)
    for _ in range(4):
        kx, ky = rng.integers(1, 4), rng.integers(0, 3)
        a, ph = rng.normal(), rng.uniform() * 2 * math.pi
        u += a * np.cos(2 * math.pi * (kx * (x - x0) / L + ky * (y - y0) / L) + ph) / (kx + ky)
    fam["random_fourier"] = u
    return fam
