"""Direct O(n^2) reference computations, written without the package's kernels."""
import math

import numpy as np


def dist(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


def brute_ball(points, c, r):
    return [i for i, q in enumerate(points) if dist(q, c) < r]


def dyadic(Pb, nu, f, alpha, p, levels, C=1.0):
    n = len(f)
    total = 0.0
    for l in levels:
        R = C * 2.0 ** l
        inner = 0.0
        for y in range(n):
            num = den = 0.0
            for x in range(n):
                if dist(Pb[y], Pb[x]) < R:
                    num += nu[x] * abs(f[y] - f[x]) ** p
                    den += nu[x]
            if den > 0:
                inner += nu[y] * num / den
        total += 2.0 ** (-l * alpha * p) * inner
    return total


def double_integral(Pb, nu, f, alpha, p):
    n = len(f)
    total = 0.0
    for y in range(n):
        for x in range(n):
            if x == y:
                continue
            d = dist(Pb[y], Pb[x])
            ball = sum(nu[z] for z in range(n) if dist(Pb[y], Pb[z]) < d)
            total += nu[y] * nu[x] * abs(f[y] - f[x]) ** p / (d ** (alpha * p) * ball)
    return total


def continuous_exact(D, nu, f, alpha, p, r_min):
    """Exact integral over [r_min, inf) of the piecewise-constant inner sum against r^(-ap) dr/r."""
    ap = alpha * p
    breaks = np.unique(D[D > r_min])
    edges = np.concatenate(([r_min], breaks))
    total = 0.0
    for k, a in enumerate(edges):
        b = edges[k + 1] if k + 1 < edges.size else math.inf
        # on (a, b] the open ball holds exactly the distances <= a
        inner = 0.0
        for y in range(len(f)):
            m = D[y] <= a
            den = nu[m].sum()
            inner += nu[y] * (nu[m] * np.abs(f[y] - f[m]) ** p).sum() / den
        hi = 0.0 if b == math.inf else b ** (-ap)
        total += inner * (a ** (-ap) - hi) / ap
    return total


def extension(cover, domain, f):
    """F(x) from explicit loops over balls, anchors and distances."""
    P = domain.space.points
    Pb = P[domain.boundary]
    nu = domain.nu_weights
    out = []
    for x in domain.interior:
        psi = []
        avg = []
        for b in cover.balls:
            d = dist(P[x], P[b.center])
            w = min(1.0, max(0.0, 2.0 - d / b.radius)) if d < 2 * b.radius else 0.0
            if w == 0.0:
                continue
            # anchor: nearest boundary site, lowest index on ties
            da = [dist(P[b.center], q) for q in Pb]
            a = int(np.argmin(da))
            U = [k for k, q in enumerate(Pb) if dist(Pb[a], q) < b.radius] or [a]
            psi.append(w)
            avg.append(sum(nu[k] * f[k] for k in U) / sum(nu[k] for k in U))
        s = sum(psi)
        out.append(sum(w * v for w, v in zip(psi, avg)) / s)
    return np.array(out)
