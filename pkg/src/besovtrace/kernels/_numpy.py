"""Pure-numpy reference path for the hot kernels."""
import numpy as np


def ball_sums(D, nu, f, p, radii):
    """Open-ball sums around every row site.

    Returns ``num[y, k] = sum_{x: D[y,x] < radii[k]} nu[x] |f[y]-f[x]|**p`` and
    ``den[y, k] = sum_{x: D[y,x] < radii[k]} nu[x]``.
    """
    W = nu[None, :] * np.abs(f[:, None] - f[None, :]) ** p
    n, R = D.shape[0], radii.shape[0]
    num = np.empty((n, R))
    den = np.empty((n, R))
    for k in range(R):
        mask = D < radii[k]
        num[:, k] = np.where(mask, W, 0.0).sum(axis=1)
        den[:, k] = mask @ nu
    return num, den


def double_integral_rows(D, nu, f, p, ap):
    """Per-row terms of the pairwise form, diagonal excluded.

    ``row[y] = nu[y] * sum_{x != y} nu[x] |f[y]-f[x]|**p / (D[y,x]**ap * nu(B(y, D[y,x])))``
    with ``nu(B(y, d))`` the mass of the open ball.
    """
    n = D.shape[0]
    out = np.zeros(n)
    for y in range(n):
        d = D[y]
        order = np.argsort(d, kind="mergesort")
        s = d[order]
        cum = np.concatenate(([0.0], np.cumsum(nu[order])))
        ball = cum[np.searchsorted(s, d, side="left")]
        mask = np.arange(n) != y
        terms = nu[mask] * np.abs(f[y] - f[mask]) ** p / (d[mask] ** ap * ball[mask])
        out[y] = nu[y] * terms.sum()
    return out


def local_lip(indptr, indices, dist, u):
    """Max difference quotient over each site's neighbor list (CSR layout)."""
    n = indptr.shape[0] - 1
    rows = np.repeat(np.arange(n), np.diff(indptr))
    q = np.abs(u[indices] - u[rows]) / dist
    out = np.zeros(n)
    np.maximum.at(out, rows, q)
    return out
