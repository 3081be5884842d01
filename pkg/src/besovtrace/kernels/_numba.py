"""numba-compiled path for the hot kernels; same contracts as ``_numpy``."""
import numpy as np
from numba import njit


@njit(cache=True)
def ball_sums(D, nu, f, p, radii):
    n = D.shape[0]
    R = radii.shape[0]
    num = np.zeros((n, R))
    den = np.zeros((n, R))
    for y in range(n):
        row = D[y]
        order = np.argsort(row, kind="mergesort")
        acc_num = 0.0
        acc_den = 0.0
        ptr = 0
        for k in range(R):
            r = radii[k]
            while ptr < n and row[order[ptr]] < r:
                x = order[ptr]
                acc_num += nu[x] * abs(f[y] - f[x]) ** p
                acc_den += nu[x]
                ptr += 1
            num[y, k] = acc_num
            den[y, k] = acc_den
    return num, den


@njit(cache=True)
def double_integral_rows(D, nu, f, p, ap):
    n = D.shape[0]
    out = np.zeros(n)
    for y in range(n):
        row = D[y]
        order = np.argsort(row, kind="mergesort")
        prefix = 0.0
        i = 0
        total = 0.0
        while i < n:
            # tie group [i, j) shares one open-ball mass
            j = i
            d = row[order[i]]
            while j < n and row[order[j]] == d:
                j += 1
            for t in range(i, j):
                x = order[t]
                if x != y:
                    total += nu[x] * abs(f[y] - f[x]) ** p / (d ** ap * prefix)
            for t in range(i, j):
                prefix += nu[order[t]]
            i = j
        out[y] = nu[y] * total
    return out


@njit(cache=True)
def local_lip(indptr, indices, dist, u):
    n = indptr.shape[0] - 1
    out = np.zeros(n)
    for i in range(n):
        m = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            q = abs(u[indices[k]] - u[i]) / dist[k]
            if q > m:
                m = q
        out[i] = m
    return out
