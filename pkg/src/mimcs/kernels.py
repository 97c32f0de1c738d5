"""Hot numeric loops, each in a numba flavour and a pure-numpy flavour.

The public names (``jacobi_eigh``, ``weighted_sqdist``, ``pairwise_sqdist``,
``parzen_posteriors``, ``smo_solve``) point at whichever backend
``mimcs._accel.USE_NUMBA`` selected. Both flavours stay importable under
``*_nb`` / ``*_np`` so tests and the benchmark can compare them directly.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

# Guards the SMO step when the two working-set points are kernel-identical.
TAU = 1e-12


# -------------------------------------------------------------------- Jacobi


@njit
def _off_norm_nb(A):
    d = A.shape[0]
    s = 0.0
    for p in range(d):
        for q in range(d):
            if p != q:
                s += A[p, q] * A[p, q]
    return math.sqrt(s)


@njit
def jacobi_eigh_nb(S, tol, max_sweeps):
    d = S.shape[0]
    A = S.copy()
    V = np.eye(d)
    scale = math.sqrt(np.sum(A * A))
    off = _off_norm_nb(A)
    sweeps = 0
    while off > tol * scale and sweeps < max_sweeps:
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(d):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(d):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(d):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
        sweeps += 1
        off = _off_norm_nb(A)
    w = np.empty(d)
    for k in range(d):
        w[k] = A[k, k]
    return w, V, sweeps, off


def jacobi_eigh_np(S, tol, max_sweeps):
    d = S.shape[0]
    A = np.array(S, dtype=np.float64, copy=True)
    V = np.eye(d)
    mask = ~np.eye(d, dtype=bool)
    scale = math.sqrt(float(np.sum(A * A)))
    off = math.sqrt(float(np.sum(A[mask] ** 2)))
    sweeps = 0
    while off > tol * scale and sweeps < max_sweeps:
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        sweeps += 1
        off = math.sqrt(float(np.sum(A[mask] ** 2)))
    return np.diag(A).copy(), V, sweeps, off


# ------------------------------------------------------ weighted distances


@njit
def weighted_sqdist_nb(A, B, w):
    na, nb, d = A.shape[0], B.shape[0], A.shape[1]
    out = np.empty((na, nb))
    for i in range(na):
        for j in range(nb):
            s = 0.0
            for k in range(d):
                diff = A[i, k] - B[j, k]
                s += w[k] * diff * diff
            out[i, j] = s
    return out


@njit
def pairwise_sqdist_nb(X, w):
    n, d = X.shape
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                diff = X[i, k] - X[j, k]
                s += w[k] * diff * diff
            out[i, j] = s
            out[j, i] = s
    return out


def weighted_sqdist_np(A, B, w, chunk=256):
    out = np.empty((A.shape[0], B.shape[0]))
    for start in range(0, A.shape[0], chunk):
        diff = A[start:start + chunk, None, :] - B[None, :, :]
        out[start:start + chunk] = np.einsum("ijk,k->ij", diff * diff, w)
    return out


def pairwise_sqdist_np(X, w):
    out = weighted_sqdist_np(X, X, w)
    # (a - b)^2 == (b - a)^2 in IEEE arithmetic, so only the diagonal needs pinning.
    np.fill_diagonal(out, 0.0)
    return out


# ------------------------------------------------------------- Parzen


@njit
def parzen_posteriors_nb(f, cls, n_classes, queries, h, exclude_self):
    l = f.shape[0]
    nq = queries.shape[0]
    inv = 1.0 / (2.0 * h * h)
    out = np.zeros((nq, n_classes))
    for i in range(nq):
        x = queries[i]
        dmin = np.inf
        for j in range(l):
            if exclude_self and j == i:
                continue
            d = (x - f[j]) * (x - f[j])
            if d < dmin:
                dmin = d
        tot = 0.0
        for j in range(l):
            if exclude_self and j == i:
                continue
            d = (x - f[j]) * (x - f[j])
            wj = math.exp(-(d - dmin) * inv)
            out[i, cls[j]] += wj
            tot += wj
        for c in range(n_classes):
            out[i, c] /= tot
    return out


def parzen_posteriors_np(f, cls, n_classes, queries, h, exclude_self, chunk=512):
    inv = 1.0 / (2.0 * h * h)
    onehot = np.zeros((f.shape[0], n_classes))
    onehot[np.arange(f.shape[0]), cls] = 1.0
    out = np.empty((queries.shape[0], n_classes))
    for start in range(0, queries.shape[0], chunk):
        q = queries[start:start + chunk]
        D = (q[:, None] - f[None, :]) ** 2
        if exclude_self:
            rows = np.arange(q.shape[0])
            D[rows, start + rows] = np.inf
        D -= D.min(axis=1, keepdims=True)
        W = np.exp(-D * inv)
        out[start:start + chunk] = (W @ onehot) / W.sum(axis=1, keepdims=True)
    return out


# ---------------------------------------------------------------- SMO


@njit
def smo_solve_nb(K, y, C, tol, max_iter):
    """Maximal-violating-pair SMO on the C-SVM dual.

    Returns (multipliers, gradient, iterations, converged, m_up, M_low) where
    the gradient is that of 0.5 a'Qa - e'a with Q_ij = y_i y_j K_ij.
    """
    n = K.shape[0]
    a = np.zeros(n)
    G = -np.ones(n)
    it = 0
    converged = False
    gmax = 0.0
    gmin = 0.0
    while True:
        gmax = -np.inf
        gmin = np.inf
        i = -1
        j = -1
        for t in range(n):
            v = -y[t] * G[t]
            if (y[t] > 0 and a[t] < C) or (y[t] < 0 and a[t] > 0):
                if v > gmax:
                    gmax = v
                    i = t
            if (y[t] < 0 and a[t] < C) or (y[t] > 0 and a[t] > 0):
                if v < gmin:
                    gmin = v
                    j = t
        if gmax - gmin < tol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = TAU
        old_i = a[i]
        old_j = a[j]
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0.0:
                if a[j] < 0.0:
                    a[j] = 0.0
                    a[i] = diff
            else:
                if a[i] < 0.0:
                    a[i] = 0.0
                    a[j] = -diff
            if diff > 0.0:
                if a[i] > C:
                    a[i] = C
                    a[j] = C - diff
            else:
                if a[j] > C:
                    a[j] = C
                    a[i] = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            s = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if s > C:
                if a[i] > C:
                    a[i] = C
                    a[j] = s - C
            else:
                if a[j] < 0.0:
                    a[j] = 0.0
                    a[i] = s
            if s > C:
                if a[j] > C:
                    a[j] = C
                    a[i] = s - C
            else:
                if a[i] < 0.0:
                    a[i] = 0.0
                    a[j] = s
        dai = a[i] - old_i
        daj = a[j] - old_j
        yi = y[i]
        yj = y[j]
        for t in range(n):
            G[t] += y[t] * (yi * K[i, t] * dai + yj * K[j, t] * daj)
    return a, G, it, converged, gmax, gmin


def smo_solve_np(K, y, C, tol, max_iter):
    n = K.shape[0]
    a = np.zeros(n)
    G = -np.ones(n)
    pos = y > 0
    it = 0
    converged = False
    while True:
        v = -y * G
        up = (pos & (a < C)) | (~pos & (a > 0))
        low = (~pos & (a < C)) | (pos & (a > 0))
        vu = np.where(up, v, -np.inf)
        vl = np.where(low, v, np.inf)
        i = int(np.argmax(vu))
        j = int(np.argmin(vl))
        gmax, gmin = vu[i], vl[j]
        if gmax - gmin < tol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = TAU
        old_i, old_j = a[i], a[j]
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0.0:
                if a[j] < 0.0:
                    a[j], a[i] = 0.0, diff
            elif a[i] < 0.0:
                a[i], a[j] = 0.0, -diff
            if diff > 0.0:
                if a[i] > C:
                    a[i], a[j] = C, C - diff
            elif a[j] > C:
                a[j], a[i] = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            s = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if s > C:
                if a[i] > C:
                    a[i], a[j] = C, s - C
            elif a[j] < 0.0:
                a[j], a[i] = 0.0, s
            if s > C:
                if a[j] > C:
                    a[j], a[i] = C, s - C
            elif a[i] < 0.0:
                a[i], a[j] = 0.0, s
        dai, daj = a[i] - old_i, a[j] - old_j
        G += y * (y[i] * K[i] * dai + y[j] * K[j] * daj)
    return a, G, it, converged, float(gmax), float(gmin)


if USE_NUMBA:
    jacobi_eigh = jacobi_eigh_nb
    weighted_sqdist = weighted_sqdist_nb
    pairwise_sqdist = pairwise_sqdist_nb
    parzen_posteriors = parzen_posteriors_nb
    smo_solve = smo_solve_nb
else:
    jacobi_eigh = jacobi_eigh_np
    weighted_sqdist = weighted_sqdist_np
    pairwise_sqdist = pairwise_sqdist_np
    parzen_posteriors = parzen_posteriors_np
    smo_solve = smo_solve_np
