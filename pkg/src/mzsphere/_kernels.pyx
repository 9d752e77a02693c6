# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures mirror ``_kernels_py`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, fabs, isfinite

cnp.import_array()


def closest_pair(const double[:, ::1] pts):
    """Indices ``(i, j)``, ``i < j``, of the pair with the smallest chord."""
    cdef Py_ssize_t m = pts.shape[0], n = pts.shape[1]
    cdef Py_ssize_t i, j, k, bi = 0, bj = 1
    cdef double best = 1e300, acc, diff
    if m < 2:
        raise ValueError("need at least two points")
    with nogil:
        for i in range(m - 1):
            for j in range(i + 1, m):
                acc = 0.0
                for k in range(n):
                    diff = pts[i, k] - pts[j, k]
                    acc = acc + diff * diff
                    if acc >= best:
                        break
                if acc < best:
                    best = acc
                    bi = i
                    bj = j
    return int(bi), int(bj)


def nearest_index(const double[:, ::1] probes, const double[:, ::1] pts):
    """For every probe, the index of the nearest point (smallest chord)."""
    cdef Py_ssize_t g = probes.shape[0], m = pts.shape[0], n = pts.shape[1]
    cdef Py_ssize_t a, i, k, bi
    cdef double best, acc, diff
    out = np.empty(g, dtype=np.intp)
    cdef Py_ssize_t[::1] res = out
    with nogil:
        for a in range(g):
            best = 1e300
            bi = 0
            for i in range(m):
                acc = 0.0
                for k in range(n):
                    diff = probes[a, k] - pts[i, k]
                    acc = acc + diff * diff
                    if acc >= best:
                        break
                if acc < best:
                    best = acc
                    bi = i
            res[a] = bi
    return out


def riesz_energy(const double[:, ::1] pts, double s):
    """Riesz s-energy over unordered pairs with chordal distances."""
    cdef Py_ssize_t m = pts.shape[0], n = pts.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double total = 0.0, acc, diff
    with nogil:
        for i in range(m - 1):
            for j in range(i + 1, m):
                acc = 0.0
                for k in range(n):
                    diff = pts[i, k] - pts[j, k]
                    acc = acc + diff * diff
                total = total + pow(acc, -0.5 * s)
    return total


def riesz_energy_grad(const double[:, ::1] pts, double s):
    """Energy and its Euclidean gradient with respect to every point."""
    cdef Py_ssize_t m = pts.shape[0], n = pts.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double total = 0.0, acc, diff, inv, coef
    grad_arr = np.zeros((m, n))
    cdef double[:, ::1] grad = grad_arr
    with nogil:
        for i in range(m - 1):
            for j in range(i + 1, m):
                acc = 0.0
                for k in range(n):
                    diff = pts[i, k] - pts[j, k]
                    acc = acc + diff * diff
                inv = pow(acc, -0.5 * s)
                total = total + inv
                coef = -s * inv / acc
                for k in range(n):
                    diff = coef * (pts[i, k] - pts[j, k])
                    grad[i, k] += diff
                    grad[j, k] -= diff
    return total, grad_arr


def jacobi_eigenvalues(double[:, ::1] a, double tol, int max_sweeps):
    """Cyclic-by-row Jacobi rotations, in place on ``a``.

    Returns ``(diagonal, sweeps, off_norm)`` where ``off_norm`` is the
    off-diagonal Frobenius norm at exit.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k
    cdef int sweep = 0
    cdef double off, apq, theta, t, c, s, akp, akq, frob = 0.0, app, aqq
    for p in range(n):
        for q in range(n):
            frob += a[p, q] * a[p, q]
    frob = sqrt(frob)
    with nogil:
        while True:
            off = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        off += a[p, q] * a[p, q]
            off = sqrt(off)
            if off <= tol * frob or sweep >= max_sweeps:
                break
            sweep += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    app = a[p, p]
                    aqq = a[q, q]
                    theta = (aqq - app) / (2.0 * apq)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = c * akp - s * akq
                        a[k, q] = s * akp + c * akq
                    for k in range(n):
                        akp = a[p, k]
                        akq = a[q, k]
                        a[p, k] = c * akp - s * akq
                        a[q, k] = s * akp + c * akq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
    diag = np.empty(n)
    for p in range(n):
        diag[p] = a[p, p]
    return diag, sweep, off
