# cython: language_level=3
"""Compiled inner loops: grid random walk, cyclic Jacobi, Ward merging.

Signatures and results mirror :mod:`cdsm._pykernels` exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY

cnp.import_array()

# Up, Down, Left, Right
cdef int DR[4]
cdef int DC[4]
DR[:] = [-1, 1, 0, 0]
DC[:] = [0, 0, -1, 1]


def walk(const unsigned char[:, ::1] grid, long r, long c,
         const double[::1] u, long[::1] rows, long[::1] cols,
         long trig_r0, long trig_c0, long trig_r1, long trig_c1):
    """Uniform random walk over free cells.

    Consumes one uniform per step.  Stops early (inclusive) on the move
    (trig_r0, trig_c0) -> (trig_r1, trig_c1).  Returns (steps, triggered).
    """
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t h = grid.shape[0], w = grid.shape[1]
    cdef Py_ssize_t i
    cdef int a, k, nvalid
    cdef int valid[4]
    cdef long nr, nc
    for i in range(n):
        nvalid = 0
        for a in range(4):
            nr = r + DR[a]
            nc = c + DC[a]
            if 0 <= nr < h and 0 <= nc < w and grid[nr, nc] == 0:
                valid[nvalid] = a
                nvalid += 1
        if nvalid == 0:
            raise RuntimeError("agent is boxed in")
        k = <int>(u[i] * nvalid)
        if k >= nvalid:
            k = nvalid - 1
        a = valid[k]
        nr = r + DR[a]
        nc = c + DC[a]
        rows[i] = nr
        cols[i] = nc
        if r == trig_r0 and c == trig_c0 and nr == trig_r1 and nc == trig_c1:
            return i + 1, True
        r = nr
        c = nc
    return n, False


def jacobi_eigh(double[:, ::1] a, double tol, int max_sweeps):
    """Cyclic Jacobi on a symmetric matrix, destroyed in place.

    Returns (eigenvalues, eigenvectors as columns, sweeps, converged).
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v_arr = np.eye(n)
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k
    cdef double fro = 0.0, off, apq, theta, t, cs, sn, x, y
    cdef int sweep
    cdef bint converged = False
    for p in range(n):
        for q in range(n):
            fro += a[p, q] * a[p, q]
    fro = sqrt(fro)
    cdef double skip = 1e-300 if fro == 0.0 else fro * 1e-18
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if sqrt(2.0 * off) <= tol * fro:
            converged = True
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if fabs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                cs = 1.0 / sqrt(t * t + 1.0)
                sn = t * cs
                for k in range(n):
                    x = a[k, p]
                    y = a[k, q]
                    a[k, p] = cs * x - sn * y
                    a[k, q] = sn * x + cs * y
                for k in range(n):
                    x = a[p, k]
                    y = a[q, k]
                    a[p, k] = cs * x - sn * y
                    a[q, k] = sn * x + cs * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    x = v[k, p]
                    y = v[k, q]
                    v[k, p] = cs * x - sn * y
                    v[k, q] = sn * x + cs * y
    w = np.empty(n)
    for p in range(n):
        w[p] = a[p, p]
    return w, v_arr, sweep, converged


def ward_merge(double[:, ::1] d, long n_clusters):
    """Ward agglomeration on a squared-distance matrix (destroyed in place).

    Merges the lexicographically first closest active pair (i < j) into slot i
    until n_clusters remain.  Returns the final slot of every point.
    """
    cdef Py_ssize_t n = d.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] size_arr = np.ones(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] slot_arr = np.arange(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] active_arr = np.ones(n, dtype=np.uint8)
    cdef long[::1] size = size_arr
    cdef long[::1] slot = slot_arr
    cdef unsigned char[::1] active = active_arr
    cdef Py_ssize_t remaining = n, i, j, k, bi, bj
    cdef double best, dij, ni, nj, nk
    while remaining > n_clusters:
        best = INFINITY
        bi = -1
        bj = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if active[j] and d[i, j] < best:
                    best = d[i, j]
                    bi = i
                    bj = j
        dij = d[bi, bj]
        ni = size[bi]
        nj = size[bj]
        for k in range(n):
            if not active[k] or k == bi or k == bj:
                continue
            nk = size[k]
            d[bi, k] = ((ni + nk) * d[bi, k] + (nj + nk) * d[bj, k] - nk * dij) / (ni + nj + nk)
            d[k, bi] = d[bi, k]
        active[bj] = 0
        size[bi] += size[bj]
        for k in range(n):
            if slot[k] == bj:
                slot[k] = bi
        remaining -= 1
    return slot_arr
