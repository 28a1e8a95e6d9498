"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

Used when the extension is not built, or when ``CDSM_PURE_PYTHON=1``.
"""

import numpy as np

DR = (-1, 1, 0, 0)
DC = (0, 0, -1, 1)


def walk(grid, r, c, u, rows, cols, trig_r0, trig_c0, trig_r1, trig_c1):
    h, w = grid.shape
    free = (np.asarray(grid) == 0).tolist()
    moves = tuple(zip(DR, DC))
    us = np.asarray(u).tolist()
    n = len(us)
    for i in range(n):
        valid = []
        for dr, dc in moves:
            nr = r + dr
            nc = c + dc
            if 0 <= nr < h and 0 <= nc < w and free[nr][nc]:
                valid.append((nr, nc))
        if not valid:
            raise RuntimeError("agent is boxed in")
        k = int(us[i] * len(valid))
        if k >= len(valid):
            k = len(valid) - 1
        nr, nc = valid[k]
        rows[i] = nr
        cols[i] = nc
        if r == trig_r0 and c == trig_c0 and nr == trig_r1 and nc == trig_c1:
            return i + 1, True
        r, c = nr, nc
    return n, False


def jacobi_eigh(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n)
    fro = float(np.sqrt(np.sum(a * a)))
    skip = 1e-300 if fro == 0.0 else fro * 1e-18
    iu = np.triu_indices(n, 1)
    converged = False
    sweep = 0
    for sweep in range(max_sweeps + 1):
        off = float(np.sum(a[iu] ** 2))
        if np.sqrt(2.0 * off) <= tol * fro:
            converged = True
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                cs = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * cs
                x = a[:, p].copy()
                y = a[:, q].copy()
                a[:, p] = cs * x - sn * y
                a[:, q] = sn * x + cs * y
                x = a[p, :].copy()
                y = a[q, :].copy()
                a[p, :] = cs * x - sn * y
                a[q, :] = sn * x + cs * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                x = v[:, p].copy()
                y = v[:, q].copy()
                v[:, p] = cs * x - sn * y
                v[:, q] = sn * x + cs * y
    return np.diag(a).copy(), v, sweep, converged


def ward_merge(d, n_clusters):
    n = d.shape[0]
    d = np.array(d, dtype=float)
    np.fill_diagonal(d, np.inf)
    size = np.ones(n)
    slot = np.arange(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    remaining = n
    while remaining > n_clusters:
        flat = int(np.argmin(d))
        i, j = divmod(flat, n)
        if i > j:
            i, j = j, i
        dij = d[i, j]
        ks = np.flatnonzero(active)
        ks = ks[(ks != i) & (ks != j)]
        nk = size[ks]
        new = ((size[i] + nk) * d[i, ks] + (size[j] + nk) * d[j, ks] - nk * dij) / (
            size[i] + size[j] + nk
        )
        d[i, ks] = new
        d[ks, i] = new
        d[j, :] = np.inf
        d[:, j] = np.inf
        active[j] = False
        size[i] += size[j]
        slot[slot == j] = i
        remaining -= 1
    return slot
