"""Spectral embedding of transition matrices and clustering of the embedded points.

The transition matrix is symmetrized, its top-``k`` eigenvectors (by
algebraic eigenvalue) are stacked as columns, and each row is scaled to
unit length.  Rows of the result place every symbol in a ``k``-dimensional
space where symbols that transition into each other often sit close.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .errors import ConvergenceFailure, DimensionError

RESIDUAL_RTOL = 1e-8
JACOBI_TOL = 1e-14
MAX_SWEEPS = 100
ZERO_NORM = 1e-12


@dataclass
class SpectralEmbedding:
    k: int
    eigenvalues: np.ndarray
    points: np.ndarray  # (m, k); excluded rows are zero
    excluded: np.ndarray  # symbol ids without a usable embedding

    @property
    def included(self) -> np.ndarray:
        mask = np.ones(len(self.points), dtype=bool)
        mask[self.excluded] = False
        return np.flatnonzero(mask)

    def write_csv(self, path: str | Path) -> None:
        header = "id," + ",".join(f"lambda_{i + 1}" for i in range(self.k))
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for i in self.included:
                fh.write(f"{i}," + ",".join(f"{x:.17g}" for x in self.points[i]) + "\n")


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    n_clusters: int
    method: str
    inertia: float = float("nan")
    history: list = field(default_factory=list)

    def write_csv(self, path: str | Path, ids=None) -> None:
        ids = np.arange(len(self.labels)) if ids is None else ids
        with open(path, "w", newline="\n") as fh:
            fh.write("id,label\n")
            for i, lab in zip(ids, self.labels):
                fh.write(f"{int(i)},{int(lab)}\n")


def symmetrize(T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(T + T^T) / 2 restricted to symbols with any in- or out-going mass.

    Returns the reduced matrix and the original ids of its rows.
    """
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {T.shape}")
    keep = np.flatnonzero((T.sum(axis=1) > 0) | (T.sum(axis=0) > 0))
    sub = T[np.ix_(keep, keep)]
    return (sub + sub.T) / 2.0, keep


def _fix_signs(U: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive; argmax picks the lowest index on ties
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def top_k_eigen(S: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """The ``k`` algebraically largest eigenpairs of a symmetric matrix.

    Eigenvalues come back in descending order with orthonormal eigenvector
    columns.  Raises ConvergenceFailure if any pair misses the residual
    bound ``||S u - lambda u|| <= 1e-8 ||S||_F``.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if not 1 <= k <= n:
        raise DimensionError(f"k={k} must lie in [1, {n}]")
    if not np.array_equal(S, S.T):
        raise ValueError("matrix is not symmetric")
    w, V, sweeps, converged = _backend.jacobi_eigh(np.array(S, order="C"), JACOBI_TOL, MAX_SWEEPS)
    order = np.argsort(-w, kind="stable")[:k]
    lam = w[order]
    U = _fix_signs(V[:, order])
    fro = float(np.linalg.norm(S))
    resid = np.linalg.norm(S @ U - U * lam, axis=0)
    bound = RESIDUAL_RTOL * fro
    if not converged or np.any(resid > bound):
        raise ConvergenceFailure(
            f"Jacobi stopped after {sweeps} sweeps; max residual {resid.max():.3e} vs bound {bound:.3e}")
    return lam, U


def normalize_rows(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rows scaled to unit norm; returns (V, mask of rows too small to scale)."""
    norms = np.linalg.norm(U, axis=1)
    small = norms < ZERO_NORM
    V = np.zeros_like(U)
    V[~small] = U[~small] / norms[~small, None]
    return V, small


def embed(T: np.ndarray, k: int) -> SpectralEmbedding:
    """Map each symbol of a transition matrix to a unit vector in R^k."""
    if k < 1:
        raise DimensionError("embedding dimension must be >= 1")
    T = np.asarray(T, dtype=float)
    m = T.shape[0]
    S, keep = symmetrize(T)
    if k > len(keep):
        raise DimensionError(f"k={k} exceeds the {len(keep)} visited symbols")
    lam, U = top_k_eigen(S, k)
    V, small = normalize_rows(U)
    points = np.zeros((m, k))
    points[keep] = V
    excluded = np.setdiff1d(np.arange(m), keep[~small])
    return SpectralEmbedding(k=k, eigenvalues=lam, points=points, excluded=excluded)


def _relabel(labels: np.ndarray) -> np.ndarray:
    """Renumber labels in order of first appearance."""
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inv.ravel()]


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _kmeans_pp(X: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    centers = [X[rng.integers(len(X))]]
    d2 = _sq_dists(X, centers[0][None])[:, 0]
    for _ in range(1, n):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(len(X), p=d2 / total)
        else:
            idx = rng.integers(len(X))
        centers.append(X[idx])
        d2 = np.minimum(d2, _sq_dists(X, X[idx][None])[:, 0])
    return np.array(centers)


def _fill_empty(X, centers, labels, d2):
    """Give every empty cluster the worst-fit point of a cluster that can spare one."""
    n = len(centers)
    counts = np.bincount(labels, minlength=n)
    own = d2[np.arange(len(X)), labels].copy()
    for j in np.flatnonzero(counts == 0):
        cand = np.where(counts[labels] > 1, own, -1.0)
        far = int(np.argmax(cand))
        counts[labels[far]] -= 1
        counts[j] += 1
        labels[far] = j
        own[far] = 0.0
        centers[j] = X[far]


def _wcss(X, centers, labels):
    return float(((X - centers[labels]) ** 2).sum())


def _lloyd(X, centers, max_iter):
    n = len(centers)
    history = []
    labels = None
    for _ in range(max_iter):
        new = np.argmin(_sq_dists(X, centers), axis=1)
        _fill_empty(X, centers, new, _sq_dists(X, centers))
        history.append(_wcss(X, centers, new))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(n):
            centers[j] = X[labels == j].mean(axis=0)
    history.append(_wcss(X, centers, labels))
    return labels, history[-1], history


def kmeans(points: np.ndarray, n_clusters: int, seed: int = 0, n_init: int = 10,
           max_iter: int = 300) -> ClusterAssignment:
    """Lloyd's k-means with k-means++ seeding; best of ``n_init`` restarts by WCSS.

    Restart ``r`` uses seed ``seed + r``.
    """
    X = np.asarray(points, dtype=float)
    if not 1 <= n_clusters <= len(X):
        raise ValueError(f"n_clusters={n_clusters} must lie in [1, {len(X)}]")
    best = None
    for r in range(n_init):
        rng = np.random.default_rng(seed + r)
        labels, wcss, history = _lloyd(X, _kmeans_pp(X, n_clusters, rng), max_iter)
        if best is None or wcss < best[1]:
            best = (labels, wcss, history)
    labels, wcss, history = best
    return ClusterAssignment(_relabel(labels), n_clusters, "kmeans", wcss, history)


def agglomerative(points: np.ndarray, n_clusters: int) -> ClusterAssignment:
    """Bottom-up Ward clustering on squared Euclidean distances."""
    X = np.asarray(points, dtype=float)
    if not 1 <= n_clusters <= len(X):
        raise ValueError(f"n_clusters={n_clusters} must lie in [1, {len(X)}]")
    d2 = np.ascontiguousarray(_sq_dists(X, X))
    np.fill_diagonal(d2, 0.0)
    slots = _backend.ward_merge(d2, n_clusters)
    return ClusterAssignment(_relabel(np.asarray(slots)), n_clusters, "agglomerative")


def cluster(points: np.ndarray, n_clusters: int, method: str = "agglomerative",
            seed: int = 0) -> ClusterAssignment:
    if method == "agglomerative":
        return agglomerative(points, n_clusters)
    if method == "kmeans":
        return kmeans(points, n_clusters, seed=seed)
    raise ValueError(f"unknown clustering method {method!r}")


def pair_counting_purity(labels, classes) -> float:
    """Rand index: fraction of item pairs on which two labelings agree.

    Invariant under renaming labels; 1.0 exactly when the partitions match.
    """
    a = np.asarray(labels)
    b = np.asarray(classes)
    n = len(a)
    if n != len(b):
        raise ValueError("labelings differ in length")
    if n < 2:
        return 1.0
    same_a = a[:, None] == a[None, :]
    same_b = b[:, None] == b[None, :]
    iu = np.triu_indices(n, 1)
    return float(np.mean(same_a[iu] == same_b[iu]))
