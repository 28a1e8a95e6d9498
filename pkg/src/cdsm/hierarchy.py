"""Hierarchical transition model: repeated pair extraction, spectral clustering
and re-symbolization, plus decoding of new streams into unit activations.

Level ``l`` reads a symbol stream (raw observation ids at level 0, level
``l-1`` cluster ids above), forms the stream of consecutive pairs, embeds
the pair-to-pair transition matrix, clusters the pairs, and emits the
cluster id of every pair.  With run collapsing on, only changes of cluster
id are emitted; each emission is an *activation* of that unit, stamped with
the raw-stream index of the observation that completed it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DimensionError, TooFewSymbols, UnknownObservation
from .spectral import SpectralEmbedding, cluster, embed
from .stream import SymbolAlphabet, count_matrix, extract_transitions, row_normalize, run_starts


@dataclass(frozen=True)
class LevelSpec:
    n_clusters: int
    embed_dim: int = 3

    def __post_init__(self):
        if self.n_clusters < 2:
            raise ValueError(f"n_clusters must be >= 2, got {self.n_clusters}")
        if self.embed_dim < 1:
            raise ValueError(f"embed_dim must be >= 1, got {self.embed_dim}")


def default_specs(top: int = 20, bottom: int = 2, step: int = 2, embed_dim: int = 3) -> list[LevelSpec]:
    """20, 18, ..., 2 clusters, three embedding dimensions each."""
    return [LevelSpec(n, embed_dim) for n in range(top, bottom - 1, -step)]


@dataclass
class Level:
    pairs: np.ndarray  # (K, 2) lower-level symbol ids, first-appearance order
    assignment: np.ndarray  # (K,) cluster id per pair
    n_clusters: int
    base: int  # size of the lower-level alphabet
    embedding: SpectralEmbedding | None = None
    transitions: np.ndarray | None = None  # (K, K) pair transition matrix; not serialized

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        codes = self.pairs[:, 0] * self.base + self.pairs[:, 1]
        self._order = np.argsort(codes, kind="stable")
        self._sorted = codes[self._order]
        self._fallback: dict[tuple[int, int], int] = {}

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    def pair_index(self, a, b) -> np.ndarray:
        """Index of each pair (a[i], b[i]) in the pair alphabet, or -1."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        codes = a * self.base + b
        pos = np.clip(np.searchsorted(self._sorted, codes), 0, max(len(self._sorted) - 1, 0))
        hit = (self._sorted[pos] == codes) & (a >= 0) & (b >= 0) & (a < self.base) & (b < self.base)
        return np.where(hit, self._order[pos], -1)

    def _neighbours(self, a: int, b: int, candidates: np.ndarray) -> np.ndarray:
        p = self.pairs[candidates]
        linked = candidates[(p[:, 1] == a) | (p[:, 0] == b)]
        if len(linked):
            return linked
        return candidates[(p[:, 0] == a) | (p[:, 1] == b) | (p[:, 0] == b) | (p[:, 1] == a)]

    def nearest_cluster(self, a: int, b: int) -> int | None:
        """Cluster for a pair without its own embedding, or None if nothing is related.

        The pair is placed at the mean spectral position of the pairs it would
        be chained to, (x, a) and (b, y), and takes the cluster of the
        embedded pair nearest to that point.  Without stored embeddings the
        most common cluster among those pairs is used.
        """
        key = (int(a), int(b))
        if key in self._fallback:
            return self._fallback[key]
        if self.embedding is not None:
            candidates = self.embedding.included
        else:
            candidates = np.arange(self.n_pairs)
        nb = self._neighbours(key[0], key[1], candidates)
        if len(nb) == 0:
            return None
        if self.embedding is not None:
            pts = self.embedding.points
            centre = pts[nb].mean(axis=0)
            d2 = ((pts[candidates] - centre) ** 2).sum(axis=1)
            result = int(self.assignment[candidates[int(np.argmin(d2))]])
        else:
            result = int(np.argmax(np.bincount(self.assignment[nb], minlength=self.n_clusters)))
        self._fallback[key] = result
        return result

    def map_pairs(self, a, b) -> np.ndarray:
        """Cluster id for every pair; unseen pairs go through ``nearest_cluster``."""
        idx = self.pair_index(a, b)
        out = np.where(idx >= 0, self.assignment[np.maximum(idx, 0)], -1)
        a = np.asarray(a)
        b = np.asarray(b)
        for i in np.flatnonzero(idx < 0):
            c = self.nearest_cluster(int(a[i]), int(b[i]))
            if c is None:
                raise UnknownObservation(
                    f"transition ({int(a[i])}, {int(b[i])}) shares no symbol with any known transition")
            out[i] = c
        return out


def _emit(clusters: np.ndarray, times: np.ndarray, collapse: bool):
    if collapse:
        keep = run_starts(clusters)
        return clusters[keep], times[keep]
    return clusters, times


def build_level(s: np.ndarray, spec: LevelSpec, seed: int = 0, collapse: bool = True,
                base: int | None = None, method: str = "agglomerative") -> tuple[Level, np.ndarray]:
    """One hierarchy level from stream ``s``; returns it with the next level's input."""
    s = np.asarray(s, dtype=np.int64)
    if len(s) < 3:
        raise TooFewSymbols(f"stream of length {len(s)} is too short to build a level")
    base = int(s.max()) + 1 if base is None else int(base)
    pair_alpha, pair_stream = extract_transitions(s)
    K = len(pair_alpha)
    if spec.n_clusters > K:
        raise TooFewSymbols(f"{K} unique transitions cannot form {spec.n_clusters} clusters")
    T = row_normalize(count_matrix(pair_stream, K))
    try:
        emb = embed(T, spec.embed_dim)
    except DimensionError as exc:
        raise TooFewSymbols(str(exc)) from None
    inc = emb.included
    if spec.n_clusters > len(inc):
        raise TooFewSymbols(f"{len(inc)} embedded transitions cannot form {spec.n_clusters} clusters")
    ca = cluster(emb.points[inc], spec.n_clusters, method=method, seed=seed)
    assignment = np.zeros(K, dtype=np.int64)
    assignment[inc] = ca.labels
    level = Level(pairs=np.array(pair_alpha.symbols, dtype=np.int64), assignment=assignment,
                  n_clusters=spec.n_clusters, base=base, embedding=emb, transitions=T)
    for i in emb.excluded:
        a, b = level.pairs[i]
        c = level.nearest_cluster(int(a), int(b))
        level.assignment[i] = 0 if c is None else c
    level._fallback.clear()
    nxt, _ = _emit(level.assignment[pair_stream], np.arange(1, len(s)), collapse)
    return level, nxt


@dataclass
class HierarchyModel:
    levels: list[Level]
    alphabet: SymbolAlphabet
    specs: list[LevelSpec]
    collapse: bool = True
    seed: int = 0
    method: str = "agglomerative"
    stop_level: int | None = None  # first level that could not be built
    stop_reason: str | None = None
    streams: list[np.ndarray] | None = field(default=None, repr=False)  # build-time inputs per level

    @property
    def depth(self) -> int:
        return len(self.levels)

    def encode(self, raw) -> np.ndarray:
        """Raw observations to level-0 ids; UnknownObservation for unseen ones."""
        raw = np.asarray(raw)
        if raw.ndim == 1 and np.issubdtype(raw.dtype, np.integer):
            return self.alphabet.encode_codes(raw)
        return self.alphabet.encode(raw.tolist())


def build_hierarchy(observations: np.ndarray, specs: list[LevelSpec] | None = None, seed: int = 0,
                    alphabet: SymbolAlphabet | None = None, collapse: bool = True,
                    method: str = "agglomerative") -> HierarchyModel:
    """Stack levels per ``specs``; stops early when a level has too few symbols."""
    specs = default_specs() if specs is None else list(specs)
    if not specs:
        raise ValueError("at least one level spec is required")
    s = np.asarray(observations, dtype=np.int64)
    if alphabet is None:
        alphabet = SymbolAlphabet.from_symbols(range(int(s.max()) + 1))
    base = len(alphabet)
    model = HierarchyModel(levels=[], alphabet=alphabet, specs=specs, collapse=collapse,
                           seed=seed, method=method, streams=[s])
    for ell, spec in enumerate(specs):
        try:
            level, s = build_level(s, spec, seed=seed + ell, collapse=collapse, base=base,
                                   method=method)
        except TooFewSymbols as exc:
            model.stop_level = ell
            model.stop_reason = str(exc)
            break
        except ConvergenceFailure as exc:
            raise ConvergenceFailure(f"level {ell}: {exc}") from exc
        model.levels.append(level)
        model.streams.append(s)
        base = spec.n_clusters
    return model


@dataclass
class ActivationTimeline:
    """Per level, the raw-stream times and unit ids of every activation."""

    times: list[np.ndarray]
    units: list[np.ndarray]

    @property
    def n_levels(self) -> int:
        return len(self.times)

    def counts(self) -> list[int]:
        return [len(t) for t in self.times]


def decode(model: HierarchyModel, observations: np.ndarray) -> ActivationTimeline:
    """Activations of every unit at every level for a stream of level-0 ids."""
    x = np.asarray(observations, dtype=np.int64)
    if len(x) and (x.min() < 0 or x.max() >= len(model.alphabet)):
        bad = int(np.flatnonzero((x < 0) | (x >= len(model.alphabet)))[0])
        raise UnknownObservation(f"observation id {int(x[bad])} at index {bad} is outside the alphabet")
    t = np.arange(len(x))
    times, units = [], []
    for level in model.levels:
        if len(x) < 2:
            clusters = np.zeros(0, dtype=np.int64)
            ct = np.zeros(0, dtype=np.int64)
        else:
            clusters = level.map_pairs(x[:-1], x[1:])
            ct = t[1:]
        x, t = _emit(clusters, ct, model.collapse)
        times.append(t)
        units.append(x)
    return ActivationTimeline(times, units)


class Decoder:
    """Incremental form of :func:`decode`: feed observations one at a time."""

    def __init__(self, model: HierarchyModel):
        self.model = model
        n = model.depth
        self._prev = [None] * n
        self._last = [None] * n
        self.t = -1

    def push(self, obs: int) -> list[tuple[int, int]]:
        """Consume one level-0 id; returns the (level, unit) activations it caused."""
        if not 0 <= obs < len(self.model.alphabet):
            raise UnknownObservation(f"observation id {obs} is outside the alphabet")
        self.t += 1
        out = []
        sym = int(obs)
        for ell, level in enumerate(self.model.levels):
            prev = self._prev[ell]
            self._prev[ell] = sym
            if prev is None:
                break
            c = int(level.map_pairs([prev], [sym])[0])
            if self.model.collapse and c == self._last[ell]:
                break
            self._last[ell] = c
            out.append((ell, c))
            sym = c
        return out


def unit_transitions(model: HierarchyModel, level: int, unit: int) -> set[tuple[int, int]]:
    """Every raw (obs, obs') transition a unit's pairs expand to."""
    memo: dict[tuple[int, int], frozenset] = {}

    def rec(ell, u):
        key = (ell, u)
        if key not in memo:
            lv = model.levels[ell]
            pairs = lv.pairs[lv.assignment == u]
            if ell == 0:
                memo[key] = frozenset((int(a), int(b)) for a, b in pairs)
            else:
                acc = set()
                for lower in np.unique(pairs):
                    acc |= rec(ell - 1, int(lower))
                memo[key] = frozenset(acc)
        return memo[key]

    _check_unit(model, level, unit)
    return set(rec(level, unit))


def unit_support(model: HierarchyModel, level: int, unit: int, limit: int = 100_000) -> set[tuple]:
    """Minimal raw transition chains a unit encodes.

    A chain is a tuple of raw (obs, obs') transitions.  A level-0 unit's
    chains are its single transitions; a higher unit's chains join a chain
    of the first and of the second lower unit of each of its pairs, merging
    a transition shared at the seam.  Raises ValueError beyond ``limit``.
    """
    memo: dict[tuple[int, int], frozenset] = {}

    def rec(ell, u):
        key = (ell, u)
        if key in memo:
            return memo[key]
        lv = model.levels[ell]
        pairs = lv.pairs[lv.assignment == u]
        if ell == 0:
            chains = {((int(a), int(b)),) for a, b in pairs}
        else:
            chains = set()
            for a, b in pairs:
                for x in rec(ell - 1, int(a)):
                    for y in rec(ell - 1, int(b)):
                        chains.add(x + y[1:] if x[-1] == y[0] else x + y)
                        if len(chains) > limit:
                            raise ValueError(f"support of unit {u} at level {ell} exceeds {limit} chains")
        memo[key] = frozenset(chains)
        return memo[key]

    _check_unit(model, level, unit)
    return set(rec(level, unit))


def _check_unit(model, level, unit):
    if not 0 <= level < model.depth:
        raise ValueError(f"level {level} outside [0, {model.depth})")
    if not 0 <= unit < model.levels[level].n_clusters:
        raise ValueError(f"unit {unit} outside [0, {model.levels[level].n_clusters})")
