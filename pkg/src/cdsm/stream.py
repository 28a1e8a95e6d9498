"""Symbol alphabets, transition extraction and transition-matrix estimation."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import StreamTooShort, UnknownObservation


@dataclass
class SymbolAlphabet:
    """Bijection between raw symbols and dense ids, in first-appearance order."""

    symbols: list = field(default_factory=list)
    index: dict = field(default_factory=dict)

    @classmethod
    def from_symbols(cls, symbols: Iterable[Hashable]) -> "SymbolAlphabet":
        symbols = list(symbols)
        index = {s: i for i, s in enumerate(symbols)}
        if len(index) != len(symbols):
            raise ValueError("alphabet symbols must be distinct")
        return cls(symbols, index)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, sym) -> bool:
        return sym in self.index

    def encode(self, seq: Iterable[Hashable]) -> np.ndarray:
        try:
            return np.fromiter((self.index[s] for s in seq), dtype=np.int64)
        except KeyError as exc:
            raise UnknownObservation(f"symbol {exc.args[0]!r} is not in the alphabet") from None

    def encode_codes(self, codes: np.ndarray) -> np.ndarray:
        """Vectorized ``encode`` for integer symbols; raises on unknown ones."""
        codes = np.asarray(codes, dtype=np.int64)
        keys = np.asarray(self.symbols, dtype=np.int64)
        order = np.argsort(keys, kind="stable")
        pos = np.searchsorted(keys[order], codes)
        pos = np.clip(pos, 0, len(keys) - 1)
        found = keys[order][pos] == codes
        if not found.all():
            bad = int(np.flatnonzero(~found)[0])
            raise UnknownObservation(f"symbol {int(codes[bad])} at index {bad} is not in the alphabet")
        return order[pos].astype(np.int64)


def _first_appearance(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unique values in first-appearance order, and the id stream."""
    uniq, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return uniq[order], rank[inverse.ravel()].astype(np.int64)


def intern(seq: Sequence[Hashable] | np.ndarray) -> tuple[SymbolAlphabet, np.ndarray]:
    """Assign dense ids to symbols in order of first appearance."""
    if len(seq) == 0:
        raise StreamTooShort("cannot intern an empty stream")
    arr = np.asarray(seq) if not isinstance(seq, np.ndarray) else seq
    if arr.ndim == 1 and np.issubdtype(arr.dtype, np.integer):
        uniq, ids = _first_appearance(arr.astype(np.int64))
        return SymbolAlphabet.from_symbols(int(u) for u in uniq), ids
    index: dict = {}
    ids = np.empty(len(seq), dtype=np.int64)
    for t, s in enumerate(seq):
        ids[t] = index.setdefault(s, len(index))
    return SymbolAlphabet(list(index), index), ids


def extract_transitions(s: np.ndarray) -> tuple[SymbolAlphabet, np.ndarray]:
    """Pair stream ``(s[t], s[t+1])`` interned over a fresh alphabet of pairs."""
    s = np.asarray(s, dtype=np.int64)
    if len(s) < 2:
        raise StreamTooShort(f"need at least 2 symbols to form a transition, got {len(s)}")
    base = int(s.max()) + 1
    codes = s[:-1] * base + s[1:]
    uniq, ids = _first_appearance(codes)
    pairs = [(int(c // base), int(c % base)) for c in uniq]
    return SymbolAlphabet.from_symbols(pairs), ids


def count_matrix(s: np.ndarray, m: int) -> np.ndarray:
    """C[i, j] = number of times i is directly followed by j."""
    s = np.asarray(s, dtype=np.int64)
    if len(s) and (s.min() < 0 or s.max() >= m):
        raise ValueError(f"symbol ids must lie in [0, {m})")
    if len(s) < 2:
        return np.zeros((m, m), dtype=np.int64)
    flat = np.bincount(s[:-1] * m + s[1:], minlength=m * m)
    return flat.reshape(m, m).astype(np.int64)


def row_normalize(C: np.ndarray) -> np.ndarray:
    """Row-stochastic estimate; rows with no mass stay all-zero."""
    C = np.asarray(C)
    sums = C.sum(axis=1, keepdims=True).astype(float)
    return np.divide(C, sums, out=np.zeros(C.shape, dtype=float), where=sums > 0)


def run_starts(s: np.ndarray) -> np.ndarray:
    """Indices where a new run of identical symbols begins."""
    s = np.asarray(s)
    if len(s) == 0:
        return np.zeros(0, dtype=np.int64)
    keep = np.empty(len(s), dtype=bool)
    keep[0] = True
    np.not_equal(s[1:], s[:-1], out=keep[1:])
    return np.flatnonzero(keep)


def collapse_runs(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s)
    return s[run_starts(s)]


def transition_matrix(s: np.ndarray, m: int | None = None) -> np.ndarray:
    s = np.asarray(s, dtype=np.int64)
    m = int(s.max()) + 1 if m is None else m
    return row_normalize(count_matrix(s, m))


def write_matrix_csv(T: np.ndarray, path: str | Path, descriptions: Sequence[str] | None = None) -> Path:
    """Dense CSV of ``T``; with ``descriptions`` also writes ``<stem>.alphabet.csv``."""
    path = Path(path)
    np.savetxt(path, np.asarray(T), delimiter=",", fmt="%.17g")
    if descriptions is not None:
        side = path.with_name(path.stem + ".alphabet.csv")
        with open(side, "w", newline="\n") as fh:
            fh.write("id,symbol\n")
            for i, d in enumerate(descriptions):
                fh.write(f"{i},{d}\n")
    return path
