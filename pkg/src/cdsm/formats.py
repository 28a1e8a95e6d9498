"""Stream files and model files.

Stream file (plain text, LF)::

    CDSM1 <env> <steps> <seed>
    <symbol-id> <row> <col> <context>      one line per time step
    SYM <id> <9 bits>                      or  SYM <id> POS <row> <col>

Model file: deterministic JSON tagged ``cdsm-model-1``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import StreamFormatError
from .gridworld import (ENVIRONMENTS, FOUR_ROOMS_CONTEXT_NAMES, SY_CONTEXT_NAMES, Exploration,
                        FourRooms, bits_to_code)
from .hierarchy import HierarchyModel, Level, LevelSpec
from .spectral import SpectralEmbedding
from .stream import SymbolAlphabet

STREAM_MAGIC = "CDSM1"
MODEL_FORMAT = "cdsm-model-1"
STREAM_NAME = "stream.txt"
MODEL_NAME = "model.json"


def write_stream(exp: Exploration, path: str | Path) -> Path:
    path = Path(path)
    names = np.array(exp.context_names)
    ids = exp.symbols.astype(str)
    rows = exp.rows.astype(str)
    cols = exp.cols.astype(str)
    ctx = names[exp.contexts]
    body = np.char.add(np.char.add(np.char.add(np.char.add(np.char.add(np.char.add(
        ids, " "), rows), " "), cols), " "), ctx)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{STREAM_MAGIC} {exp.env} {exp.steps} {exp.seed}\n")
        fh.write("\n".join(body.tolist()))
        fh.write("\n")
        for i, d in enumerate(exp.descriptions):
            fh.write(f"SYM {i} {d}\n")
    return path


def _context_names(env: str) -> tuple[str, ...]:
    return SY_CONTEXT_NAMES if env == "sy_rooms" else FOUR_ROOMS_CONTEXT_NAMES


def _parse_symbol(fields: list[str], lineno: int) -> tuple[int, str]:
    if len(fields) == 4 and fields[1] == "POS":
        try:
            r, c = int(fields[2]), int(fields[3])
        except ValueError:
            raise StreamFormatError(f"line {lineno}: bad POS coordinates") from None
        ids = _position_ids()
        if not (0 <= r < ids.shape[0] and 0 <= c < ids.shape[1]) or ids[r, c] < 0:
            raise StreamFormatError(f"line {lineno}: POS {r} {c} is not a free four-rooms cell")
        return int(ids[r, c]), f"POS {r} {c}"
    if len(fields) == 2 and len(fields[1]) == 9 and set(fields[1]) <= {"0", "1"}:
        return bits_to_code([int(ch) for ch in fields[1]]), fields[1]
    raise StreamFormatError(f"line {lineno}: malformed SYM line")


_POS_IDS = None


def _position_ids() -> np.ndarray:
    global _POS_IDS
    if _POS_IDS is None:
        _POS_IDS = FourRooms("full").position_ids
    return _POS_IDS


def read_stream(path: str | Path) -> Exploration:
    """Parse a stream file; raises StreamFormatError on any malformation."""
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError:
        raise StreamFormatError(f"{path}: not a text file") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise StreamFormatError(f"{path}: empty file")
    head = lines[0].split(" ")
    if len(head) != 4 or head[0] != STREAM_MAGIC:
        raise StreamFormatError(f"{path}: header must be '{STREAM_MAGIC} <env> <steps> <seed>'")
    env = head[1]
    if env not in ENVIRONMENTS:
        raise StreamFormatError(f"{path}: unknown environment {env!r}")
    try:
        steps, seed = int(head[2]), int(head[3])
    except ValueError:
        raise StreamFormatError(f"{path}: steps and seed must be integers") from None
    n = steps + 1
    if len(lines) < 1 + n:
        raise StreamFormatError(f"{path}: expected {n} step lines, found {len(lines) - 1}")
    names = _context_names(env)
    ctx_index = {name: i for i, name in enumerate(names)}
    step_lines = lines[1:1 + n]
    try:
        table = np.array([ln.split(" ") for ln in step_lines], dtype=object)
        if table.ndim != 2 or table.shape[1] != 4:
            raise ValueError
        ids = table[:, 0].astype(np.int64)
        rows = table[:, 1].astype(np.int64)
        cols = table[:, 2].astype(np.int64)
        contexts = np.fromiter((ctx_index[c] for c in table[:, 3]), dtype=np.int64, count=n)
    except (ValueError, KeyError):
        raise StreamFormatError(f"{path}: malformed step line") from None
    raws, descriptions = [], []
    for k, ln in enumerate(lines[1 + n:], start=2 + n):
        fields = ln.split(" ")
        if fields[0] != "SYM" or len(fields) < 3:
            raise StreamFormatError(f"line {k}: expected a SYM line")
        if int(fields[1]) != len(raws):
            raise StreamFormatError(f"line {k}: SYM ids must be consecutive from 0")
        raw, desc = _parse_symbol(fields[1:], k)
        raws.append(raw)
        descriptions.append(desc)
    if len(ids) and (ids.min() < 0 or ids.max() >= len(raws)):
        raise StreamFormatError(f"{path}: step lines reference undeclared symbols")
    try:
        alphabet = SymbolAlphabet.from_symbols(raws)
    except ValueError:
        raise StreamFormatError(f"{path}: duplicate symbols in the table") from None
    return Exploration(env=env, steps=steps, seed=seed, symbols=ids, alphabet=alphabet,
                       rows=rows, cols=cols, contexts=contexts, context_names=names,
                       descriptions=descriptions)


def model_to_dict(model: HierarchyModel, env: str = "", include_embeddings: bool = True) -> dict:
    levels = []
    for lv in model.levels:
        d = {
            "n_clusters": lv.n_clusters,
            "base": lv.base,
            "pairs": lv.pairs.tolist(),
            "assignment": lv.assignment.tolist(),
        }
        if lv.embedding is not None:
            d["eigenvalues"] = [float(x) for x in lv.embedding.eigenvalues]
            if include_embeddings:
                d["excluded"] = lv.embedding.excluded.tolist()
                d["points"] = lv.embedding.points.tolist()
        levels.append(d)
    return {
        "format": MODEL_FORMAT,
        "env": env,
        "config": {
            "levels": [s.n_clusters for s in model.specs],
            "embed_dims": [s.embed_dim for s in model.specs],
            "collapse": model.collapse,
            "seed": model.seed,
            "method": model.method,
        },
        "stop_level": model.stop_level,
        "stop_reason": model.stop_reason,
        "alphabet": [int(s) for s in model.alphabet.symbols],
        "levels": levels,
    }


def model_from_dict(d: dict) -> HierarchyModel:
    if d.get("format") != MODEL_FORMAT:
        raise StreamFormatError(f"unsupported model format {d.get('format')!r}")
    try:
        cfg = d["config"]
        specs = [LevelSpec(n, k) for n, k in zip(cfg["levels"], cfg["embed_dims"])]
        levels = []
        for ell, ld in enumerate(d["levels"]):
            emb = None
            if "points" in ld:
                pts = np.array(ld["points"], dtype=float).reshape(len(ld["pairs"]), -1)
                emb = SpectralEmbedding(k=pts.shape[1], eigenvalues=np.array(ld["eigenvalues"]),
                                        points=pts,
                                        excluded=np.array(ld["excluded"], dtype=np.int64))
            levels.append(Level(pairs=np.array(ld["pairs"], dtype=np.int64),
                                assignment=np.array(ld["assignment"], dtype=np.int64),
                                n_clusters=int(ld["n_clusters"]), base=int(ld["base"]),
                                embedding=emb))
        return HierarchyModel(levels=levels, alphabet=SymbolAlphabet.from_symbols(d["alphabet"]),
                              specs=specs, collapse=bool(cfg["collapse"]), seed=int(cfg["seed"]),
                              method=cfg["method"], stop_level=d.get("stop_level"),
                              stop_reason=d.get("stop_reason"))
    except (KeyError, TypeError, ValueError) as exc:
        raise StreamFormatError(f"malformed model file: {exc}") from None


def write_model(model: HierarchyModel, path: str | Path, env: str = "",
                include_embeddings: bool = True) -> Path:
    path = Path(path)
    text = json.dumps(model_to_dict(model, env, include_embeddings), sort_keys=True,
                      separators=(",", ":"))
    with open(path, "w", newline="\n") as fh:
        fh.write(text + "\n")
    return path


def read_model(path: str | Path) -> tuple[HierarchyModel, str]:
    """Load a model file; returns the model and the environment it was built on."""
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StreamFormatError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(d, dict):
        raise StreamFormatError(f"{path}: model file must hold a JSON object")
    return model_from_dict(d), d.get("env", "")
