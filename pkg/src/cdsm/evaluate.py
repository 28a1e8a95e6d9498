"""Test-room evaluation: per-unit heat-maps and top-level context separation.

A unit is *active* from each of its activations until the next activation
at the same level.  Its heat-map is the distribution of agent positions over
the steps where it is active.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateTopLevel, UnknownObservation
from .gridworld import (CTX_CORRIDOR, CTX_S, CTX_Y, DOORWAY, FourRooms, RoomGrid, RoomType,
                        SYRooms, explore_world)
from .hierarchy import ActivationTimeline, HierarchyModel, decode
from .spectral import ClusterAssignment, SpectralEmbedding, embed, kmeans, pair_counting_purity
from .stream import transition_matrix

DEFAULT_STEPS_PER_ROOM = 100_000
ROOM_TYPES = (RoomType.S, RoomType.Y)


@dataclass
class TestRoom:
    """One sealed test room, the walk through it and the decoded activations."""

    room_type: RoomType
    room: RoomGrid
    rows: np.ndarray
    cols: np.ndarray
    contexts: np.ndarray
    timeline: ActivationTimeline
    free: np.ndarray  # cells the agent can occupy (door sealed)

    @property
    def name(self) -> str:
        return self.room_type.value

    def __len__(self) -> int:
        return len(self.rows)


def run_test_room(model: HierarchyModel, room_type: RoomType, seed: int,
                  steps: int = DEFAULT_STEPS_PER_ROOM) -> TestRoom:
    world = SYRooms(seed=seed, room_types=(room_type,), sealed=True)
    r0, c0 = world.pos
    rows, cols, raw, ctx = world.advance(steps)
    rows = np.concatenate([[r0], rows])
    cols = np.concatenate([[c0], cols])
    raw = np.concatenate([world.symbols_at([r0], [c0]), raw])
    ctx = np.concatenate([world.contexts_at([r0], [c0]), ctx])
    try:
        ids = model.encode(raw)
    except UnknownObservation as exc:
        known = np.isin(raw, np.asarray(model.alphabet.symbols, dtype=np.int64))
        t = int(np.flatnonzero(~known)[0])
        raise UnknownObservation(
            f"{room_type.value} test room, step {t} at ({rows[t]}, {cols[t]}): {exc}") from None
    timeline = decode(model, ids)
    free = world.grid[:world.room.height] == 0
    return TestRoom(room_type, world.room, rows, cols, ctx, timeline, free)


def run_test_rooms(model: HierarchyModel, seed: int,
                   steps_per_room: int = DEFAULT_STEPS_PER_ROOM) -> list[TestRoom]:
    """An S room from ``seed + 1`` and a Y room from ``seed + 2``, each walked and decoded."""
    return [run_test_room(model, rt, seed + 1 + i, steps_per_room) for i, rt in enumerate(ROOM_TYPES)]


def active_units(timeline: ActivationTimeline, level: int, n: int) -> np.ndarray:
    """Unit active at each raw step ``0..n-1``; -1 before the first activation."""
    times = timeline.times[level]
    units = timeline.units[level]
    idx = np.searchsorted(times, np.arange(n), side="right") - 1
    return np.where(idx >= 0, units[np.maximum(idx, 0)], -1)


@dataclass
class Heatmap:
    level: int
    unit: int
    weights: np.ndarray  # (height, width), sums to 1 when total > 0
    total: int  # attributed steps
    free: np.ndarray | None = None  # free-cell mask of the room, for rendering

    @property
    def shape(self) -> tuple[int, int]:
        return self.weights.shape


def heatmap(timeline: ActivationTimeline, rows, cols, level: int, unit: int,
            shape: tuple[int, int], free: np.ndarray | None = None) -> Heatmap:
    """Position distribution while ``unit`` is the latest activation at ``level``."""
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    act = active_units(timeline, level, len(rows))
    sel = act == unit
    counts = np.zeros(shape, dtype=np.int64)
    np.add.at(counts, (rows[sel], cols[sel]), 1)
    total = int(sel.sum())
    weights = counts / total if total else np.zeros(shape)
    return Heatmap(level, unit, weights, total, free)


def room_heatmaps(test: TestRoom, level: int, n_units: int) -> list[Heatmap]:
    shape = test.room.occupancy.shape
    rows, cols = test.rows, test.cols
    act = active_units(test.timeline, level, len(rows))
    free = test.free
    out = []
    cell = rows * shape[1] + cols
    for u in range(n_units):
        sel = act == u
        counts = np.bincount(cell[sel], minlength=shape[0] * shape[1]).reshape(shape)
        total = int(sel.sum())
        weights = counts / total if total else np.zeros(shape)
        out.append(Heatmap(level, u, weights, total, free))
    return out


def export_heatmap_pgm(h: Heatmap, path: str | Path) -> Path:
    """8-bit binary PGM, maximum weight at 255; walls and objects at 0."""
    path = Path(path)
    w = np.asarray(h.weights, dtype=float)
    peak = w.max() if w.size else 0.0
    img = np.zeros(w.shape, dtype=np.uint8)
    if peak > 0:
        img = np.rint(w / peak * 255.0).astype(np.uint8)
    if h.free is not None:
        img[~h.free] = 0
    height, width = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    return path


def write_heatmap_csv(h: Heatmap, path: str | Path) -> Path:
    path = Path(path)
    np.savetxt(path, h.weights, delimiter=",", fmt="%.17g")
    return path


def _type_steps(tests: list[TestRoom], level: int, n_units: int, label_override=None) -> np.ndarray:
    """(n_units, 3) attributed steps per unit in S, Y and corridor."""
    acc = np.zeros((n_units, 3), dtype=np.int64)
    for i, test in enumerate(tests):
        act = active_units(test.timeline, level, len(test))
        ctx = test.contexts if label_override is None else label_override[i]
        on = act >= 0
        np.add.at(acc, (act[on], ctx[on]), 1)
    return acc


def assign_types(steps: np.ndarray) -> np.ndarray:
    """Room-type context per unit by majority of in-room time; ties send unit 0 to S, others to Y."""
    s, y = steps[:, CTX_S], steps[:, CTX_Y]
    tie_ctx = np.where(np.arange(len(steps)) == 0, CTX_S, CTX_Y)
    return np.where(s > y, CTX_S, np.where(y > s, CTX_Y, tie_ctx))


def _top_units(tests: list[TestRoom], level: int) -> int:
    return int(max((t.timeline.units[level].max(initial=-1) for t in tests), default=-1)) + 1


def room_type_accuracy(tests: list[TestRoom], level: int | None = None, n_units: int = 2,
                       label_override=None) -> float:
    """Fraction of in-room steps whose active unit's majority room type is correct.

    Steps before the first activation and corridor steps are not scored.
    Raises DegenerateTopLevel unless every unit activates.
    """
    level = tests[0].timeline.n_levels - 1 if level is None else level
    if level < 0:
        raise DegenerateTopLevel("the model has no levels")
    steps = _type_steps(tests, level, max(n_units, _top_units(tests, level)), label_override)
    if len(steps) != n_units:
        raise DegenerateTopLevel(f"level {level} has {len(steps)} active units, expected {n_units}")
    silent = np.flatnonzero(steps.sum(axis=1) == 0)
    if len(silent):
        raise DegenerateTopLevel(f"unit {int(silent[0])} at level {level} never activates")
    in_room = steps[:, [CTX_S, CTX_Y]]
    total = int(in_room.sum())
    if total == 0:
        raise DegenerateTopLevel(f"no in-room steps are attributed at level {level}")
    assigned = assign_types(steps)
    correct = int(steps[np.arange(len(steps)), assigned].sum())
    return correct / total


def shuffled_labels(tests: list[TestRoom], seed: int = 0) -> list[np.ndarray]:
    """Room-type labels permuted across all in-room steps of all test rooms."""
    rng = np.random.default_rng(seed)
    ctx = np.concatenate([t.contexts for t in tests])
    room = np.flatnonzero(ctx != CTX_CORRIDOR)
    out = ctx.copy()
    out[room] = rng.permutation(ctx[room])
    return np.split(out, np.cumsum([len(t) for t in tests])[:-1])


def shuffle_control(tests: list[TestRoom], seed: int = 0, level: int | None = None) -> float:
    return room_type_accuracy(tests, level, label_override=shuffled_labels(tests, seed))


@dataclass
class UnitShare:
    unit: int
    steps: int
    s_share: float
    y_share: float
    corridor_share: float
    room_type: str  # majority in-room type
    contrast: float  # majority-type mass over other-type mass

    def as_dict(self) -> dict:
        return {"unit": self.unit, "steps": self.steps, "s_share": self.s_share,
                "y_share": self.y_share, "corridor_share": self.corridor_share,
                "room_type": self.room_type, "contrast": self.contrast}


@dataclass
class SeparationReport:
    level: int
    units: list[UnitShare]
    accuracy: float | None
    error: str | None = None
    shuffle_accuracy: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"level": self.level, "accuracy": self.accuracy, "error": self.error,
                "shuffle_accuracy": self.shuffle_accuracy,
                "units": [u.as_dict() for u in self.units], **self.extra}

    def to_json(self, path: str | Path) -> Path:
        path = Path(path)
        with open(path, "w", newline="\n") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _finite(x: float) -> float | None:
    return float(x) if np.isfinite(x) else None


def separation_report(tests: list[TestRoom], level: int | None = None,
                      shuffle_seed: int = 0) -> SeparationReport:
    """Per-unit time shares and accuracy at ``level`` (default: the top one).

    A DegenerateTopLevel is recorded in ``error`` with ``accuracy`` left None.
    """
    level = tests[0].timeline.n_levels - 1 if level is None else level
    n_units = max(2, _top_units(tests, level)) if level >= 0 else 0
    units = []
    if n_units:
        steps = _type_steps(tests, level, n_units)
        assigned = assign_types(steps)
        for u in range(n_units):
            tot = int(steps[u].sum())
            sh = steps[u] / tot if tot else np.zeros(3)
            own = steps[u, assigned[u]]
            other = steps[u, CTX_Y if assigned[u] == CTX_S else CTX_S]
            contrast = own / other if other else (np.inf if own else np.nan)
            units.append(UnitShare(u, tot, float(sh[CTX_S]), float(sh[CTX_Y]), float(sh[CTX_CORRIDOR]),
                                   "S" if assigned[u] == CTX_S else "Y", _finite(contrast)))
    try:
        acc = room_type_accuracy(tests, level)
        ctrl = shuffle_control(tests, shuffle_seed, level)
        return SeparationReport(level, units, acc, shuffle_accuracy=ctrl)
    except DegenerateTopLevel as exc:
        return SeparationReport(level, units, None, error=str(exc))


def heatmap_name(level: int, unit: int, room: str) -> str:
    return f"level{level}_unit{unit}_{room}"


def export_all(model: HierarchyModel, tests: list[TestRoom], out: str | Path) -> list[Path]:
    """PGM and CSV heat-maps for every (level, unit, test room)."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for ell, lv in enumerate(model.levels):
        for test in tests:
            for h in room_heatmaps(test, ell, lv.n_clusters):
                stem = heatmap_name(ell, h.unit, test.name)
                written.append(export_heatmap_pgm(h, out / f"{stem}.pgm"))
                written.append(write_heatmap_csv(h, out / f"{stem}.csv"))
    return written


@dataclass
class FourRoomsResult:
    mode: str
    embedding: SpectralEmbedding
    clusters: ClusterAssignment  # one label per embedded symbol, in ``embedding.included`` order
    symbol_ids: np.ndarray  # stream id of every free cell (-1 if never observed)
    cell_labels: np.ndarray  # cluster of every free cell's observation (-1 if not embedded)
    rooms: np.ndarray  # room label of every free cell (DOORWAY for the four doorways)
    cells: list  # free cells, row-major
    purity: float  # pair-counting purity over the non-doorway cells
    descriptions: list


def four_rooms_experiment(mode: str = "full", steps: int = 100_000, seed: int = 0, k: int = 4,
                          n_clusters: int = 4) -> FourRoomsResult:
    """Explore the four-room world, embed its transition matrix and k-means the points."""
    world = FourRooms(mode, seed=seed)
    exp = explore_world(world, steps, env=f"four_rooms_{mode}", seed=seed)
    T = transition_matrix(exp.symbols, len(exp.alphabet))
    emb = embed(T, k)
    inc = emb.included
    ca = kmeans(emb.points[inc], n_clusters, seed=seed)
    label_of = np.full(len(exp.alphabet), -1, dtype=np.int64)
    label_of[inc] = ca.labels
    cells = world.free_cells
    rr = np.array([c[0] for c in cells])
    cc = np.array([c[1] for c in cells])
    raw = world.symbols_at(rr, cc)
    index = exp.alphabet.index
    sym = np.array([index.get(int(x), -1) for x in raw], dtype=np.int64)
    cell_labels = np.where(sym >= 0, label_of[np.maximum(sym, 0)], -1)
    rooms = world.labels[rr, cc]
    room_cells = rooms != DOORWAY
    purity = pair_counting_purity(cell_labels[room_cells], rooms[room_cells])
    return FourRoomsResult(mode, emb, ca, sym, cell_labels, rooms, cells, purity, exp.descriptions)
