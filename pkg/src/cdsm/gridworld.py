"""Grid-world simulators: the four-room world and the randomized s/y-room world.

Coordinates are (row, col) with row 0 at the top.  Occupied cells are 1,
free cells 0.  The agent senses the 3x3 window around itself as a 9-bit
occupancy vector, row-major, index 4 being its own cell; cells outside the
grid read as occupied.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .errors import PlacementFailure
from .stream import SymbolAlphabet, intern

ROOM_SIZE = 50
N_OBJECTS = 20
DOOR_COL = 24
CORRIDOR_LENGTH = 3
MAX_REJECTIONS = 10_000
_CHUNK = 1 << 16

ENVIRONMENTS = ("four_rooms_full", "four_rooms_partial", "sy_rooms")


_DR = (-1, 1, 0, 0)
_DC = (0, 0, -1, 1)


class Action(enum.IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3

    @property
    def delta(self) -> tuple[int, int]:
        return _DR[self], _DC[self]


class RoomType(enum.Enum):
    S = "S"
    Y = "Y"


GLYPHS = {
    RoomType.Y: np.array([[1, 0, 1], [0, 1, 0], [0, 1, 0]], dtype=np.uint8),
    RoomType.S: np.array([[0, 1, 1], [0, 1, 0], [1, 1, 0]], dtype=np.uint8),
}

# context labels written into traces
CTX_S, CTX_Y, CTX_CORRIDOR = 0, 1, 2
SY_CONTEXT_NAMES = ("S", "Y", "corridor")
FOUR_ROOMS_CONTEXT_NAMES = ("R0", "R1", "R2", "R3", "doorway")
DOORWAY = 4

_WINDOW = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)]
_WEIGHTS = np.array([1 << (8 - i) for i in range(9)], dtype=np.int64)


def bits_to_code(bits) -> int:
    """Pack a 9-entry occupancy vector into an int (index 0 is the high bit)."""
    bits = list(bits)
    if len(bits) != 9:
        raise ValueError("an observation has exactly 9 entries")
    return int(sum(int(b) << (8 - i) for i, b in enumerate(bits)))


def code_to_bits(code: int) -> tuple[int, ...]:
    return tuple((int(code) >> (8 - i)) & 1 for i in range(9))


def bits_string(code: int) -> str:
    return "".join(str(b) for b in code_to_bits(code))


def sense_codes(grid: np.ndarray, rows, cols) -> np.ndarray:
    """Vectorized 9-bit observation codes for many positions on one grid."""
    padded = np.pad(np.asarray(grid, dtype=np.int64), 1, constant_values=1)
    rows = np.asarray(rows, dtype=np.int64) + 1
    cols = np.asarray(cols, dtype=np.int64) + 1
    codes = np.zeros(rows.shape, dtype=np.int64)
    for i, (dr, dc) in enumerate(_WINDOW):
        codes += padded[rows + dr, cols + dc] * _WEIGHTS[i]
    return codes


def observe(grid: np.ndarray, pos: tuple[int, int]) -> tuple[int, ...]:
    """The 9-bit occupancy vector seen from ``pos``."""
    return code_to_bits(int(sense_codes(grid, [pos[0]], [pos[1]])[0]))


@dataclass(frozen=True)
class RoomGrid:
    occupancy: np.ndarray
    room_type: RoomType
    door: tuple[int, int]
    anchors: tuple[tuple[int, int], ...] = ()

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    def object_mask(self) -> np.ndarray:
        mask = np.zeros_like(self.occupancy, dtype=bool)
        glyph = GLYPHS[self.room_type].astype(bool)
        for r, c in self.anchors:
            mask[r:r + 3, c:c + 3] |= glyph
        return mask

    def violations(self, object_count: int = N_OBJECTS) -> list[str]:
        """Every broken structural invariant, as messages (empty when valid)."""
        occ = self.occupancy
        h, w = occ.shape
        out = []
        perimeter = np.zeros_like(occ, dtype=bool)
        perimeter[0, :] = perimeter[-1, :] = perimeter[:, 0] = perimeter[:, -1] = True
        dr, dc = self.door
        if not perimeter[dr, dc]:
            out.append("door is not on the perimeter")
        if occ[dr, dc] != 0:
            out.append("door cell is occupied")
        walls = perimeter.copy()
        walls[dr, dc] = False
        if not np.all(occ[walls] == 1):
            out.append("perimeter has a gap besides the door")
        if len(self.anchors) != object_count:
            out.append(f"expected {object_count} objects, found {len(self.anchors)}")
        glyph = GLYPHS[self.room_type]
        cells = []
        for r, c in self.anchors:
            rr, cc = np.nonzero(glyph)
            cells.append(np.stack([rr + r, cc + c], axis=1))
        expected = np.zeros_like(perimeter)
        for pts in cells:
            expected[pts[:, 0], pts[:, 1]] = True
        interior_occ = (occ == 1) & ~perimeter
        if not np.array_equal(interior_occ, expected):
            out.append("interior occupancy does not match the placed objects")
        # Chebyshev distance >= 2 to the perimeter and to other objects
        for k, pts in enumerate(cells):
            if pts.size and (pts.min() < 2 or pts[:, 0].max() > h - 3 or pts[:, 1].max() > w - 3):
                out.append(f"object {k} touches a wall")
            for j in range(k):
                other = cells[j]
                cheb = np.abs(pts[:, None, :] - other[None, :, :]).max(axis=2)
                if cheb.min() < 2:
                    out.append(f"objects {j} and {k} touch or overlap")
        return out


def generate_room(room_type: RoomType, rng: np.random.Generator, size: int = ROOM_SIZE,
                  n_objects: int = N_OBJECTS, max_rejections: int = MAX_REJECTIONS) -> RoomGrid:
    """A walled room with its door in the south wall and ``n_objects`` glyphs.

    Anchors (top-left of the 3x3 glyph box) are drawn uniformly and rejected
    while any glyph cell is within Chebyshev distance 1 of a wall or of a
    previously placed glyph cell.
    """
    glyph = GLYPHS[room_type].astype(bool)
    occ = np.zeros((size, size), dtype=np.uint8)
    occ[0, :] = occ[-1, :] = occ[:, 0] = occ[:, -1] = 1
    door = (size - 1, (size - 1) // 2)
    occ[door] = 0
    # cells no glyph cell may cover: walls dilated by one
    blocked = np.zeros((size, size), dtype=bool)
    blocked[:2, :] = blocked[-2:, :] = blocked[:, :2] = blocked[:, -2:] = True
    anchors = []
    for _ in range(n_objects):
        for _attempt in range(max_rejections):
            r, c = (int(x) for x in rng.integers(1, size - 3, size=2))
            if not np.any(blocked[r:r + 3, c:c + 3] & glyph):
                break
        else:
            raise PlacementFailure(
                f"{max_rejections} consecutive rejections placing object {len(anchors)}")
        occ[r:r + 3, c:c + 3] |= glyph
        # block every Chebyshev-1 neighbour of the new glyph cells
        rr, cc = np.nonzero(glyph)
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                blocked[rr + r + dr, cc + c + dc] = True
        anchors.append((r, c))
    return RoomGrid(occupancy=occ, room_type=room_type, door=door, anchors=tuple(anchors))


FOUR_ROOMS_DOORWAYS = ((3, 6), (9, 6), (6, 3), (6, 9))


def four_rooms_grid() -> np.ndarray:
    """13x13 grid: an 11x11 interior split by a wall cross with four doorways."""
    g = np.ones((13, 13), dtype=np.uint8)
    g[1:12, 1:12] = 0
    g[6, 1:12] = 1
    g[1:12, 6] = 1
    for r, c in FOUR_ROOMS_DOORWAYS:
        g[r, c] = 0
    return g


def four_rooms_labels(grid: np.ndarray) -> np.ndarray:
    """Room index (0 NW, 1 NE, 2 SW, 3 SE) per free cell, DOORWAY for doorways, -1 walls."""
    labels = np.full(grid.shape, -1, dtype=np.int64)
    for r in range(grid.shape[0]):
        for c in range(grid.shape[1]):
            if grid[r, c]:
                continue
            if (r, c) in FOUR_ROOMS_DOORWAYS:
                labels[r, c] = DOORWAY
            else:
                labels[r, c] = 2 * int(r > 6) + int(c > 6)
    return labels


class World:
    """An agent on a static grid, moved by the uniform valid-action policy.

    The walk consumes one uniform variate per step from its own generator,
    drawn in fixed-size chunks, so single steps and bulk advances produce
    the same trajectory.
    """

    context_names: tuple[str, ...] = ()

    def __init__(self, grid: np.ndarray, start: tuple[int, int], seed: int = 0,
                 rng: np.random.Generator | None = None):
        self.grid = np.ascontiguousarray(grid, dtype=np.uint8)
        if self.grid[start] != 0:
            raise ValueError(f"start cell {start} is occupied")
        self.pos = (int(start[0]), int(start[1]))
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.t = 0
        self._buf = np.empty(0)
        self._ptr = 0

    # the regeneration trigger; (-1, ...) disables it
    trigger = (-1, -1, -1, -1)

    def valid_actions(self) -> list[Action]:
        h, w = self.grid.shape
        out = []
        for a in Action:
            dr, dc = a.delta
            r, c = self.pos[0] + dr, self.pos[1] + dc
            if 0 <= r < h and 0 <= c < w and self.grid[r, c] == 0:
                out.append(a)
        return out

    def observe(self) -> tuple[int, ...]:
        return observe(self.grid, self.pos)

    def symbols_at(self, rows, cols) -> np.ndarray:
        """Raw stream symbols for positions on the current grid."""
        return sense_codes(self.grid, rows, cols)

    def contexts_at(self, rows, cols) -> np.ndarray:
        return np.zeros(len(rows), dtype=np.int64)

    def symbol(self) -> int:
        return int(self.symbols_at([self.pos[0]], [self.pos[1]])[0])

    def context(self) -> int:
        return int(self.contexts_at([self.pos[0]], [self.pos[1]])[0])

    def on_trigger(self) -> None:
        """Called after the agent makes the trigger move."""

    def _uniforms(self, k: int) -> np.ndarray:
        if self._ptr >= len(self._buf):
            self._buf = self.rng.random(_CHUNK)
            self._ptr = 0
        return self._buf[self._ptr:self._ptr + k]

    def advance(self, n: int):
        """Take ``n`` steps; returns (rows, cols, symbols, contexts) after each step."""
        rows = np.empty(n, dtype=np.int64)
        cols = np.empty(n, dtype=np.int64)
        syms = np.empty(n, dtype=np.int64)
        ctxs = np.empty(n, dtype=np.int64)
        done = 0
        while done < n:
            u = self._uniforms(n - done)
            k, triggered = _backend.walk(self.grid, self.pos[0], self.pos[1], u,
                                         rows[done:], cols[done:], *self.trigger)
            self._ptr += k
            end = done + k
            self.pos = (int(rows[end - 1]), int(cols[end - 1]))
            if triggered:
                last = end - 1
                syms[done:last] = self.symbols_at(rows[done:last], cols[done:last])
                ctxs[done:last] = self.contexts_at(rows[done:last], cols[done:last])
                self.on_trigger()
                syms[last:end] = self.symbols_at(rows[last:end], cols[last:end])
                ctxs[last:end] = self.contexts_at(rows[last:end], cols[last:end])
            else:
                syms[done:end] = self.symbols_at(rows[done:end], cols[done:end])
                ctxs[done:end] = self.contexts_at(rows[done:end], cols[done:end])
            done = end
        self.t += n
        return rows, cols, syms, ctxs

    def step(self):
        """One policy step; returns (symbol, (row, col, context))."""
        rows, cols, syms, ctxs = self.advance(1)
        return int(syms[0]), (int(rows[0]), int(cols[0]), int(ctxs[0]))

    def describe_symbol(self, raw: int) -> str:
        return bits_string(raw)


class FourRooms(World):
    """The four-room world, fully (position ids) or partially (9-bit) observable."""

    context_names = FOUR_ROOMS_CONTEXT_NAMES

    def __init__(self, observable: str = "full", seed: int = 0, start=(3, 3)):
        if observable not in ("full", "partial"):
            raise ValueError(f"observable must be 'full' or 'partial', got {observable!r}")
        super().__init__(four_rooms_grid(), start, seed=seed)
        self.observable = observable
        self.labels = four_rooms_labels(self.grid)
        free = np.argwhere(self.grid == 0)
        self.position_ids = np.full(self.grid.shape, -1, dtype=np.int64)
        self.position_ids[free[:, 0], free[:, 1]] = np.arange(len(free))
        self.free_cells = [tuple(int(x) for x in rc) for rc in free]

    def symbols_at(self, rows, cols):
        if self.observable == "full":
            return self.position_ids[np.asarray(rows), np.asarray(cols)]
        return super().symbols_at(rows, cols)

    def contexts_at(self, rows, cols):
        return self.labels[np.asarray(rows), np.asarray(cols)]

    def describe_symbol(self, raw: int) -> str:
        if self.observable == "full":
            r, c = self.free_cells[raw]
            return f"POS {r} {c}"
        return bits_string(raw)


class SYRooms(World):
    """One s- or y-room with a dead-end corridor below its door.

    Leaving through the door and stepping back up from the top corridor cell
    replaces the room with a freshly generated one of a uniformly drawn type.
    With ``regenerate=False`` the room stays fixed; ``sealed=True`` also walls
    the door up (test rooms).
    """

    context_names = SY_CONTEXT_NAMES

    def __init__(self, seed: int = 0, room_types=(RoomType.S, RoomType.Y),
                 regenerate: bool = True, sealed: bool = False):
        walk_seq, room_seq = np.random.SeedSequence(seed).spawn(2)
        self.room_rng = np.random.default_rng(room_seq)
        self.room_types = tuple(RoomType(t) for t in room_types)
        self.regenerate = regenerate and not sealed
        self.sealed = sealed
        self.n_regenerations = 0
        self.room = generate_room(self._draw_type(), self.room_rng)
        door_r, door_c = self.room.door
        grid = self._compose(self.room)
        super().__init__(grid, (door_r - 1, door_c), rng=np.random.default_rng(walk_seq))
        if self.regenerate:
            self.trigger = (door_r + 1, door_c, door_r, door_c)

    def _draw_type(self) -> RoomType:
        if len(self.room_types) == 1:
            return self.room_types[0]
        return self.room_types[int(self.room_rng.integers(len(self.room_types)))]

    def _compose(self, room: RoomGrid) -> np.ndarray:
        h, w = room.occupancy.shape
        grid = np.ones((h + CORRIDOR_LENGTH + 1, w), dtype=np.uint8)
        grid[:h] = room.occupancy
        door_r, door_c = room.door
        if self.sealed:
            grid[door_r, door_c] = 1
        else:
            grid[h:h + CORRIDOR_LENGTH, door_c] = 0
        return grid

    def regenerate_room(self) -> RoomGrid:
        self.room = generate_room(self._draw_type(), self.room_rng)
        self.grid[:self.room.height] = self.room.occupancy
        self.n_regenerations += 1
        return self.room

    def on_trigger(self) -> None:
        self.regenerate_room()

    def contexts_at(self, rows, cols):
        rows = np.asarray(rows)
        ctx = CTX_S if self.room.room_type is RoomType.S else CTX_Y
        return np.where(rows >= self.room.height, CTX_CORRIDOR, ctx)


def make_world(env: str, seed: int = 0) -> World:
    if env == "four_rooms_full":
        return FourRooms("full", seed=seed)
    if env == "four_rooms_partial":
        return FourRooms("partial", seed=seed)
    if env == "sy_rooms":
        return SYRooms(seed=seed)
    raise ValueError(f"unknown environment {env!r}; expected one of {ENVIRONMENTS}")


@dataclass
class Exploration:
    """An exploration run: interned symbol stream plus ground truth."""

    env: str
    steps: int
    seed: int
    symbols: np.ndarray
    alphabet: SymbolAlphabet
    rows: np.ndarray
    cols: np.ndarray
    contexts: np.ndarray
    context_names: tuple[str, ...]
    descriptions: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.symbols)


def explore_world(world: World, steps: int, env: str = "", seed: int = 0) -> Exploration:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    r0, c0 = world.pos
    raw0 = world.symbols_at([r0], [c0])[0]
    ctx0 = world.contexts_at([r0], [c0])[0]
    rows, cols, syms, ctxs = world.advance(steps)
    rows = np.concatenate([[r0], rows])
    cols = np.concatenate([[c0], cols])
    raw = np.concatenate([[raw0], syms])
    contexts = np.concatenate([[ctx0], ctxs])
    alphabet, ids = intern(raw)
    return Exploration(env=env, steps=steps, seed=seed, symbols=ids, alphabet=alphabet,
                       rows=rows, cols=cols, contexts=contexts,
                       context_names=world.context_names,
                       descriptions=[world.describe_symbol(s) for s in alphabet.symbols])


def run_exploration(env: str, steps: int, seed: int, path: str | Path | None = None) -> Exploration:
    """Explore ``env`` for ``steps`` steps from its start cell; optionally write a stream file."""
    world = make_world(env, seed)
    exp = explore_world(world, steps, env=env, seed=seed)
    if path is not None:
        from .formats import write_stream
        write_stream(exp, path)
    return exp
