"""Two contexts sharing one observation.

Observation 0 is the shared centre.  The blue context is the one-way loop
0 -> 1 -> 2 -> 3 -> 4 -> 0 and the yellow one 0 -> 5 -> 6 -> 7 -> 8 -> 0.
The walk performs whole loops, switching context only at the centre.
"""

import numpy as np

from cdsm.hierarchy import LevelSpec

CENTRE = 0
BLUE_LOOP = (1, 2, 3, 4, 0)
YELLOW_LOOP = (5, 6, 7, 8, 0)
PATTERN = "BBYBYY"
REPEATS = 6
SPECS = [LevelSpec(4, 2), LevelSpec(2, 2)]


def _loop_pairs(loop):
    seq = (CENTRE,) + loop
    return {(seq[i], seq[i + 1]) for i in range(len(loop))}


BLUE = _loop_pairs(BLUE_LOOP)
YELLOW = _loop_pairs(YELLOW_LOOP)
THROUGH_CENTRE = {p for p in BLUE | YELLOW if CENTRE in p}

# level-0 groups: the centre transitions of each context, and its interior
GROUPS = [
    {(0, 1), (4, 0)},
    {(1, 2), (2, 3), (3, 4)},
    {(0, 5), (8, 0)},
    {(5, 6), (6, 7), (7, 8)},
]
# each top unit covers its own context plus the other context's centre transitions
BLUE_SUPPORT = BLUE | {(0, 5), (8, 0)}
YELLOW_SUPPORT = YELLOW | {(0, 1), (4, 0)}


def walk():
    """(observations, context per observation: 'B', 'Y', or '-' for the start)."""
    obs = [CENTRE]
    ctx = ["-"]
    for ch in PATTERN * REPEATS:
        loop = BLUE_LOOP if ch == "B" else YELLOW_LOOP
        obs.extend(loop)
        ctx.extend(ch * len(loop))
    return np.array(obs), ctx


def switch_times():
    """Indices of the first observation of each loop whose context differs from the last."""
    _, ctx = walk()
    return [t for t in range(2, len(ctx)) if ctx[t] != ctx[t - 1]]
