import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cdsm import evaluate as ev  # noqa: E402
from cdsm.gridworld import run_exploration  # noqa: E402
from cdsm.hierarchy import build_hierarchy, default_specs  # noqa: E402

DESK_STEPS = 2_000_000
DESK_SEED = 7


class DeskRun:
    """The full s/y pipeline at desk scale, run once per session."""

    def __init__(self):
        t0 = time.perf_counter()
        self.exp = run_exploration("sy_rooms", DESK_STEPS, DESK_SEED)
        t1 = time.perf_counter()
        self.model = build_hierarchy(self.exp.symbols, default_specs(), seed=DESK_SEED,
                                     alphabet=self.exp.alphabet)
        t2 = time.perf_counter()
        self.tests = ev.run_test_rooms(self.model, DESK_SEED, ev.DEFAULT_STEPS_PER_ROOM)
        self.report = ev.separation_report(self.tests, shuffle_seed=DESK_SEED)
        t3 = time.perf_counter()
        self.seconds = {"explore": t1 - t0, "build": t2 - t1, "evaluate": t3 - t2, "total": t3 - t0}


@pytest.fixture(scope="session")
def desk():
    return DeskRun()
