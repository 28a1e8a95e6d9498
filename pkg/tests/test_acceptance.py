"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import time

import numpy as np
import pytest

import toy
from cdsm import evaluate as ev
from cdsm import formats, spectral
from cdsm.gridworld import run_exploration
from cdsm.hierarchy import build_hierarchy, decode, default_specs, unit_transitions
from oracles import block_stochastic, eigvals_mp


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return emit


def test_criterion_1_four_room_recovery(verdict):
    t0 = time.perf_counter()
    r = ev.four_rooms_experiment("full", steps=100_000, seed=0)
    dt = time.perf_counter() - t0
    n = len(r.embedding.included)
    ok = n == 104 and r.purity == 1.0 and dt < 30
    verdict(1, ok, f"{n} embedded points, non-doorway purity {r.purity:.4f}, {dt:.1f} s (limit 30 s)")


def test_criterion_2_partial_observability(verdict):
    t0 = time.perf_counter()
    full = ev.four_rooms_experiment("full", steps=100_000, seed=0)
    part = ev.four_rooms_experiment("partial", steps=100_000, seed=0)
    dt = time.perf_counter() - t0
    ok = part.purity < full.purity and dt < 30
    verdict(2, ok, f"partial purity {part.purity:.4f} < full purity {full.purity:.4f}, {dt:.1f} s (limit 30 s)")


def test_criterion_3_hierarchy_separation(desk, verdict):
    acc = desk.report.accuracy
    secs = desk.seconds["total"]
    ok = acc is not None and acc >= 0.85 and secs < 900
    shown = "undefined" if acc is None else f"{acc:.4f}"
    ctrl = desk.report.shuffle_accuracy
    ctrl = "undefined" if ctrl is None else f"{ctrl:.4f}"
    verdict(3, ok, f"room_type_accuracy {shown} (threshold 0.85), shuffled {ctrl}, "
                   f"pipeline {secs:.0f} s (limit 900 s)")


def test_criterion_4_heatmap_contrast(desk, verdict):
    units = desk.report.units
    contrasts = [u.contrast for u in units]
    ok = len(units) == 2 and all(c is not None and c >= 2 for c in contrasts)
    shown = ", ".join(f"unit {u.unit} ({u.room_type}) {u.contrast:.3f}" if u.contrast is not None
                      else f"unit {u.unit} ({u.room_type}) undefined" for u in units)
    verdict(4, ok, f"majority/other mass per top unit: {shown} (threshold 2)")


def test_criterion_5_eigen_correctness(verdict):
    rng = np.random.default_rng(2024)
    worst_resid = worst_ref = 0.0
    for trial in range(100):
        n = int(rng.integers(2, 65))
        a = rng.standard_normal((n, n))
        S = (a + a.T) / 2
        lam, U = spectral.top_k_eigen(S, n)
        fro = np.linalg.norm(S)
        worst_resid = max(worst_resid, float((np.linalg.norm(S @ U - U * lam, axis=0) / fro).max()))
        ref = eigvals_mp(S, dps=30) if n <= 24 else np.sort(np.linalg.eigvalsh(S))[::-1]
        worst_ref = max(worst_ref, float(np.abs(lam - ref).max()))
    ok = worst_resid <= 1e-8 and worst_ref <= 1e-8
    verdict(5, ok, f"100 matrices, worst residual/||S||_F {worst_resid:.2e}, worst eigenvalue error {worst_ref:.2e}")


def test_criterion_6_block_oracle(verdict):
    failures = []
    trials = 0
    for blocks in (2, 3):
        for seed in range(50):
            rng = np.random.default_rng(1000 * blocks + seed)
            sizes = rng.multinomial(int(rng.integers(2 * blocks, 31)) - 2 * blocks, [1 / blocks] * blocks) + 2
            T, labels = block_stochastic(list(sizes), rng)
            emb = spectral.embed(T, blocks)
            ca = spectral.kmeans(emb.points, blocks, seed=seed)
            trials += 1
            if spectral.pair_counting_purity(ca.labels, labels) != 1.0:
                failures.append((blocks, seed))
    verdict(6, not failures, f"{trials - len(failures)}/{trials} trials at block purity 1.0")


def test_criterion_7_invariants(desk, tmp_path, verdict):
    problems = []
    for ell, lv in enumerate(desk.model.levels):
        sums = lv.transitions.sum(axis=1)
        if not np.all(np.abs(sums - 1) <= 1e-9):
            problems.append(f"level {ell} rows not stochastic")
        pts = lv.embedding.points[lv.embedding.included]
        if not np.all(np.abs(np.linalg.norm(pts, axis=1) - 1) <= 1e-9):
            problems.append(f"level {ell} embedding rows not unit norm")
    for test in desk.tests:
        for ell, lv in enumerate(desk.model.levels):
            for h in ev.room_heatmaps(test, ell, lv.n_clusters):
                if h.total and abs(h.weights.sum() - 1) > 1e-9:
                    problems.append(f"heat-map {ell}/{h.unit}/{test.name} not normalised")
    t = decode(desk.model, desk.exp.symbols)
    for ell in range(desk.model.depth):
        if not np.array_equal(t.units[ell], desk.model.streams[ell + 1]):
            problems.append(f"decode differs from build at level {ell}")
    blobs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        e = run_exploration("sy_rooms", 500_000, 11, d / "stream.txt")
        m = build_hierarchy(e.symbols, default_specs(), seed=11, alphabet=e.alphabet)
        formats.write_model(m, d / "model.json", env="sy_rooms")
        tests = ev.run_test_rooms(m, 11, 10_000)
        ev.separation_report(tests, shuffle_seed=11).to_json(d / "report.json")
        blobs.append([(d / f).read_bytes() for f in ("stream.txt", "model.json", "report.json")])
    if blobs[0] != blobs[1]:
        problems.append("artifacts differ between equal-seed runs")
    verdict(7, not problems, "all invariants hold" if not problems else "; ".join(problems))


def test_criterion_8_toy_fixture(verdict):
    obs, ctx = toy.walk()
    m = build_hierarchy(obs, toy.SPECS, seed=0)
    top = m.levels[-1]
    tl = decode(m, obs)
    blue = next(int(u) for time, u in zip(tl.times[-1], tl.units[-1]) if ctx[time] == "B")
    sup = [unit_transitions(m, m.depth - 1, u) for u in range(top.n_clusters)]
    ok = (m.depth == 2 and top.n_clusters == 2 and sup[blue] == toy.BLUE_SUPPORT
          and sup[1 - blue] == toy.YELLOW_SUPPORT and sup[0] & sup[1] == toy.THROUGH_CENTRE)
    verdict(8, ok, f"{top.n_clusters} top units; shared transitions {sorted(sup[0] & sup[1])}")
