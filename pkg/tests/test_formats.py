import numpy as np
import pytest

from cdsm import formats
from cdsm.errors import StreamFormatError
from cdsm.gridworld import run_exploration
from cdsm.hierarchy import build_hierarchy, decode, default_specs


@pytest.mark.parametrize("env", ["sy_rooms", "four_rooms_full", "four_rooms_partial"])
def test_stream_round_trip(tmp_path, env):
    path = tmp_path / "s.txt"
    e = run_exploration(env, 5000, 3, path)
    back = formats.read_stream(path)
    assert (back.env, back.steps, back.seed) == (env, 5000, 3)
    np.testing.assert_array_equal(back.symbols, e.symbols)
    np.testing.assert_array_equal(back.rows, e.rows)
    np.testing.assert_array_equal(back.contexts, e.contexts)
    assert back.alphabet.symbols == e.alphabet.symbols
    assert back.descriptions == e.descriptions


def test_stream_layout(tmp_path):
    path = tmp_path / "s.txt"
    e = run_exploration("sy_rooms", 3, 7, path)
    data = path.read_bytes()
    assert b"\r" not in data
    lines = data.decode().splitlines()
    assert lines[0] == "CDSM1 sy_rooms 3 7"
    assert lines[1] == f"0 {e.rows[0]} {e.cols[0]} S" or lines[1] == f"0 {e.rows[0]} {e.cols[0]} Y"
    syms = [ln for ln in lines if ln.startswith("SYM ")]
    assert len(syms) == len(e.alphabet)
    assert all(len(ln.split()[2]) == 9 for ln in syms)


def test_full_mode_symbol_lines(tmp_path):
    path = tmp_path / "s.txt"
    run_exploration("four_rooms_full", 10, 0, path)
    syms = [ln for ln in path.read_text().splitlines() if ln.startswith("SYM ")]
    assert syms[0] == "SYM 0 POS 3 3"


@pytest.mark.parametrize("text", [
    "",
    "CDSM2 sy_rooms 1 0\n",
    "CDSM1 nowhere 1 0\n",
    "CDSM1 sy_rooms x 0\n",
    "CDSM1 sy_rooms 1 0\n0 48 24 S\n",
    "CDSM1 sy_rooms 1 0\n0 48 24 S\n0 47 24 Q\nSYM 0 000000000\n",
    "CDSM1 sy_rooms 1 0\n0 48 24 S\n1 47 24 S\nSYM 0 000000000\n",
    "CDSM1 sy_rooms 1 0\n0 48 24 S\n0 47 24 S\nSYM 0 00000000\n",
    "CDSM1 sy_rooms 1 0\n0 48 24 S\n0 47 24 S\nSYM 1 000000000\n",
])
def test_malformed_streams(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(StreamFormatError):
        formats.read_stream(path)


@pytest.fixture(scope="module")
def small_model():
    e = run_exploration("sy_rooms", 100_000, 2)
    return e, build_hierarchy(e.symbols, default_specs(), seed=2, alphabet=e.alphabet)


def test_model_round_trip(tmp_path, small_model):
    e, model = small_model
    path = formats.write_model(model, tmp_path / "m.json", env="sy_rooms")
    back, env = formats.read_model(path)
    assert env == "sy_rooms" and back.depth == model.depth
    for a, b in zip(model.levels, back.levels):
        np.testing.assert_array_equal(a.pairs, b.pairs)
        np.testing.assert_array_equal(a.assignment, b.assignment)
        np.testing.assert_array_equal(a.embedding.points, b.embedding.points)
        np.testing.assert_array_equal(a.embedding.eigenvalues, b.embedding.eigenvalues)
    t1, t2 = decode(model, e.symbols), decode(back, e.symbols)
    for x, y in zip(t1.units, t2.units):
        np.testing.assert_array_equal(x, y)
    # writing the reloaded model gives the same bytes
    again = formats.write_model(back, tmp_path / "m2.json", env="sy_rooms")
    assert again.read_bytes() == path.read_bytes()


def test_model_without_embeddings(tmp_path, small_model):
    e, model = small_model
    full = formats.write_model(model, tmp_path / "a.json")
    slim = formats.write_model(model, tmp_path / "b.json", include_embeddings=False)
    assert slim.stat().st_size < full.stat().st_size
    back, _ = formats.read_model(slim)
    assert all(lv.embedding is None for lv in back.levels)
    t = decode(back, e.symbols)
    for ell, units in enumerate(t.units):
        np.testing.assert_array_equal(units, model.streams[ell + 1])


def test_model_format_tag(tmp_path, small_model):
    _, model = small_model
    path = formats.write_model(model, tmp_path / "m.json")
    assert '"format":"cdsm-model-1"' in path.read_text()
    path.write_text(path.read_text().replace("cdsm-model-1", "cdsm-model-0"))
    with pytest.raises(StreamFormatError):
        formats.read_model(path)
    path.write_text("{not json")
    with pytest.raises(StreamFormatError):
        formats.read_model(path)
