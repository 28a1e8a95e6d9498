import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cdsm import stream as s
from cdsm.errors import StreamTooShort, UnknownObservation
from cdsm.gridworld import run_exploration

streams = st.lists(st.integers(0, 6), min_size=2, max_size=200)


def test_intern_first_appearance():
    alpha, ids = s.intern(["a", "b", "a", "c"])
    assert alpha.index == {"a": 0, "b": 1, "c": 2}
    assert ids.tolist() == [0, 1, 0, 2]


def test_intern_single_symbol():
    alpha, ids = s.intern(["a"])
    assert len(alpha) == 1 and ids.tolist() == [0]


def test_intern_integer_codes_vectorized():
    alpha, ids = s.intern(np.array([40, 7, 40, 9, 7]))
    assert alpha.symbols == [40, 7, 9]
    assert ids.tolist() == [0, 1, 0, 2, 1]


def test_intern_empty():
    with pytest.raises(StreamTooShort):
        s.intern([])


@given(streams)
def test_intern_idempotent(seq):
    _, ids = s.intern(seq)
    _, again = s.intern(ids)
    np.testing.assert_array_equal(ids, again)


def test_alphabet_encode_unknown():
    alpha, _ = s.intern([3, 5])
    assert alpha.encode([5, 3]).tolist() == [1, 0]
    assert alpha.encode_codes(np.array([5, 3, 3])).tolist() == [1, 0, 0]
    with pytest.raises(UnknownObservation):
        alpha.encode([4])
    with pytest.raises(UnknownObservation):
        alpha.encode_codes(np.array([3, 4]))


def test_extract_transitions_examples():
    alpha, ids = s.extract_transitions(np.array([0, 1, 0, 1]))
    assert [alpha.symbols[i] for i in ids] == [(0, 1), (1, 0), (0, 1)]
    assert len(alpha) == 2
    alpha, ids = s.extract_transitions(np.array([0, 0, 0]))
    assert alpha.symbols == [(0, 0)] and ids.tolist() == [0, 0]


def test_extract_transitions_too_short():
    with pytest.raises(StreamTooShort):
        s.extract_transitions(np.array([3]))


@given(streams)
def test_extract_transitions_deterministic(seq):
    a1, i1 = s.extract_transitions(np.array(seq))
    a2, i2 = s.extract_transitions(np.array(seq))
    assert a1.symbols == a2.symbols
    np.testing.assert_array_equal(i1, i2)
    assert len(i1) == len(seq) - 1


def test_count_matrix_examples():
    np.testing.assert_array_equal(s.count_matrix(np.array([0, 1, 0, 1, 0]), 2), [[0, 2], [2, 0]])
    np.testing.assert_array_equal(s.count_matrix(np.array([0, 0, 0]), 1), [[2]])


@given(streams)
def test_count_matrix_total_mass(seq):
    C = s.count_matrix(np.array(seq), 7)
    assert C.sum() == len(seq) - 1
    assert (C >= 0).all() and C.dtype.kind == "i"


def test_count_matrix_rejects_out_of_range():
    with pytest.raises(ValueError):
        s.count_matrix(np.array([0, 3]), 3)


def test_row_normalize_examples():
    np.testing.assert_array_equal(s.row_normalize(np.array([[0, 2], [2, 0]])), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(s.row_normalize(np.array([[1, 1], [0, 0]])), [[0.5, 0.5], [0, 0]])


@given(streams)
def test_row_normalize_rows_stochastic_or_zero(seq):
    T = s.transition_matrix(np.array(seq), 8)
    sums = T.sum(axis=1)
    assert np.all((np.abs(sums - 1) <= 1e-9) | (np.all(T == 0, axis=1)))


def test_four_rooms_rows_stochastic():
    e = run_exploration("four_rooms_full", 1_000_000, 0)
    T = s.transition_matrix(e.symbols, len(e.alphabet))
    np.testing.assert_allclose(T.sum(axis=1), 1.0, atol=1e-9)


def test_collapse_runs_examples():
    assert s.collapse_runs(np.array([0, 0, 1, 1, 1, 0])).tolist() == [0, 1, 0]
    assert s.collapse_runs(np.array([0, 1, 2])).tolist() == [0, 1, 2]
    assert s.collapse_runs(np.array([5])).tolist() == [5]
    assert s.collapse_runs(np.array([], dtype=int)).tolist() == []


@given(streams)
def test_collapse_runs_idempotent(seq):
    once = s.collapse_runs(np.array(seq))
    np.testing.assert_array_equal(s.collapse_runs(once), once)
    assert np.all(once[1:] != once[:-1])


def test_write_matrix_csv(tmp_path):
    T = s.transition_matrix(np.array([0, 1, 1, 0]))
    path = s.write_matrix_csv(T, tmp_path / "T.csv", ["a", "b"])
    np.testing.assert_array_equal(np.loadtxt(path, delimiter=","), T)
    assert (tmp_path / "T.alphabet.csv").read_text() == "id,symbol\n0,a\n1,b\n"
