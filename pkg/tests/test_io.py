import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sgdecomp.io import (
    load_matrix,
    read_dense_binary,
    read_dense_text,
    read_matrix_market,
    write_dense_binary,
    write_dense_text,
    write_matrix_market,
)

values = st.floats(allow_nan=False, allow_infinity=False, width=64)
shapes = st.tuples(st.integers(1, 6), st.integers(1, 6))


@settings(max_examples=30, deadline=None)
@given(shapes.flatmap(lambda s: arrays(np.float64, s, elements=values)))
def test_dense_text_roundtrip_exact(tmp_path_factory, A):
    path = tmp_path_factory.mktemp("io") / "a.txt"
    write_dense_text(path, A)
    np.testing.assert_array_equal(read_dense_text(path), A)


@settings(max_examples=30, deadline=None)
@given(shapes.flatmap(lambda s: arrays(np.float64, s, elements=values)))
def test_dense_binary_roundtrip_exact(tmp_path_factory, A):
    path = tmp_path_factory.mktemp("io") / "a.bin"
    write_dense_binary(path, A)
    np.testing.assert_array_equal(read_dense_binary(path), A)


def test_binary_layout(tmp_path):
    path = tmp_path / "a.bin"
    write_dense_binary(path, np.array([[1.0, 2.0, 3.0]]))
    raw = path.read_bytes()
    assert raw[:16] == (1).to_bytes(8, "little") + (3).to_bytes(8, "little")
    assert np.frombuffer(raw[16:], "<f8").tolist() == [1.0, 2.0, 3.0]


def test_matrix_market_roundtrip(tmp_path):
    S = sp.random(20, 15, density=0.2, random_state=0, format="csr")
    path = tmp_path / "s.mtx"
    write_matrix_market(path, S)
    T = read_matrix_market(path)
    assert sp.isspmatrix_csr(T) and (abs(S - T) > 1e-15).nnz == 0
    assert "coordinate real general" in path.read_text().splitlines()[0]


def test_load_dispatch(tmp_path):
    A = np.arange(6.0).reshape(2, 3)
    write_dense_text(tmp_path / "a.dat", A)
    write_dense_binary(tmp_path / "a.bin", A)
    write_matrix_market(tmp_path / "a.mtx", A)
    np.testing.assert_array_equal(load_matrix(tmp_path / "a.dat"), A)
    np.testing.assert_array_equal(load_matrix(tmp_path / "a.bin"), A)
    np.testing.assert_array_equal(load_matrix(tmp_path / "a.mtx").toarray(), A)


def test_malformed(tmp_path):
    (tmp_path / "bad.txt").write_text("2 2\n1 2 3\n")
    with pytest.raises(ValueError):
        read_dense_text(tmp_path / "bad.txt")
    (tmp_path / "bad2.txt").write_text("2\n")
    with pytest.raises(ValueError):
        read_dense_text(tmp_path / "bad2.txt")
    (tmp_path / "bad.bin").write_bytes(b"\x00" * 8)
    with pytest.raises(ValueError):
        read_dense_binary(tmp_path / "bad.bin")
    (tmp_path / "nan.txt").write_text("1 1\nnan\n")
    with pytest.raises(ValueError):
        read_dense_text(tmp_path / "nan.txt")
