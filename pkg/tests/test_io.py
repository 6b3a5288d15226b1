import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brp import io
from brp.errors import FormatError, ShapeError
from brp.randgen import gaussian_matrix


@pytest.mark.parametrize("name", ["m.bin", "m.f64", "m.mtx", "m.csv"])
def test_round_trip_bit_exact(tmp_path, gauss, name):
    m = gauss(7, 5, 1) * 1e-3
    m[0, 0] = 1e300
    m[1, 1] = -5e-324
    io.write_matrix(m, tmp_path / name)
    back = io.read_matrix(tmp_path / name)
    assert back.tobytes() == m.tobytes()


@settings(max_examples=25, deadline=None)
@given(rows=st.integers(1, 12), cols=st.integers(1, 12), seed=st.integers(0, 2**64 - 1))
def test_raw_round_trip_property(tmp_path_factory, rows, cols, seed):
    path = tmp_path_factory.mktemp("raw") / "m.bin"
    m = gaussian_matrix(rows, cols, seed)
    io.write_matrix(m, path)
    assert io.read_matrix(path).tobytes() == m.tobytes()


def test_matrix_market_column_major(tmp_path):
    path = tmp_path / "a.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n2\n3\n4\n")
    assert np.array_equal(io.read_matrix(path), [[1.0, 3.0], [2.0, 4.0]])


def test_raw_layout(tmp_path):
    path = tmp_path / "a.bin"
    io.write_matrix([[1.0, 2.0, 3.0]], path)
    data = path.read_bytes()
    assert data[:16] == (1).to_bytes(8, "little") + (3).to_bytes(8, "little")
    assert len(data) == 16 + 24


@pytest.mark.parametrize("text,where", [
    ("%%MatrixMarket matrix coordinate real general\n2 2\n", "line 1"),
    ("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n", "line 5"),
    ("%%MatrixMarket matrix array real general\n1 2\n1\nabc\n", "line 4"),
    ("%%MatrixMarket matrix array real general\n1 1\nnan\n", "line 3"),
])
def test_matrix_market_errors(tmp_path, text, where):
    path = tmp_path / "bad.mtx"
    path.write_text(text)
    with pytest.raises(FormatError) as exc:
        io.read_matrix(path)
    assert exc.value.location == where
    assert str(path) in str(exc.value)


def test_raw_truncated(tmp_path):
    path = tmp_path / "t.bin"
    io.write_matrix(np.ones((3, 3)), path)
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(FormatError, match="expected"):
        io.read_matrix(path)


def test_csv_ragged(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(FormatError) as exc:
        io.read_matrix(path)
    assert exc.value.location == "line 2"


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        io.read_matrix(tmp_path / "x.txt")


def test_failed_write_leaves_nothing(tmp_path):
    with pytest.raises(ValueError):
        io.write_matrix(np.ones((2, 2)), tmp_path / "x.csv", format="bogus")
    with pytest.raises(ValueError):
        io.write_matrix([[np.nan]], tmp_path / "y.csv")
    assert list(tmp_path.iterdir()) == []


def test_atomic_overwrite_keeps_old_on_failure(tmp_path, monkeypatch):
    path = tmp_path / "keep.csv"
    io.write_matrix(np.ones((1, 1)), path)
    before = path.read_bytes()

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(io.os, "replace", boom)
    with pytest.raises(OSError):
        io.write_matrix(np.zeros((2, 2)), path)
    assert path.read_bytes() == before
    assert [p.name for p in tmp_path.iterdir()] == ["keep.csv"]


class TestPgm:
    def test_scaling_and_round_trip(self, tmp_path):
        img = np.array([[0, 128], [255, 7]], dtype=np.uint8)
        io.write_pgm(img, tmp_path / "a.pgm")
        stack = io.read_pgm_stack([tmp_path / "a.pgm"])
        assert stack.as_matrix.shape == (1, 4)
        assert stack.as_matrix[0, 0] == 0.0 and stack.as_matrix[0, 2] == 1.0
        assert stack.as_matrix[0, 1] == pytest.approx(128 / 255, rel=1e-15)
        assert np.array_equal(io.to_pixels(stack.as_matrix).reshape(2, 2), img)

    def test_to_pixels_rounding_and_clamp(self):
        assert np.array_equal(io.to_pixels(np.array([-0.3, 0.5, 1.7, 0.0, 1.0])), [0, 128, 255, 0, 255])

    def test_header_comments(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# made by hand\n2 1\n# max\n255\n\x01\x02")
        assert np.array_equal(io.read_pgm(path), [[1, 2]])

    def test_mixed_dimensions(self, tmp_path):
        io.write_pgm(np.zeros((2, 2), np.uint8), tmp_path / "a.pgm")
        io.write_pgm(np.zeros((2, 3), np.uint8), tmp_path / "b.pgm")
        with pytest.raises(ShapeError, match="b.pgm"):
            io.read_pgm_stack(io.list_pgms(tmp_path))

    @pytest.mark.parametrize("data,match", [(b"P2\n1 1\n255\n0", "P5"), (b"P5\n1 1\n65535\n\0\0", "maxval"),
                                            (b"P5\n2 2\n255\n\0", "pixel bytes")])
    def test_bad_files(self, tmp_path, data, match):
        path = tmp_path / "bad.pgm"
        path.write_bytes(data)
        with pytest.raises(FormatError, match=match):
            io.read_pgm(path)

    def test_stack_write_uses_names(self, tmp_path):
        stack = io.ImageStack(np.full((2, 4), 0.5), 2, 2, ("x.pgm", "y.pgm"))
        io.write_pgm_stack(stack, tmp_path / "out")
        assert [p.name for p in io.list_pgms(tmp_path / "out")] == ["x.pgm", "y.pgm"]
        assert np.all(io.read_pgm(tmp_path / "out" / "x.pgm") == 128)

    def test_stack_shape_checked(self):
        with pytest.raises(ShapeError):
            io.ImageStack(np.zeros((2, 5)), 2, 2)


class TestRecords:
    def test_format(self):
        rec = dict(experiment="e", n=3, m=4, rank=2, oversample=1, q=0, seed=9, metric="x",
                   value=0.1, wall_time_seconds=1.5)
        assert io.format_record(rec) == "e,3,4,2,1,0,9,x,0.10000000000000001,1.500000"
        assert io.format_record({**rec, "value": None}).split(",")[8] == "nan"

    def test_write(self, tmp_path):
        path = tmp_path / "r.csv"
        io.write_records([], path)
        assert path.read_bytes() == b"experiment,n,m,rank,oversample,q,seed,metric,value,wall_time_seconds\n"
