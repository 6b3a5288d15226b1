"""Matrix, image and CSV file formats.

``raw_f64``: 16-byte header (rows, cols as little-endian uint64) followed by
the entries as little-endian float64 in row-major order.  Text formats write
17 significant digits so every double round-trips.  All writers go through a
temporary file in the target directory and ``os.replace``, so a failed write
leaves no partial file.
"""

import csv
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from brp.errors import FormatError, ShapeError
from brp.matrix import as_dense

FORMATS = ("matrix_market_array", "csv", "raw_f64")
_RAW_HEADER = struct.Struct("<QQ")


def _atomic_write(path, data):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _finite(values, path, what="value"):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise FormatError(f"non-finite {what} at entry {int(bad[0])}", path)
    return values


def guess_format(path):
    suffix = Path(path).suffix.lower()
    return {".mtx": "matrix_market_array", ".csv": "csv", ".bin": "raw_f64", ".f64": "raw_f64"}.get(suffix)


def _read_raw(path):
    data = Path(path).read_bytes()
    if len(data) < _RAW_HEADER.size:
        raise FormatError("truncated raw_f64 header", path, "offset 0")
    rows, cols = _RAW_HEADER.unpack_from(data)
    expected = _RAW_HEADER.size + 8 * rows * cols
    if rows == 0 or cols == 0:
        raise FormatError(f"zero dimension {rows}x{cols}", path, "offset 0")
    if len(data) != expected:
        raise FormatError(f"expected {expected} bytes for {rows}x{cols}, found {len(data)}", path,
                          f"offset {min(len(data), expected)}")
    values = np.frombuffer(data, dtype="<f8", offset=_RAW_HEADER.size).astype(np.float64)
    return _finite(values, path).reshape(rows, cols)


def _parse_float(token, path, line):
    try:
        return float(token)
    except ValueError:
        raise FormatError(f"not a number: {token!r}", path, f"line {line}") from None


def _read_mm(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise FormatError("missing %%MatrixMarket banner", path, "line 1")
    banner = lines[0].split()
    if len(banner) != 5 or [b.lower() for b in banner[1:]] != ["matrix", "array", "real", "general"]:
        raise FormatError(f"unsupported banner {lines[0]!r}; need 'matrix array real general'", path, "line 1")
    body = [(i + 1, ln.strip()) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise FormatError("missing size line", path, f"line {len(lines)}")
    lineno, size = body[0]
    parts = size.split()
    if len(parts) != 2:
        raise FormatError(f"size line must be 'rows cols', got {size!r}", path, f"line {lineno}")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise FormatError(f"bad size line {size!r}", path, f"line {lineno}") from None
    if rows < 1 or cols < 1:
        raise FormatError(f"zero dimension {rows}x{cols}", path, f"line {lineno}")
    entries = body[1:]
    if len(entries) != rows * cols:
        where = entries[-1][0] if entries else lineno
        raise FormatError(f"expected {rows * cols} entries, found {len(entries)}", path, f"line {where}")
    values = np.empty(rows * cols)
    for j, (ln, tok) in enumerate(entries):
        if len(tok.split()) != 1:
            raise FormatError(f"expected one value per line, got {tok!r}", path, f"line {ln}")
        values[j] = _parse_float(tok, path, ln)
        if not np.isfinite(values[j]):
            raise FormatError(f"non-finite value {tok!r}", path, f"line {ln}")
    # column-major in this format
    return np.ascontiguousarray(values.reshape(cols, rows).T)


def _read_csv(path):
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not c.strip() for c in record):
                continue
            row = [_parse_float(c.strip(), path, lineno) for c in record]
            if rows and len(row) != len(rows[0]):
                raise FormatError(f"expected {len(rows[0])} columns, found {len(row)}", path, f"line {lineno}")
            if not all(np.isfinite(row)):
                raise FormatError("non-finite value", path, f"line {lineno}")
            rows.append(row)
    if not rows:
        raise FormatError("empty CSV", path, "line 1")
    return np.ascontiguousarray(rows, dtype=np.float64)


def read_matrix(path, format=None):
    """Read a dense matrix; ``format`` defaults to a guess from the file suffix."""
    fmt = format or guess_format(path)
    if fmt == "raw_f64":
        return _read_raw(path)
    if fmt == "matrix_market_array":
        return _read_mm(path)
    if fmt == "csv":
        return _read_csv(path)
    raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")


def write_matrix(m, path, format=None):
    m = as_dense(m)
    fmt = format or guess_format(path)
    if fmt == "raw_f64":
        data = _RAW_HEADER.pack(*m.shape) + m.astype("<f8").tobytes()
    elif fmt == "matrix_market_array":
        lines = ["%%MatrixMarket matrix array real general", f"{m.shape[0]} {m.shape[1]}"]
        lines += ["%.17g" % v for v in m.T.ravel()]
        data = ("\n".join(lines) + "\n").encode()
    elif fmt == "csv":
        data = "".join(",".join("%.17g" % v for v in row) + "\n" for row in m).encode()
    else:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    _atomic_write(path, data)


@dataclass(frozen=True)
class ImageStack:
    """Equal-size grayscale images, one per row of ``as_matrix`` (values in [0, 1])."""

    as_matrix: np.ndarray
    height: int
    width: int
    names: tuple = ()

    def __post_init__(self):
        if self.as_matrix.ndim != 2 or self.as_matrix.shape[1] != self.height * self.width:
            raise ShapeError(f"matrix of shape {self.as_matrix.shape} does not hold "
                             f"{self.height}x{self.width} images")

    @property
    def count(self):
        return self.as_matrix.shape[0]

    def image(self, i):
        return self.as_matrix[i].reshape(self.height, self.width)


def _pgm_tokens(data, path, count):
    """First ``count`` header tokens of a PNM file and the offset just past them."""
    tokens, pos, n = [], 0, len(data)
    while len(tokens) < count:
        while pos < n and (data[pos:pos + 1].isspace() or data[pos:pos + 1] == b"#"):
            if data[pos:pos + 1] == b"#":
                while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header", path, f"offset {pos}")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos:pos + 1].isspace():
        raise FormatError("missing whitespace after PGM header", path, f"offset {pos}")
    return tokens, pos + 1


def read_pgm(path):
    """One binary (P5) 8-bit PGM as a ``height x width`` uint8 array."""
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise FormatError(f"not a binary PGM (magic {data[:2]!r}, need b'P5')", path, "offset 0")
    tokens, offset = _pgm_tokens(data, path, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError("bad PGM header", path, "offset 2") from None
    if maxval != 255:
        raise FormatError(f"only 8-bit PGM (maxval 255) is supported, got {maxval}", path)
    if width < 1 or height < 1:
        raise FormatError(f"bad PGM size {width}x{height}", path)
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=offset) \
        if len(data) - offset >= width * height else None
    if pixels is None:
        raise FormatError(f"expected {width * height} pixel bytes, found {len(data) - offset}", path,
                          f"offset {len(data)}")
    return pixels.reshape(height, width)


def write_pgm(pixels, path):
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w = pixels.shape
    _atomic_write(path, b"P5\n%d %d\n255\n" % (w, h) + pixels.tobytes())


def read_pgm_stack(paths):
    """Stack same-size PGMs as rows of an images x pixels matrix scaled to [0, 1]."""
    paths = [Path(p) for p in paths]
    if not paths:
        raise FormatError("no images given")
    rows, shape = [], None
    for p in paths:
        img = read_pgm(p)
        if shape is None:
            shape = img.shape
        elif img.shape != shape:
            raise ShapeError(f"{p} is {img.shape[1]}x{img.shape[0]} but {paths[0]} is {shape[1]}x{shape[0]}")
        rows.append(img.ravel())
    matrix = np.ascontiguousarray(np.vstack(rows), dtype=np.float64) / 255.0
    return ImageStack(matrix, shape[0], shape[1], tuple(p.name for p in paths))


def list_pgms(directory):
    return sorted(p for p in Path(directory).iterdir() if p.suffix.lower() == ".pgm" and p.is_file())


def to_pixels(values):
    """Clamp to [0, 1], scale by 255 and round half away from zero."""
    return np.floor(np.clip(values, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def write_pgm_stack(stack, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = stack.names or tuple(f"img_{i:04d}.pgm" for i in range(stack.count))
    for i, name in enumerate(names):
        write_pgm(to_pixels(stack.image(i)), directory / name)
    return [directory / n for n in names]


CSV_HEADER = ("experiment", "n", "m", "rank", "oversample", "q", "seed", "metric", "value", "wall_time_seconds")


def format_record(rec):
    """One CSV line (without newline) for a mapping with the ``CSV_HEADER`` keys."""
    value = rec["value"]
    return ",".join([
        str(rec["experiment"]), str(rec["n"]), str(rec["m"]), str(rec["rank"]), str(rec["oversample"]),
        str(rec["q"]), str(rec["seed"]), str(rec["metric"]),
        "nan" if value is None or value != value else "%.17g" % value,
        "%.6f" % rec.get("wall_time_seconds", 0.0),
    ])


def write_records(records, path):
    """Write experiment records as UTF-8 CSV with LF endings (``-`` for stdout)."""
    text = ",".join(CSV_HEADER) + "\n" + "".join(format_record(r) + "\n" for r in records)
    if str(path) == "-":
        import sys

        sys.stdout.write(text)
    else:
        _atomic_write(path, text.encode("utf-8"))
