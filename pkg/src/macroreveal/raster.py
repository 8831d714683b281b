"""Grayscale raster and heightmap value types plus PGM / .hmap file I/O.

Samples live in double precision in [0, 1]; quantization happens only when
writing a file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InvalidParameter,
    NumericError,
    ParseError,
    ShapeError,
    TruncatedData,
    UnsupportedFormat,
)

SUPPORTED_MAXVALS = (255, 65535)
# samples are snapped to multiples of 2**-53 so that 1 - s is exact in binary64
_LATTICE = float(2**53)
_WHITESPACE = b" \t\n\r\v\f"


def _frozen(arr):
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Raster:
    """Immutable 2-D grayscale image, shape ``(height, width)``, samples in [0, 1].

    Samples are rounded to the nearest multiple of 2**-53 on construction
    (a change of at most 1.1e-16), which makes inversion an exact involution.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"raster must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NumericError("raster samples must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise InvalidParameter("raster samples must lie in [0, 1]; use clamp_unit first")
        object.__setattr__(self, "data", _frozen(np.round(arr * _LATTICE) / _LATTICE))

    @classmethod
    def from_samples(cls, width: int, height: int, samples) -> "Raster":
        samples = np.asarray(samples, dtype=np.float64).ravel()
        if width < 1 or height < 1:
            raise ShapeError("width and height must be >= 1")
        if samples.size != width * height:
            raise ShapeError(f"expected {width * height} samples, got {samples.size}")
        return cls(samples.reshape(height, width))

    @classmethod
    def constant(cls, width: int, height: int, value: float) -> "Raster":
        return cls(np.full((height, width), float(value)))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def samples(self) -> np.ndarray:
        """Row-major flat view of the samples."""
        return self.data.ravel()

    def __eq__(self, other):
        if not isinstance(other, Raster):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"Raster({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class Heightmap:
    """Elevation field, shape ``(height, width)``; ``cell_size`` is the
    horizontal spacing between samples in elevation units."""

    elevations: np.ndarray
    cell_size: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.elevations, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"heightmap must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NumericError("elevations must be finite")
        if not (math.isfinite(self.cell_size) and self.cell_size > 0):
            raise InvalidParameter("cell_size must be positive")
        object.__setattr__(self, "elevations", _frozen(arr))
        object.__setattr__(self, "cell_size", float(self.cell_size))

    @property
    def width(self) -> int:
        return self.elevations.shape[1]

    @property
    def height(self) -> int:
        return self.elevations.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.elevations.shape

    def __eq__(self, other):
        if not isinstance(other, Heightmap):
            return NotImplemented
        return (
            self.cell_size == other.cell_size
            and self.shape == other.shape
            and bool(np.array_equal(self.elevations, other.elevations))
        )

    def __repr__(self):
        return f"Heightmap({self.width}x{self.height}, cell_size={self.cell_size})"


def clamp_unit(values) -> Raster:
    """Clamp an arbitrary finite 2-D array (or Raster) into a valid Raster."""
    arr = values.data if isinstance(values, Raster) else np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NumericError("cannot clamp non-finite samples")
    return Raster(np.clip(arr, 0.0, 1.0))


# -- PGM -------------------------------------------------------------------


class _HeaderReader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def skip_space_and_comments(self):
        buf = self.buf
        while self.pos < len(buf):
            c = buf[self.pos : self.pos + 1]
            if c in _WHITESPACE:
                self.pos += 1
            elif c == b"#":
                while self.pos < len(buf) and buf[self.pos : self.pos + 1] not in (b"\n", b"\r"):
                    self.pos += 1
            else:
                break

    def token(self, what: str) -> tuple[bytes, int]:
        self.skip_space_and_comments()
        start = self.pos
        buf = self.buf
        while self.pos < len(buf):
            c = buf[self.pos : self.pos + 1]
            if c in _WHITESPACE or c == b"#":
                break
            self.pos += 1
        if self.pos == start:
            raise ParseError(f"missing {what}", start)
        return buf[start : self.pos], start

    def integer(self, what: str) -> int:
        tok, start = self.token(what)
        if not tok.isdigit():
            raise ParseError(f"{what} is not a decimal integer: {tok[:16]!r}", start)
        return int(tok)


def load_pgm(data: bytes) -> Raster:
    """Decode a binary (P5) or ASCII (P2) PGM with maxval 255 or 65535.

    Header faults raise :class:`ParseError` carrying the byte offset, an
    unsupported maxval raises :class:`UnsupportedFormat` and a short payload
    raises :class:`TruncatedData`.
    """
    data = bytes(data)
    if len(data) < 2 or data[:2] not in (b"P2", b"P5"):
        raise ParseError(f"bad magic number {data[:2]!r}, expected P2 or P5", 0)
    binary = data[:2] == b"P5"
    rd = _HeaderReader(data)
    rd.pos = 2
    if rd.pos < len(data) and data[2:3] not in _WHITESPACE and data[2:3] != b"#":
        raise ParseError("magic number must be followed by whitespace", 2)
    width = rd.integer("width")
    height = rd.integer("height")
    if width < 1 or height < 1:
        raise ParseError(f"image dimensions must be positive, got {width}x{height}", rd.pos)
    maxval_pos = rd.pos
    maxval = rd.integer("maxval")
    if maxval not in SUPPORTED_MAXVALS:
        raise UnsupportedFormat(
            f"maxval {maxval} unsupported (byte offset {maxval_pos}); expected 255 or 65535"
        )
    count = width * height

    if binary:
        if rd.pos >= len(data) or data[rd.pos : rd.pos + 1] not in _WHITESPACE:
            raise TruncatedData("missing whitespace before binary payload", rd.pos)
        start = rd.pos + 1
        itemsize = 1 if maxval == 255 else 2
        need = count * itemsize
        payload = data[start : start + need]
        if len(payload) < need:
            raise TruncatedData(f"payload has {len(payload)} of {need} bytes", start + len(payload))
        dtype = np.uint8 if itemsize == 1 else np.dtype(">u2")
        values = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    else:
        values = np.empty(count, dtype=np.float64)
        for i in range(count):
            rd.skip_space_and_comments()
            if rd.pos >= len(data):
                raise TruncatedData(f"ASCII payload has {i} of {count} samples", rd.pos)
            v = rd.integer("sample")
            if v > maxval:
                raise ParseError(f"sample {v} exceeds maxval {maxval}", rd.pos)
            values[i] = v
    return Raster((values / maxval).reshape(height, width))


def quantize(samples: np.ndarray, maxval: int) -> np.ndarray:
    """Round ``samples * maxval`` half away from zero (samples are non-negative)."""
    return np.floor(np.asarray(samples, dtype=np.float64) * maxval + 0.5).astype(np.int64)


def save_pgm(img: Raster, maxval: int = 255) -> bytes:
    """Encode as binary P5; 16-bit payloads are big-endian."""
    if maxval not in SUPPORTED_MAXVALS:
        raise UnsupportedFormat(f"maxval {maxval} unsupported; expected 255 or 65535")
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    q = quantize(img.data, maxval)
    dtype = np.uint8 if maxval == 255 else np.dtype(">u2")
    return header + q.astype(dtype).tobytes()


def save_pgm_ascii(img: Raster, maxval: int = 255) -> bytes:
    if maxval not in SUPPORTED_MAXVALS:
        raise UnsupportedFormat(f"maxval {maxval} unsupported; expected 255 or 65535")
    q = quantize(img.data, maxval)
    rows = "\n".join(" ".join(str(v) for v in row) for row in q)
    return f"P2\n{img.width} {img.height}\n{maxval}\n{rows}\n".encode("ascii")


def read_pgm(path) -> Raster:
    return load_pgm(Path(path).read_bytes())


def write_pgm(img: Raster, path, maxval: int = 255) -> None:
    Path(path).write_bytes(save_pgm(img, maxval))


# -- .hmap (16-bit PGM + text sidecar) ----------------------------------------
#
# elevation = min_elevation + (v / 65535) * (max_elevation - min_elevation)
# where v is the stored 16-bit sample; the sidecar lives at "<path>.meta".

HMAP_MAXVAL = 65535


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta")


def encode_heightmap(h: Heightmap, extra=()) -> tuple[bytes, str]:
    """16-bit PGM bytes and sidecar text; ``extra`` is a sequence of (key, value) lines."""
    lo = float(h.elevations.min())
    hi = float(h.elevations.max())
    span = hi - lo
    norm = (h.elevations - lo) / span if span > 0 else np.zeros(h.shape)
    pgm = save_pgm(Raster(np.clip(norm, 0.0, 1.0)), HMAP_MAXVAL)
    lines = [
        "# elevation = min_elevation + (v / 65535) * (max_elevation - min_elevation)",
        f"min_elevation = {lo!r}",
        f"max_elevation = {hi!r}",
        f"cell_size = {h.cell_size!r}",
    ]
    for key, value in extra:
        lines.append(f"{key} = {value}")
    return pgm, "\n".join(lines) + "\n"


def parse_sidecar(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"sidecar line {lineno} is not 'key = value'", 0)
        key = key.strip()
        # repeated keys (e.g. feature) accumulate, newline separated
        out[key] = out[key] + "\n" + value.strip() if key in out else value.strip()
    return out


def decode_heightmap(pgm: bytes, sidecar: str) -> tuple[Heightmap, dict[str, str]]:
    meta = parse_sidecar(sidecar)
    try:
        lo = float(meta["min_elevation"])
        hi = float(meta["max_elevation"])
        cell = float(meta.get("cell_size", "1.0"))
    except KeyError as exc:
        raise ParseError(f"sidecar missing key {exc.args[0]!r}", 0) from None
    except ValueError as exc:
        raise ParseError(f"sidecar value is not a number: {exc}", 0) from None
    img = load_pgm(pgm)
    return Heightmap(lo + img.data * (hi - lo), cell), meta


def write_heightmap(h: Heightmap, path, extra=()) -> None:
    pgm, text = encode_heightmap(h, extra)
    Path(path).write_bytes(pgm)
    sidecar_path(path).write_text(text)


def read_heightmap(path) -> tuple[Heightmap, dict[str, str]]:
    return decode_heightmap(Path(path).read_bytes(), sidecar_path(path).read_text())
