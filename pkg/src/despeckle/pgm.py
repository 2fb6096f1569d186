"""Reading and writing portable graymap (PGM) files.

Reads both the binary (P5) and ASCII (P2) variants with maxval up to
65535; two-byte binary samples are big-endian as the format requires.
Writing always produces binary P5. Parse failures raise
`PgmParseError` with the byte offset where decoding stopped.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParameterError, PgmParseError
from .image import GrayImage

_WHITESPACE = b" \t\r\n\x0b\x0c"


def _skip_separators(data: bytes, pos: int) -> int:
    # Whitespace and '#' comments (to end of line) may separate header tokens.
    n = len(data)
    while pos < n:
        b = data[pos : pos + 1]
        if b in (b"#",):
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif b in _WHITESPACE:
            pos += 1
        else:
            break
    return pos


def _read_int(data: bytes, pos: int, what: str) -> tuple[int, int, int]:
    """Parse one ASCII unsigned integer token. Returns (value, token_start, next_pos)."""
    pos = _skip_separators(data, pos)
    start = pos
    while pos < len(data) and data[pos : pos + 1].isdigit():
        pos += 1
    if pos == start:
        raise PgmParseError(f"malformed header: expected integer {what}", start)
    return int(data[start:pos]), start, pos


def load_pgm(path) -> GrayImage:
    """Load a P5 or P2 graymap as a float64 image.

    Sample values are taken verbatim (no rescaling by maxval) and raster
    order is preserved.
    """
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise PgmParseError(f"unsupported magic number {magic!r}, expected P5 or P2", 0)
    binary = magic == b"P5"

    width, wstart, pos = _read_int(data, 2, "width")
    height, hstart, pos = _read_int(data, pos, "height")
    maxval, mstart, pos = _read_int(data, pos, "maxval")
    if width < 1:
        raise PgmParseError(f"width must be >= 1, got {width}", wstart)
    if height < 1:
        raise PgmParseError(f"height must be >= 1, got {height}", hstart)
    if not 1 <= maxval <= 65535:
        raise PgmParseError(f"maxval must be in [1, 65535], got {maxval}", mstart)

    count = width * height
    if binary:
        if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
            raise PgmParseError("malformed header: expected single whitespace after maxval", pos)
        pos += 1
        per_sample = 1 if maxval <= 255 else 2
        needed = count * per_sample
        if len(data) - pos < needed:
            raise PgmParseError(
                f"truncated raster: need {needed} bytes from offset {pos}, file ends early",
                len(data),
            )
        raw = data[pos : pos + needed]
        dtype = np.dtype(">u2") if per_sample == 2 else np.dtype("u1")
        samples = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    else:
        samples = np.empty(count, dtype=np.float64)
        for k in range(count):
            pos = _skip_separators(data, pos)
            if pos >= len(data):
                raise PgmParseError(
                    f"truncated raster: expected {count} samples, got {k}", len(data)
                )
            value, start, pos = _read_int(data, pos, f"sample {k}")
            samples[k] = value
    return GrayImage(samples.reshape(height, width))


def save_pgm(img: GrayImage, path, maxval: int = 255) -> None:
    """Write a binary P5 graymap.

    Pixels are rounded half-away-from-zero and then clamped to
    [0, maxval]. Two-byte samples (maxval 65535) are written big-endian.
    Loading the file back reproduces the rounded, clamped image exactly.
    """
    if maxval not in (255, 65535):
        raise ParameterError(f"maxval must be 255 or 65535, got {maxval}")
    arr = img.pixels
    rounded = np.copysign(np.floor(np.abs(arr) + 0.5), arr)
    clamped = np.clip(rounded, 0.0, float(maxval))
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    dtype = np.dtype("u1") if maxval == 255 else np.dtype(">u2")
    Path(path).write_bytes(header + clamped.astype(dtype).tobytes())
