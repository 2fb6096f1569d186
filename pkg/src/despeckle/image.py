"""Grayscale image container, mirror boundary handling, and Gaussian smoothing.

Every filter in this package extends images past their borders by
half-sample mirror reflection: index -1 maps back to 0, index ``width``
maps back to ``width - 1``. The reflection is implemented once here
(`mirror_index`) and everything else (padding, blurring, patch reads)
is built on top of it, so all modules agree about boundary values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


class BoundaryPolicy(enum.Enum):
    """Border extension mode. Mirror reflection is the single supported
    mode; the enum exists so future modes do not change call signatures."""

    MIRROR = "mirror"


@dataclass(frozen=True)
class GrayImage:
    """Dense single-channel image with float64 pixels.

    Pixels are stored row-major in a read-only 2-D array. Values are
    nominally in [0, 255] but are not clamped here; clamping and
    quantization happen only on PGM export. Construction rejects empty
    shapes and non-finite values, so any `GrayImage` handed around the
    package is known to be finite.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2:
            raise ParameterError(f"image must be 2-D, got {arr.ndim} dimension(s)")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ParameterError(f"image must be at least 1x1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("image contains non-finite pixels")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        return cls(np.asarray(arr, dtype=np.float64))

    def to_array(self) -> np.ndarray:
        """Writable copy of the pixel array."""
        return self.pixels.copy()


def mirror_index(i: int, n: int) -> int:
    """Fold integer index ``i`` into ``[0, n)`` by half-sample mirror reflection.

    The reflected sequence for n = 3 is ... 1 0 | 0 1 2 | 2 1 0 0 1 ...
    so -1 -> 0 and n -> n - 1. Works for any integer, not just indices
    within one reflection period.
    """
    if n < 1:
        raise ParameterError(f"axis length must be >= 1, got {n}")
    if n == 1:
        return 0
    period = 2 * n
    i %= period
    return i if i < n else period - 1 - i


def sample_mirrored(img: GrayImage, row: int, col: int) -> float:
    """Read a pixel with mirror extension for out-of-bounds coordinates."""
    return float(img.pixels[mirror_index(row, img.height), mirror_index(col, img.width)])


def mirror_indices(n: int, pad: int) -> np.ndarray:
    """Index vector realizing a mirror pad of width ``pad`` on an axis of length ``n``."""
    if pad < 0:
        raise ParameterError(f"pad must be >= 0, got {pad}")
    return np.array([mirror_index(i - pad, n) for i in range(n + 2 * pad)], dtype=np.intp)


def mirror_pad(arr: np.ndarray, pad: int) -> np.ndarray:
    """Pad a 2-D array on all sides by mirror reflection.

    Built directly on `mirror_index`, so padded reads agree with
    `sample_mirrored` for arbitrarily large pads.
    """
    rows = mirror_indices(arr.shape[0], pad)
    cols = mirror_indices(arr.shape[1], pad)
    return arr[np.ix_(rows, cols)]


def gaussian_axis_weights(sigma: float, radius: int | None = None) -> np.ndarray:
    """1-D Gaussian tap weights, normalized to sum 1.

    When ``radius`` is not given the kernel is truncated at
    ceil(3 * sigma). The 2-D kernels used by the blur, the similarity
    metric window, and the patch kernel are all outer products of these
    taps, which equals normalizing exp(-(dx^2 + dy^2) / (2 sigma^2))
    over the full square support.
    """
    if not (isinstance(sigma, (int, float)) and math.isfinite(sigma) and sigma > 0):
        raise ParameterError(f"sigma must be a positive finite real, got {sigma!r}")
    if radius is None:
        radius = math.ceil(3.0 * float(sigma))
    elif radius < 0:
        raise ParameterError(f"radius must be >= 0, got {radius}")
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(k * k) / (2.0 * float(sigma) ** 2))
    return w / w.sum()


def correlate1d_valid(arr: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    """Valid-mode 1-D correlation of a 2-D array along ``axis``.

    Accumulates tap by tap in a fixed order, so results are
    bit-identical regardless of how the caller slices the input into
    bands. All taps used in this package are symmetric, making
    correlation and convolution interchangeable.
    """
    m = taps.size
    if axis == 0:
        n = arr.shape[0] - m + 1
        out = taps[0] * arr[0:n]
        for t in range(1, m):
            out += taps[t] * arr[t : t + n]
    else:
        n = arr.shape[1] - m + 1
        out = taps[0] * arr[:, 0:n]
        for t in range(1, m):
            out += taps[t] * arr[:, t : t + n]
    return out


def blur_array(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing of a raw array with mirror boundary."""
    taps = gaussian_axis_weights(sigma)
    r = taps.size // 2
    padded = mirror_pad(arr, r)
    tmp = correlate1d_valid(padded, taps, axis=0)
    return correlate1d_valid(tmp, taps, axis=1)


def gaussian_blur(img: GrayImage, sigma: float,
                  boundary: BoundaryPolicy = BoundaryPolicy.MIRROR) -> GrayImage:
    """Gaussian blur with kernel truncated at ceil(3 * sigma).

    The truncated kernel is renormalized to sum 1, so flat regions keep
    their level and the global mean is preserved up to rounding. Output
    size equals input size; borders use mirror extension.
    """
    if boundary is not BoundaryPolicy.MIRROR:
        raise ParameterError(f"unsupported boundary policy: {boundary!r}")
    return GrayImage(blur_array(img.pixels, sigma))
