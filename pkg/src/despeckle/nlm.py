"""Non-local means denoising, classic and robust.

Both filters restore a pixel as a weighted average of the pixels in a
square search window around it. The weight of a candidate j combines
the kernel-weighted squared distance between the patch around i and the
patch around j; the robust variant multiplies in a second factor,
exp(-|v(j) - v_hat(j)| / h2), where v_hat is a Gaussian prefilter of
the input. That factor measures how far each candidate sits from its
own smoothed neighborhood, so heavily corrupted pixels contribute
little to the average even when their patch happens to look similar.

Boundary handling treats the image as extended by mirror reflection:
window positions and patch reads past the border resolve against the
reflected surface (the padded-array convention). Weights are
accumulated over the window in a fixed row-major offset order, and the
row-band parallel path slices a shared read-only padded input, so
output bits do not depend on the thread count.
"""

from __future__ import annotations

import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .image import (
    GrayImage,
    blur_array,
    correlate1d_valid,
    gaussian_axis_weights,
    mirror_index,
    mirror_pad,
)

SELF_WEIGHT_MODES = ("natural", "max_neighbor")


@dataclass(frozen=True)
class PatchKernel:
    """Gaussian weighting of patch positions.

    ``weights`` is the full (2 radius + 1)^2 grid, proportional to
    exp(-(dx^2 + dy^2) / (2 sigma_s^2)) and normalized to sum 1. The
    unit sum is what makes patch distances commensurable across kernel
    sizes (and makes the additive-noise distance offset come out as
    exactly twice the noise variance).
    """

    radius: int
    sigma_s: float
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        side = 2 * self.radius + 1
        if w.shape != (side, side):
            raise ParameterError(f"kernel weights must be {side}x{side}, got {w.shape}")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ParameterError("kernel weights must sum to 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def make_patch_kernel(radius: int, sigma_s: float) -> PatchKernel:
    """Build the normalized Gaussian patch kernel of the given radius."""
    if not isinstance(radius, (int, np.integer)) or isinstance(radius, bool) or radius < 0:
        raise ParameterError(f"radius must be a non-negative integer, got {radius!r}")
    taps = gaussian_axis_weights(sigma_s, int(radius))
    weights = np.outer(taps, taps)
    weights /= weights.sum()
    return PatchKernel(radius=int(radius), sigma_s=float(sigma_s), weights=weights)


def _check_positive_int(value, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ParameterError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def _check_decay(value, name: str) -> float:
    # positive; +inf allowed (it disables the corresponding penalty)
    if not isinstance(value, (int, float)) or math.isnan(value) or value <= 0:
        raise ParameterError(f"{name} must be positive, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class NlmParams:
    """Classic non-local means configuration.

    h is the weight decay scale (the squared patch distance is divided
    by h^2). Defaults follow the usual despeckling setup: 21x21 search
    window, 7x7 patches, spatial sigma of half the patch radius.
    search_radius and patch_radius are independent; neither needs to
    dominate the other.
    """

    h: float
    search_radius: int = 10
    patch_radius: int = 3
    sigma_s: float | None = None
    self_weight: str = "natural"

    def __post_init__(self):
        object.__setattr__(self, "h", _check_decay(self.h, "h"))
        object.__setattr__(self, "search_radius", _check_positive_int(self.search_radius, "search_radius"))
        object.__setattr__(self, "patch_radius", _check_positive_int(self.patch_radius, "patch_radius"))
        sigma_s = self.sigma_s
        if sigma_s is None:
            sigma_s = self.patch_radius / 2.0
        if not (isinstance(sigma_s, (int, float)) and math.isfinite(sigma_s) and sigma_s > 0):
            raise ParameterError(f"sigma_s must be a positive finite real, got {self.sigma_s!r}")
        object.__setattr__(self, "sigma_s", float(sigma_s))
        if self.self_weight not in SELF_WEIGHT_MODES:
            raise ParameterError(
                f"self_weight must be one of {SELF_WEIGHT_MODES}, got {self.self_weight!r}"
            )


@dataclass(frozen=True)
class RobustNlmParams:
    """Robust non-local means configuration.

    ``base.h`` plays the role of the patch-similarity decay h1; ``h2``
    scales the per-candidate corruption penalty |v(j) - v_hat(j)| / h2
    (note: not squared). h2 = +inf turns the penalty off, which reduces
    the filter to classic non-local means with h = h1 exactly.
    """

    base: NlmParams
    h2: float
    prefilter_sigma: float = 1.5

    def __post_init__(self):
        if not isinstance(self.base, NlmParams):
            raise ParameterError(f"base must be NlmParams, got {type(self.base).__name__}")
        object.__setattr__(self, "h2", _check_decay(self.h2, "h2"))
        ps = self.prefilter_sigma
        if not (isinstance(ps, (int, float)) and math.isfinite(ps) and ps > 0):
            raise ParameterError(f"prefilter_sigma must be a positive finite real, got {ps!r}")
        object.__setattr__(self, "prefilter_sigma", float(ps))


@dataclass(frozen=True)
class WeightField:
    """The normalized weights one filtered pixel was averaged with.

    ``entries`` holds one ((dy, dx), weight) pair per search-window
    offset, in the same row-major order the filters accumulate in;
    ``normalizer`` is the pre-normalization weight sum C(i).
    """

    center: tuple[int, int]
    entries: tuple[tuple[tuple[int, int], float], ...]
    normalizer: float

    def __post_init__(self):
        if not (math.isfinite(self.normalizer) and self.normalizer > 0):
            raise ParameterError(f"normalizer must be finite and > 0, got {self.normalizer!r}")
        total = 0.0
        for _, w in self.entries:
            if not (-1e-12 <= w <= 1.0 + 1e-9):
                raise ParameterError(f"normalized weight out of [0, 1]: {w!r}")
            total += w
        if abs(total - 1.0) > 1e-9:
            raise ParameterError(f"normalized weights must sum to 1, got {total!r}")


def patch_distance(img: GrayImage, i: tuple[int, int], j: tuple[int, int],
                   kernel: PatchKernel) -> float:
    """Kernel-weighted squared distance between the patches around i and j.

    Patch positions outside the image are read through mirror
    reflection. Both centers must be in bounds.
    """
    h, w = img.height, img.width
    for name, (r, c) in (("i", i), ("j", j)):
        if not (0 <= r < h and 0 <= c < w):
            raise ParameterError(f"{name} = {(r, c)} is outside a {h}x{w} image")
    rad = kernel.radius
    rows_i = [mirror_index(i[0] + d, h) for d in range(-rad, rad + 1)]
    cols_i = [mirror_index(i[1] + d, w) for d in range(-rad, rad + 1)]
    rows_j = [mirror_index(j[0] + d, h) for d in range(-rad, rad + 1)]
    cols_j = [mirror_index(j[1] + d, w) for d in range(-rad, rad + 1)]
    a = img.pixels[np.ix_(rows_i, cols_i)]
    b = img.pixels[np.ix_(rows_j, cols_j)]
    return float(np.sum(kernel.weights * (a - b) ** 2))


def _resolve_threads(threads, height: int) -> int:
    if not isinstance(threads, (int, np.integer)) or isinstance(threads, bool) or threads < 0:
        raise ParameterError(f"threads must be a non-negative integer (0 = auto), got {threads!r}")
    count = int(threads) if threads > 0 else (os.cpu_count() or 1)
    return max(1, min(count, height))


def _band_bounds(height: int, workers: int) -> list[tuple[int, int]]:
    size, extra = divmod(height, workers)
    bounds, start = [], 0
    for k in range(workers):
        stop = start + size + (1 if k < extra else 0)
        if stop > start:
            bounds.append((start, stop))
        start = stop
    return bounds


def _filter_engine(v: np.ndarray, search_radius: int, patch_radius: int,
                   taps: np.ndarray, h: float, corr: np.ndarray | None,
                   self_weight: str, threads: int) -> np.ndarray:
    big_r, r = search_radius, patch_radius
    height, width = v.shape
    pad = big_r + r
    padded = mirror_pad(v, pad)
    corr_padded = mirror_pad(corr, big_r) if corr is not None else None
    # Guard h*h against underflow to 0: -1/0 would be -inf and the self
    # offset's exact-zero distance would produce 0 * -inf = NaN.
    inv_h = -1.0 / max(h * h, sys.float_info.min)
    skip_self = self_weight == "max_neighbor"

    def run_band(y0: int, y1: int) -> np.ndarray:
        n = y1 - y0
        band = padded[y0 : y1 + 2 * pad]
        base = band[big_r : big_r + n + 2 * r, big_r : big_r + width + 2 * r]
        acc = np.zeros((n, width))
        norm = np.zeros((n, width))
        wmax = np.zeros((n, width)) if skip_self else None
        for dy in range(-big_r, big_r + 1):
            for dx in range(-big_r, big_r + 1):
                if skip_self and dy == 0 and dx == 0:
                    continue
                shifted = band[big_r + dy : big_r + dy + n + 2 * r,
                               big_r + dx : big_r + dx + width + 2 * r]
                diff = base - shifted
                diff *= diff
                dist = correlate1d_valid(correlate1d_valid(diff, taps, axis=0), taps, axis=1)
                # For tiny h the product saturates to -inf and exp flushes it
                # to the intended weight 0, so the overflow is not an error.
                with np.errstate(over="ignore"):
                    dist *= inv_h
                w = np.exp(dist, out=dist)
                if corr_padded is not None:
                    w *= corr_padded[y0 + big_r + dy : y0 + big_r + dy + n,
                                     big_r + dx : big_r + dx + width]
                values = band[pad + dy : pad + dy + n, pad + dx : pad + dx + width]
                acc += w * values
                norm += w
                if wmax is not None:
                    np.maximum(wmax, w, out=wmax)
        center = v[y0:y1]
        if wmax is not None:
            acc += wmax * center
            norm += wmax
        # All-zero weight sums (possible only through exp underflow at
        # extreme decay settings) fall back to the identity.
        zero = norm == 0.0
        out = acc / np.where(zero, 1.0, norm)
        if zero.any():
            out = np.where(zero, center, out)
        return out

    workers = _resolve_threads(threads, height)
    bounds = _band_bounds(height, workers)
    if len(bounds) == 1:
        return run_band(0, height)
    out = np.empty_like(v)
    with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
        futures = [(a, b, pool.submit(run_band, a, b)) for a, b in bounds]
        for a, b, fut in futures:
            out[a:b] = fut.result()
    return out


def nlm_denoise(img: GrayImage, params: NlmParams, threads: int = 1) -> GrayImage:
    """Classic non-local means.

    Each output pixel is the weighted mean of the search-window pixels,
    with weights exp(-d(i, j) / h^2) for the kernel-weighted squared
    patch distance d. Output size equals input size.
    """
    taps = gaussian_axis_weights(params.sigma_s, params.patch_radius)
    out = _filter_engine(img.pixels, params.search_radius, params.patch_radius,
                         taps, params.h, None, params.self_weight, threads)
    return GrayImage(out)


def robust_nlm_denoise(img: GrayImage, params: RobustNlmParams, threads: int = 1) -> GrayImage:
    """Non-local means with a per-candidate corruption penalty.

    Weights are exp(-d(i, j) / h1^2) * exp(-|v(j) - v_hat(j)| / h2),
    where v_hat is the input blurred with ``prefilter_sigma``. The
    second factor discounts candidates that deviate strongly from their
    own smoothed neighborhood, which is what makes the average robust
    to speckle outliers.
    """
    v = img.pixels
    vhat = blur_array(v, params.prefilter_sigma)
    with np.errstate(under="ignore"):
        corr = np.exp(-np.abs(v - vhat) / params.h2)
    taps = gaussian_axis_weights(params.base.sigma_s, params.base.patch_radius)
    out = _filter_engine(v, params.base.search_radius, params.base.patch_radius,
                         taps, params.base.h, corr, params.base.self_weight, threads)
    return GrayImage(out)


def _virtual_patch_distance(v: np.ndarray, center: tuple[int, int],
                            other: tuple[int, int], weights: np.ndarray, rad: int) -> float:
    """Patch distance where ``other`` may be a virtual (out-of-bounds)
    coordinate on the mirror-extended surface."""
    h, w = v.shape
    rows_i = [mirror_index(center[0] + d, h) for d in range(-rad, rad + 1)]
    cols_i = [mirror_index(center[1] + d, w) for d in range(-rad, rad + 1)]
    rows_j = [mirror_index(other[0] + d, h) for d in range(-rad, rad + 1)]
    cols_j = [mirror_index(other[1] + d, w) for d in range(-rad, rad + 1)]
    a = v[np.ix_(rows_i, cols_i)]
    b = v[np.ix_(rows_j, cols_j)]
    return float(np.sum(weights * (a - b) ** 2))


def compute_weight_field(img: GrayImage, center: tuple[int, int],
                         params: RobustNlmParams) -> WeightField:
    """Normalized robust weights at one pixel, for inspection and testing.

    Evaluates the same weight definition `robust_nlm_denoise` applies
    (including the self-weight rule), normalizes by the window sum C(i),
    and returns the per-offset breakdown in accumulation order.
    """
    h, w = img.height, img.width
    row, col = center
    if not (0 <= row < h and 0 <= col < w):
        raise ParameterError(f"center {center} is outside a {h}x{w} image")
    v = img.pixels
    vhat = blur_array(v, params.prefilter_sigma)
    kernel = make_patch_kernel(params.base.patch_radius, params.base.sigma_s)
    big_r = params.base.search_radius
    h1, h2 = params.base.h, params.h2

    offsets: list[tuple[int, int]] = []
    raw: list[float] = []
    self_pos = None
    hh1 = max(h1 * h1, sys.float_info.min)  # mirror the engine's underflow guard
    with np.errstate(under="ignore"):
        for dy in range(-big_r, big_r + 1):
            for dx in range(-big_r, big_r + 1):
                jr = mirror_index(row + dy, h)
                jc = mirror_index(col + dx, w)
                dist = _virtual_patch_distance(v, (row, col), (row + dy, col + dx),
                                               kernel.weights, kernel.radius)
                weight = math.exp(-dist / hh1) * math.exp(-abs(v[jr, jc] - vhat[jr, jc]) / h2)
                if dy == 0 and dx == 0:
                    self_pos = len(raw)
                offsets.append((dy, dx))
                raw.append(weight)
    if params.base.self_weight == "max_neighbor":
        others = [x for k, x in enumerate(raw) if k != self_pos]
        raw[self_pos] = max(others) if others else 0.0
    normalizer = math.fsum(raw)
    if normalizer <= 0.0:
        raise ParameterError(
            f"all weights underflowed to zero at pixel {center}; decay scales are too small"
        )
    entries = tuple((off, x / normalizer) for off, x in zip(offsets, raw))
    return WeightField(center=(row, col), entries=entries, normalizer=normalizer)
