"""Synthetic speckle generation, log-domain transforms, and blind noise estimation.

Random fields come from numpy's counter-based Philox generator, so a
given (model, sigma, seed) triple produces bit-identical noise on every
run and platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, ParameterError
from .image import GrayImage

SPECKLE_MODELS = ("multiplicative_gaussian", "rayleigh")


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < 2**64:
        raise ParameterError(f"seed must fit in 64 unsigned bits, got {seed}")
    return int(seed)


def _check_sigma(sigma) -> float:
    if not isinstance(sigma, (int, float)) or not math.isfinite(sigma) or sigma < 0:
        raise ParameterError(f"sigma must be a non-negative finite real, got {sigma!r}")
    return float(sigma)


@dataclass(frozen=True)
class SpeckleParams:
    """Configuration of one synthetic speckle draw."""

    model: str
    sigma: float
    seed: int

    def __post_init__(self):
        if self.model not in SPECKLE_MODELS:
            raise ParameterError(
                f"model must be one of {SPECKLE_MODELS}, got {self.model!r}"
            )
        object.__setattr__(self, "sigma", _check_sigma(self.sigma))
        object.__setattr__(self, "seed", _check_seed(self.seed))


@dataclass(frozen=True)
class NoiseEstimate:
    """Blind noise level estimate (standard deviation in pixel units)."""

    sigma_n: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma_n) and self.sigma_n >= 0):
            raise ParameterError(f"sigma_n must be finite and >= 0, got {self.sigma_n!r}")


def add_multiplicative_speckle(img: GrayImage, params: SpeckleParams) -> GrayImage:
    """Corrupt an image with multiplicative speckle.

    model "multiplicative_gaussian": v = u * (1 + sigma * xi) with xi
    standard normal. model "rayleigh": v = u * r / E[r] with r drawn
    Rayleigh(scale=sigma); the division makes the noise field unit-mean
    so image brightness is preserved in expectation. sigma = 0 returns
    the input unchanged for both models.
    """
    u = img.pixels
    if np.any(u < 0):
        raise DomainError("multiplicative speckle requires non-negative pixels")
    if params.sigma == 0.0:
        return img
    rng = _generator(params.seed)
    if params.model == "multiplicative_gaussian":
        xi = rng.standard_normal(u.shape)
        out = u * (1.0 + params.sigma * xi)
    else:
        r = rng.rayleigh(scale=params.sigma, size=u.shape)
        out = u * (r / (params.sigma * math.sqrt(math.pi / 2.0)))
    return GrayImage(out)


def add_gaussian_noise(img: GrayImage, sigma: float, seed: int) -> GrayImage:
    """Add i.i.d. zero-mean Gaussian noise of standard deviation sigma."""
    sigma = _check_sigma(sigma)
    seed = _check_seed(seed)
    if sigma == 0.0:
        return img
    eta = _generator(seed).standard_normal(img.pixels.shape)
    return GrayImage(img.pixels + sigma * eta)


def log_compress(img: GrayImage, epsilon: float = 1.0) -> GrayImage:
    """Map pixels to ln(v + epsilon), turning multiplicative noise additive."""
    if not (isinstance(epsilon, (int, float)) and math.isfinite(epsilon) and epsilon > 0):
        raise ParameterError(f"epsilon must be a positive finite real, got {epsilon!r}")
    v = img.pixels
    if np.any(v < 0):
        idx = np.argwhere(v < 0)[0]
        raise DomainError(
            f"log compression requires non-negative pixels; pixel ({idx[0]}, {idx[1]}) is negative"
        )
    return GrayImage(np.log(v + float(epsilon)))


def exp_expand(img: GrayImage, epsilon: float = 1.0) -> GrayImage:
    """Inverse of `log_compress`: exp(v) - epsilon."""
    if not (isinstance(epsilon, (int, float)) and math.isfinite(epsilon) and epsilon > 0):
        raise ParameterError(f"epsilon must be a positive finite real, got {epsilon!r}")
    with np.errstate(over="ignore"):
        out = np.exp(img.pixels) - float(epsilon)
    bad = ~np.isfinite(out)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise NumericError(f"exponential expansion overflowed at pixel ({idx[0]}, {idx[1]})")
    return GrayImage(out)


# Second-difference mask whose response to constant and linear ramps is
# exactly zero; its L2 norm is 6, hence the normalization below.
_RESIDUAL_TAPS = ((1.0, -2.0, 1.0), (-2.0, 4.0, -2.0), (1.0, -2.0, 1.0))


def estimate_noise_sigma(img: GrayImage) -> NoiseEstimate:
    """Blind noise standard deviation via the median absolute residual.

    Convolves with a 3x3 second-difference mask (interior pixels only)
    and rescales the median absolute response: for pure Gaussian noise
    the response is N(0, 36 sigma^2) and median(|N(0, s)|) = 0.6745 s.
    The estimate is scale-equivariant and exactly zero on constant
    images.
    """
    if img.height < 3 or img.width < 3:
        raise ParameterError(
            f"noise estimation needs at least a 3x3 image, got {img.height}x{img.width}"
        )
    a = img.pixels
    res = np.zeros((img.height - 2, img.width - 2))
    for dy, row in enumerate(_RESIDUAL_TAPS):
        for dx, tap in enumerate(row):
            res += tap * a[dy : dy + res.shape[0], dx : dx + res.shape[1]]
    sigma = float(np.median(np.abs(res)) / (0.6745 * 6.0))
    return NoiseEstimate(sigma_n=sigma)
