"""Point and convolution filters on :class:`Raster` values.

Every neighbourhood operation uses clamp-to-edge (replicate) borders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ImageTooSmall, InvalidParameter, ShapeError
from .raster import Raster, clamp_unit

SOBEL_MAX = 4.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class Kernel1D:
    """Symmetric, unit-sum 1-D kernel with ``2 * radius + 1`` taps."""

    radius: int
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != 2 * self.radius + 1:
            raise InvalidParameter("kernel must have 2*radius+1 taps")

    @property
    def taps(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class LevelsParams:
    black: float = 0.0
    white: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.black < 1.0):
            raise InvalidParameter(f"black must lie in [0, 1), got {self.black}")
        if not (self.black < self.white <= 1.0):
            raise InvalidParameter(f"white must lie in (black, 1], got {self.white}")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise InvalidParameter(f"gamma must be positive, got {self.gamma}")


def gaussian_kernel(radius_px: float) -> Kernel1D:
    """Sampled Gaussian with sigma = radius/3, truncated at +-radius and renormalized.

    ``radius_px`` is normally an integer pixel count; a real radius is accepted
    (sigma = radius/3, taps at every integer offset within the radius) so that
    sigma-matched compositions can be expressed exactly.
    """
    if not (math.isfinite(radius_px) and radius_px >= 1):
        raise InvalidParameter(f"blur radius must be >= 1 pixel, got {radius_px}")
    sigma = radius_px / 3.0
    half = int(math.floor(radius_px))
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g /= g.sum()
    return Kernel1D(half, tuple(float(w) for w in g))


def _convolve_axis(arr: np.ndarray, kernel: Kernel1D, axis: int) -> np.ndarray:
    r = kernel.radius
    n = arr.shape[axis]
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    p = np.pad(arr, pad, mode="edge")
    w = kernel.weights

    def window(offset):
        sl = [slice(None), slice(None)]
        sl[axis] = slice(r + offset, r + offset + n)
        return p[tuple(sl)]

    # mirrored taps are paired so reflected inputs give exactly reflected outputs
    out = w[r] * window(0)
    for k in range(1, r + 1):
        out += w[r + k] * (window(-k) + window(k))
    return out


def convolve_separable(arr: np.ndarray, kernel: Kernel1D) -> np.ndarray:
    """Horizontal then vertical pass on a raw float array."""
    return _convolve_axis(_convolve_axis(np.asarray(arr, dtype=np.float64), kernel, 1), kernel, 0)


def gaussian_blur(img: Raster, radius_px: float) -> Raster:
    if radius_px == 0:
        return Raster(img.data)
    out = convolve_separable(img.data, gaussian_kernel(radius_px))
    # weights sum to 1 so the result stays in range up to rounding
    return Raster(np.clip(out, 0.0, 1.0))


def sobel_components(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw Sobel responses (gx: right minus left, gy: bottom minus top)."""
    p = np.pad(np.asarray(arr, dtype=np.float64), 1, mode="edge")
    right = p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:]
    left = p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2]
    bottom = p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:]
    top = p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:]
    return right - left, bottom - top


def sobel_magnitude(img: Raster) -> Raster:
    """Gradient magnitude normalized by its theoretical maximum 4*sqrt(2)."""
    if img.width < 3 or img.height < 3:
        raise ImageTooSmall(f"Sobel needs at least 3x3 pixels, got {img.width}x{img.height}")
    gx, gy = sobel_components(img.data)
    return Raster(np.clip(np.sqrt(gx * gx + gy * gy) / SOBEL_MAX, 0.0, 1.0))


def invert(img: Raster) -> Raster:
    return Raster(1.0 - img.data)


def levels(img: Raster, p: LevelsParams) -> Raster:
    """Map ``black..white`` onto ``0..1``, clamp, then apply ``x ** (1/gamma)``."""
    x = np.clip((img.data - p.black) / (p.white - p.black), 0.0, 1.0)
    if p.gamma != 1.0:
        x = x ** (1.0 / p.gamma)
    return Raster(x)


def autocontrast(img: Raster, clip_low_pct: float = 0.0, clip_high_pct: float = 0.0) -> Raster:
    """Percentile-driven linear stretch.

    The black point is the ``clip_low_pct`` percentile and the white point the
    ``100 - clip_high_pct`` percentile, both linearly interpolated between
    order statistics. A flat histogram (black == white) yields a constant 0.5
    image.
    """
    if not (clip_low_pct >= 0 and clip_high_pct >= 0 and clip_low_pct + clip_high_pct < 100):
        raise InvalidParameter(
            f"clip percentages must be >= 0 and sum below 100, got {clip_low_pct}/{clip_high_pct}"
        )
    black, white = np.percentile(img.data, [clip_low_pct, 100.0 - clip_high_pct])
    black, white = float(black), float(white)
    if white <= black:
        return Raster.constant(img.width, img.height, 0.5)
    return levels(img, LevelsParams(black, white, 1.0))


def unsharp_mask(img: Raster, radius_px: float, amount: float) -> Raster:
    if not (amount >= 0 and math.isfinite(amount)):
        raise InvalidParameter(f"amount must be non-negative, got {amount}")
    if amount == 0:
        return Raster(img.data)
    return clamp_unit(unsharp_unclamped(img, radius_px, amount))


def unsharp_unclamped(img: Raster, radius_px: float, amount: float) -> np.ndarray:
    blurred = gaussian_blur(img, radius_px).data
    return img.data + amount * (img.data - blurred)


def overlay_blend(base: Raster, top: Raster, opacity: float) -> Raster:
    """Overlay ``top`` onto ``base`` at the given opacity.

    o = 2bt for b <= 0.5, else 1 - 2(1-b)(1-t); result = (1-opacity)b + opacity*o.
    """
    if base.shape != top.shape:
        raise ShapeError(f"overlay operands differ in shape: {base.shape} vs {top.shape}")
    if not (0.0 <= opacity <= 1.0):
        raise InvalidParameter(f"opacity must lie in [0, 1], got {opacity}")
    if opacity == 0:
        return Raster(base.data)
    b, t = base.data, top.data
    o = np.where(b <= 0.5, 2.0 * b * t, 1.0 - 2.0 * (1.0 - b) * (1.0 - t))
    return clamp_unit((1.0 - opacity) * b + opacity * o)
