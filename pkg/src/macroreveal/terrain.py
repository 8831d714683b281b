"""Synthetic heightmaps, Lambertian hillshading and a diffusion + crater erosion model.

Angles are in degrees. Ridge and symmetry axes are measured counter-clockwise
from the +x (rightward) image axis as displayed, i.e. with y pointing up.
Light azimuth is a compass bearing: clockwise from image-up (north).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .pipeline import RevealParams, reveal
from .raster import Heightmap, Raster

U64_MAX = 2**64 - 1


def _check_seed(seed):
    if not (isinstance(seed, (int, np.integer)) and 0 <= seed <= U64_MAX):
        raise InvalidParameter(f"seed must be an unsigned 64-bit integer, got {seed!r}")


@dataclass(frozen=True)
class LightSpec:
    azimuth_deg: float
    elevation_deg: float

    def __post_init__(self):
        if not (0.0 <= self.azimuth_deg < 360.0):
            raise InvalidParameter(f"azimuth must lie in [0, 360), got {self.azimuth_deg}")
        if not (0.0 < self.elevation_deg <= 90.0):
            raise InvalidParameter(f"elevation must lie in (0, 90], got {self.elevation_deg}")

    def vector(self) -> np.ndarray:
        """Unit vector toward the light in (east, north, up) coordinates."""
        az = math.radians(self.azimuth_deg)
        el = math.radians(self.elevation_deg)
        return np.array([math.sin(az) * math.cos(el), math.cos(az) * math.cos(el), math.sin(el)])


@dataclass(frozen=True)
class TerrainParams:
    width: int
    height: int
    peak_height: float
    ridge_axis_deg: float = 90.0
    noise_amplitude: float = 0.0
    seed: int = 0
    # mound spread along / across the ridge, as fractions of min(width, height)
    major_sigma_frac: float = 0.22
    minor_sigma_frac: float = 0.16
    noise_scale_px: float = 16.0
    noise_octaves: int = 3
    cell_size: float = 1.0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidParameter("terrain dimensions must be positive")
        if not self.peak_height > 0:
            raise InvalidParameter("peak_height must be positive")
        if not self.noise_amplitude >= 0:
            raise InvalidParameter("noise_amplitude must be non-negative")
        if not (self.major_sigma_frac > 0 and self.minor_sigma_frac > 0):
            raise InvalidParameter("mound spreads must be positive")
        if not (self.noise_scale_px >= 1 and self.noise_octaves >= 1):
            raise InvalidParameter("noise scale must be >= 1 px with at least one octave")
        _check_seed(self.seed)


@dataclass(frozen=True)
class Feature:
    """Smooth radial bump: ``depth * (1 - (d / 3r)^2)^3`` inside ``d < 3r``.

    Positive depth raises the ground (a rock), negative digs a depression.
    """

    x: float
    y: float
    radius_px: float
    depth: float

    def __post_init__(self):
        if not self.radius_px > 0:
            raise InvalidParameter(f"feature radius must be positive, got {self.radius_px}")
        if not math.isfinite(self.depth):
            raise InvalidParameter("feature depth must be finite")


@dataclass(frozen=True)
class ErosionParams:
    diffusion_steps: int = 0
    diffusion_rate: float = 0.25
    crater_count: int = 0
    crater_radius_px: tuple[float, float] = (4.0, 12.0)
    crater_depth: tuple[float, float] = (2.0, 8.0)
    seed: int = 0

    def __post_init__(self):
        if self.diffusion_steps < 0 or self.crater_count < 0:
            raise InvalidParameter("step and crater counts must be non-negative")
        if not (0.0 < self.diffusion_rate <= 0.25):
            raise InvalidParameter(f"diffusion rate must lie in (0, 0.25], got {self.diffusion_rate}")
        for name in ("crater_radius_px", "crater_depth"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi and math.isfinite(hi)):
                raise InvalidParameter(f"{name} must be a range 0 < lo <= hi, got ({lo}, {hi})")
        _check_seed(self.seed)


def _grid(width, height):
    """Centered coordinates: x rightward, y upward."""
    x = np.arange(width, dtype=np.float64) - (width - 1) / 2.0
    y = (height - 1) / 2.0 - np.arange(height, dtype=np.float64)
    return np.meshgrid(x, y)


def _smoothstep(t):
    return t * t * (3.0 - 2.0 * t)


def value_noise(width: int, height: int, scale_px: float, octaves: int, seed: int) -> np.ndarray:
    """Lattice value noise in roughly [-1, 1], smoothstep-interpolated.

    Each octave halves the lattice spacing and the amplitude; the sum is
    divided by the total amplitude.
    """
    rng = np.random.default_rng(seed)
    total = np.zeros((height, width))
    norm = 0.0
    amp, spacing = 1.0, float(scale_px)
    rows = np.arange(height, dtype=np.float64)
    cols = np.arange(width, dtype=np.float64)
    for _ in range(octaves):
        lattice = rng.uniform(-1.0, 1.0, size=(int(height / spacing) + 2, int(width / spacing) + 2))
        fy, fx = rows / spacing, cols / spacing
        iy, ix = fy.astype(np.int64), fx.astype(np.int64)
        ty, tx = _smoothstep(fy - iy)[:, None], _smoothstep(fx - ix)[None, :]
        v00 = lattice[iy][:, ix]
        v01 = lattice[iy][:, ix + 1]
        v10 = lattice[iy + 1][:, ix]
        v11 = lattice[iy + 1][:, ix + 1]
        top = v00 + (v01 - v00) * tx
        bottom = v10 + (v11 - v10) * tx
        total += amp * (top + (bottom - top) * ty)
        norm += amp
        amp *= 0.5
        spacing = max(spacing / 2.0, 1.0)
    return total / norm


def synth_mound(p: TerrainParams) -> Heightmap:
    """Elongated squared-exponential mound centered in the grid plus seeded value noise."""
    x, y = _grid(p.width, p.height)
    th = math.radians(p.ridge_axis_deg)
    c, s = math.cos(th), math.sin(th)
    along = x * c + y * s
    across = -x * s + y * c
    base = min(p.width, p.height)
    sa = p.major_sigma_frac * base
    sc = p.minor_sigma_frac * base
    elev = p.peak_height * np.exp(-(along * along / (2 * sa * sa) + across * across / (2 * sc * sc)))
    if p.noise_amplitude > 0:
        elev = elev + p.noise_amplitude * value_noise(
            p.width, p.height, p.noise_scale_px, p.noise_octaves, p.seed
        )
    return Heightmap(elev, p.cell_size)


def feature_field(width: int, height: int, features) -> np.ndarray:
    """Sum of all feature bumps, accumulated in a canonical order so that
    permuting ``features`` cannot change a single bit."""
    out = np.zeros((height, width))
    cols = np.arange(width, dtype=np.float64)
    rows = np.arange(height, dtype=np.float64)
    for f in sorted(features, key=lambda f: (f.x, f.y, f.radius_px, f.depth)):
        support = 3.0 * f.radius_px
        r0, r1 = max(0, math.floor(f.y - support)), min(height, math.ceil(f.y + support) + 1)
        c0, c1 = max(0, math.floor(f.x - support)), min(width, math.ceil(f.x + support) + 1)
        if r0 >= r1 or c0 >= c1:
            continue
        dy = rows[r0:r1, None] - f.y
        dx = cols[None, c0:c1] - f.x
        u2 = (dx * dx + dy * dy) / (support * support)
        bump = np.where(u2 < 1.0, (1.0 - u2) ** 3, 0.0)
        out[r0:r1, c0:c1] += f.depth * bump
    return out


def carve_features(h: Heightmap, features) -> Heightmap:
    """Add rocks (depth > 0) or dig depressions (depth < 0); centers are (x=col, y=row)."""
    features = list(features)
    for f in features:
        if not (0 <= f.x <= h.width - 1 and 0 <= f.y <= h.height - 1):
            raise InvalidParameter(f"feature center ({f.x}, {f.y}) outside {h.width}x{h.height} grid")
    if not features:
        return h
    return Heightmap(h.elevations + feature_field(h.width, h.height, features), h.cell_size)


def surface_normals(h: Heightmap) -> np.ndarray:
    """Unit normals, shape (rows, cols, 3) in (east, north, up) coordinates.

    Central differences in the interior, one-sided at the border.
    """
    if h.width < 2 or h.height < 2:
        raise InvalidParameter("hillshade needs at least 2x2 samples")
    d_row, d_col = np.gradient(h.elevations, h.cell_size)
    dz_east = d_col
    dz_north = -d_row
    n = np.stack([-dz_east, -dz_north, np.ones_like(dz_east)], axis=-1)
    return n / np.sqrt(dz_east * dz_east + dz_north * dz_north + 1.0)[..., None]


def hillshade(h: Heightmap, light: LightSpec) -> Raster:
    """Local Lambertian shading max(0, n.l); no cast shadows."""
    n = surface_normals(h)
    lx, ly, lz = light.vector()
    shade = n[..., 0] * lx + n[..., 1] * ly + n[..., 2] * lz
    return Raster(np.clip(shade, 0.0, 1.0))


def diffuse(elev: np.ndarray, steps: int, rate: float) -> np.ndarray:
    """Explicit 5-point Laplacian smoothing with replicate borders."""
    z = np.array(elev, dtype=np.float64)
    for _ in range(steps):
        p = np.pad(z, 1, mode="edge")
        lap = (p[:-2, 1:-1] + p[2:, 1:-1]) + (p[1:-1, :-2] + p[1:-1, 2:]) - 4.0 * z
        z = z + rate * lap
    return z


def crater_features(width: int, height: int, p: ErosionParams) -> list[Feature]:
    """Randomly placed depressions; depends only on the grid size and ``p``."""
    rng = np.random.default_rng(p.seed)
    out = []
    for _ in range(p.crater_count):
        x = rng.uniform(0.0, width - 1)
        y = rng.uniform(0.0, height - 1)
        r = rng.uniform(*p.crater_radius_px)
        d = rng.uniform(*p.crater_depth)
        out.append(Feature(float(x), float(y), float(r), -float(d)))
    return out


def erode(h: Heightmap, p: ErosionParams) -> Heightmap:
    """Diffusion smoothing followed by seeded crater impacts."""
    elev = diffuse(h.elevations, p.diffusion_steps, p.diffusion_rate)
    if p.crater_count:
        elev = elev + feature_field(h.width, h.height, crater_features(h.width, h.height, p))
    return Heightmap(elev, h.cell_size)


def illumination_sweep(h: Heightmap, azimuths, elevation_deg: float,
                       reveal_params: RevealParams = RevealParams()):
    """Hillshade under each azimuth and run the reveal procedure; input order kept."""
    azimuths = list(azimuths)
    if not azimuths:
        raise InvalidParameter("sweep needs at least one azimuth")
    out = []
    for az in azimuths:
        shaded = hillshade(h, LightSpec(float(az) % 360.0, elevation_deg))
        out.append((az, reveal(shaded, reveal_params).output))
    return out


def parse_azimuths(text: str) -> list[float]:
    """``start:stop:step`` (stop exclusive) or a comma list."""
    try:
        if ":" in text:
            parts = [float(v) for v in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            n = max(0, math.ceil((stop - start) / step - 1e-9))
            return [start + i * step for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidParameter(f"bad azimuth list {text!r}; use start:stop:step or a,b,c") from None
