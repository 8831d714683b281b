"""Similarity, mirror-symmetry and feature-visibility measures, plus report export."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidParameter, ShapeError
from .filters import gaussian_blur
from .raster import Heightmap, Raster
from .terrain import LightSpec, hillshade

TIE_TOLERANCE = 1e-9


def _arr(x):
    return x.data if isinstance(x, Raster) else np.asarray(x, dtype=np.float64)


def _ncc_arrays(a: np.ndarray, b: np.ndarray) -> float:
    a_const = bool(np.all(a == a.flat[0]))
    b_const = bool(np.all(b == b.flat[0]))
    if a_const and b_const:
        return 1.0 if a.flat[0] == b.flat[0] else 0.0
    if a_const or b_const:
        return 0.0
    da = a - a.mean()
    db = b - b.mean()
    num = float(np.sum(da * db))
    den = math.sqrt(float(np.sum(da * da)) * float(np.sum(db * db)))
    if den == 0.0:
        return 0.0
    return min(1.0, max(-1.0, num / den))


def ncc(a, b) -> float:
    """Normalized cross-correlation of mean-centered samples.

    Two constant images score 1.0 when equal and 0.0 otherwise; a constant
    against a non-constant image scores 0.0.
    """
    a, b = _arr(a), _arr(b)
    if a.shape != b.shape:
        raise ShapeError(f"ncc operands differ in shape: {a.shape} vs {b.shape}")
    return _ncc_arrays(a.ravel(), b.ravel())


def _cos_sin_deg(deg: float) -> tuple[float, float]:
    """cos/sin with exact values at multiples of 90 degrees."""
    deg = deg % 360.0
    exact = {0.0: (1.0, 0.0), 90.0: (0.0, 1.0), 180.0: (-1.0, 0.0), 270.0: (0.0, -1.0)}
    if deg in exact:
        return exact[deg]
    r = math.radians(deg)
    return math.cos(r), math.sin(r)


def bilinear_sample(arr: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Sample ``arr`` at fractional, in-bounds positions."""
    h, w = arr.shape
    r0 = np.clip(np.floor(rows).astype(np.int64), 0, max(h - 2, 0))
    c0 = np.clip(np.floor(cols).astype(np.int64), 0, max(w - 2, 0))
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    tr = rows - r0
    tc = cols - c0
    top = arr[r0, c0] * (1.0 - tc) + arr[r0, c1] * tc
    bottom = arr[r1, c0] * (1.0 - tc) + arr[r1, c1] * tc
    return top * (1.0 - tr) + bottom * tr


def reflect_about_axis(img, axis_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Mirror image about the line through the image center at ``axis_deg``.

    Returns the reflected samples and a mask of pixels whose mirror position
    falls inside the image (others are not meaningful).
    """
    arr = _arr(img)
    h, w = arr.shape
    c2, s2 = _cos_sin_deg(2.0 * (axis_deg % 180.0))
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    cols, rows = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    x = cols - cx
    y = cy - rows
    xr = c2 * x + s2 * y
    yr = s2 * x - c2 * y
    src_c = cx + xr
    src_r = cy - yr
    eps = 1e-9
    mask = (src_c >= -eps) & (src_c <= w - 1 + eps) & (src_r >= -eps) & (src_r <= h - 1 + eps)
    src_c = np.clip(src_c, 0.0, w - 1)
    src_r = np.clip(src_r, 0.0, h - 1)
    return bilinear_sample(arr, src_r, src_c), mask


def symmetry_score(img, axis_deg: float) -> float:
    """NCC between the image and its mirror about an axis through the center."""
    arr = _arr(img)
    reflected, mask = reflect_about_axis(arr, axis_deg)
    if not mask.any():
        return 0.0
    return _ncc_arrays(arr[mask], reflected[mask])


def best_symmetry_axis(img, angle_step_deg: float = 1.0) -> tuple[float, float]:
    """Grid search over [0, 180) degrees; near-ties go to the smaller angle."""
    if not (0 < angle_step_deg <= 90):
        raise InvalidParameter(f"angle step must lie in (0, 90], got {angle_step_deg}")
    n = math.ceil(180.0 / angle_step_deg - 1e-9)
    best_axis, best_score = 0.0, -math.inf
    for k in range(n):
        axis = k * angle_step_deg
        score = symmetry_score(img, axis)
        if score > best_score + TIE_TOLERANCE:
            best_axis, best_score = axis, score
    return best_axis, best_score


def feature_margin(img, center, r_inner: float, r_outer: float) -> float:
    """Mean of the ring ``r_inner < d <= r_outer`` minus mean of the disk ``d <= r_inner``.

    Positive means the feature reads darker than its surroundings.
    ``center`` is (x=col, y=row).
    """
    arr = _arr(img)
    h, w = arr.shape
    cx, cy = center
    if not (0 < r_inner < r_outer):
        raise InvalidParameter(f"need 0 < r_inner < r_outer, got {r_inner}, {r_outer}")
    if cx - r_outer < 0 or cy - r_outer < 0 or cx + r_outer > w - 1 or cy + r_outer > h - 1:
        raise InvalidParameter(
            f"feature at ({cx}, {cy}) with outer radius {r_outer} leaves the {w}x{h} image"
        )
    r0, r1 = math.floor(cy - r_outer), math.ceil(cy + r_outer) + 1
    c0, c1 = math.floor(cx - r_outer), math.ceil(cx + r_outer) + 1
    patch = arr[r0:r1, c0:c1]
    dy = np.arange(r0, r1, dtype=np.float64)[:, None] - cy
    dx = np.arange(c0, c1, dtype=np.float64)[None, :] - cx
    d2 = dx * dx + dy * dy
    disk = patch[d2 <= r_inner * r_inner]
    ring = patch[(d2 > r_inner * r_inner) & (d2 <= r_outer * r_outer)]
    if disk.size == 0 or ring.size == 0:
        raise InvalidParameter("feature disk or ring contains no pixels")
    return float(_exact_mean(ring) - _exact_mean(disk))


_UNIT = 2**53
_HALF_BITS = 26


def _exact_mean(values: np.ndarray) -> Fraction:
    """Exact mean of samples on the 2**-53 lattice, so margins negate exactly under inversion."""
    k = np.round(values * _UNIT).astype(np.int64)
    hi = int(np.sum(k >> _HALF_BITS))
    lo = int(np.sum(k & ((1 << _HALF_BITS) - 1)))
    return Fraction((hi << _HALF_BITS) + lo, _UNIT * values.size)


@dataclass(frozen=True)
class FeatureSpec:
    """A named probe location for :func:`feature_margin`."""

    id: str
    x: float
    y: float
    r_inner: float
    r_outer: float

    def margin(self, img) -> float:
        return feature_margin(img, (self.x, self.y), self.r_inner, self.r_outer)


@dataclass
class MetricsReport:
    ncc: float
    ncc_sharp: float | None = None
    ncc_blurred: float | None = None
    symmetry_axis_deg: float | None = None
    symmetry_score: float | None = None
    feature_margins: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self):
        for name in ("ncc", "ncc_sharp", "ncc_blurred", "symmetry_score"):
            v = getattr(self, name)
            if v is not None and not (-1.0 <= v <= 1.0):
                raise InvalidParameter(f"{name} must lie in [-1, 1], got {v}")
        if any(not math.isfinite(m) for _, m in self.feature_margins):
            raise InvalidParameter("feature margins must be finite")

    @property
    def persistence_gap(self) -> float | None:
        if self.ncc_sharp is None or self.ncc_blurred is None:
            return None
        return self.ncc_blurred - self.ncc_sharp

    def items(self) -> list[tuple[str, object]]:
        out: list[tuple[str, object]] = [("ncc", self.ncc)]
        for key in ("ncc_sharp", "ncc_blurred", "persistence_gap", "symmetry_axis_deg", "symmetry_score"):
            v = getattr(self, key)
            if v is not None:
                out.append((key, v))
        out += [(f"margin.{fid}", m) for fid, m in self.feature_margins]
        return out

    def to_text(self) -> str:
        """One ``key = value`` line per metric."""
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in self.items())

    def to_table(self, delimiter: str = "\t") -> str:
        """Two-column ``metric<delim>value`` table with a header row."""
        rows = [f"metric{delimiter}value"] + [f"{k}{delimiter}{_fmt(v)}" for k, v in self.items()]
        return "\n".join(rows) + "\n"


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def parse_report_text(text: str) -> dict[str, float]:
    out = {}
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = float(value)
    return out


def persistence_report(h: Heightmap, eroded: Heightmap, light: LightSpec, blur_radius_px: float,
                       features=(), symmetry_step_deg: float | None = None) -> MetricsReport:
    """Compare renders of the original and eroded terrain, sharp and blurred.

    Optional ``features`` are probed and symmetry searched on the blurred
    render of the eroded terrain.
    """
    if h.shape != eroded.shape:
        raise ShapeError(f"heightmaps differ in shape: {h.shape} vs {eroded.shape}")
    sharp_a = hillshade(h, light)
    sharp_b = hillshade(eroded, light)
    blur_a = gaussian_blur(sharp_a, blur_radius_px)
    blur_b = gaussian_blur(sharp_b, blur_radius_px)
    n_sharp = ncc(sharp_a, sharp_b)
    n_blur = ncc(blur_a, blur_b)
    axis = score = None
    if symmetry_step_deg is not None:
        axis, score = best_symmetry_axis(blur_b, symmetry_step_deg)
    margins = [(f.id, f.margin(blur_b)) for f in features]
    return MetricsReport(n_blur, n_sharp, n_blur, axis, score, margins)


def sweep_table(rows, feature_ids, delimiter: str = "\t") -> str:
    """Table with one row per azimuth: ``azimuth_deg`` then one margin column per feature."""
    lines = [delimiter.join(["azimuth_deg", *feature_ids])]
    for az, margins in rows:
        lines.append(delimiter.join([_fmt(float(az)), *(_fmt(m) for m in margins)]))
    return "\n".join(lines) + "\n"
