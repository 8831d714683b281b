"""Deterministic synthetic fixtures: the face heightmap and a mirror-built test pattern.

Face parameters come from ``data/face_fixture.json`` and are given for a
1024 px grid; other sizes scale every length (and elevation, so slopes are
kept) by ``min(width, height) / 1024``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .metrics import FeatureSpec, _cos_sin_deg, bilinear_sample
from .pipeline import RevealParams
from .raster import Heightmap, Raster
from .terrain import ErosionParams, Feature, LightSpec, TerrainParams, carve_features, hillshade, synth_mound


@lru_cache(maxsize=None)
def _manifest_text() -> str:
    return resources.files("macroreveal").joinpath("data/face_fixture.json").read_text()


def manifest() -> dict:
    return json.loads(_manifest_text())


@dataclass(frozen=True)
class Face:
    heightmap: Heightmap
    eyes: tuple[Feature, Feature]
    probes: tuple[FeatureSpec, FeatureSpec]


def face_fixture(width: int = 1024, height: int = 1024, seed: int | None = None,
                 eye_depth: float | None = None, eye_radius: float | None = None,
                 peak_height: float | None = None, noise_amplitude: float | None = None,
                 ridge_axis_deg: float | None = None) -> Face:
    """Mound with two dug-out eyes mirrored about the (vertical) ridge axis."""
    m = manifest()
    k = min(width, height) / m["reference_size"]
    t = dict(m["terrain"])
    params = TerrainParams(
        width, height,
        peak_height=peak_height if peak_height is not None else t["peak_height"] * k,
        ridge_axis_deg=ridge_axis_deg if ridge_axis_deg is not None else t["ridge_axis_deg"],
        noise_amplitude=noise_amplitude if noise_amplitude is not None else t["noise_amplitude"] * k,
        seed=seed if seed is not None else t["seed"],
        major_sigma_frac=t["major_sigma_frac"],
        minor_sigma_frac=t["minor_sigma_frac"],
        noise_scale_px=max(1.0, t["noise_scale_px"] * k),
        noise_octaves=t["noise_octaves"],
        cell_size=t["cell_size"],
    )
    e = m["eyes"]
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    # eye offsets rotate with the ridge so the face stays mirror-built
    th = math.radians(params.ridge_axis_deg - 90.0)
    ox, oy = e["offset_x_px"] * k, e["offset_y_px"] * k
    radius = eye_radius if eye_radius is not None else e["radius_px"] * k
    depth = eye_depth if eye_depth is not None else e["depth"] * k
    eyes = []
    for side in (-1.0, 1.0):
        # (side*ox, oy) in y-up coordinates, rotated by th, then to (col, row)
        x = side * ox * math.cos(th) - oy * math.sin(th)
        y = side * ox * math.sin(th) + oy * math.cos(th)
        eyes.append(Feature(cx + x, cy - y, radius, depth))
    h = carve_features(synth_mound(params), eyes)
    p = m["probe"]
    probes = tuple(
        FeatureSpec(name, f.x, f.y, p["r_inner_px"] * k, p["r_outer_px"] * k)
        for name, f in zip(("left_eye", "right_eye"), eyes)
    )
    return Face(h, tuple(eyes), probes)


def render_light() -> LightSpec:
    return LightSpec(**manifest()["render_light"])


def face_raster(width: int = 1024, height: int = 1024) -> Raster:
    """The face heightmap hillshaded under the manifest light."""
    return hillshade(face_fixture(width, height).heightmap, render_light())


def reveal_params() -> RevealParams:
    r = manifest()["reveal"]
    return RevealParams(r["blur_radius_px"], r["edge_opacity"], tuple(r["contrast_clip_pcts"]), r["edge_gamma"])


def erosion_params(name: str) -> ErosionParams:
    cfg = dict(manifest()["erosion"][name])
    for key in ("crater_radius_px", "crater_depth"):
        if key in cfg:
            cfg[key] = tuple(cfg[key])
    return ErosionParams(**cfg)


def mirror_blobs(size: int, axis_deg: float, n_blobs: int = 12, seed: int = 0) -> Raster:
    """Sum of Gaussian blobs and their mirror images about ``axis_deg``.

    The pattern is evaluated analytically, so it is exactly mirror-symmetric
    as a continuous function; content stays inside a centered disk.
    """
    rng = np.random.default_rng(seed)
    c = (size - 1) / 2.0
    cols, rows = np.meshgrid(np.arange(size, dtype=np.float64), np.arange(size, dtype=np.float64))
    x, y = cols - c, c - rows
    c2, s2 = _cos_sin_deg(2.0 * axis_deg)
    field = np.zeros((size, size))
    for _ in range(n_blobs):
        rad = rng.uniform(0.0, 0.3 * size)
        ang = rng.uniform(0.0, 2 * math.pi)
        px, py = rad * math.cos(ang), rad * math.sin(ang)
        sigma = rng.uniform(size / 24, size / 10)
        amp = rng.uniform(-0.25, 0.25)
        for qx, qy in ((px, py), (c2 * px + s2 * py, s2 * px - c2 * py)):
            field += amp * np.exp(-((x - qx) ** 2 + (y - qy) ** 2) / (2 * sigma * sigma))
    return Raster(np.clip(0.5 + field, 0.0, 1.0))


def rotate_raster(img: Raster, angle_deg: float, fill: float = 0.5) -> Raster:
    """Rotate content counter-clockwise (as displayed) about the center, bilinear."""
    arr = img.data
    h, w = arr.shape
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    cols, rows = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    x, y = cols - cx, cy - rows
    th = math.radians(angle_deg)
    # inverse rotation finds the source of every destination pixel
    sx = math.cos(th) * x + math.sin(th) * y
    sy = -math.sin(th) * x + math.cos(th) * y
    sc, sr = cx + sx, cy - sy
    inside = (sc >= 0) & (sc <= w - 1) & (sr >= 0) & (sr <= h - 1)
    out = np.full((h, w), float(fill))
    out[inside] = bilinear_sample(arr, sr[inside], sc[inside])
    return Raster(out)
