import math

import numpy as np
import pytest
from skimage import measure

from macroreveal import fixtures
from macroreveal.errors import InvalidParameter
from macroreveal.pipeline import RevealParams, reveal
from macroreveal.raster import Heightmap
from macroreveal.terrain import (
    ErosionParams,
    Feature,
    LightSpec,
    TerrainParams,
    carve_features,
    crater_features,
    diffuse,
    erode,
    hillshade,
    illumination_sweep,
    parse_azimuths,
    synth_mound,
)

MOUND = TerrainParams(65, 81, peak_height=10.0, ridge_axis_deg=90.0)


class TestMound:
    def test_peak_at_center_and_monotone_axes(self):
        z = synth_mound(MOUND).elevations
        cy, cx = 40, 32
        assert np.unravel_index(np.argmax(z), z.shape) == (cy, cx)
        assert z[cy, cx] == 10.0
        col = z[:, cx]
        rowv = z[cy, :]
        assert np.all(np.diff(col[: cy + 1]) > 0) and np.all(np.diff(col[cy:]) < 0)
        assert np.all(np.diff(rowv[: cx + 1]) > 0) and np.all(np.diff(rowv[cx:]) < 0)

    def test_elongated_along_ridge(self):
        z = synth_mound(TerrainParams(101, 101, 5.0, ridge_axis_deg=90.0)).elevations
        # vertical ridge: falls off slower along the column than along the row
        assert z[50 - 20, 50] > z[50, 50 - 20]
        z0 = synth_mound(TerrainParams(101, 101, 5.0, ridge_axis_deg=0.0)).elevations
        assert z0[50, 50 - 20] > z0[50 - 20, 50]

    def test_seed_determinism(self):
        p = TerrainParams(40, 30, 3.0, 45.0, noise_amplitude=0.5, seed=99)
        assert synth_mound(p) == synth_mound(p)
        q = TerrainParams(40, 30, 3.0, 45.0, noise_amplitude=0.5, seed=100)
        assert synth_mound(p) != synth_mound(q)

    def test_half_height_contour_is_single_closed_curve(self):
        z = synth_mound(TerrainParams(120, 100, 8.0, ridge_axis_deg=30.0)).elevations
        contours = measure.find_contours(z, 4.0)
        assert len(contours) == 1
        assert np.allclose(contours[0][0], contours[0][-1])

    @pytest.mark.parametrize("kw", [{"peak_height": 0}, {"noise_amplitude": -1}, {"seed": -1}, {"seed": 2**64}])
    def test_invalid(self, kw):
        base = dict(width=4, height=4, peak_height=1.0)
        base.update(kw)
        with pytest.raises(InvalidParameter):
            TerrainParams(**base)


class TestCarve:
    def setup_method(self):
        self.h = synth_mound(MOUND)

    def test_empty_is_identity(self):
        assert carve_features(self.h, []) == self.h

    def test_center_drops_by_depth(self):
        out = carve_features(self.h, [Feature(20.0, 30.0, 3.0, -2.5)])
        assert out.elevations[30, 20] == pytest.approx(self.h.elevations[30, 20] - 2.5, abs=1e-12)

    def test_rock_raises_ground(self):
        out = carve_features(self.h, [Feature(20.0, 30.0, 3.0, 1.5)])
        assert out.elevations[30, 20] == pytest.approx(self.h.elevations[30, 20] + 1.5, abs=1e-12)

    def test_unchanged_outside_support(self):
        f = Feature(30.0, 40.0, 4.0, -3.0)
        out = carve_features(self.h, [f])
        rows, cols = np.mgrid[0:81, 0:65]
        far = np.hypot(cols - f.x, rows - f.y) >= 3 * f.radius_px
        assert np.array_equal(out.elevations[far], self.h.elevations[far])
        assert not np.array_equal(out.elevations[~far], self.h.elevations[~far])

    def test_mirror_eyes_keep_symmetry(self):
        eyes = [Feature(32 - 12, 25, 4, -3), Feature(32 + 12, 25, 4, -3)]
        z = carve_features(self.h, eyes).elevations
        assert np.max(np.abs(z - z[:, ::-1])) <= 1e-12

    def test_order_independent(self):
        feats = [Feature(10, 10, 3, -1), Feature(12, 14, 5, 2), Feature(40, 60, 2, -4)]
        a = carve_features(self.h, feats)
        b = carve_features(self.h, feats[::-1])
        c = carve_features(carve_features(self.h, feats[1:]), feats[:1])
        assert a == b
        assert np.max(np.abs(a.elevations - c.elevations)) <= 1e-12

    def test_out_of_bounds(self):
        with pytest.raises(InvalidParameter):
            carve_features(self.h, [Feature(65.0, 10.0, 2.0, -1.0)])


class TestHillshade:
    @pytest.mark.parametrize("elev", [10.0, 35.0, 60.0])
    def test_flat(self, elev):
        flat = Heightmap(np.full((6, 7), 3.0))
        out = hillshade(flat, LightSpec(123.0, elev))
        assert np.max(np.abs(out.data - math.sin(math.radians(elev)))) <= 1e-15

    def test_flat_overhead_is_white(self):
        out = hillshade(Heightmap(np.zeros((4, 4))), LightSpec(0.0, 90.0))
        assert np.all(out.data == 1.0)

    def test_flat_azimuth_irrelevant(self):
        flat = Heightmap(np.zeros((5, 5)))
        outs = [hillshade(flat, LightSpec(az, 40.0)) for az in (0.0, 90.0, 200.0, 359.0)]
        assert all(o == outs[0] for o in outs)

    def test_inclined_plane_closed_form(self):
        # z = 0.5 x (rising eastward), cell_size 2: slope 0.25
        cols = np.arange(8, dtype=float)
        h = Heightmap(np.tile(0.5 * cols, (5, 1)), cell_size=2.0)
        e = math.radians(30.0)
        a = 0.25
        from_east = hillshade(h, LightSpec(90.0, 30.0)).data
        from_west = hillshade(h, LightSpec(270.0, 30.0)).data
        assert np.allclose(from_east, (math.sin(e) - a * math.cos(e)) / math.sqrt(1 + a * a), atol=1e-12)
        assert np.allclose(from_west, (math.sin(e) + a * math.cos(e)) / math.sqrt(1 + a * a), atol=1e-12)
        # rotating the light by 180 degrees swaps which side is bright
        assert np.all(from_west > from_east)
        assert np.allclose(from_east + from_west, 2 * math.sin(e) / math.sqrt(1 + a * a), atol=1e-12)

    def test_north_slope(self):
        rows = np.arange(6, dtype=float)
        h = Heightmap(np.tile(-rows[:, None], (1, 4)))  # rises toward row 0, i.e. north
        lit = hillshade(h, LightSpec(0.0, 45.0)).data
        shaded = hillshade(h, LightSpec(180.0, 45.0)).data
        assert np.all(shaded > lit)

    def test_steep_back_slope_clamped_to_zero(self):
        h = Heightmap(np.tile(10.0 * np.arange(5.0), (4, 1)))
        assert np.all(hillshade(h, LightSpec(90.0, 10.0)).data == 0.0)

    @pytest.mark.parametrize("kw", [(360.0, 10.0), (-1.0, 10.0), (0.0, 0.0), (0.0, 91.0)])
    def test_light_validation(self, kw):
        with pytest.raises(InvalidParameter):
            LightSpec(*kw)


def bump_heightmap(n=64):
    rows, cols = np.mgrid[0:n, 0:n]
    c = (n - 1) / 2
    return Heightmap(10.0 * np.exp(-((rows - c) ** 2 + (cols - c) ** 2) / (2 * 4.0**2)))


class TestErode:
    def test_identity(self):
        h = bump_heightmap()
        assert erode(h, ErosionParams(0, 0.25, 0)) == h

    def test_diffusion_conserves_mass(self):
        h = bump_heightmap()
        out = erode(h, ErosionParams(150, 0.2, 0))
        before = math.fsum(h.elevations.ravel())
        after = math.fsum(out.elevations.ravel())
        assert abs(after - before) / before <= 1e-6
        assert out.elevations.max() < h.elevations.max()

    def test_diffusion_is_contraction(self, rng):
        z = rng.normal(size=(30, 30))
        for _ in range(20):
            nxt = diffuse(z, 1, 0.25)
            assert nxt.max() <= z.max() and nxt.min() >= z.min()
            z = nxt

    def test_seeded_craters_reproducible(self):
        h = bump_heightmap()
        p = ErosionParams(5, 0.25, 20, (1.0, 3.0), (0.5, 2.0), seed=42)
        assert erode(h, p) == erode(h, p)
        assert crater_features(64, 64, p) == crater_features(64, 64, p)
        q = ErosionParams(5, 0.25, 20, (1.0, 3.0), (0.5, 2.0), seed=43)
        assert erode(h, p) != erode(h, q)

    def test_craters_dig_within_ranges(self):
        p = ErosionParams(0, 0.25, 50, (2.0, 4.0), (1.0, 3.0), seed=3)
        feats = crater_features(80, 60, p)
        assert len(feats) == 50
        for f in feats:
            assert 0 <= f.x <= 79 and 0 <= f.y <= 59
            assert 2.0 <= f.radius_px <= 4.0 and -3.0 <= f.depth <= -1.0
        out = erode(Heightmap(np.zeros((60, 80))), p)
        assert out.elevations.max() == 0.0 and out.elevations.min() < 0.0

    @pytest.mark.parametrize("kw", [{"diffusion_rate": 0.3}, {"diffusion_rate": 0.0}, {"diffusion_steps": -1},
                                    {"crater_radius_px": (5.0, 2.0)}, {"crater_depth": (0.0, 1.0)}])
    def test_invalid(self, kw):
        with pytest.raises(InvalidParameter):
            ErosionParams(**kw)


class TestSweep:
    def test_single_azimuth_is_composition(self, small_face):
        p = RevealParams(20)
        [(az, img)] = illumination_sweep(small_face.heightmap, [45.0], 35.0, p)
        assert az == 45.0
        assert img == reveal(hillshade(small_face.heightmap, LightSpec(45.0, 35.0)), p).output

    def test_twelve_azimuths(self):
        h = bump_heightmap(32)
        out = illumination_sweep(h, parse_azimuths("0:360:30"), 35.0, RevealParams(3))
        assert [a for a, _ in out] == [float(a) for a in range(0, 360, 30)]

    def test_mirror_equivariance(self):
        h = fixtures.face_fixture(256, 256, noise_amplitude=0.0).heightmap
        assert np.max(np.abs(h.elevations - h.elevations[:, ::-1])) <= 1e-9
        p = RevealParams(20)
        for az in (30.0, 75.0, 120.0):
            [(_, a)] = illumination_sweep(h, [az], 35.0, p)
            [(_, b)] = illumination_sweep(h, [(360.0 - az) % 360.0], 35.0, p)
            assert np.max(np.abs(a.data - b.data[:, ::-1])) <= 1e-9

    def test_empty(self):
        with pytest.raises(InvalidParameter):
            illumination_sweep(bump_heightmap(8), [], 30.0)


@pytest.mark.parametrize("text, expected", [
    ("0:360:30", [float(a) for a in range(0, 360, 30)]),
    ("0:90:45", [0.0, 45.0]),
    ("10,20.5", [10.0, 20.5]),
])
def test_parse_azimuths(text, expected):
    assert parse_azimuths(text) == expected


@pytest.mark.parametrize("bad", ["0:360", "0:360:0", "a,b", "0:x:1"])
def test_parse_azimuths_invalid(bad):
    with pytest.raises(InvalidParameter):
        parse_azimuths(bad)
