"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from macroreveal import filters, fixtures, pipeline
from macroreveal.filters import LevelsParams
from macroreveal.metrics import best_symmetry_axis, persistence_report
from macroreveal.raster import Raster, load_pgm, save_pgm, write_pgm
from macroreveal.terrain import erode, illumination_sweep, parse_azimuths

from .conftest import noise_raster, record_acceptance
from .oracles import naive_blur_2d


def test_c1_filters_match_oracles():
    t0 = time.perf_counter()
    errors = []
    for seed in (101, 102, 103):
        img = noise_raster(seed, 32)
        errors.append(np.max(np.abs(filters.gaussian_blur(img, 3).data - naive_blur_2d(img.data, 3))))
    ramp = Raster(np.tile(np.arange(5) * 0.25, (3, 1)))
    ramp_ok = bool(np.all(filters.sobel_magnitude(ramp).data[:, 1:-1] == 2.0 / (4 * math.sqrt(2))))
    step = Raster(np.array([[0, 0, 1, 1]] * 3, dtype=np.float64))
    peak = 4.0 / (4 * math.sqrt(2))
    edge_ok = bool(np.array_equal(filters.sobel_magnitude(step).data, np.array([[0, peak, peak, 0]] * 3)))
    elapsed = time.perf_counter() - t0
    ok = max(errors) <= 1e-10 and ramp_ok and edge_ok and elapsed < 1.0
    record_acceptance("C1 filter oracles", ok,
                      f"max blur err {max(errors):.2e} (<=1e-10), sobel ramp {ramp_ok}, edge {edge_ok}, {elapsed:.2f}s (<1s)")
    assert ok


def test_c2_gaussian_semigroup():
    t0 = time.perf_counter()
    img = noise_raster(202, 128)
    worst = 0.0
    for s1, s2 in ((1, 1), (2, 3)):
        twice = filters.gaussian_blur(filters.gaussian_blur(img, 3 * s1), 3 * s2).data
        once = filters.gaussian_blur(img, 3 * math.hypot(s1, s2)).data
        m = 3 * (s1 + s2)
        worst = max(worst, float(np.max(np.abs(twice - once)[m:-m, m:-m])))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-3 and elapsed < 2.0
    record_acceptance("C2 Gaussian semigroup", ok, f"interior max err {worst:.2e} (<=1e-3), {elapsed:.2f}s (<2s)")
    assert ok


def _reveal_cli(flags, src, out, dump):
    cmd = [sys.executable, *flags, "-m", "macroreveal", "reveal", "--blur", "150", "--opacity", "0.09",
           "--dump-intermediates", str(dump), str(src), str(out)]
    t0 = time.perf_counter()
    proc = subprocess.run(cmd, capture_output=True, text=True)
    return proc, time.perf_counter() - t0


def test_c3_reference_reveal(tmp_path, face_raster):
    src = tmp_path / "face.pgm"
    write_pgm(face_raster, src, 65535)
    runs = []
    for name, flags in (("plain", []), ("again", []), ("optimized", ["-O"])):
        proc, elapsed = _reveal_cli(flags, src, tmp_path / f"{name}.pgm", tmp_path / name)
        runs.append((name, proc, elapsed))
    codes_ok = all(p.returncode == 0 for _, p, _ in runs)
    dumps = [sorted(f.name for f in (tmp_path / n).iterdir()) if (tmp_path / n).exists() else [] for n, _, _ in runs]
    expected = sorted(f"face.{k}.pgm" for k in pipeline.REVEAL_INTERMEDIATES)
    dumps_ok = all(d == expected for d in dumps)
    outs = [(tmp_path / f"{n}.pgm").read_bytes() if codes_ok else b"" for n, _, _ in runs]
    inter_same = codes_ok and all(
        (tmp_path / "plain" / f).read_bytes() == (tmp_path / n / f).read_bytes()
        for n in ("again", "optimized") for f in expected
    )
    identical = codes_ok and outs[0] == outs[1] == outs[2] and inter_same
    slowest = max(e for _, _, e in runs)
    ok = codes_ok and dumps_ok and identical and slowest < 10.0
    record_acceptance("C3 reveal at blur 150 / opacity 0.09", ok,
                      f"exit ok {codes_ok}, 4 intermediates {dumps_ok}, bit-identical x3 (incl. python -O) {identical}, "
                      f"slowest {slowest:.2f}s (<10s at 1024x1024)")
    assert ok, [p.stderr for _, p, _ in runs]


def test_c4_blur_ladder(face_raster):
    result = pipeline.blur_ladder(face_raster, pipeline.DEFAULT_LADDER_RADII)
    variances = [float(im.data.var()) for im in result.images]
    monotone = all(a >= b for a, b in zip(variances, variances[1:]))
    # 7 tiles: 3 columns x 3 rows, 8 px gutters
    expected = (3 * 1024 + 4 * 8, 3 * 1024 + 4 * 8)
    sheet_ok = result.sheet.shape == expected == pipeline.contact_sheet_size(7, 1024, 1024)[::-1]
    ok = len(result.images) == 7 and monotone and sheet_ok
    record_acceptance("C4 blur ladder {0,10,20,50,100,150,200}", ok,
                      f"variance non-increasing {monotone}, sheet {result.sheet.shape} == {expected} {sheet_ok}")
    assert ok


def test_c5_illumination_invariance(face):
    m = fixtures.manifest()
    floor = m["oracle"]["eye_margin_floor"]
    t0 = time.perf_counter()
    azimuths = parse_azimuths(m["sweep"]["azimuths"])
    results = illumination_sweep(face.heightmap, azimuths, m["sweep"]["elevation_deg"], fixtures.reveal_params())
    margins = [(az, [p.margin(img) for p in face.probes]) for az, img in results]
    elapsed = time.perf_counter() - t0
    lowest = min(v for _, ms in margins for v in ms)
    ok = len(results) == 12 and lowest > 0 and lowest >= floor and elapsed < 60.0
    record_acceptance("C5 eye margins over 12 azimuths", ok,
                      f"min margin {lowest:.4f} (>0, floor {floor}), {elapsed:.1f}s (<60s)")
    assert ok, margins


def test_c6_persistence(face):
    m = fixtures.manifest()["oracle"]
    light = fixtures.render_light()
    blur = fixtures.reveal_params().blur_radius_px
    t0 = time.perf_counter()
    heavy = persistence_report(face.heightmap, erode(face.heightmap, fixtures.erosion_params("crater_heavy")),
                               light, blur)
    mild = persistence_report(face.heightmap, erode(face.heightmap, fixtures.erosion_params("diffusion_only")),
                              light, blur)
    elapsed = time.perf_counter() - t0
    ok = (heavy.ncc_blurred >= heavy.ncc_sharp
          and heavy.persistence_gap >= m["persistence_gap_floor"]
          and mild.ncc_blurred >= m["diffusion_ncc_blurred_floor"]
          and elapsed < 30.0)
    record_acceptance("C6 persistence under erosion", ok,
                      f"craters: sharp {heavy.ncc_sharp:.3f} blurred {heavy.ncc_blurred:.3f} gap "
                      f"{heavy.persistence_gap:.3f} (>=0.1); diffusion: blurred {mild.ncc_blurred:.3f} (>=0.9); "
                      f"{elapsed:.1f}s (<30s)")
    assert ok


def test_c7_symmetry_axis():
    step = 1.0
    built = 60.0
    img = fixtures.mirror_blobs(192, built, seed=17)
    axis, score = best_symmetry_axis(img, step)
    turned_axis, turned_score = best_symmetry_axis(fixtures.rotate_raster(img, 30.0), step)
    shift = (turned_axis - axis) % 180.0
    ok = abs(axis - built) <= step and score >= 0.99 and abs(shift - 30.0) <= step
    record_acceptance("C7 symmetry axis recovery", ok,
                      f"axis {axis} (built {built}) score {score:.4f} (>=0.99); rotated 30 -> {turned_axis} "
                      f"(shift {shift}, score {turned_score:.4f})")
    assert ok


def test_c8_round_trip_and_identities(face_raster):
    fx = [face_raster, fixtures.mirror_blobs(96, 60.0, seed=3), noise_raster(5, 64),
          fixtures.face_raster(128, 128)]
    worst = {255: 0.0, 65535: 0.0}
    identities = True
    for img in fx:
        for maxval in worst:
            back = load_pgm(save_pgm(img, maxval))
            worst[maxval] = max(worst[maxval], float(np.max(np.abs(back.data - img.data))) * maxval)
        identities &= filters.invert(filters.invert(img)) == img
        identities &= filters.levels(img, LevelsParams(0.0, 1.0, 1.0)) == img
        identities &= filters.overlay_blend(img, filters.invert(img), 0.0) == img
        identities &= filters.unsharp_mask(img, 5, 0.0) == img
    rt_ok = all(v <= 0.5 + 1e-9 for v in worst.values())
    ok = rt_ok and identities
    record_acceptance("C8 round trip and exact identities", ok,
                      f"max quantization err x maxval {max(worst.values()):.3f} (<=0.5), identities exact {identities}")
    assert ok


BAD_SCRIPTS = ["blurr radius=10", "blur radius=ten", "levels gamma 2"]
BAD_PGMS = [b"P7 1 1 255\n\x00", b"P5 2 2 1000\n\x00\x00\x00\x00", b"P5 2 2 255\n\x00"]


def test_c9_parser_errors(tmp_path):
    img = tmp_path / "ok.pgm"
    write_pgm(noise_raster(1, 8), img)
    outcomes = []
    for i, text in enumerate(BAD_SCRIPTS):
        script = tmp_path / f"bad{i}.pipe"
        script.write_text(text)
        proc = subprocess.run([sys.executable, "-m", "macroreveal", "run", str(script), str(img),
                               str(tmp_path / "o.pgm")], capture_output=True, text=True)
        lines = proc.stderr.strip().splitlines()
        outcomes.append(proc.returncode == 1 and len(lines) == 1 and "line 1, column" in lines[0])
    for i, data in enumerate(BAD_PGMS):
        bad = tmp_path / f"bad{i}.pgm"
        bad.write_bytes(data)
        proc = subprocess.run([sys.executable, "-m", "macroreveal", "invert", str(bad), str(tmp_path / "o.pgm")],
                              capture_output=True, text=True)
        lines = proc.stderr.strip().splitlines()
        outcomes.append(proc.returncode == 1 and len(lines) == 1 and "byte offset" in lines[0])
    ok = all(outcomes)
    record_acceptance("C9 parser errors", ok, f"{sum(outcomes)}/6 cases exit 1 with located one-line messages")
    assert ok
