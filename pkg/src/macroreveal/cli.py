"""Command-line entry point.

Exit status: 0 success, 1 validation/parse error, 2 I/O error, 3 numeric error.
Failures print one ``macroreveal: error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import filters, fixtures, metrics, pipeline, terrain
from .errors import InvalidParameter, RevealError
from .raster import Heightmap, read_heightmap, read_pgm, write_heightmap, write_pgm

PROG = "macroreveal"
EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this tool reserves 2 for I/O."""

    def error(self, message):
        raise UsageError(f"{message} (usage: {self.format_usage().strip().removeprefix('usage: ')})")


class DefaultsFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Append defaults, except where the help text already explains them."""

    def _get_help_string(self, action):
        text = action.help or ""
        if "default" in text or action.default is None:
            return text
        return super()._get_help_string(action)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _range(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {text!r}")
    return vals[0], vals[1]


def _radius_tag(r: float) -> str:
    return f"{int(r):03d}" if float(r).is_integer() else f"{r:07.2f}"


# -- probes stored in .hmap sidecars --------------------------------------------------


def _write_hmap(h: Heightmap, path, probes=()):
    extra = [("probe", f"{p.id} {p.x!r} {p.y!r} {p.r_inner!r} {p.r_outer!r}") for p in probes]
    write_heightmap(h, path, extra)


def _probes_from_meta(meta: dict) -> list[metrics.FeatureSpec]:
    out = []
    for line in meta.get("probe", "").splitlines():
        parts = line.split()
        if len(parts) != 5:
            raise InvalidParameter(f"bad probe entry {line!r}")
        out.append(metrics.FeatureSpec(parts[0], *(float(v) for v in parts[1:])))
    return out


def _probe_arg(text: str) -> metrics.FeatureSpec:
    parts = text.split(",")
    try:
        if len(parts) != 5:
            raise ValueError
        return metrics.FeatureSpec(parts[0], *(float(v) for v in parts[1:]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected id,x,y,r_inner,r_outer, got {text!r}") from None


# -- subcommands --------------------------------------------------------------------------


def cmd_blur(a):
    write_pgm(filters.gaussian_blur(read_pgm(a.input), a.radius), a.output, a.maxval)


def cmd_ladder(a):
    result = pipeline.blur_ladder(read_pgm(a.input), a.radii)
    out = Path(a.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for r, img in zip(result.radii, result.images):
        write_pgm(img, out / f"blur_{_radius_tag(r)}.pgm", a.maxval)
    write_pgm(result.sheet, out / "contact_sheet.pgm", a.maxval)


def cmd_edges(a):
    write_pgm(filters.sobel_magnitude(read_pgm(a.input)), a.output, a.maxval)


def cmd_invert(a):
    write_pgm(filters.invert(read_pgm(a.input)), a.output, a.maxval)


def cmd_levels(a):
    p = filters.LevelsParams(a.black, a.white, a.gamma)
    write_pgm(filters.levels(read_pgm(a.input), p), a.output, a.maxval)


def cmd_autocontrast(a):
    write_pgm(filters.autocontrast(read_pgm(a.input), a.clip_low, a.clip_high), a.output, a.maxval)


def cmd_unsharp(a):
    write_pgm(filters.unsharp_mask(read_pgm(a.input), a.radius, a.amount), a.output, a.maxval)


def cmd_composite(a):
    if a.mode != "overlay":
        raise InvalidParameter(f"unsupported blend mode {a.mode!r}")
    out = filters.overlay_blend(read_pgm(a.base), read_pgm(a.top), a.opacity)
    write_pgm(out, a.output, a.maxval)


def _dump(result: pipeline.PipelineResult, directory, stem, maxval):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for label, img in result.intermediates.items():
        write_pgm(img, d / f"{stem}.{label}.pgm", maxval)


def cmd_reveal(a):
    p = pipeline.RevealParams(a.blur, a.opacity, (a.clip_low, a.clip_high), a.edge_gamma)
    result = pipeline.reveal(read_pgm(a.input), p)
    write_pgm(result.output, a.output, a.maxval)
    if a.dump_intermediates:
        _dump(result, a.dump_intermediates, Path(a.input).stem, a.maxval)


def cmd_run(a):
    spec = pipeline.parse_pipeline_script(Path(a.script).read_text())
    result = pipeline.run_pipeline(read_pgm(a.input), spec)
    write_pgm(result.output, a.output, a.maxval)
    if a.dump_intermediates:
        _dump(result, a.dump_intermediates, Path(a.input).stem, a.maxval)


def cmd_synth_face(a):
    face = fixtures.face_fixture(a.width, a.height, a.seed, a.eye_depth, a.eye_radius,
                                 a.peak_height, a.noise, a.axis)
    _write_hmap(face.heightmap, a.output, face.probes)


def cmd_hillshade(a):
    h, _ = read_heightmap(a.input)
    write_pgm(terrain.hillshade(h, terrain.LightSpec(a.azimuth, a.elevation)), a.output, a.maxval)


def cmd_erode(a):
    h, meta = read_heightmap(a.input)
    p = terrain.ErosionParams(a.steps, a.rate, a.craters, a.crater_radius, a.crater_depth, a.seed)
    _write_hmap(terrain.erode(h, p), a.output, _probes_from_meta(meta))


def cmd_sweep(a):
    h, meta = read_heightmap(a.input)
    probes = a.probe or _probes_from_meta(meta)
    azimuths = terrain.parse_azimuths(a.azimuths)
    p = pipeline.RevealParams(a.blur, a.opacity, (a.clip_low, a.clip_high), a.edge_gamma)
    results = terrain.illumination_sweep(h, azimuths, a.elevation, p)
    out = Path(a.outdir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for az, img in results:
        write_pgm(img, out / f"sweep_az{_radius_tag(az)}.pgm", a.maxval)
        rows.append((az, [f.margin(img) for f in probes]))
    lines = [f"elevation_deg = {a.elevation!r}", f"blur_radius_px = {a.blur!r}"]
    for az, margins in rows:
        for f, m in zip(probes, margins):
            lines.append(f"margin.az{_radius_tag(az)}.{f.id} = {m!r}")
    all_margins = [m for _, ms in rows for m in ms]
    if all_margins:
        lines.append(f"min_margin = {min(all_margins)!r}")
    text = "\n".join(lines) + "\n"
    if a.report:
        Path(a.report).write_text(text)
    else:
        sys.stdout.write(text)
    if a.table:
        Path(a.table).write_text(metrics.sweep_table(rows, [f.id for f in probes]))


def cmd_symmetry(a):
    axis, score = metrics.best_symmetry_axis(read_pgm(a.input), a.step)
    print(f"axis_deg = {axis!r}")
    print(f"score = {score!r}")


def cmd_persist(a):
    h, meta = read_heightmap(a.original)
    e, _ = read_heightmap(a.eroded)
    light = terrain.LightSpec(a.azimuth, a.elevation)
    probes = a.probe or _probes_from_meta(meta)
    report = metrics.persistence_report(h, e, light, a.blur, probes, a.symmetry_step)
    if a.report:
        Path(a.report).write_text(report.to_text())
    else:
        sys.stdout.write(report.to_text())
    if a.table:
        Path(a.table).write_text(report.to_table())


# -- parser -----------------------------------------------------------------------------------


def _add_io(p, *names):
    for n in names:
        p.add_argument(n)


def _add_maxval(p):
    p.add_argument("--maxval", type=int, choices=(255, 65535), default=255,
                   help="output PGM maxval (default: %(default)s)")


def _add_reveal_opts(p):
    p.add_argument("--blur", type=float, default=150, help="blur radius in pixels (default: %(default)s)")
    p.add_argument("--opacity", type=float, default=0.09, help="edge overlay opacity (default: %(default)s)")
    p.add_argument("--edge-gamma", type=float, default=0.5, help="edge boost gamma (default: %(default)s)")
    p.add_argument("--clip-low", type=float, default=1.0, help="autocontrast low clip %% (default: %(default)s)")
    p.add_argument("--clip-high", type=float, default=1.0, help="autocontrast high clip %% (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    fmt = DefaultsFormatter
    parser = Parser(prog=PROG, description="Reveal macro-scale structure in high-resolution imagery.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("blur", help="Gaussian blur (sigma = radius/3)", formatter_class=fmt)
    p.add_argument("--radius", type=float, required=True, help="blur radius in pixels; 0 copies the input")
    _add_io(p, "input", "output"); _add_maxval(p)
    p.set_defaults(func=cmd_blur)

    p = sub.add_parser("ladder", help="blur at a series of radii plus a contact sheet", formatter_class=fmt)
    p.add_argument("--radii", type=_floats, default=",".join(str(r) for r in pipeline.DEFAULT_LADDER_RADII),
                   help="comma-separated radii")
    _add_io(p, "input", "outdir"); _add_maxval(p)
    p.set_defaults(func=cmd_ladder)

    p = sub.add_parser("edges", help="normalized Sobel gradient magnitude")
    _add_io(p, "input", "output"); _add_maxval(p)
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("invert", help="s -> 1 - s")
    _add_io(p, "input", "output"); _add_maxval(p)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("levels", help="black/white point and gamma", formatter_class=fmt)
    p.add_argument("--black", type=float, default=0.0, help="input black point")
    p.add_argument("--white", type=float, default=1.0, help="input white point")
    p.add_argument("--gamma", type=float, default=1.0, help="output is x ** (1/gamma)")
    _add_io(p, "input", "output"); _add_maxval(p)
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("autocontrast", help="percentile-clipped linear stretch", formatter_class=fmt)
    p.add_argument("--clip-low", type=float, default=1.0, help="percent of samples clipped to black")
    p.add_argument("--clip-high", type=float, default=1.0, help="percent of samples clipped to white")
    _add_io(p, "input", "output"); _add_maxval(p)
    p.set_defaults(func=cmd_autocontrast)

    p = sub.add_parser("unsharp", help="unsharp mask", formatter_class=fmt)
    p.add_argument("--radius", type=float, required=True, help="blur radius of the mask")
    p.add_argument("--amount", type=float, default=1.0, help="weight of the detail layer")
    _add_io(p, "input", "output"); _add_maxval(p)
    p.set_defaults(func=cmd_unsharp)

    p = sub.add_parser("composite", help="blend top onto base", formatter_class=fmt)
    p.add_argument("--mode", default="overlay", choices=("overlay",), help="blend mode")
    p.add_argument("--opacity", type=float, default=0.09, help="opacity of the top layer")
    _add_io(p, "base", "top", "output"); _add_maxval(p)
    p.set_defaults(func=cmd_composite)

    p = sub.add_parser("reveal", help="blur, enhance, overlay inverted edges", formatter_class=fmt)
    _add_reveal_opts(p)
    p.add_argument("--dump-intermediates", metavar="DIR",
                   help="write <input stem>.<label>.pgm for each intermediate")
    _add_io(p, "input", "output"); _add_maxval(p)
    p.set_defaults(func=cmd_reveal)

    p = sub.add_parser("run", help="run a pipeline script")
    p.add_argument("--dump-intermediates", metavar="DIR", help="write every labeled intermediate")
    _add_io(p, "script", "input", "output"); _add_maxval(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth-face", help="write the synthetic face heightmap (.hmap + .meta)",
                       formatter_class=fmt)
    p.add_argument("--width", type=int, default=1024, help="grid width in pixels")
    p.add_argument("--height", type=int, default=1024, help="grid height in pixels")
    p.add_argument("--seed", type=int, default=None, help="noise seed (default: manifest seed)")
    p.add_argument("--eye-depth", type=float, default=None, help="signed eye depth (default: manifest, scaled)")
    p.add_argument("--eye-radius", type=float, default=None, help="eye bump scale in pixels (default: manifest, scaled)")
    p.add_argument("--peak-height", type=float, default=None, help="mound height (default: manifest, scaled)")
    p.add_argument("--noise", type=float, default=None, help="noise amplitude (default: manifest, scaled)")
    p.add_argument("--axis", type=float, default=None, help="ridge axis in degrees (default: manifest)")
    _add_io(p, "output")
    p.set_defaults(func=cmd_synth_face)

    p = sub.add_parser("hillshade", help="Lambertian render of a heightmap", formatter_class=fmt)
    p.add_argument("--azimuth", type=float, default=315.0, help="compass bearing of the light")
    p.add_argument("--elevation", type=float, default=35.0, help="light elevation in degrees")
    _add_io(p, "input", "output"); _add_maxval(p)
    p.set_defaults(func=cmd_hillshade)

    p = sub.add_parser("erode", help="diffusion smoothing then random craters", formatter_class=fmt)
    p.add_argument("--steps", type=int, default=200, help="diffusion steps")
    p.add_argument("--rate", type=float, default=0.25, help="diffusion rate, at most 0.25")
    p.add_argument("--craters", type=int, default=0, help="number of crater impacts")
    p.add_argument("--crater-radius", type=_range, default=(3.0, 10.0), help="lo,hi")
    p.add_argument("--crater-depth", type=_range, default=(5.0, 20.0), help="lo,hi")
    p.add_argument("--seed", type=int, default=0, help="crater placement seed")
    _add_io(p, "input", "output")
    p.set_defaults(func=cmd_erode)

    p = sub.add_parser("sweep", help="reveal a heightmap under many light azimuths", formatter_class=fmt)
    p.add_argument("--azimuths", default="0:360:30", help="start:stop:step (stop exclusive) or a,b,c")
    p.add_argument("--elevation", type=float, default=35.0, help="light elevation in degrees")
    _add_reveal_opts(p)
    p.add_argument("--probe", type=_probe_arg, action="append",
                   help="id,x,y,r_inner,r_outer (default: probes in the .meta sidecar)")
    p.add_argument("--report", help="key = value report path (default: stdout)")
    p.add_argument("--table", help="tab-separated margin table path")
    _add_io(p, "input", "outdir"); _add_maxval(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("symmetry", help="best mirror axis and its score", formatter_class=fmt)
    p.add_argument("--step", type=float, default=1.0, help="axis search step in degrees")
    _add_io(p, "input")
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("persist", help="sharp vs blurred similarity after erosion", formatter_class=fmt)
    p.add_argument("--blur", type=float, default=150, help="blur radius in pixels")
    p.add_argument("--azimuth", type=float, default=315.0, help="compass bearing of the light")
    p.add_argument("--elevation", type=float, default=35.0, help="light elevation in degrees")
    p.add_argument("--probe", type=_probe_arg, action="append",
                   help="id,x,y,r_inner,r_outer (default: probes in the original's sidecar)")
    p.add_argument("--symmetry-step", type=float, default=None, help="also search the mirror axis")
    p.add_argument("--report", help="key = value report path (default: stdout)")
    p.add_argument("--table", help="tab-separated report path")
    _add_io(p, "original", "eroded")
    p.set_defaults(func=cmd_persist)
    return parser


def _fail(code: int, message: str) -> int:
    print(f"{PROG}: error: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_VALIDATION, exc)
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    try:
        args.func(args)
    except RevealError as exc:
        return _fail(exc.exit_code, f"{type(exc).__name__}: {exc}")
    except OSError as exc:
        return _fail(EXIT_IO, f"{type(exc).__name__}: {exc}")
    except (FloatingPointError, OverflowError) as exc:
        return _fail(EXIT_NUMERIC, f"{type(exc).__name__}: {exc}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
