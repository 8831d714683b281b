"""Declarative filter pipelines, the reveal procedure and blur ladders.

Script format, one step per line::

    # comment
    blur radius=150 as blurred
    autocontrast low=1 high=1 as enhanced
    sobel
    levels black=0 white=max gamma=0.5 as edges
    invert
    autocontrast low=1 high=1 as inverted_edges
    overlay opacity=0.09 from enhanced with inverted_edges

``as NAME`` keeps the step's output as a labeled intermediate, ``from NAME``
takes the step's input from an earlier label instead of the previous step,
and ``with NAME`` names the second operand (the top layer) of ``overlay``.
The label ``input`` always refers to the pipeline's input image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import filters
from .errors import InvalidParameter, ValidationError
from .raster import Raster

DEFAULT_LADDER_RADII = (0, 10, 20, 50, 100, 150, 200)
CONTACT_SHEET_GUTTER = 8
INPUT_LABEL = "input"


# -- registry -----------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    default: object = None
    required: bool = False
    check: Callable[[float], bool] = lambda v: math.isfinite(v)
    rule: str = "finite number"
    keywords: tuple[str, ...] = ()


@dataclass(frozen=True)
class OpDef:
    params: dict[str, Param]
    needs_operand: bool = False


def _nonneg(v):
    return math.isfinite(v) and v >= 0


OPS: dict[str, OpDef] = {
    "blur": OpDef({"radius": Param(required=True, check=lambda v: v == 0 or (math.isfinite(v) and v >= 1),
                                   rule="0 or a number >= 1")}),
    "levels": OpDef({
        "black": Param(0.0, check=lambda v: 0 <= v < 1, rule="number in [0, 1)"),
        "white": Param(1.0, check=lambda v: 0 < v <= 1, rule="number in (0, 1] or 'max'",
                       keywords=("max",)),
        "gamma": Param(1.0, check=lambda v: math.isfinite(v) and v > 0, rule="positive number"),
    }),
    "autocontrast": OpDef({
        "low": Param(0.0, check=_nonneg, rule="non-negative number"),
        "high": Param(0.0, check=_nonneg, rule="non-negative number"),
    }),
    "sobel": OpDef({}),
    "invert": OpDef({}),
    "unsharp": OpDef({
        "radius": Param(required=True, check=lambda v: math.isfinite(v) and v >= 1, rule="number >= 1"),
        "amount": Param(required=True, check=_nonneg, rule="non-negative number"),
    }),
    "overlay": OpDef({"opacity": Param(required=True, check=lambda v: 0 <= v <= 1,
                                       rule="number in [0, 1]")}, needs_operand=True),
    "clamp": OpDef({}),
}


@dataclass(frozen=True)
class Step:
    name: str
    params: dict = field(default_factory=dict)
    label: str | None = None
    operand: str | None = None
    source: str | None = None
    line: int | None = None

    def param(self, key):
        if key in self.params:
            return self.params[key]
        return OPS[self.name].params[key].default


@dataclass(frozen=True)
class PipelineSpec:
    steps: tuple[Step, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        self.validate()

    def validate(self) -> None:
        """Check names, parameters and label references without running anything."""
        labels = {INPUT_LABEL}
        for i, step in enumerate(self.steps, 1):
            line = step.line if step.line is not None else i
            op = OPS.get(step.name)
            if op is None:
                raise ValidationError(f"unknown op {step.name!r}", line, 1)
            for key, value in step.params.items():
                spec = op.params.get(key)
                if spec is None:
                    raise ValidationError(f"{step.name}: unknown parameter {key!r}", line)
                if isinstance(value, str):
                    if value not in spec.keywords:
                        raise ValidationError(f"{step.name}: {key} must be a {spec.rule}", line)
                elif not spec.check(float(value)):
                    raise ValidationError(f"{step.name}: {key}={value} must be a {spec.rule}", line)
            for key, spec in op.params.items():
                if spec.required and key not in step.params:
                    raise ValidationError(f"{step.name}: missing required parameter {key!r}", line)
            if step.name == "levels":
                black, white = step.param("black"), step.param("white")
                if not isinstance(white, str) and not black < white:
                    raise ValidationError("levels: black must be below white", line)
            if step.name == "autocontrast" and step.param("low") + step.param("high") >= 100:
                raise ValidationError("autocontrast: low + high must be below 100", line)
            if op.needs_operand and step.operand is None:
                raise ValidationError(f"{step.name}: needs 'with <label>'", line)
            if not op.needs_operand and step.operand is not None:
                raise ValidationError(f"{step.name}: does not take 'with'", line)
            for ref in (step.operand, step.source):
                if ref is not None and ref not in labels:
                    raise ValidationError(f"{step.name}: unknown label {ref!r}", line)
            if step.label is not None:
                if step.label == INPUT_LABEL:
                    raise ValidationError(f"label {INPUT_LABEL!r} is reserved", line)
                labels.add(step.label)


@dataclass(frozen=True)
class PipelineResult:
    output: Raster
    intermediates: dict[str, Raster]


def levels_to_max(img: Raster, gamma: float, black: float = 0.0) -> Raster:
    """Levels with the white point at the image maximum.

    An image whose maximum does not exceed ``black`` carries no signal and
    maps to all zeros.
    """
    top = float(img.data.max())
    if top <= black:
        return Raster(np.zeros(img.shape))
    return filters.levels(img, filters.LevelsParams(black, top, gamma))


def apply_step(step: Step, img: Raster, labels: dict[str, Raster]) -> Raster:
    name = step.name
    if name == "blur":
        return filters.gaussian_blur(img, step.param("radius"))
    if name == "levels":
        black, white, gamma = step.param("black"), step.param("white"), step.param("gamma")
        if white == "max":
            return levels_to_max(img, gamma, black)
        return filters.levels(img, filters.LevelsParams(black, white, gamma))
    if name == "autocontrast":
        return filters.autocontrast(img, step.param("low"), step.param("high"))
    if name == "sobel":
        return filters.sobel_magnitude(img)
    if name == "invert":
        return filters.invert(img)
    if name == "unsharp":
        return filters.unsharp_mask(img, step.param("radius"), step.param("amount"))
    if name == "overlay":
        return filters.overlay_blend(img, labels[step.operand], step.param("opacity"))
    if name == "clamp":
        return img
    raise ValidationError(f"unknown op {name!r}", step.line)


def run_pipeline(img: Raster, spec: PipelineSpec) -> PipelineResult:
    """Apply ``spec`` to ``img`` in order, keeping labeled intermediates."""
    spec.validate()
    labels = {INPUT_LABEL: img}
    current = img
    for step in spec.steps:
        src = labels[step.source] if step.source is not None else current
        current = apply_step(step, src, labels)
        if step.label is not None:
            labels[step.label] = current
    del labels[INPUT_LABEL]
    return PipelineResult(current, labels)


# -- script parsing -------------------------------------------------------------


def _tokens(line: str):
    """Yield (column, token) pairs, columns 1-based, stopping at '#'."""
    i, n = 0, len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        if line[i] == "#":
            return
        j = i
        while j < n and not line[j].isspace() and line[j] != "#":
            j += 1
        yield i + 1, line[i:j]
        i = j


def _parse_value(raw: str, spec: Param, lineno: int, col: int, key: str, op: str):
    if raw in spec.keywords:
        return raw
    try:
        value = float(raw)
    except ValueError:
        raise ValidationError(f"{op}: bad value {raw!r} for {key}, expected {spec.rule}", lineno, col) from None
    if not spec.check(value):
        raise ValidationError(f"{op}: {key}={raw} out of range, expected {spec.rule}", lineno, col)
    return value


def parse_pipeline_script(text: str) -> PipelineSpec:
    """Parse the line-oriented script format into a validated spec.

    Errors carry 1-based line and column numbers.
    """
    steps = []
    for lineno, line in enumerate(text.splitlines(), 1):
        toks = list(_tokens(line))
        if not toks:
            continue
        col, name = toks[0]
        op = OPS.get(name)
        if op is None:
            raise ValidationError(f"unknown op {name!r}", lineno, col)
        params, label, operand, source = {}, None, None, None
        rest = toks[1:]
        k = 0
        while k < len(rest):
            col, tok = rest[k]
            if tok in ("as", "with", "from"):
                if k + 1 >= len(rest):
                    raise ValidationError(f"'{tok}' needs a label name", lineno, col)
                ref = rest[k + 1][1]
                if not ref.isidentifier():
                    raise ValidationError(f"bad label name {ref!r}", lineno, rest[k + 1][0])
                if tok == "as":
                    label = ref
                elif tok == "with":
                    operand = ref
                else:
                    source = ref
                k += 2
                continue
            key, eq, raw = tok.partition("=")
            if not eq or not key or not raw:
                raise ValidationError(f"expected key=value, got {tok!r}", lineno, col)
            spec = op.params.get(key)
            if spec is None:
                raise ValidationError(f"{name}: unknown parameter {key!r}", lineno, col)
            if key in params:
                raise ValidationError(f"{name}: duplicate parameter {key!r}", lineno, col)
            params[key] = _parse_value(raw, spec, lineno, col + len(key) + 1, key, name)
            k += 1
        steps.append(Step(name, params, label, operand, source, lineno))
    return PipelineSpec(tuple(steps))


def format_pipeline_script(spec: PipelineSpec) -> str:
    lines = []
    for step in spec.steps:
        parts = [step.name]
        parts += [f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in step.params.items()]
        if step.source:
            parts += ["from", step.source]
        if step.operand:
            parts += ["with", step.operand]
        if step.label:
            parts += ["as", step.label]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


# -- reveal ----------------------------------------------------------------------


@dataclass(frozen=True)
class RevealParams:
    blur_radius_px: float = 150
    edge_opacity: float = 0.09
    contrast_clip_pcts: tuple[float, float] = (1.0, 1.0)
    edge_gamma: float = 0.5

    def __post_init__(self):
        if not (self.blur_radius_px >= 1 and math.isfinite(self.blur_radius_px)):
            raise InvalidParameter(f"blur radius must be >= 1, got {self.blur_radius_px}")
        if not (0.0 <= self.edge_opacity <= 1.0):
            raise InvalidParameter(f"edge opacity must lie in [0, 1], got {self.edge_opacity}")
        lo, hi = self.contrast_clip_pcts
        if not (lo >= 0 and hi >= 0 and lo + hi < 100):
            raise InvalidParameter(f"bad clip percentages {lo}/{hi}")
        if not (self.edge_gamma > 0 and math.isfinite(self.edge_gamma)):
            raise InvalidParameter(f"edge gamma must be positive, got {self.edge_gamma}")


REVEAL_INTERMEDIATES = ("blurred", "enhanced", "edges", "inverted_edges")


def reveal(img: Raster, p: RevealParams = RevealParams()) -> PipelineResult:
    """Blur, stretch, extract boosted inverted edges and overlay them back.

    Intermediates: ``blurred``, ``enhanced`` (stretched blur, the base layer),
    ``edges`` (gamma-boosted Sobel magnitude of ``enhanced``) and
    ``inverted_edges`` (the stretched inverse, the overlay layer).
    """
    lo, hi = p.contrast_clip_pcts
    blurred = filters.gaussian_blur(img, p.blur_radius_px)
    enhanced = filters.autocontrast(blurred, lo, hi)
    edges = levels_to_max(filters.sobel_magnitude(enhanced), p.edge_gamma)
    inverted = filters.autocontrast(filters.invert(edges), lo, hi)
    out = filters.overlay_blend(enhanced, inverted, p.edge_opacity)
    return PipelineResult(
        out,
        {"blurred": blurred, "enhanced": enhanced, "edges": edges, "inverted_edges": inverted},
    )


def reveal_spec(p: RevealParams = RevealParams()) -> PipelineSpec:
    """The reveal procedure as a pipeline; running it matches :func:`reveal` bit for bit."""
    lo, hi = (float(v) for v in p.contrast_clip_pcts)
    return PipelineSpec((
        Step("blur", {"radius": float(p.blur_radius_px)}, label="blurred"),
        Step("autocontrast", {"low": lo, "high": hi}, label="enhanced"),
        Step("sobel"),
        Step("levels", {"black": 0.0, "white": "max", "gamma": float(p.edge_gamma)}, label="edges"),
        Step("invert"),
        Step("autocontrast", {"low": lo, "high": hi}, label="inverted_edges"),
        Step("overlay", {"opacity": float(p.edge_opacity)}, operand="inverted_edges", source="enhanced"),
    ))


# -- blur ladder -------------------------------------------------------------------


def contact_sheet_size(n: int, tile_w: int, tile_h: int, gutter: int = CONTACT_SHEET_GUTTER):
    """(width, height) of the montage for ``n`` tiles.

    cols = ceil(sqrt(n)), rows = ceil(n / cols);
    width = cols * tile_w + (cols + 1) * gutter, height likewise with rows.
    """
    cols = math.isqrt(n - 1) + 1 if n > 0 else 0
    rows = -(-n // cols) if cols else 0
    return cols * tile_w + (cols + 1) * gutter, rows * tile_h + (rows + 1) * gutter


def contact_sheet(images, gutter: int = CONTACT_SHEET_GUTTER) -> Raster:
    """Row-major grid montage on a white (1.0) background."""
    images = list(images)
    if not images:
        raise InvalidParameter("contact sheet needs at least one image")
    h, w = images[0].shape
    if any(im.shape != (h, w) for im in images):
        raise InvalidParameter("contact sheet tiles must share one size")
    cols = math.isqrt(len(images) - 1) + 1
    width, height = contact_sheet_size(len(images), w, h, gutter)
    sheet = np.ones((height, width))
    for i, im in enumerate(images):
        r, c = divmod(i, cols)
        y = gutter + r * (h + gutter)
        x = gutter + c * (w + gutter)
        sheet[y : y + h, x : x + w] = im.data
    return Raster(sheet)


@dataclass(frozen=True)
class LadderResult:
    radii: tuple[float, ...]
    images: tuple[Raster, ...]
    sheet: Raster


def blur_ladder(img: Raster, radii=DEFAULT_LADDER_RADII) -> LadderResult:
    radii = tuple(radii)
    if not radii:
        raise InvalidParameter("blur ladder needs at least one radius")
    images = tuple(filters.gaussian_blur(img, r) for r in radii)
    return LadderResult(radii, images, contact_sheet(images))
