"""Macro-scale feature reveal: blur ladders, edge overlays and terrain persistence metrics."""

from .errors import (
    ImageTooSmall,
    InvalidParameter,
    NumericError,
    ParseError,
    RevealError,
    ShapeError,
    TruncatedData,
    UnsupportedFormat,
    ValidationError,
)
from .filters import (
    Kernel1D,
    LevelsParams,
    autocontrast,
    gaussian_blur,
    gaussian_kernel,
    invert,
    levels,
    overlay_blend,
    sobel_magnitude,
    unsharp_mask,
)
from .metrics import (
    FeatureSpec,
    MetricsReport,
    best_symmetry_axis,
    feature_margin,
    ncc,
    persistence_report,
    symmetry_score,
)
from .pipeline import (
    DEFAULT_LADDER_RADII,
    PipelineSpec,
    RevealParams,
    Step,
    blur_ladder,
    parse_pipeline_script,
    reveal,
    run_pipeline,
)
from .raster import Heightmap, Raster, clamp_unit, load_pgm, save_pgm
from .terrain import (
    ErosionParams,
    Feature,
    LightSpec,
    TerrainParams,
    carve_features,
    erode,
    hillshade,
    illumination_sweep,
    synth_mound,
)

__version__ = "0.1.0"
