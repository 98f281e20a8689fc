"""Geometric discord and measurement-induced nonlocality of bound entangled states."""
from .bloch import BlochForm, decompose, generators, gram, reconstruct
from .entanglement import Regime, classify_horodecki_3x3, is_ppt, negativity, partial_transpose
from .errors import (
    DegeneracyError,
    DimensionError,
    DomainError,
    InvalidMeasurementError,
    QcorrError,
    SpecParseError,
    UnsupportedDimensionError,
)
from .measures import (
    Kind,
    MeasureEstimate,
    Measurement,
    apply_measurement,
    closed_forms,
    gd_candidate_3x3,
    gd_exact,
    gd_exact_2xn,
    gd_lower_bound,
    marginal,
    min_exact,
    min_exact_2d_block,
    min_exact_nondegenerate,
    min_upper_bound,
    normalized_distance,
    preserves_marginal,
)
from .optimizer import SampleReport, SamplerConfig, haar_unitary, histogram, sample_gd, sample_min
from .states import (
    DensityMatrix,
    Family,
    StateSpec,
    benatti_4x4,
    horodecki_2x4,
    horodecki_3x3,
    horodecki_4x4_key,
    isotropic,
    reinterpret,
    upb_pyramid,
    upb_tiles,
    validate,
    werner,
)

__version__ = "0.1.0"
