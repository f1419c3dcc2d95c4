"""Intrinsic volumes and Hadwiger integrals of excursion sets of Gaussian-related random fields."""

from .cubical import (
    CubicalSet,
    GridSpec,
    box_intrinsic_volumes,
    excursion_complex,
    half_open_cube,
    intrinsic_volumes,
    polygonized_mu1,
)
from .errors import (
    DegenerateLevelError,
    EmbeddingError,
    NumericalError,
    QuadratureError,
    UnsupportedTransformError,
)
from .fields import CovarianceModel, FieldSpec, TransformSpec, apply_transform, simulate, transform_mean
from .gkf import DomainSummary, expected_hadwiger, expected_intrinsic_volume, expected_valuation
from .gmf import IntervalUnion, gmf_chi2, gmf_integral, gmf_real, gmf_superlevel, superlevel_intervals
from .hadwiger import (
    CellFunction,
    GridFunction,
    SweepSettings,
    ValuationSpec,
    finite_image_integral,
    lower_integral,
    upper_integral,
    valuation_eval,
)
from .harness import ConfigError, ExperimentConfig, ReportRow, load_config, run_validation
from .piecewise import Piecewise1D

__version__ = "0.1.0"
