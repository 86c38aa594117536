"""Summation methods for non-harmonic Fourier series on the Paley-Wiener side."""

from pwsum.blaschke import BlaschkeEvaluator, DiskFamily, hayman_scan, upper_lower_evaluators
from pwsum.contours import ContourSchedule, TriangleContour, build_schedule, lambda_inside
from pwsum.diagnostics import a2_estimate, carleson_sup, intG_check
from pwsum.engine import (
    LagrangeSum,
    PWFunction,
    SummationContext,
    build_lagrange_sum,
    compactwise_error,
    eval_pw,
    l2_error,
    operator_norm_probe,
    partial_sum,
    riesz_project,
    weighted_projector_check,
)
from pwsum.genfun import GeneratingFunctionEvaluator, OuterEvaluator, check_factorization
from pwsum.grids import GridFunction, grid_template, hilbert_transform, sample_on_grid
from pwsum.spectrum import (
    Spectrum,
    SpectrumError,
    TruncationIndex,
    make_family,
    split_halfplanes,
    truncation_at,
)
from pwsum.weights import NaiveWeights, ProjectionWeights, UniversalWeights, outer_weight

__version__ = "0.1.0"

__all__ = [
    "BlaschkeEvaluator",
    "ContourSchedule",
    "DiskFamily",
    "GeneratingFunctionEvaluator",
    "GridFunction",
    "LagrangeSum",
    "NaiveWeights",
    "OuterEvaluator",
    "PWFunction",
    "ProjectionWeights",
    "Spectrum",
    "SpectrumError",
    "SummationContext",
    "TriangleContour",
    "TruncationIndex",
    "UniversalWeights",
    "a2_estimate",
    "build_lagrange_sum",
    "build_schedule",
    "carleson_sup",
    "check_factorization",
    "compactwise_error",
    "eval_pw",
    "grid_template",
    "hayman_scan",
    "hilbert_transform",
    "intG_check",
    "l2_error",
    "lambda_inside",
    "make_family",
    "operator_norm_probe",
    "outer_weight",
    "partial_sum",
    "riesz_project",
    "sample_on_grid",
    "split_halfplanes",
    "truncation_at",
    "upper_lower_evaluators",
    "weighted_projector_check",
    "__version__",
]
