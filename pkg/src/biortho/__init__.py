"""Bi-orthogonal curvature of 4-manifolds: algebra, numerics and certificates."""

__version__ = "0.1.0"

from .analysis import (
    CurvaturePredicates,
    SpectralSummary,
    TwoPlane,
    biortho,
    kperp_bruteforce,
    kperp_spectral,
    predicates,
    sectional,
)
from .bivector import CurvatureBlocks, SelfDualSplit, compose, decompose, hodge_star, split
from .curvature import MetricChart, PointCurvature, conformal_chart, curvature_at
from .models import ModelManifold, catalog, get_model

__all__ = [
    "CurvatureBlocks",
    "CurvaturePredicates",
    "MetricChart",
    "ModelManifold",
    "PointCurvature",
    "SelfDualSplit",
    "SpectralSummary",
    "TwoPlane",
    "biortho",
    "catalog",
    "compose",
    "conformal_chart",
    "curvature_at",
    "decompose",
    "get_model",
    "hodge_star",
    "kperp_bruteforce",
    "kperp_spectral",
    "predicates",
    "sectional",
    "split",
]
