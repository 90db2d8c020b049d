"""Descriptor extractors: directional edges, EHD, log-Gabor, gprHOG, SED."""

from .base import FIXED_DIMS, FeatureKind, FeatureVector
from .edges import EdgeLabel, EdgeLabelImage, SOBEL_KERNELS, sobel_edges
from .ehd import EHD_EXTENT, ehd_feature, ehd_features_at_depths
from .hog import gprhog_feature, hog_descriptor
from .loggabor import (
    LG_REGION_ORIENTATIONS,
    LogGaborBank,
    build_log_gabor_bank,
    lg_feature,
    lg_feature_matrix,
    log_gabor_response,
)
from .sed import SedLabeler, msek_depths, sed_feature

__all__ = [
    "FIXED_DIMS",
    "FeatureKind",
    "FeatureVector",
    "EdgeLabel",
    "EdgeLabelImage",
    "SOBEL_KERNELS",
    "sobel_edges",
    "EHD_EXTENT",
    "ehd_feature",
    "ehd_features_at_depths",
    "gprhog_feature",
    "hog_descriptor",
    "LG_REGION_ORIENTATIONS",
    "LogGaborBank",
    "build_log_gabor_bank",
    "lg_feature",
    "lg_feature_matrix",
    "log_gabor_response",
    "SedLabeler",
    "msek_depths",
    "sed_feature",
]
