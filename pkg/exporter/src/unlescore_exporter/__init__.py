"""Confidence exporter: adapts a user's model pair to the scorer's CSV input.

The package is dependency-free and framework-agnostic: predictors are plain
callables (or "module:attr" strings naming them) that map one sample's
features to a probability vector. No checkpoints are loaded here and no
scoring math happens here — this is pure plumbing from models to the
confidence CSV.
"""

from .errors import ManifestError, PredictorError
from .export import export, export_bytes, format_float
from .manifest import (
    ExportManifest,
    SampleSpec,
    load_manifest,
    manifest_from_dict,
    resolve_predictor,
)

__all__ = [
    "ExportManifest",
    "ManifestError",
    "PredictorError",
    "SampleSpec",
    "export",
    "export_bytes",
    "format_float",
    "load_manifest",
    "manifest_from_dict",
    "resolve_predictor",
]

__version__ = "0.1.0"
