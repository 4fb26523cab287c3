"""Gibbs states on Kahler symmetric spaces and geodesic-flow thermodynamics."""

from __future__ import annotations

from .errors import DomainError, GeothermError, NoConvergence
from .model_catalog import MODEL_NAMES, ModelSpec, load_model

__all__ = ["DomainError", "GeothermError", "NoConvergence", "MODEL_NAMES", "ModelSpec", "load_model"]
__version__ = "0.1.0"
