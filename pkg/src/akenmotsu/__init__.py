"""Numerical verification of almost alpha-Kenmotsu geometry on coordinate charts."""

__version__ = "0.1.0"

from .acm_structure import AcmStructure, validate  # noqa: E402
from .deformation import deform  # noqa: E402
from .model_catalog import LieGroupModelParams, build_model  # noqa: E402
from .nullity_analysis import fit_kmu, invariant  # noqa: E402
from .tensor_core import ChartSpec, Tolerances  # noqa: E402

__all__ = [
    "AcmStructure",
    "ChartSpec",
    "LieGroupModelParams",
    "Tolerances",
    "build_model",
    "deform",
    "fit_kmu",
    "invariant",
    "validate",
    "__version__",
]
