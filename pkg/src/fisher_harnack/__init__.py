"""Numerical verification of Harnack estimates for f_t = Δf + c f (1 - f) on flat tori."""

from .params import ParamSet, derived_constants, validate_compact, validate_noncompact

__all__ = ["ParamSet", "derived_constants", "validate_compact", "validate_noncompact"]
__version__ = "0.1.0"
