"""Aharonov-Bohm operators with a point interaction at the flux tube: defect
functions, quadratic forms, radial spectra and self-adjoint extensions."""

from .defect import Cutoff, DefectG, c_alpha, g_eval, g_norm_sq
from .extensions import ExtensionU, classify, extension_spectrum, make_extension
from .fields import FluxParams, RadialPerp, Zero, field_from_spec
from .forms import FormDecomposition, FormParams, QuadSpec, lower_bound, q_beta
from .harmonic import RadialOperatorSpec
from .radial import OriginCondition, pure_ab_energy, shoot_eigenvalues

__version__ = "0.1.0"

__all__ = [
    "Cutoff",
    "DefectG",
    "ExtensionU",
    "FluxParams",
    "FormDecomposition",
    "FormParams",
    "OriginCondition",
    "QuadSpec",
    "RadialOperatorSpec",
    "RadialPerp",
    "Zero",
    "c_alpha",
    "classify",
    "extension_spectrum",
    "field_from_spec",
    "g_eval",
    "g_norm_sq",
    "lower_bound",
    "make_extension",
    "pure_ab_energy",
    "q_beta",
    "shoot_eigenvalues",
]
