from .feedback import FeedbackNotConverged, FeedbackResult, FeedbackState, feedback_loop
from .mraf import MrafResult, mraf, simulate_measurement, signal_error
from .optics import (
    Aberration,
    AngularSpectrum,
    ComplexField,
    FarField,
    Kinoform,
    far_field,
    gaussian_beam,
    propagate,
)
from .target import AzimuthalProfile, GeometryError, RingTarget, azimuthal_profile, generate_ring_target

__all__ = [
    "Aberration", "AngularSpectrum", "AzimuthalProfile", "ComplexField", "FarField",
    "FeedbackNotConverged", "FeedbackResult", "FeedbackState", "GeometryError", "Kinoform",
    "MrafResult", "RingTarget", "azimuthal_profile", "far_field", "feedback_loop",
    "gaussian_beam", "generate_ring_target", "mraf", "propagate", "signal_error",
    "simulate_measurement",
]
