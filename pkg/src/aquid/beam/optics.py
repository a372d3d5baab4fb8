"""Scalar-field propagation and phase-only modulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PHASE_LEVELS = 256


@dataclass
class ComplexField:
    """Sampled complex amplitude on a regular grid.

    ``pitch_um`` is the sample spacing and ``wavelength_um`` the vacuum
    wavelength, both in micrometers.
    """

    data: np.ndarray
    pitch_um: float = 8.0
    wavelength_um: float = 0.828

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim != 2 or min(self.data.shape) < 1:
            raise ValueError(f"field must be a non-empty 2D array, got {self.data.shape}")
        if self.pitch_um <= 0 or self.wavelength_um <= 0:
            raise ValueError("pitch and wavelength must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.data) ** 2))

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.data) ** 2


@dataclass
class Kinoform:
    """Phase-only pattern stored as 8-bit levels; level ``v`` means ``2 pi v / 256``."""

    levels: np.ndarray

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=np.uint8)

    @classmethod
    def from_phase(cls, phase: np.ndarray) -> "Kinoform":
        wrapped = np.mod(phase, 2 * np.pi)
        return cls(np.round(wrapped / (2 * np.pi) * PHASE_LEVELS).astype(np.int64) % PHASE_LEVELS)

    @property
    def phase(self) -> np.ndarray:
        return self.levels.astype(float) * (2 * np.pi / PHASE_LEVELS)

    @property
    def shape(self) -> tuple[int, int]:
        return self.levels.shape


def centered_coordinates(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Pixel coordinates ``(x, y)`` with the origin on pixel ``(ny//2, nx//2)``."""
    ny, nx = shape
    y, x = np.indices(shape, dtype=float)
    return x - nx // 2, y - ny // 2


def gaussian_beam(shape: tuple[int, int], waist_px: float) -> np.ndarray:
    """Unit-power Gaussian amplitude ``exp(-r^2 / w^2)``."""
    x, y = centered_coordinates(shape)
    amp = np.exp(-(x ** 2 + y ** 2) / waist_px ** 2)
    return amp / np.sqrt(np.sum(amp ** 2))


def transfer_function(shape, pitch_um: float, wavelength_um: float, distance_um: float) -> np.ndarray:
    ny, nx = shape
    fx = np.fft.fftfreq(nx, d=pitch_um)
    fy = np.fft.fftfreq(ny, d=pitch_um)
    FX, FY = np.meshgrid(fx, fy)
    arg = 1.0 / wavelength_um ** 2 - FX ** 2 - FY ** 2
    prop = arg >= 0
    kz = 2 * np.pi * np.sqrt(np.abs(arg))
    H = np.empty(shape, dtype=complex)
    H[prop] = np.exp(1j * kz[prop] * distance_um)
    # evanescent waves decay in either direction
    H[~prop] = np.exp(-kz[~prop] * abs(distance_um))
    return H


def propagate(field: ComplexField, distance_um: float) -> ComplexField:
    """Angular-spectrum propagation over ``distance_um``.

    Negative distances propagate backwards; evanescent components are
    attenuated either way, so power never grows.
    """
    if distance_um == 0:
        return ComplexField(field.data.copy(), field.pitch_um, field.wavelength_um)
    H = transfer_function(field.shape, field.pitch_um, field.wavelength_um, distance_um)
    out = np.fft.ifft2(np.fft.fft2(field.data) * H)
    return ComplexField(out, field.pitch_um, field.wavelength_um)


def far_field(u: np.ndarray) -> np.ndarray:
    """Unitary centered Fourier transform: the focal plane of a lens."""
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(u), norm="ortho"))


def inverse_far_field(u: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(u), norm="ortho"))


class FarField:
    """Lens Fourier relation between the SLM and image planes."""

    def forward(self, u: np.ndarray) -> np.ndarray:
        return far_field(u)

    def backward(self, u: np.ndarray) -> np.ndarray:
        return inverse_far_field(u)

    def describe(self) -> dict:
        return {"mode": "far-field"}


@dataclass
class AngularSpectrum:
    """Free-space propagation over a finite distance between the planes."""

    distance_um: float
    pitch_um: float = 8.0
    wavelength_um: float = 0.828

    def _H(self, shape, sign):
        return transfer_function(shape, self.pitch_um, self.wavelength_um, sign * self.distance_um)

    def forward(self, u: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(np.fft.fft2(u) * self._H(u.shape, 1))

    def backward(self, u: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(np.fft.fft2(u) * self._H(u.shape, -1))

    def describe(self) -> dict:
        return {"mode": "angular-spectrum", "distance_um": self.distance_um,
                "pitch_um": self.pitch_um, "wavelength_um": self.wavelength_um}


@dataclass(frozen=True)
class Aberration:
    """Low-order phase error at the SLM plane plus optional camera effects.

    ``tilt_x``/``tilt_y`` are in image-plane pixels of displacement (far-field
    mode); ``defocus``, ``astig_0`` and ``astig_45`` are phase amplitudes in
    radians at ``reference_radius_px`` from the grid center.
    ``nonuniformity`` scales intensity linearly across x (fractional change
    edge to edge).
    """

    tilt_x: float = 0.0
    tilt_y: float = 0.0
    defocus: float = 0.0
    astig_0: float = 0.0
    astig_45: float = 0.0
    reference_radius_px: float = 150.0
    nonuniformity: float = 0.0

    def phase(self, shape: tuple[int, int]) -> np.ndarray:
        ny, nx = shape
        x, y = centered_coordinates(shape)
        u, v = x / self.reference_radius_px, y / self.reference_radius_px
        return (2 * np.pi * (self.tilt_x * x / nx + self.tilt_y * y / ny)
                + self.defocus * (u ** 2 + v ** 2)
                + self.astig_0 * (u ** 2 - v ** 2)
                + self.astig_45 * 2 * u * v)

    def gain(self, shape: tuple[int, int]) -> np.ndarray | None:
        if self.nonuniformity == 0:
            return None
        x, _ = centered_coordinates(shape)
        return 1.0 + self.nonuniformity * x / shape[1]

    def is_zero(self) -> bool:
        return all(getattr(self, f) == 0 for f in
                   ("tilt_x", "tilt_y", "defocus", "astig_0", "astig_45", "nonuniformity"))
