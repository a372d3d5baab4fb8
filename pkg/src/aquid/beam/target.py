"""Ring-lattice target images and their azimuthal profiles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.signal import find_peaks

from .optics import centered_coordinates


class GeometryError(ValueError):
    pass


@dataclass
class RingTarget:
    """Intensity target of ``M`` Gaussian spots on a circle.

    Lengths are micrometers in the image plane; ``pixel_um`` converts to
    pixels. The signal region is the annulus ``radius +- margin * spot_sigma``;
    everything outside it is the noise region.
    """

    shape: tuple[int, int] = (512, 512)
    M: int = 8
    radius_um: float = 7.5
    pixel_um: float = 0.1
    spot_sigma_um: float = 1.2
    depths: tuple[float, ...] | None = None
    angle_offset: float = 0.0
    margin: float = 3.5
    intensity: np.ndarray = field(init=False, repr=False)
    signal: np.ndarray = field(init=False, repr=False)
    noise: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.shape = tuple(int(s) for s in self.shape)
        if self.M < 3:
            raise GeometryError(f"need at least 3 sites, got M={self.M}")
        depths = np.ones(self.M) if self.depths is None else np.asarray(self.depths, float)
        if depths.shape != (self.M,) or (depths <= 0).any() or (depths > 1).any():
            raise GeometryError("depths must be M values in (0, 1]")
        self.depths = tuple(float(d) for d in depths)
        outer = self.radius_px + self.margin * self.sigma_px
        half = min(self.shape) // 2 - 1
        if outer > half or self.radius_px - self.margin * self.sigma_px < 0:
            raise GeometryError(
                f"ring of radius {self.radius_px:.1f}px with margin does not fit the "
                f"{self.shape} grid"
            )
        x, y = centered_coordinates(self.shape)
        img = np.zeros(self.shape)
        for (cx, cy), d in zip(self.site_positions(), depths):
            img += d * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * self.sigma_px ** 2))
        r = np.hypot(x, y)
        self.signal = np.abs(r - self.radius_px) <= self.margin * self.sigma_px
        self.noise = ~self.signal
        self.intensity = img / img[self.signal].sum()

    @property
    def radius_px(self) -> float:
        return self.radius_um / self.pixel_um

    @property
    def sigma_px(self) -> float:
        return self.spot_sigma_um / self.pixel_um

    def site_angles(self) -> np.ndarray:
        return self.angle_offset + 2 * np.pi * np.arange(self.M) / self.M

    def site_positions(self) -> list[tuple[float, float]]:
        return [(self.radius_px * np.cos(a), self.radius_px * np.sin(a)) for a in self.site_angles()]

    def with_intensity(self, image: np.ndarray) -> "RingTarget":
        """Copy of this target carrying a different intensity image."""
        clone = object.__new__(RingTarget)
        clone.__dict__.update(self.__dict__)
        clone.intensity = np.asarray(image, dtype=float)
        return clone


def generate_ring_target(**params) -> RingTarget:
    return RingTarget(**params)


@dataclass
class AzimuthalProfile:
    angles: np.ndarray
    values: np.ndarray
    maxima: np.ndarray  # sample indices
    minima: np.ndarray

    def normalized(self) -> np.ndarray:
        return self.values / self.values.mean()


def _circular_peaks(values: np.ndarray, prominence: float) -> np.ndarray:
    n = values.size
    tiled = np.concatenate([values, values, values])
    peaks, _ = find_peaks(tiled, prominence=prominence)
    return np.sort(peaks[(peaks >= n) & (peaks < 2 * n)] - n)


def azimuthal_profile(image: np.ndarray, radius_px: float, samples: int = 720,
                      center: tuple[float, float] | None = None,
                      prominence: float = 0.02) -> AzimuthalProfile:
    """Bilinear samples of ``image`` on a circle and its local extrema.

    ``center`` is ``(x, y)`` in array coordinates, by default the pixel used
    as origin by the target generator. Extrema weaker than ``prominence``
    times the profile range are ignored.
    """
    ny, nx = image.shape
    cx, cy = (nx // 2, ny // 2) if center is None else center
    if (cx - radius_px < 0 or cy - radius_px < 0
            or cx + radius_px > nx - 1 or cy + radius_px > ny - 1):
        raise GeometryError(f"circle of radius {radius_px} leaves the {image.shape} image")
    angles = 2 * np.pi * np.arange(samples) / samples
    xs = cx + radius_px * np.cos(angles)
    ys = cy + radius_px * np.sin(angles)
    values = map_coordinates(np.asarray(image, float), [ys, xs], order=1)
    span = np.ptp(values)
    thresh = prominence * span if span > 0 else np.inf
    return AzimuthalProfile(
        angles=angles,
        values=values,
        maxima=_circular_peaks(values, thresh),
        minima=_circular_peaks(-values, thresh),
    )


def ring_profile(image: np.ndarray, target: RingTarget, samples: int = 720) -> AzimuthalProfile:
    return azimuthal_profile(image, target.radius_px, samples=samples)
