"""Mixed-region amplitude freedom (MRAF) kinoform optimization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .optics import Aberration, FarField, Kinoform, centered_coordinates, gaussian_beam
from .target import RingTarget


@dataclass
class MrafResult:
    kinoform: Kinoform
    predicted: np.ndarray  # image-plane intensity of the quantized kinoform
    errors: np.ndarray  # signal-region error before each iteration
    efficiency: float  # fraction of power landing in the signal region


def signal_error(image: np.ndarray, target: np.ndarray, mask: np.ndarray) -> float:
    """Relative RMS difference of the two images normalized inside ``mask``."""
    a = image[mask]
    b = target[mask]
    a = a / a.sum()
    b = b / b.sum()
    return float(np.sqrt(np.sum((a - b) ** 2) / np.sum(b ** 2)))


def ring_phase(shape: tuple[int, int], radius_px: float) -> np.ndarray:
    """Conical phase whose far field is a ring of ``radius_px`` pixels."""
    x, y = centered_coordinates(shape)
    return 2 * np.pi * radius_px * np.hypot(x, y) / shape[1]


def default_beam(shape: tuple[int, int]) -> np.ndarray:
    return gaussian_beam(shape, 0.3 * min(shape))


def image_of(phase: np.ndarray, beam: np.ndarray, propagator=None,
             aberration: Aberration | None = None) -> np.ndarray:
    propagator = propagator or FarField()
    if aberration is not None and not aberration.is_zero():
        phase = phase + aberration.phase(phase.shape)
    image = np.abs(propagator.forward(beam * np.exp(1j * phase))) ** 2
    if aberration is not None:
        gain = aberration.gain(image.shape)
        if gain is not None:
            image = image * gain
    return image


def mraf(target: RingTarget, phase0: np.ndarray | None = None, iterations: int = 20,
         mixing: float = 0.4, beam: np.ndarray | None = None, propagator=None) -> MrafResult:
    """Optimize a phase-only SLM pattern for ``target``.

    Each iteration propagates the SLM field to the image plane, sets the
    amplitude to ``mixing * sqrt(target)`` inside the signal region and to
    ``(1 - mixing)`` times the current amplitude in the noise region
    (zero elsewhere), propagates back and keeps the phase. The target is
    normalized to the input power, so ``mixing`` trades signal-region
    accuracy against efficiency; ``mixing = 1`` is plain amplitude
    replacement.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not 0 < mixing <= 1:
        raise ValueError("mixing must lie in (0, 1]")
    shape = target.shape
    for name, arr in (("intensity", target.intensity), ("signal", target.signal),
                      ("noise", target.noise)):
        if arr.shape != shape:
            raise ValueError(f"target {name} has shape {arr.shape}, expected {shape}")
    if (target.signal & target.noise).any():
        raise ValueError("signal and noise regions overlap")
    beam = default_beam(shape) if beam is None else beam
    if beam.shape != shape:
        raise ValueError(f"beam shape {beam.shape} does not match target {shape}")
    propagator = propagator or FarField()
    phase = ring_phase(shape, target.radius_px) if phase0 is None else np.array(phase0, float)
    if phase.shape != shape:
        raise ValueError(f"initial phase shape {phase.shape} does not match target {shape}")

    power = np.sum(np.abs(beam) ** 2)
    t_sum = target.intensity[target.signal].sum()
    amp_target = np.sqrt(np.clip(target.intensity, 0, None) * power / t_sum)
    errors = []
    for _ in range(iterations):
        image_field = propagator.forward(beam * np.exp(1j * phase))
        amp = np.abs(image_field)
        errors.append(signal_error(amp ** 2, target.intensity, target.signal))
        new_amp = np.zeros(shape)
        new_amp[target.noise] = (1 - mixing) * amp[target.noise]
        new_amp[target.signal] = mixing * amp_target[target.signal]
        phase = np.angle(propagator.backward(new_amp * np.exp(1j * np.angle(image_field))))

    kinoform = Kinoform.from_phase(phase)
    predicted = image_of(kinoform.phase, beam, propagator)
    efficiency = float(predicted[target.signal].sum() / predicted.sum())
    return MrafResult(kinoform=kinoform, predicted=predicted, errors=np.array(errors),
                      efficiency=efficiency)


def simulate_measurement(kinoform: Kinoform, aberration: Aberration | None = None,
                         beam: np.ndarray | None = None, propagator=None,
                         noise_sigma: float = 0.0, seed: int | None = None) -> np.ndarray:
    """Camera image of ``kinoform`` through an aberrated optical train.

    ``noise_sigma`` adds Gaussian noise relative to the image maximum, drawn
    from a generator seeded with ``seed``.
    """
    beam = default_beam(kinoform.shape) if beam is None else beam
    image = image_of(kinoform.phase, beam, propagator, aberration)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        image = image + noise_sigma * image.max() * rng.standard_normal(image.shape)
    return image
