"""Camera feedback on the MRAF target using azimuthal extrema."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .mraf import MrafResult, default_beam, mraf, ring_phase, simulate_measurement
from .optics import Aberration, Kinoform, centered_coordinates
from .target import AzimuthalProfile, RingTarget, ring_profile


class FeedbackNotConverged(RuntimeError):
    def __init__(self, result: "FeedbackResult", threshold: float):
        super().__init__(
            f"best discrepancy {result.best.discrepancy:.2f}% after "
            f"{len(result.history)} iterations is above {threshold}%"
        )
        self.result = result


@dataclass
class FeedbackState:
    iteration: int  # 1-based
    target_values: np.ndarray  # target profile at the extrema, normalized units
    measured_values: np.ndarray
    discrepancy: float  # percent
    contrast: float  # max / min of the measured profile
    measured_profile: AzimuthalProfile = field(repr=False)
    scale: float = field(repr=False)  # camera units -> target profile units
    kinoform: Kinoform = field(repr=False)
    image: np.ndarray = field(repr=False)

    def profile(self) -> np.ndarray:
        """Measured azimuthal profile on the same scale as the target profile."""
        return self.measured_profile.values * self.scale


@dataclass
class FeedbackResult:
    best: FeedbackState
    history: list[FeedbackState]
    target_profile: AzimuthalProfile
    extrema: np.ndarray  # sample indices of the target extrema
    converged: bool

    @property
    def kinoform(self) -> Kinoform:
        return self.best.kinoform


def extremum_indices(profile: AzimuthalProfile) -> tuple[np.ndarray, np.ndarray]:
    return profile.maxima, profile.minima


def sample_extrema(values: np.ndarray, maxima: np.ndarray, minima: np.ndarray,
                   window: int) -> np.ndarray:
    """Measured max near each target maximum and min near each target minimum."""
    n = values.size
    out = []
    for idx, pick in [(i, np.max) for i in maxima] + [(i, np.min) for i in minima]:
        sl = np.arange(idx - window, idx + window + 1) % n
        out.append(pick(values[sl]))
    return np.array(out)


def peak_scale(measured: np.ndarray, target: np.ndarray, n_maxima: int) -> float:
    """Factor that makes the mean measured maximum equal the target's.

    Camera intensity has no absolute scale, and a spot-width change shifts all
    peak-to-mean ratios together, which no extremum correction can undo.
    """
    return float(target[:n_maxima].mean() / measured[:n_maxima].mean())


def discrepancy_percent(measured: np.ndarray, target: np.ndarray) -> float:
    """Largest extremum error relative to the brightest target extremum."""
    return float(100.0 * np.max(np.abs(measured - target)) / np.max(target))


def discrepancy_update(measured: np.ndarray, original: np.ndarray, verbatim: bool = False) -> np.ndarray:
    """Per-extremum correction ``D``.

    The default ``-(M^2 - T0^2) / (2 T0)`` vanishes when the measurement
    matches the original target and is close to ``T0 - M`` near it.
    ``verbatim`` uses ``-(M^2 + T0^2) / (2 T0)``, which never vanishes.
    """
    sign = 1.0 if verbatim else -1.0
    return -(measured ** 2 + sign * original ** 2) / (2.0 * original)


def _modulation(target: RingTarget, angles: np.ndarray, ratios: np.ndarray) -> np.ndarray:
    if np.all(ratios == 1.0):
        return np.ones(target.shape)
    order = np.argsort(angles)
    xs, ys = angles[order], ratios[order]
    spline = CubicSpline(np.append(xs, xs[0] + 2 * np.pi), np.append(ys, ys[0]),
                         bc_type="periodic")
    x, y = centered_coordinates(target.shape)
    return np.clip(spline(np.mod(np.arctan2(y, x), 2 * np.pi)), 0.0, None)


def feedback_loop(target: RingTarget, alpha: float = 0.3, max_iter: int = 30,
                  threshold: float = 2.0, aberration: Aberration | None = None,
                  mixing: float = 0.4, mraf_iterations: int = 20,
                  phase0: np.ndarray | None = None, beam: np.ndarray | None = None,
                  propagator=None, verbatim_discrepancy: bool = False,
                  noise_sigma: float = 0.0, seed: int | None = None,
                  samples: int = 720, strict: bool = True) -> FeedbackResult:
    """Iterate MRAF against simulated camera images of its own output.

    Every round runs MRAF on the current target ``T_i`` from the same initial
    phase, measures the result, compares the measured azimuthal extrema with
    those of the original target (after matching the mean of the maxima,
    since camera intensity has no absolute scale) and moves the target
    extrema by ``alpha * D_i``. Between extrema the correction is interpolated with a
    periodic cubic spline in angle and applied multiplicatively to ``T_0``.
    All ``max_iter`` rounds run; the round with the lowest discrepancy wins.
    With ``strict`` a best discrepancy above ``threshold`` percent raises
    :class:`FeedbackNotConverged` carrying the full result.
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    beam = default_beam(target.shape) if beam is None else beam
    phase0 = ring_phase(target.shape, target.radius_px) if phase0 is None else phase0

    t0_profile = ring_profile(target.intensity, target, samples)
    maxima, minima = extremum_indices(t0_profile)
    extrema = np.concatenate([maxima, minima])
    t0_values = t0_profile.normalized()[extrema]
    angles = t0_profile.angles[extrema]
    window = max(1, samples // (4 * target.M))

    current = t0_values.copy()
    current_target = target
    history: list[FeedbackState] = []
    for i in range(1, max_iter + 1):
        result: MrafResult = mraf(current_target, phase0, mraf_iterations, mixing, beam, propagator)
        image = simulate_measurement(result.kinoform, aberration, beam, propagator,
                                     noise_sigma, None if seed is None else seed + i)
        prof = ring_profile(image, target, samples)
        raw = sample_extrema(prof.values, maxima, minima, window)
        scale = peak_scale(raw, t0_values, maxima.size)
        measured = raw * scale
        history.append(FeedbackState(
            iteration=i,
            target_values=current.copy(),
            measured_values=measured,
            discrepancy=discrepancy_percent(measured, t0_values),
            contrast=float(prof.values.max() / max(prof.values.min(), 1e-300)),
            measured_profile=prof,
            scale=scale,
            kinoform=result.kinoform,
            image=image,
        ))
        current = current + alpha * discrepancy_update(measured, t0_values, verbatim_discrepancy)
        modulation = _modulation(target, angles, current / t0_values)
        current_target = target.with_intensity(target.intensity * modulation)

    best = min(history, key=lambda s: s.discrepancy)
    out = FeedbackResult(best=best, history=history, target_profile=t0_profile,
                         extrema=extrema, converged=best.discrepancy < threshold)
    if strict and not out.converged:
        raise FeedbackNotConverged(out, threshold)
    return out
