"""Qubit gap, quality factor, persistent currents and densities of the ring.

All energies are in units of the bulk hopping ``t`` and hbar = 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache, partial

import numpy as np

from .eigensolver import DEFAULT_SEED, DEFAULT_TOL, SpectrumResult, lowest_eigenpairs
from .fock import DEFAULT_MAX_DIMENSION, DimensionOverflowError, FockBasis
from .hamiltonian import RingSpec, build_hamiltonian
from .parallel import pmap

log = logging.getLogger(__name__)


class LevelCrossingError(RuntimeError):
    """A finite-difference stencil straddles a (near) level crossing."""


class SweepPointError(RuntimeError):
    def __init__(self, axis: str, value, cause: BaseException):
        super().__init__(f"{axis}={value}: {type(cause).__name__}: {cause}")
        self.axis = axis
        self.value = value
        self.cause = cause


@dataclass(frozen=True)
class SolverSettings:
    tol: float = DEFAULT_TOL
    seed: int = DEFAULT_SEED
    max_dimension: int = DEFAULT_MAX_DIMENSION


@dataclass(frozen=True)
class QubitFigures:
    gap: float
    quality: float


@dataclass
class CurrentCurve:
    level: int
    omegas: np.ndarray
    currents: np.ndarray


@lru_cache(maxsize=8)
def get_basis(M: int, N: int, max_dimension: int = DEFAULT_MAX_DIMENSION) -> FockBasis:
    return FockBasis(M, N, max_dimension=max_dimension)


def solve(spec: RingSpec, k: int, settings: SolverSettings = SolverSettings()) -> SpectrumResult:
    """Lowest ``k`` eigenpairs of the ring described by ``spec``."""
    basis = get_basis(spec.M, spec.N, settings.max_dimension)
    H = build_hamiltonian(spec, basis)
    k = min(k, basis.dimension)
    return lowest_eigenpairs(H, k, tol=settings.tol, seed=settings.seed)


def qubit_figures(spectrum) -> QubitFigures:
    """Gap ``E1 - E0`` and quality ``(E1 - E0) / (E2 - E0)``.

    Accepts a :class:`SpectrumResult` or a plain sequence of energies.
    """
    energies = getattr(spectrum, "eigenvalues", spectrum)
    energies = np.sort(np.asarray(energies, dtype=float))
    if energies.size < 3:
        raise ValueError(f"need at least 3 levels, got {energies.size}")
    gap = energies[1] - energies[0]
    second = energies[2] - energies[0]
    quality = gap / second if second > 0 else float("nan")
    return QubitFigures(gap=float(gap), quality=float(quality))


def _central_difference(spec: RingSpec, level: int, omega: float, step: float,
                        settings: SolverSettings) -> float:
    k = level + 2
    stencil = [solve(spec.with_(Omega=omega + s), k, settings).eigenvalues
               for s in (-step, 0.0, step)]
    change = max(abs(stencil[2][level] - stencil[1][level]),
                 abs(stencil[0][level] - stencil[1][level]))
    for energies in stencil:
        neighbours = [energies[j] for j in (level - 1, level + 1) if 0 <= j < len(energies)]
        spacing = min(abs(energies[level] - e) for e in neighbours)
        if spacing <= max(10.0 * change, 1e-8):
            raise LevelCrossingError(
                f"level {level} comes within {spacing:.2e} of a neighbour in "
                f"[{omega - step:.6g}, {omega + step:.6g}]"
            )
    return (stencil[2][level] - stencil[0][level]) / (2.0 * step)


def persistent_current(
    spec: RingSpec,
    level: int = 0,
    omega: float | None = None,
    step: float = 1e-3,
    richardson: bool = False,
    settings: SolverSettings = SolverSettings(),
) -> float:
    """``-(1/2pi) dE_level/dOmega`` by central differences.

    With ``richardson`` the derivative is extrapolated from steps ``step``
    and ``step/2``, cancelling the O(step^2) term.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    omega = spec.Omega if omega is None else omega
    deriv = _central_difference(spec, level, omega, step, settings)
    if richardson:
        half = _central_difference(spec, level, omega, step / 2, settings)
        deriv = (4.0 * half - deriv) / 3.0
    return -deriv / (2.0 * np.pi)


def density_profile(vector: np.ndarray, basis: FockBasis) -> np.ndarray:
    """Site occupations ``<n_j>`` of a normalized state over ``basis``."""
    vector = np.asarray(vector)
    norm = np.linalg.norm(vector)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state norm {norm!r} deviates from 1")
    weights = np.abs(vector) ** 2
    return weights @ basis.states.astype(float)


def ground_density(spec: RingSpec, settings: SolverSettings = SolverSettings()) -> np.ndarray:
    res = solve(spec, 1, settings)
    return density_profile(res.eigenvectors[:, 0], get_basis(spec.M, spec.N, settings.max_dimension))


# -- sweeps ---------------------------------------------------------------

def _flux_point(args):
    spec, omega, k, settings = args
    try:
        return solve(spec.with_(Omega=float(omega)), k, settings).eigenvalues
    except Exception as exc:
        raise SweepPointError("Omega", omega, exc) from exc


def sweep_flux(spec: RingSpec, omegas, k: int = 4, settings: SolverSettings = SolverSettings(),
               workers: int | None = 1) -> dict[str, np.ndarray]:
    """Lowest ``k`` levels at each flux value; columns ``Omega, E0..E{k-1}``."""
    omegas = np.sort(np.asarray(omegas, dtype=float))
    if omegas.size == 0:
        raise ValueError("empty flux grid")
    if omegas.min() < 0 or omegas.max() > 2 * np.pi + 1e-12:
        raise ValueError("flux grid must lie within [0, 2pi]")
    levels = pmap(_flux_point, [(spec, w, k, settings) for w in omegas], workers)
    table = {"Omega": omegas}
    for i in range(k):
        table[f"E{i}"] = np.array([row[i] for row in levels])
    return table


def _current_point(args):
    spec, omega, level, step, settings = args
    try:
        return persistent_current(spec, level, omega, step, settings=settings)
    except LevelCrossingError as exc:
        log.warning("current of level %d at Omega=%.6g undefined: %s", level, omega, exc)
        return float("nan")


def sweep_currents(spec: RingSpec, omegas, levels=(0, 1), step: float = 1e-3,
                   settings: SolverSettings = SolverSettings(),
                   workers: int | None = 1) -> list[CurrentCurve]:
    omegas = np.sort(np.asarray(omegas, dtype=float))
    curves = []
    for level in levels:
        vals = pmap(_current_point, [(spec, w, level, step, settings) for w in omegas], workers)
        curves.append(CurrentCurve(level=level, omegas=omegas, currents=np.array(vals)))
    return curves


def with_link_strengths(spec: RingSpec, t_prime: float | None = None,
                        t_second: float | None = None) -> RingSpec:
    """Replace ``t'`` (first weak link) and/or ``t''`` (the other two)."""
    links = list(spec.weak_links)
    if t_prime is not None:
        if not links:
            raise ValueError("spec has no weak links")
        links[0] = (links[0][0], t_prime)
    if t_second is not None:
        if len(links) < 2:
            raise ValueError("spec has no t'' links")
        links[1:] = [(idx, t_second) for idx, _ in links[1:]]
    return spec.with_(weak_links=tuple(links))


GAP_AXES = ("t_prime", "t_second", "N", "U")


def _apply(spec: RingSpec, name: str, value) -> RingSpec:
    if name == "t_prime":
        return with_link_strengths(spec, t_prime=float(value))
    if name == "t_second":
        return with_link_strengths(spec, t_second=float(value))
    if name == "N":
        return spec.with_(N=int(value))
    if name == "U":
        return spec.with_(U=float(value))
    raise ValueError(f"unknown sweep axis {name!r}")


def grid_points(spec: RingSpec, axes: dict) -> tuple[list[dict], list[RingSpec]]:
    """Cartesian product of the sweep axes in the fixed order of ``GAP_AXES``."""
    names = [a for a in GAP_AXES if a in axes]
    unknown = set(axes) - set(GAP_AXES)
    if unknown:
        raise ValueError(f"unknown sweep axes {sorted(unknown)}")
    points = [{}]
    for name in names:
        values = sorted(axes[name])
        if not values:
            raise ValueError(f"empty grid for {name}")
        points = [dict(p, **{name: v}) for p in points for v in values]
    specs = []
    for p in points:
        s = spec
        for name, v in p.items():
            s = _apply(s, name, v)
        specs.append(s)
    return points, specs


def _gap_point(args):
    spec, settings = args
    try:
        res = solve(spec, 3, settings)
    except DimensionOverflowError as exc:
        log.warning("skipping %s: %s", spec, exc)
        return None, "overflow"
    return res.eigenvalues, "ok"


def sweep_gaps(spec: RingSpec, axes: dict, settings: SolverSettings = SolverSettings(),
               workers: int | None = 1) -> dict[str, np.ndarray]:
    """Gap and quality at ``spec.Omega`` over a product of parameter grids.

    ``axes`` maps any of ``t_prime``, ``t_second``, ``N``, ``U`` to a grid.
    Points whose basis exceeds the memory cap stay in the table with NaN
    energies and status ``overflow``.
    """
    points, specs = grid_points(spec, axes)
    results = pmap(_gap_point, [(s, settings) for s in specs], workers)
    table = {name: np.array([p[name] for p in points]) for name in GAP_AXES if name in axes}
    energies = [e for e, _ in results]
    for i in range(3):
        table[f"E{i}"] = np.array([e[i] if e is not None else np.nan for e in energies])
    figs = [qubit_figures(e) if e is not None else QubitFigures(np.nan, np.nan) for e in energies]
    table["gap"] = np.array([f.gap for f in figs])
    table["quality"] = np.array([f.quality for f in figs])
    table["status"] = np.array([s for _, s in results])
    return table


def sweep_interaction(spec: RingSpec, U_grid, t_second_set=None,
                      settings: SolverSettings = SolverSettings(),
                      workers: int | None = 1) -> dict[str, np.ndarray]:
    """Gap and quality at the frustration point over ``U`` (and ``t''``)."""
    axes = {"U": list(U_grid)}
    if t_second_set is not None:
        axes["t_second"] = list(t_second_set)
    return sweep_gaps(spec.with_(Omega=np.pi), axes, settings, workers)


def sweep_filling(spec: RingSpec, N_range, settings: SolverSettings = SolverSettings(),
                  workers: int | None = 1) -> dict[str, np.ndarray]:
    """Gap and quality at the frustration point for each particle number."""
    return sweep_gaps(spec.with_(Omega=np.pi), {"N": [int(n) for n in N_range]},
                      settings, workers)


def _density_point(args):
    spec, settings = args
    return ground_density(spec, settings)


def sweep_density(spec: RingSpec, axes: dict, settings: SolverSettings = SolverSettings(),
                  workers: int | None = 1) -> dict[str, np.ndarray]:
    """Ground-state site occupations over a product of parameter grids."""
    points, specs = grid_points(spec, axes)
    profiles = pmap(_density_point, [(s, settings) for s in specs], workers)
    table = {name: np.array([p[name] for p in points]) for name in GAP_AXES if name in axes}
    for j in range(spec.M):
        table[f"n{j + 1}"] = np.array([p[j] for p in profiles])
    table["total"] = np.array([p.sum() for p in profiles])
    return table
