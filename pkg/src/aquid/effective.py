"""Phase-only description of the three-junction ring.

Covers the harmonic reduction of the bulk phases (mode frequencies,
couplings, quadratic coefficients and the kernel spectrum), the resulting
two-angle potential and its plane-wave spectra, the single-junction
double-well Hamiltonian on a real-line grid and its WKB splitting.

Energies are in units of the bulk Josephson energy ``J`` unless a function
takes explicit energy arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# Kinetic coefficient of the reduced 1D problem theta_1 = -theta_2 = theta.
# Two slow angles with (1/U) theta_dot^2 each give U/8; adding the kinetic
# term of theta_0 = theta_2 - theta_1 gives U/24.
KINETIC_CONVENTIONS = {"two-angle": 1.0 / 8.0, "with-theta0": 1.0 / 24.0}
MAX_2D_BASIS = 40_000


class ConvergenceError(RuntimeError):
    pass


class BoundaryLeakageError(RuntimeError):
    pass


@dataclass(frozen=True)
class EffectiveModelSpec:
    """Parameters of the three-junction quantum-phase model.

    ``Jp`` and ``Jpp`` are the junction energies ``J'`` and ``J''`` in units
    of ``J``; ``U`` is the charging energy in the same units. Junction 0 sits
    at site 1 and junctions 1, 2 at ``links[1]``, ``links[2]`` (default: the
    equidistant layout ``1, 1 + M/3, 1 + 2M/3``).
    """

    M: int = 12
    J: float = 1.0
    Jp: float = 0.7
    Jpp: float = 0.8
    U: float = 0.5
    Omega: float = np.pi
    links: tuple[int, int, int] | None = None
    kinetic: str = "two-angle"

    def __post_init__(self):
        if self.M % 2 or self.M - 3 < 3:
            raise ValueError(f"M must be even with at least 3 bulk sites, got {self.M}")
        for name in ("J", "Jp", "Jpp", "U"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.kinetic not in KINETIC_CONVENTIONS:
            raise ValueError(f"kinetic must be one of {sorted(KINETIC_CONVENTIONS)}")
        if self.links is not None:
            object.__setattr__(self, "links", tuple(int(i) for i in self.links))

    def link_sites(self) -> tuple[int, int, int]:
        if self.links is not None:
            return self.links
        if self.M % 3:
            raise ValueError(f"equidistant junctions need M divisible by 3, got {self.M}")
        return (1, 1 + self.M // 3, 1 + 2 * self.M // 3)

    def kappa(self) -> float:
        """Coefficient of ``n^2`` in the reduced 1D Hamiltonian."""
        return KINETIC_CONVENTIONS[self.kinetic] * self.U

    def with_(self, **changes) -> "EffectiveModelSpec":
        return replace(self, **changes)


@dataclass
class BathData:
    omega: np.ndarray  # (K,) mode frequencies
    zeta: np.ndarray  # (3, K) junction-mode couplings
    c: np.ndarray  # (3,) quadratic coefficients
    chain_positions: tuple[int, int, int]

    def kernel_spectrum(self, frequencies) -> np.ndarray:
        """``Y_alpha(w_l) = sum_k zeta_ak^2 / (w_k^2 + w_l^2)``, shape (3, L)."""
        w = np.atleast_1d(np.asarray(frequencies, dtype=float))
        return (self.zeta[:, :, None] ** 2
                / (self.omega[None, :, None] ** 2 + w[None, None, :] ** 2)).sum(axis=1)


def chain_positions(spec: EffectiveModelSpec) -> tuple[int, int, int]:
    """Reduced-chain index of each merged junction pair.

    Sites are relabelled consecutively from 1 after dropping site
    ``i_alpha + 1`` of every junction, which is merged into ``i_alpha``.
    """
    links = spec.link_sites()
    i0, i1, i2 = links
    if i0 != 1:
        raise ValueError("junction 0 must sit at site 1")
    if (i1 - 1) != (spec.M + 1 - i2):
        raise ValueError(f"junctions {i1}, {i2} are not mirror images about site 1")
    if not 1 < i1 < i2 <= spec.M or i1 - i0 < 2 or i2 - i1 < 2:
        raise ValueError(f"junction layout {links} leaves no bulk sites between junctions")
    dropped = {i + 1 for i in links}
    positions = {}
    j = 0
    for site in range(1, spec.M + 1):
        if site in dropped:
            continue
        j += 1
        positions[site] = j
    return tuple(positions[i] for i in links)


def _couplings(spec: EffectiveModelSpec, positions) -> tuple[np.ndarray, np.ndarray]:
    L = spec.M - 3
    k = np.arange(1, (spec.M - 4) // 2 + 1)
    j = np.asarray(positions, dtype=float)[:, None]
    zeta = 0.5 * (np.sin(2 * np.pi * k * (j - 1) / L)
                  - np.sin(2 * np.pi * k * (j + 1) / L)) / np.sqrt(L)
    return k, zeta


def bath_modes(spec: EffectiveModelSpec) -> BathData:
    positions = chain_positions(spec)
    k, zeta = _couplings(spec, positions)
    L = spec.M - 3
    one_minus_cos = 1.0 - np.cos(2 * np.pi * k / L)
    omega = np.sqrt(spec.J * spec.U / 2.0 * one_minus_cos)
    # U J / w_k^2 = 2 / (1 - cos) exactly, so U and J drop out of c.
    c = 0.5 * (0.5 - (2.0 * zeta ** 2 / one_minus_cos).sum(axis=1))
    return BathData(omega=omega, zeta=zeta, c=c, chain_positions=positions)


def quadratic_coefficients_direct(spec: EffectiveModelSpec) -> np.ndarray:
    """``c_alpha`` summed with explicit ``U`` and ``J`` (no cancellation)."""
    bath = bath_modes(spec)
    return 0.5 * (0.5 - spec.U * spec.J * (bath.zeta ** 2 / bath.omega ** 2).sum(axis=1))


def c_scaling(Ms, **kwargs) -> dict[str, np.ndarray]:
    """``c_alpha`` for each ring size; columns ``M, c0, c1, c2``."""
    Ms = sorted(int(m) for m in Ms)
    cs = np.array([bath_modes(EffectiveModelSpec(M=m, **kwargs)).c for m in Ms])
    return {"M": np.array(Ms), "c0": cs[:, 0], "c1": cs[:, 1], "c2": cs[:, 2]}


def effective_potential(theta1, theta2, spec: EffectiveModelSpec,
                        include_quadratic: bool = False, omega: float | None = None):
    """Two-angle potential with ``theta_0 = theta_2 - theta_1`` implied."""
    omega = spec.Omega if omega is None else omega
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    V = (-(spec.Jp * spec.J / 3.0) * np.cos(theta1 - theta2 - omega)
         - (spec.Jpp * spec.J / 3.0) * (np.cos(theta1) + np.cos(theta2)))
    if include_quadratic:
        c = bath_modes(spec).c
        theta0 = theta2 - theta1
        V = V + spec.J * (c[0] * theta0 ** 2 + c[1] * theta1 ** 2 + c[2] * theta2 ** 2)
    return V


def _square_elements(n: np.ndarray) -> np.ndarray:
    # <m| theta^2 |n> on the principal branch (-pi, pi].
    d = n[:, None] - n[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        off = 2.0 * (-1.0) ** np.abs(d) / d.astype(float) ** 2
    return np.where(d == 0, np.pi ** 2 / 3.0, off)


def _hamiltonian_1d(spec: EffectiveModelSpec, omega: float, size: int,
                    include_quadratic: bool, parity: str | None) -> np.ndarray:
    half = (size - 1) // 2
    n = np.arange(-half, half + 1)
    if parity == "even":
        n = n[n % 2 == 0]
    elif parity == "odd":
        n = n[n % 2 != 0]
    H = np.diag(spec.kappa() * n.astype(float) ** 2).astype(complex)
    d = n[:, None] - n[None, :]
    jp, jpp = spec.Jp * spec.J, spec.Jpp * spec.J
    # -(J'/3) cos(2 theta - Omega): raises momentum by 2 with exp(-i Omega) / 2.
    H += np.where(d == 2, -(jp / 6.0) * np.exp(-1j * omega), 0.0)
    H += np.where(d == -2, -(jp / 6.0) * np.exp(1j * omega), 0.0)
    # -(2 J''/3) cos(theta)
    H += np.where(np.abs(d) == 1, -(jpp / 3.0), 0.0)
    if include_quadratic:
        c = bath_modes(spec).c
        H += spec.J * (4.0 * c[0] + c[1] + c[2]) * _square_elements(n)
    return H


def _check_size(size: int, levels: int, dims: int = 1) -> None:
    if size % 2 == 0:
        raise ValueError(f"basis_size must be odd, got {size}")
    if levels > size ** dims // 4:
        raise ValueError(f"levels={levels} exceeds a quarter of the {size ** dims} plane waves")


def reduced_spectrum_1d(spec: EffectiveModelSpec, omega: float | None = None, levels: int = 6,
                        basis_size: int = 41, include_quadratic: bool = False,
                        parity: str | None = None, tol: float = 1e-8) -> np.ndarray:
    """Lowest levels of ``kappa n^2 + V(theta, -theta)`` in a plane-wave basis.

    The result is checked against a basis of ``2 * basis_size + 1`` waves;
    a change above ``tol`` raises :class:`ConvergenceError`. ``parity``
    restricts the basis to even or odd momenta; these sectors decouple only
    when ``J''`` vanishes, since ``cos(theta)`` shifts momentum by one.
    """
    _check_size(basis_size, levels)
    omega = spec.Omega if omega is None else omega
    small = sla.eigvalsh(_hamiltonian_1d(spec, omega, basis_size, include_quadratic, parity))
    big = sla.eigvalsh(_hamiltonian_1d(spec, omega, 2 * basis_size + 1, include_quadratic, parity))
    change = np.abs(small[:levels] - big[:levels]).max()
    if change > tol:
        raise ConvergenceError(f"levels moved by {change:.2e} under basis doubling")
    return small[:levels]


def _hamiltonian_2d(spec: EffectiveModelSpec, omega: float, size: int,
                    include_quadratic: bool) -> sp.csr_matrix:
    half = (size - 1) // 2
    n = np.arange(-half, half + 1)
    n1, n2 = np.meshgrid(n, n, indexing="ij")
    n1, n2 = n1.ravel(), n2.ravel()
    dim = n1.size
    index = lambda a, b: (a + half) * size + (b + half)
    jp, jpp = spec.Jp * spec.J, spec.Jpp * spec.J
    kappa2 = 2.0 * spec.kappa()
    rows, cols, vals = [np.arange(dim)], [np.arange(dim)], [kappa2 * (n1 ** 2 + n2 ** 2) + 0j]

    def couple(dn1, dn2, amp):
        a, b = n1 + dn1, n2 + dn2
        ok = (np.abs(a) <= half) & (np.abs(b) <= half)
        rows.append(index(a[ok], b[ok]))
        cols.append(np.flatnonzero(ok))
        vals.append(np.full(ok.sum(), amp, dtype=complex))

    # cos(theta1 - theta2 - Omega) shifts (n1, n2) by (+1, -1) with exp(-i Omega) / 2.
    couple(1, -1, -(jp / 6.0) * np.exp(-1j * omega))
    couple(-1, 1, -(jp / 6.0) * np.exp(1j * omega))
    for dn in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        couple(*dn, -(jpp / 6.0))
    H = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(dim, dim)).tocsr()
    if include_quadratic:
        c = bath_modes(spec).c
        S = _square_elements(n)
        I = np.eye(size)
        # theta_0^2 = theta_1^2 + theta_2^2 - 2 theta_1 theta_2 on the principal branch
        X = _position_elements(n)
        quad = ((c[0] + c[1]) * np.kron(S, I) + (c[0] + c[2]) * np.kron(I, S)
                - 2.0 * c[0] * np.kron(X, X))
        H = H + sp.csr_matrix(spec.J * quad)
    return H


def _position_elements(n: np.ndarray) -> np.ndarray:
    # <m| theta |n> on the principal branch (-pi, pi].
    d = n[:, None] - n[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        off = 1j * (-1.0) ** np.abs(d) / d.astype(float)
    return np.where(d == 0, 0.0, off)


def _lowest(H, levels: int) -> np.ndarray:
    if H.shape[0] <= 2000:
        return sla.eigvalsh(H.toarray(), subset_by_index=(0, levels - 1))
    v0 = np.random.default_rng(0x5EED).standard_normal(H.shape[0]) + 0j
    w = spla.eigsh(H, k=levels + 2, which="SA", v0=v0, tol=0.0)[0]
    return np.sort(w)[:levels]


def reduced_spectrum_2d(spec: EffectiveModelSpec, omega: float | None = None, levels: int = 6,
                        basis_size: int = 21, include_quadratic: bool = False,
                        tol: float = 1e-8) -> np.ndarray:
    """Lowest levels of the two-angle problem in a tensor plane-wave basis.

    Each angle carries kinetic coefficient ``2 kappa`` so that the relative
    coordinate ``(theta_1 - theta_2) / 2`` sees ``kappa``, as in the 1D
    reduction.
    """
    _check_size(basis_size, levels, dims=2)
    omega = spec.Omega if omega is None else omega
    bigger = 2 * basis_size + 1
    if bigger ** 2 > MAX_2D_BASIS:
        raise ValueError(f"basis_size {basis_size} needs {bigger ** 2} plane waves "
                         f"for the convergence check, above {MAX_2D_BASIS}")
    small = _lowest(_hamiltonian_2d(spec, omega, basis_size, include_quadratic), levels)
    big = _lowest(_hamiltonian_2d(spec, omega, bigger, include_quadratic), levels)
    change = np.abs(small - big).max()
    if change > tol:
        raise ConvergenceError(f"levels moved by {change:.2e} under basis doubling")
    return small


def level_curves(spec: EffectiveModelSpec, omegas, levels: int = 6,
                 basis_size: int = 41) -> dict[str, np.ndarray]:
    omegas = np.sort(np.asarray(omegas, dtype=float))
    rows = np.array([reduced_spectrum_1d(spec, w, levels, basis_size) for w in omegas])
    table = {"Omega": omegas}
    for i in range(levels):
        table[f"E{i}"] = rows[:, i]
    return table


# -- single junction ------------------------------------------------------

def rf_aquid_spectrum(U: float, E_L: float, E_J: float, omega: float, levels: int = 4,
                      half_width: float | None = None, points: int = 4001,
                      boundary_tol: float = 1e-12, refine_tol: float = 1e-6) -> np.ndarray:
    """Lowest levels of ``U n^2 + E_L phi^2 - E_J cos(phi - Omega)``.

    ``n = -i d/dphi`` is discretized with the three-point stencil on
    ``[-half_width, half_width]``. The half width defaults to where the
    harmonic confinement exceeds the band of interest by a wide margin.
    Raises :class:`BoundaryLeakageError` if any returned state has relative
    amplitude above ``boundary_tol`` at the edges, and
    :class:`ConvergenceError` if Richardson extrapolations from two grid
    pairs differ by more than ``refine_tol`` (relative to the level spacing
    scale).
    """
    if U <= 0 or E_L <= 0 or E_J < 0:
        raise ValueError("need U > 0, E_L > 0, E_J >= 0")
    if half_width is None:
        scale = 2.0 * np.sqrt(U * E_L) * (levels + 1) + 2.0 * E_J
        # exp(-sqrt(E_L / U) x^2 / 2) tails; 40 e-folds past the turning point
        half_width = np.sqrt(scale / E_L) + np.sqrt(80.0 / np.sqrt(E_L / U))

    def solve(npts):
        x = np.linspace(-half_width, half_width, npts)
        h = x[1] - x[0]
        diag = 2.0 * U / h ** 2 + E_L * x ** 2 - E_J * np.cos(x - omega)
        off = np.full(npts - 1, -U / h ** 2)
        return sla.eigh_tridiagonal(diag, off, select="i", select_range=(0, levels - 1))

    w, v = solve(points)
    edge = np.abs(v[[0, -1], :]).max(axis=0) / np.abs(v).max(axis=0)
    if (edge > boundary_tol).any():
        raise BoundaryLeakageError(
            f"edge amplitude {edge.max():.1e} above {boundary_tol:.0e}; widen the grid"
        )
    w_fine, _ = solve(2 * points - 1)
    w_finest, _ = solve(4 * points - 3)
    # three-point stencil error is O(h^2); extrapolate out the leading term on
    # two grid pairs and require the extrapolations to agree
    coarse = (4.0 * w_fine - w) / 3.0
    fine = (4.0 * w_finest - w_fine) / 3.0
    scale = max(np.ptp(fine), 2.0 * np.sqrt(U * E_L))
    if np.abs(fine - coarse).max() > refine_tol * scale:
        raise ConvergenceError("grid too coarse for the requested levels")
    return fine


def wkb_gap(U: float, E_J: float, delta: float) -> float:
    """WKB tunnel splitting of the single-junction double well."""
    if delta < 1:
        raise ValueError(f"WKB splitting needs delta >= 1, got {delta}")
    if U <= 0 or E_J <= 0:
        raise ValueError("need U > 0 and E_J > 0")
    s = 1.0 - 1.0 / delta
    return (2.0 * np.sqrt(U * E_J) / np.pi) * np.sqrt(s) * np.exp(
        -12.0 * np.sqrt(E_J / U) * s ** 1.5
    )


def doublet_splitting(U: float, E_J: float, delta: float, **grid) -> float:
    """``E1 - E0`` of the grid solver at the symmetric point ``Omega = pi``."""
    w = rf_aquid_spectrum(U, E_J / delta, E_J, np.pi, levels=2, **grid)
    return float(w[1] - w[0])
