"""Bose-Hubbard ring with weak links and an artificial gauge flux.

Sites and links are 1-based: link ``i`` joins site ``i`` to site ``i + 1``
and link ``M`` closes the ring back onto site 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .fock import FockBasis

FLUX_MODES = ("per-link", "single-link", "verbatim")
DEFAULT_LINKS = (2, 5, 8)


@dataclass(frozen=True)
class RingSpec:
    """Physical parameters of the ring.

    ``weak_links`` holds ``(link_index, strength)`` pairs. Energies are in
    units of the bulk hopping ``t``. ``flux_link`` designates the link that
    carries the whole flux in ``single-link`` mode; it defaults to the first
    weak link, or link 1 for a uniform ring.
    """

    M: int
    N: int
    U: float = 1.0
    t: float = 1.0
    weak_links: tuple[tuple[int, float], ...] = ()
    Omega: float = 0.0
    flux_mode: str = "per-link"
    flux_link: int | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "weak_links", tuple((int(i), float(s)) for i, s in self.weak_links)
        )
        if self.M < 2:
            raise ValueError(f"M must be >= 2, got {self.M}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.U < 0:
            raise ValueError(f"U must be non-negative, got {self.U}")
        if self.flux_mode not in FLUX_MODES:
            raise ValueError(f"flux_mode must be one of {FLUX_MODES}, got {self.flux_mode!r}")
        if len(self.weak_links) > 3:
            raise ValueError("at most three weak links are supported")
        seen = set()
        for idx, strength in self.weak_links:
            if not 1 <= idx <= self.M:
                raise ValueError(f"weak link index {idx} outside [1, {self.M}]")
            if idx in seen:
                raise ValueError(f"weak link {idx} listed twice")
            if strength <= 0:
                raise ValueError(f"weak link strength must be positive, got {strength}")
            seen.add(idx)
        if self.flux_link is not None and not 1 <= self.flux_link <= self.M:
            raise ValueError(f"flux_link {self.flux_link} outside [1, {self.M}]")

    @classmethod
    def three_links(
        cls,
        M: int,
        N: int,
        U: float,
        t_prime: float,
        t_second: float,
        Omega: float = np.pi,
        links: tuple[int, int, int] | None = None,
        **kwargs,
    ) -> "RingSpec":
        """Ring with ``t'`` on the first link of ``links`` and ``t''`` on the other two."""
        if links is None:
            if M != 8:
                raise ValueError("default link layout (2, 5, 8) needs M=8; pass links")
            links = DEFAULT_LINKS
        i0, i1, i2 = links
        return cls(
            M=M,
            N=N,
            U=U,
            weak_links=((i0, t_prime), (i1, t_second), (i2, t_second)),
            Omega=Omega,
            **kwargs,
        )

    def with_(self, **changes) -> "RingSpec":
        return replace(self, **changes)

    def hoppings(self) -> np.ndarray:
        """Hopping amplitude of every link, index 0 holding link 1."""
        amps = np.full(self.M, self.t, dtype=float)
        for idx, strength in self.weak_links:
            amps[idx - 1] = strength * self.t
        return amps

    def designated_link(self) -> int:
        if self.flux_link is not None:
            return self.flux_link
        return self.weak_links[0][0] if self.weak_links else 1

    def link_phases(self) -> np.ndarray:
        if self.flux_mode == "per-link":
            return np.full(self.M, self.Omega / self.M)
        if self.flux_mode == "verbatim":
            return np.full(self.M, float(self.Omega))
        phases = np.zeros(self.M)
        phases[self.designated_link() - 1] = self.Omega
        return phases

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "N": self.N,
            "U": self.U,
            "t": self.t,
            "weak_links": [list(p) for p in self.weak_links],
            "Omega": self.Omega,
            "flux_mode": self.flux_mode,
            "flux_link": self.flux_link,
        }


def build_hamiltonian(spec: RingSpec, basis: FockBasis) -> sp.csr_matrix:
    """Sparse complex Hermitian matrix of the ring over ``basis``.

    Hopping across link ``i`` contributes ``-t_i exp(i phi_i) a+_{i+1} a_i``
    plus its conjugate, on-site terms ``U/2 n (n - 1)``.
    """
    if (basis.M, basis.N) != (spec.M, spec.N):
        raise ValueError(
            f"basis is for (M={basis.M}, N={basis.N}) but spec has (M={spec.M}, N={spec.N})"
        )
    states = basis.states.astype(np.int64)
    dim = basis.dimension
    amps = spec.hoppings()
    phases = spec.link_phases()

    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [(0.5 * spec.U * (states * (states - 1)).sum(axis=1)).astype(complex)]

    for i in range(spec.M):
        j = (i + 1) % spec.M
        src = np.flatnonzero(states[:, i] > 0)
        moved = states[src].copy()
        factor = np.sqrt(moved[:, i] * (moved[:, j] + 1.0))
        moved[:, i] -= 1
        moved[:, j] += 1
        dst = basis.rank_many(moved)
        elem = -amps[i] * np.exp(1j * phases[i]) * factor
        rows += [dst, src]
        cols += [src, dst]
        vals += [elem, elem.conj()]

    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()
    H.sum_duplicates()
    return H


def gauge_equivalent(spec: RingSpec) -> RingSpec:
    """Move the uniformly spread flux of a per-link spec onto one link.

    The local transformation ``a_l -> a_l exp(i l Omega / M)`` removes the
    phase from every bond except the designated one, which then carries the
    full ``Omega``.
    """
    if spec.flux_mode != "per-link":
        raise ValueError(f"gauge transform expects a per-link spec, got {spec.flux_mode!r}")
    return replace(spec, flux_mode="single-link", flux_link=spec.designated_link())


def dump_coordinates(H: sp.spmatrix, path: str | Path) -> None:
    """Write ``row col re im`` lines, sorted by (row, col)."""
    coo = sp.coo_matrix(H)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        fh.write(f"% {H.shape[0]} {H.shape[1]} {coo.nnz}\n")
        for k in order:
            v = coo.data[k]
            fh.write(f"{coo.row[k]} {coo.col[k]} {v.real:.17g} {v.imag:.17g}\n")


def load_coordinates(path: str | Path) -> sp.csr_matrix:
    with open(path) as fh:
        header = fh.readline().split()
        n_rows, n_cols = int(header[1]), int(header[2])
        data = np.loadtxt(fh, ndmin=2)
    if data.size == 0:
        return sp.csr_matrix((n_rows, n_cols), dtype=complex)
    return sp.coo_matrix(
        (data[:, 2] + 1j * data[:, 3], (data[:, 0].astype(int), data[:, 1].astype(int))),
        shape=(n_rows, n_cols),
    ).tocsr()
