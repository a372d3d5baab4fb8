"""Occupation-number basis for N bosons on an M-site ring.

States are stored as rows of an integer array in lexicographically
descending order, so ``(N, 0, ..., 0)`` has index 0 and ``(0, ..., 0, N)``
is last.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np

DEFAULT_MAX_DIMENSION = 5_000_000
HASH_INDEX_LIMIT = 100_000


class DimensionOverflowError(ValueError):
    """Raised when a basis would exceed the configured memory cap."""


class NotAMemberError(ValueError):
    """Raised when an occupation vector does not belong to the basis."""


def basis_dimension(M: int, N: int) -> int:
    return comb(N + M - 1, M - 1)


@lru_cache(maxsize=None)
def _compositions(M: int, N: int) -> np.ndarray:
    if M == 1:
        return np.array([[N]], dtype=np.int32)
    blocks = []
    for first in range(N, -1, -1):
        rest = _compositions(M - 1, N - first)
        head = np.full((rest.shape[0], 1), first, dtype=np.int32)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def _rank_table(M: int, N: int) -> np.ndarray:
    # table[i, r, s]: number of states sharing a prefix that place more than
    # s particles on site i when r particles remain for sites i..M-1.
    table = np.zeros((M, N + 1, N + 1), dtype=np.int64)
    for i in range(M - 1):
        tail = M - i - 1
        for r in range(N + 1):
            counts = [comb(r - v + tail - 1, tail - 1) for v in range(r + 1)]
            acc = 0
            for s in range(r, -1, -1):
                table[i, r, s] = acc
                acc += counts[s]
    return table


class FockBasis:
    """Canonically ordered bosonic occupation basis.

    Parameters
    ----------
    M : int
        Number of sites.
    N : int
        Number of particles.
    max_dimension : int, optional
        Refuse to build bases larger than this.
    """

    def __init__(self, M: int, N: int, max_dimension: int = DEFAULT_MAX_DIMENSION):
        if M < 2:
            raise ValueError(f"need at least 2 sites, got M={M}")
        if N < 1:
            raise ValueError(f"need at least 1 particle, got N={N}")
        dim = basis_dimension(M, N)
        if dim > max_dimension:
            raise DimensionOverflowError(
                f"basis dimension {dim} for M={M}, N={N} exceeds cap {max_dimension}"
            )
        self.M = M
        self.N = N
        self.states = _compositions(M, N).copy()
        self.states.setflags(write=False)
        self._table = _rank_table(M, N)
        self._table.setflags(write=False)
        self._lookup: dict[tuple[int, ...], int] | None = None
        if dim <= HASH_INDEX_LIMIT:
            self._lookup = {tuple(int(x) for x in row): i for i, row in enumerate(self.states)}

    @property
    def dimension(self) -> int:
        return self.states.shape[0]

    def __len__(self) -> int:
        return self.dimension

    def __repr__(self) -> str:
        return f"FockBasis(M={self.M}, N={self.N}, dimension={self.dimension})"

    def _check_member(self, occ: np.ndarray) -> None:
        if occ.shape != (self.M,):
            raise NotAMemberError(f"expected {self.M} occupations, got shape {occ.shape}")
        if (occ < 0).any() or int(occ.sum()) != self.N:
            raise NotAMemberError(f"{occ.tolist()} is not a state of N={self.N} on M={self.M}")

    def rank_formula(self, occupations) -> int:
        """Index of a state via the combinatorial ranking formula."""
        occ = np.asarray(occupations, dtype=np.int64)
        self._check_member(occ)
        return int(self.rank_many(occ[None, :])[0])

    def rank_many(self, occupations: np.ndarray) -> np.ndarray:
        """Vectorized combinatorial rank of a (k, M) array of valid states.

        No membership validation is done here; callers feed states produced by
        particle-conserving moves.
        """
        occ = np.asarray(occupations, dtype=np.int64)
        prefix = np.cumsum(occ, axis=1) - occ
        remaining = self.N - prefix
        sites = np.arange(self.M)[None, :]
        return self._table[sites, remaining, occ].sum(axis=1)

    def rank(self, occupations) -> int:
        """Position of ``occupations`` in canonical order."""
        occ = np.asarray(occupations, dtype=np.int64)
        self._check_member(occ)
        if self._lookup is not None:
            return self._lookup[tuple(int(x) for x in occ)]
        return int(self.rank_many(occ[None, :])[0])

    def unrank(self, index: int) -> np.ndarray:
        if not 0 <= index < self.dimension:
            raise IndexError(f"index {index} outside [0, {self.dimension})")
        return self.states[index].copy()


def build_basis(M: int, N: int, max_dimension: int = DEFAULT_MAX_DIMENSION) -> FockBasis:
    return FockBasis(M, N, max_dimension=max_dimension)
