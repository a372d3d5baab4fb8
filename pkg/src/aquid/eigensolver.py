"""Lowest eigenpairs of sparse complex Hermitian operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DEFAULT_SEED = 0x5EED
DEFAULT_TOL = 1e-10
DENSE_LIMIT = 2000
EXTRA_LEVELS = 2


class ConvergenceError(RuntimeError):
    """The Krylov iteration did not meet the residual target."""

    def __init__(self, message: str, residuals: np.ndarray | None = None):
        super().__init__(message)
        self.residuals = residuals


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    residuals: np.ndarray

    def __len__(self) -> int:
        return len(self.eigenvalues)


def start_vector(dim: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def residual_norms(H, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return np.linalg.norm(H @ vectors - vectors * values[None, :], axis=0)


def _rayleigh_ritz(H, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Re-orthonormalize and rediagonalize inside the converged subspace;
    # ARPACK's complex driver does not orthogonalize degenerate partners.
    Q, _ = np.linalg.qr(vectors)
    small = Q.conj().T @ (H @ Q)
    small = 0.5 * (small + small.conj().T)
    w, c = np.linalg.eigh(small)
    return w, Q @ c


def lowest_eigenpairs(
    H,
    k: int,
    tol: float = DEFAULT_TOL,
    seed: int = DEFAULT_SEED,
    maxiter: int | None = None,
    dense_limit: int = DENSE_LIMIT,
) -> SpectrumResult:
    """The ``k`` lowest eigenpairs of Hermitian ``H``.

    Small operators are diagonalized densely. Larger ones go through an
    implicitly restarted Lanczos iteration asking for ``k + 2`` levels so
    near-degenerate pairs are resolved. Every returned pair satisfies
    ``||H v - E v|| <= tol`` or :class:`ConvergenceError` is raised.
    """
    dim = H.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > dim:
        raise ValueError(f"k={k} exceeds dimension {dim}")
    if tol <= 0:
        raise ValueError("tol must be positive")

    if dim <= dense_limit or k + EXTRA_LEVELS >= dim - 1:
        dense = H.toarray() if sp.issparse(H) else np.asarray(H)
        w, v = sla.eigh(dense, subset_by_index=(0, k - 1), driver="evr")
    else:
        n_req = min(k + EXTRA_LEVELS, dim - 2)
        ncv = min(dim - 1, max(2 * n_req + 1, 40))
        try:
            w, v = spla.eigsh(
                H, k=n_req, which="SA", v0=start_vector(dim, seed), tol=0.0,
                ncv=ncv, maxiter=maxiter,
            )
        except spla.ArpackNoConvergence as exc:
            found = exc.eigenvalues.size
            res = (
                residual_norms(H, exc.eigenvalues.real, exc.eigenvectors)
                if found else None
            )
            raise ConvergenceError(
                f"Lanczos iteration converged {found}/{n_req} levels; residuals {res}",
                res,
            ) from exc
        w, v = _rayleigh_ritz(H, v)
        order = np.argsort(w)[:k]
        w, v = w[order], v[:, order]

    res = residual_norms(H, w, v)
    if (res > tol).any():
        raise ConvergenceError(
            f"residual {res.max():.3e} above tolerance {tol:.1e}", res
        )
    return SpectrumResult(eigenvalues=np.asarray(w, dtype=float), eigenvectors=v, residuals=res)


def dense_eigenvalues(H) -> np.ndarray:
    """Full spectrum by dense diagonalization; used as an oracle."""
    dense = H.toarray() if sp.issparse(H) else np.asarray(H)
    return np.linalg.eigvalsh(dense)
