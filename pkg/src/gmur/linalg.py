"""Dense symmetric/Hermitian matrix kernel.

Everything downstream (state validity, error functions, bound optimizers)
reduces to eigendecompositions of small dense matrices, PSD verdicts at an
explicit tolerance, and spectral matrix functions.  All operations are pure
and operate on plain ``numpy`` arrays; matrices are expected to be small
(n <= 64) and exactly symmetric / Hermitian in storage.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError, InputError

DEFAULT_PSD_TOL = 1e-9


def psd_tolerance() -> float:
    """Default relative PSD tolerance; the GMUR_TOL env var overrides it."""
    value = os.environ.get("GMUR_TOL")
    return float(value) if value else DEFAULT_PSD_TOL


@dataclass(frozen=True)
class PsdVerdict:
    """Outcome of a positive-semidefiniteness test.

    ``is_psd`` is equivalent to ``min_eigenvalue >= -tolerance_used``;
    ``min_eigenvalue`` is the exact smallest eigenvalue of the tested matrix.
    """

    is_psd: bool
    min_eigenvalue: float
    tolerance_used: float


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return (m + m.T)/2, which is exactly symmetric in floating point."""
    m = np.asarray(m, dtype=float)
    return (m + m.T) / 2.0


def skew_symmetrize(m: np.ndarray) -> np.ndarray:
    """Return (m - m.T)/2, which is exactly antisymmetric in floating point."""
    m = np.asarray(m, dtype=float)
    return (m - m.T) / 2.0


def check_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} contains non-finite entries")
    return m


def check_symmetric(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = check_square(m, name)
    if not np.array_equal(m, m.T):
        raise InputError(f"{name} is not exactly symmetric; use symmetrize() first")
    return m.astype(float, copy=False)


def check_hermitian(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = check_square(m, name)
    if not np.array_equal(m, m.conj().T):
        raise InputError(f"{name} is not exactly Hermitian")
    return m


def sym_eigen(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a real symmetric matrix.

    Returns eigenvalues sorted ascending and the matrix of orthonormal
    eigenvector columns, so that ``Q @ diag(w) @ Q.T`` reconstructs ``m``.
    """
    m = check_symmetric(m)
    try:
        w, q = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}", operand=m) from exc
    return w, q


def herm_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a complex Hermitian matrix."""
    m = check_hermitian(m)
    try:
        return np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Hermitian eigensolver failed: {exc}", operand=m) from exc


def herm_psd(m: np.ndarray, rel_tol: float | None = None) -> PsdVerdict:
    """PSD verdict for a Hermitian (or real symmetric) matrix.

    The verdict uses the absolute tolerance ``rel_tol * max(1, spectral_radius)``
    so that boundary cases constructed in floating point (for instance
    minimum-uncertainty states) pass, while clear violations fail.
    """
    if rel_tol is None:
        rel_tol = psd_tolerance()
    if rel_tol < 0:
        raise InputError("rel_tol must be nonnegative")
    w = herm_eigenvalues(m)
    spectral_radius = float(np.max(np.abs(w))) if w.size else 0.0
    tol = rel_tol * max(1.0, spectral_radius)
    min_eig = float(w[0])
    return PsdVerdict(is_psd=min_eig >= -tol, min_eigenvalue=min_eig, tolerance_used=tol)


def sym_func(m: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to a symmetric matrix through its spectrum.

    ``f`` must be defined (finite) on every eigenvalue of ``m``; the result is
    ``Q f(w) Q.T``, symmetrized exactly.
    """
    w, q = sym_eigen(m)
    try:
        with np.errstate(all="ignore"):
            fw = np.asarray(f(w), dtype=float)
        if fw.shape != w.shape:
            raise TypeError
    except Exception:
        fw = np.empty_like(w)
        for i, x in enumerate(w):
            try:
                fw[i] = f(x)
            except Exception as exc:
                raise DomainError(f"matrix function undefined at eigenvalue {x!r}") from exc
    bad = ~np.isfinite(fw)
    if np.any(bad):
        raise DomainError(f"matrix function undefined at eigenvalue {w[bad][0]!r}")
    return symmetrize((q * fw) @ q.T)


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``a^{-1/2} b a^{-1/2}`` for positive-definite ``a``.

    The result is symmetric and shares its spectrum with ``a^{-1} b``.
    """
    w, q = sym_eigen(a)
    if w[0] <= 0:
        raise DomainError(f"sandwich base is not positive-definite (min eigenvalue {w[0]})")
    b = check_symmetric(b, "sandwich argument")
    if b.shape != a.shape:
        raise InputError(f"shape mismatch: {a.shape} vs {b.shape}")
    inv_sqrt = (q / np.sqrt(w)) @ q.T
    return symmetrize(inv_sqrt @ b @ inv_sqrt)


def logdet(m: np.ndarray) -> float:
    """Natural log-determinant of a positive-definite symmetric matrix."""
    w, _ = sym_eigen(m)
    if w[0] <= 0:
        raise DomainError(f"logdet requires a positive-definite matrix (min eigenvalue {w[0]})")
    return float(np.sum(np.log(w)))


def inv_pd(m: np.ndarray) -> np.ndarray:
    """Inverse of a positive-definite symmetric matrix via its spectrum."""
    w, q = sym_eigen(m)
    if w[0] <= 0:
        raise DomainError(f"inverse requires a positive-definite matrix (min eigenvalue {w[0]})")
    return symmetrize((q / w) @ q.T)
