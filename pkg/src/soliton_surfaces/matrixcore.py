"""
Dense complex matrix helpers and su(N) predicates.

All functions accept single matrices of shape (N, N) or stacks of shape
(..., N, N); the trailing two axes are always the matrix axes.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from soliton_surfaces import config
from soliton_surfaces.errors import (
    ContractViolationError,
    NotInAlgebraError,
    SingularMatrixError,
)


def _as_matrix(a) -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
        raise ContractViolationError(f"expected square matrices, got shape {arr.shape}")
    return arr


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise ContractViolationError(
            f"dimension mismatch: {a.shape[-1]}x{a.shape[-1]} vs {b.shape[-1]}x{b.shape[-1]}"
        )


def commutator(a, b) -> np.ndarray:
    """Return ab - ba."""
    a, b = _as_matrix(a), _as_matrix(b)
    _check_same_dim(a, b)
    return a @ b - b @ a


def dagger(a) -> np.ndarray:
    """Conjugate transpose over the trailing axes."""
    return np.conj(np.swapaxes(_as_matrix(a), -1, -2))


def frobenius(a) -> np.ndarray:
    """Frobenius norm over the trailing axes."""
    return np.linalg.norm(_as_matrix(a), axis=(-2, -1))


def trace(a) -> np.ndarray:
    return np.trace(_as_matrix(a), axis1=-2, axis2=-1)


def trace_product(a, b) -> np.ndarray:
    """tr(ab) without forming the product."""
    a, b = _as_matrix(a), _as_matrix(b)
    _check_same_dim(a, b)
    return np.einsum("...ij,...ji->...", a, b)


def identity_like(a) -> np.ndarray:
    a = _as_matrix(a)
    return np.broadcast_to(np.eye(a.shape[-1], dtype=complex), a.shape).copy()


def inverse(a, tol: float = config.SINGULAR_DET_TOL) -> np.ndarray:
    """
    Matrix inverse guarded by a determinant threshold.

    Raises:
        SingularMatrixError: |det a| <= tol for any matrix of the stack
    """
    a = _as_matrix(a)
    det = np.abs(np.linalg.det(a))
    if np.any(det <= tol):
        raise SingularMatrixError(float(np.min(det)), tol)
    return np.linalg.inv(a)


def algebra_residuals(m) -> Tuple[np.ndarray, np.ndarray]:
    """(‖m + m†‖, |tr m|) measuring the distance from su(N)."""
    m = _as_matrix(m)
    return frobenius(m + dagger(m)), np.abs(trace(m))


def is_in_algebra(m, tol: float = config.ALGEBRA_TOL) -> bool:
    herm, tr = algebra_residuals(m)
    return bool(np.all(herm < tol) and np.all(tr < tol))


def is_rank_one_projector(p, tol: float = config.PROJECTOR_TOL):
    """
    Residual triple (‖P²−P‖, ‖P−P†‖, |trP−1|) and a pass flag.

    Returns:
        ((idempotency, hermiticity, trace), passed)
    """
    p = _as_matrix(p)
    idem = frobenius(p @ p - p)
    herm = frobenius(p - dagger(p))
    tr = np.abs(trace(p) - 1.0)
    passed = bool(np.all(idem < tol) and np.all(herm < tol) and np.all(tr < tol))
    return (idem, herm, tr), passed


@dataclass(frozen=True)
class SuBasis:
    """Orthonormal basis of su(N) for the pairing <A,B> = -1/2 tr(AB)."""

    dim: int
    elements: np.ndarray  # shape (N*N - 1, N, N)

    def reconstruct(self, coefficients) -> np.ndarray:
        c = np.asarray(coefficients, dtype=float)
        return np.tensordot(c, self.elements, axes=([-1], [0]))


@lru_cache(maxsize=None)
def su_basis(n: int) -> SuBasis:
    """
    Basis of su(n).

    For n = 2 the elements are e1=[[0,i],[i,0]], e2=[[0,-1],[1,0]],
    e3=[[i,0],[0,-i]], so that [e1,e2] = 2e3. For n > 2, i times the
    generalized Gell-Mann matrices (symmetric, antisymmetric, diagonal).
    """
    if n < 2:
        raise ContractViolationError(f"su(N) needs N >= 2, got {n}")
    if n == 2:
        elements = np.array(
            [
                [[0, 1j], [1j, 0]],
                [[0, -1], [1, 0]],
                [[1j, 0], [0, -1j]],
            ],
            dtype=complex,
        )
        return SuBasis(2, elements)
    mats = []
    for j in range(n):
        for k in range(j + 1, n):
            sym = np.zeros((n, n), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0
            mats.append(1j * sym)
            anti = np.zeros((n, n), dtype=complex)
            anti[j, k], anti[k, j] = -1j, 1j
            mats.append(1j * anti)
    for ell in range(1, n):
        diag = np.zeros(n)
        diag[:ell] = 1.0
        diag[ell] = -ell
        diag *= np.sqrt(2.0 / (ell * (ell + 1)))
        mats.append(1j * np.diag(diag).astype(complex))
    return SuBasis(n, np.array(mats))


def su_project(m, basis: SuBasis = None, tol: float = config.ALGEBRA_TOL) -> np.ndarray:
    """
    Coefficients c with m = Σ c_j e_j.

    Raises:
        NotInAlgebraError: m is not anti-Hermitian and traceless within tol
    """
    m = _as_matrix(m)
    basis = basis or su_basis(m.shape[-1])
    _check_same_dim(m, basis.elements)
    herm, tr = algebra_residuals(m)
    if np.any(herm >= tol) or np.any(tr >= tol):
        raise NotInAlgebraError(float(np.max(herm)), float(np.max(tr)), tol)
    # <m, e_j> = -1/2 tr(m e_j)
    coeffs = -0.5 * np.einsum("...ij,bji->...b", m, basis.elements)
    return coeffs.real


def inner(a, b) -> np.ndarray:
    """<a, b> = -1/2 Re tr(ab)."""
    return -0.5 * trace_product(a, b).real
