"""Dense complex linear algebra used by the frame layers.

Everything here works on ``numpy`` complex128 arrays.  Real input is
promoted to complex on entry.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NotHermitian, NotPositive, NotSquare, ShapeMismatch

HERMITIAN_TOL = 1e-10
EIG_TOL = 1e-10
PINV_TOL = 1e-9
PSD_FLOOR = 1e-12


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a finite 2-D complex128 array (copying if needed)."""
    A = np.array(M, dtype=np.complex128, ndmin=2)
    if A.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _require_square(A: np.ndarray) -> None:
    if A.shape[0] != A.shape[1]:
        raise NotSquare(f"matrix of shape {A.shape} is not square")


def hermitian_part(M) -> np.ndarray:
    A = as_matrix(M)
    return 0.5 * (A + A.conj().T)


def hermitian_defect(M) -> float:
    """Operator norm of ``M - M*``."""
    A = as_matrix(M)
    return operator_norm(A - A.conj().T)


def is_hermitian(M, tol: float = HERMITIAN_TOL) -> bool:
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        return False
    return hermitian_defect(A) <= tol * max(operator_norm(A), 1.0)


def hermitian_eigendecomposition(M, tol: float = HERMITIAN_TOL):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.

    The defect ``||M - M*||`` must be at most ``tol * ||M||``.  The
    decomposition is taken of the Hermitian part, so tiny rounding
    asymmetries do not leak into complex eigenvalues.
    """
    A = as_matrix(M)
    _require_square(A)
    defect = hermitian_defect(A)
    scale = operator_norm(A)
    if defect > tol * max(scale, np.finfo(float).tiny):
        raise NotHermitian(f"hermitian defect {defect:.3e} exceeds {tol:.1e} * ||M|| = {tol * scale:.3e}")
    lam, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    return lam, V


def _psd_apply(M, fn: Callable[[np.ndarray], np.ndarray], floor: float | None) -> np.ndarray:
    lam, V = hermitian_eigendecomposition(M)
    scale = max(abs(lam[0]), abs(lam[-1]), 1.0)
    if floor is None:
        # sqrt: tolerate rounding-level negatives, clip them to zero
        if lam[0] < -EIG_TOL * scale:
            raise NotPositive(f"minimum eigenvalue {lam[0]:.3e} is negative")
        lam = np.clip(lam, 0.0, None)
    elif lam[0] <= floor:
        raise NotPositive(f"minimum eigenvalue {lam[0]:.3e} is not above {floor:.1e}")
    return (V * fn(lam)) @ V.conj().T


_PSD_FUNCTIONS = {
    "sqrt": (np.sqrt, None),
    "inv": (lambda x: 1.0 / x, PSD_FLOOR),
    "inv_sqrt": (lambda x: 1.0 / np.sqrt(x), PSD_FLOOR),
}


def psd_function(M, f: str) -> np.ndarray:
    """Apply ``f`` in {"sqrt", "inv", "inv_sqrt"} to a Hermitian PSD matrix."""
    try:
        fn, floor = _PSD_FUNCTIONS[f]
    except KeyError:
        raise ValueError(f"unknown psd function {f!r}; expected one of {sorted(_PSD_FUNCTIONS)}") from None
    return _psd_apply(M, fn, floor)


def pseudo_inverse(M) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD with a relative rank cutoff."""
    A = as_matrix(M)
    return np.linalg.pinv(A, rcond=1e-12)


def penrose_residuals(M, Mp) -> tuple[float, float, float, float]:
    """Residuals of the four Penrose conditions for a candidate pseudo-inverse."""
    A = as_matrix(M)
    X = as_matrix(Mp)
    AX = A @ X
    XA = X @ A
    return (
        operator_norm(AX @ A - A),
        operator_norm(XA @ X - X),
        operator_norm(AX - AX.conj().T),
        operator_norm(XA - XA.conj().T),
    )


def operator_norm(M) -> float:
    """Largest singular value."""
    A = np.asarray(M, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def smallest_singular_value(M) -> float:
    A = np.asarray(M, dtype=np.complex128)
    return float(np.linalg.svd(A, compute_uv=False)[-1])


def commutator_norm(A, B) -> float:
    """``||AB - BA||`` for square matrices of equal size."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"commutator needs equal square shapes, got {A.shape} and {B.shape}")
    return operator_norm(A @ B - B @ A)


def extremal_eigenvalues(M) -> tuple[float, float]:
    """(min, max) eigenvalue of the Hermitian part of ``M``."""
    lam = np.linalg.eigvalsh(hermitian_part(M))
    return float(lam[0]), float(lam[-1])
