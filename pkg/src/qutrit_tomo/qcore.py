"""Exact-size 3x3 Hermitian linear algebra and entropy functionals.

Everything here operates on plain complex numpy arrays of shape (3, 3) or
batches of shape (..., 3, 3).  All functions are pure; nothing is cached or
mutated, so the module is safe for concurrent use.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidSimplexPoint, NonHermitianInput

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
LN3 = float(np.log(3.0))


def check_hermitian(H, tol=HERMITIAN_TOL):
    """Raise NonHermitianInput unless max|H - H^dag| <= tol."""
    H = np.asarray(H, dtype=complex)
    if H.shape != (3, 3):
        raise NonHermitianInput(f"expected a 3x3 matrix, got shape {H.shape}")
    resid = np.abs(H - H.conj().T).max()
    if resid > tol:
        raise NonHermitianInput(f"Hermiticity residual {resid:.3e} exceeds {tol:.1e}")
    return H


def check_density_matrix(rho, herm_tol=1e-12, trace_tol=1e-12, psd_tol=PSD_TOL):
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    check_hermitian(rho, tol=herm_tol)
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise InvalidSimplexPoint(f"trace {tr} deviates from 1 beyond {trace_tol:.1e}")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -psd_tol:
        raise InvalidSimplexPoint(f"minimum eigenvalue {lo:.3e} below -{psd_tol:.1e}")
    return rho


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (ascending) and matching orthonormal eigenvector columns."""

    values: np.ndarray  # shape (3,), real, ascending
    vectors: np.ndarray  # shape (3, 3), column k pairs with values[k]

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T


def eig_hermitian(H, tol=HERMITIAN_TOL):
    """Full eigendecomposition of a Hermitian 3x3 matrix.

    Uses LAPACK's deterministic symmetric solver, so identical input bits
    always give identical output bits.
    """
    H = check_hermitian(H, tol=tol)
    values, vectors = np.linalg.eigh(H)
    return EigenSystem(values=values, vectors=vectors)


def min_eigen(H, tol=HERMITIAN_TOL):
    """Smallest eigenvalue of Hermitian H and a unit eigenvector for it."""
    es = eig_hermitian(H, tol=tol)
    return float(es.values[0]), es.vectors[:, 0]


def is_psd_cholesky(H, tol=PSD_TOL):
    """True iff H + tol*I admits a Cholesky factorization.

    Factorization breakdown is the fast positivity test; no eigensolve.
    """
    H = np.asarray(H, dtype=complex)
    try:
        np.linalg.cholesky(H + tol * np.eye(3))
    except np.linalg.LinAlgError:
        return False
    return True


def min_eigen_batch(H):
    """Smallest eigenvalue of a stack of Hermitian 3x3 matrices, shape (..., 3, 3).

    Closed-form trigonometric solution of the characteristic cubic; orders of
    magnitude faster than a LAPACK loop for large Monte Carlo batches.
    Accuracy is ~1e-9; callers needing exact boundary decisions should
    re-check borderline entries with np.linalg.eigvalsh.
    """
    H = np.asarray(H, dtype=complex)
    q = np.real(H[..., 0, 0] + H[..., 1, 1] + H[..., 2, 2]) / 3.0
    A = H.copy()
    A[..., 0, 0] -= q
    A[..., 1, 1] -= q
    A[..., 2, 2] -= q
    # p = sqrt(tr(A^2)/6) is the eigenvalue spread scale
    tr_a2 = np.real(np.einsum("...ij,...ji->...", A, A))
    p = np.sqrt(np.maximum(tr_a2 / 6.0, 0.0))
    safe_p = np.where(p > 0.0, p, 1.0)
    B = A / safe_p[..., None, None]
    det_b = np.real(
        B[..., 0, 0] * (B[..., 1, 1] * B[..., 2, 2] - B[..., 1, 2] * B[..., 2, 1])
        - B[..., 0, 1] * (B[..., 1, 0] * B[..., 2, 2] - B[..., 1, 2] * B[..., 2, 0])
        + B[..., 0, 2] * (B[..., 1, 0] * B[..., 2, 1] - B[..., 1, 1] * B[..., 2, 0])
    )
    r = np.clip(det_b / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    return np.where(p > 0.0, lo, q)


def von_neumann_entropy(rho):
    """S(rho) = -sum lambda_i ln lambda_i in nats, with 0 ln 0 = 0."""
    rho = np.asarray(rho, dtype=complex)
    lam = np.linalg.eigvalsh(rho)
    lam = np.clip(lam, 0.0, None)
    nz = lam[lam > 0.0]
    return float(-(nz * np.log(nz)).sum())


def shannon_entropy(probs, tol=1e-9):
    """H(p) = -sum p_j ln p_j in nats for a probability vector."""
    p = np.asarray(probs, dtype=float)
    if p.min() < -tol or abs(p.sum() - 1.0) > tol:
        raise InvalidSimplexPoint(f"not a simplex point: {p}")
    p = np.clip(p, 0.0, None)
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())
