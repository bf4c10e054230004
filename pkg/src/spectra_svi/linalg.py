"""Dense complex/Hermitian linear algebra used everywhere else.

All matrix functions (exp, log) go through a single eigendecomposition of
the Hermitian argument; at the block sizes of interest (n up to a few
dozen) this is both fast enough and lets one decomposition serve exp, log
and norms within an iteration.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NotPositiveSemidefinite, NumericalFailure

# Largest x with exp(x) finite in float64.
_EXP_OVERFLOW = float(np.log(np.finfo(np.float64).max))

# Default eigenvalue floor for the PSD matrix logarithm. Boundary iterates
# (rank-deficient PSD matrices) are legitimate inputs; entropy code applies
# the 0*log(0) = 0 convention separately, so the floor never leaks into traces.
LOG_EIG_FLOOR = 1e-300

# Eigenvalues below this are treated as exact zeros in entropy-like sums.
ZERO_EIG_TOL = 1e-15

HERMITIAN_CONSTRUCTION_TOL = 1e-12
PSD_TOL = 1e-10


class EigenDecomposition(NamedTuple):
    """Spectral factorization A = V diag(w) V^dag with w sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitianize(A: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (A + A^dag) / 2 of a square matrix."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"hermitianize needs a square matrix, got shape {A.shape}")
    return (A + A.conj().T) / 2


def as_hermitian(A: np.ndarray, tol: float = HERMITIAN_CONSTRUCTION_TOL) -> np.ndarray:
    """Validate that A is Hermitian to within `tol`, then symmetrize exactly.

    The returned matrix satisfies H == H^dag entrywise and has exactly real
    diagonal. Non-finite entries or asymmetry beyond `tol` raise ValueError.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise ValueError("matrix has non-finite entries")
    asym = np.max(np.abs(A - A.conj().T)) if A.size else 0.0
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if asym > tol * scale:
        raise ValueError(f"matrix is not Hermitian: max |A - A^dag| = {asym:.3e}")
    return hermitianize(A)


def check_finite(A: np.ndarray) -> np.ndarray:
    """Raise ValueError if A contains NaN or Inf; return A unchanged."""
    A = np.asarray(A)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def eig(A: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Ordering is deterministic: LAPACK's ascending output is reversed, which
    keeps the column order stable between identical calls.
    """
    H = hermitianize(A)
    if not np.all(np.isfinite(H)):
        # Some LAPACK builds return NaN eigenvalues instead of raising;
        # NaN also defeats every downstream comparison, so fail loudly.
        raise NumericalFailure(
            "eigendecomposition input has non-finite entries",
            diagnostics={"dim": H.shape[0]},
        )
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(
            f"eigendecomposition did not converge: {exc}",
            diagnostics={
                "dim": H.shape[0],
                "frobenius_norm": float(np.linalg.norm(H)),
                "max_abs_entry": float(np.max(np.abs(H))),
            },
        ) from exc
    return EigenDecomposition(w[::-1].copy(), V[:, ::-1].copy())


def _rebuild(w: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Assemble V diag(w) V^dag and re-symmetrize against rounding."""
    return hermitianize((V * w) @ V.conj().T)


def matrix_exp(A: np.ndarray) -> np.ndarray:
    """exp(A) for Hermitian A via eigendecomposition.

    Raises NumericalFailure if the top eigenvalue would overflow exp();
    callers needing exp of large-spectrum duals should use the
    shift-invariant Gibbs map instead, which never overflows.
    """
    w, V = eig(A)
    if w.size and w[0] > _EXP_OVERFLOW:
        raise NumericalFailure(
            f"matrix_exp overflow: top eigenvalue {w[0]:.4g} exceeds "
            f"{_EXP_OVERFLOW:.1f}; use the shift-invariant Gibbs map for "
            "normalized exponentials of large duals",
            diagnostics={"lambda_max": float(w[0])},
        )
    return _rebuild(np.exp(w), V)


def matrix_log(A: np.ndarray, floor: float = LOG_EIG_FLOOR) -> np.ndarray:
    """log(A) for PSD Hermitian A, eigenvalues clamped below at `floor`.

    A must be PSD up to tolerance (lambda_min >= -1e-10), otherwise
    NotPositiveSemidefinite is raised. The floor makes rank-deficient
    inputs representable; consumers relying on 0*log(0) = 0 must skip
    near-zero eigenvalues themselves rather than trusting floored logs.
    """
    w, V = eig(A)
    if w.size and w[-1] < -PSD_TOL:
        raise NotPositiveSemidefinite(
            f"matrix_log needs a PSD input; lambda_min = {w[-1]:.3e}"
        )
    return _rebuild(np.log(np.maximum(w, floor)), V)


def trace_norm(A: np.ndarray) -> float:
    """Sum of singular values. For Hermitian A this is sum |lambda_i|."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(A, compute_uv=False)))


def spectral_norm(A: np.ndarray) -> float:
    """Largest singular value."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def frobenius_norm(A: np.ndarray) -> float:
    """Entrywise 2-norm sqrt(tr(A^dag A))."""
    return float(np.linalg.norm(np.asarray(A)))


def real_trace(A: np.ndarray) -> float:
    """Real part of the trace (exact trace for Hermitian matrices)."""
    return float(np.trace(np.asarray(A)).real)


def trace_inner(A: np.ndarray, B: np.ndarray) -> float:
    """Re tr(A B): the real trace pairing of two Hermitian matrices."""
    # tr(AB) = sum_ij A_ij B_ji; for Hermitian pairs the result is real.
    return float(np.sum(A * B.T).real)


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    """Hermitian matrix with i.i.d. CN(0, scale^2) entries before symmetrizing."""
    G = scale * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    return hermitianize(G)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian matrix with the
    R diagonal phases absorbed into Q."""
    G = (rng.standard_normal((dim, dim))
         + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_spectrum_hermitian(rng: np.random.Generator, dim: int,
                              low: float, high: float) -> np.ndarray:
    """Hermitian matrix with eigenvalues i.i.d. uniform on [low, high] in a
    Haar-random eigenbasis; spans prescribed spectral ranges exactly."""
    w = rng.uniform(low, high, size=dim)
    V = random_unitary(rng, dim)
    return hermitianize((V * w) @ V.conj().T)
