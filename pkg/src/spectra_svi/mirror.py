"""Quantum-entropy mirror machinery.

The distance-generating function is the quantum entropy
omega(X) = tr(X log X - X) on the unit-trace spectrahedron. Its conjugate
is log tr exp(Y + I) and the conjugate gradient is the Gibbs state
exp(Y + I) / tr exp(Y + I). Every exponential here is max-shifted: dual
variables drift linearly with the iteration count, so raw exp() would
overflow within a few hundred solver steps.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, NotPositiveSemidefinite
from .linalg import (
    PSD_TOL,
    ZERO_EIG_TOL,
    eig,
    hermitianize,
    trace_inner,
)

_TRACE_TOL = 1e-8


def _psd_eigenvalues(X: np.ndarray, what: str) -> np.ndarray:
    w = eig(X).eigenvalues
    if w.size and w[-1] < -PSD_TOL:
        raise NotPositiveSemidefinite(f"{what} must be PSD; lambda_min = {w[-1]:.3e}")
    return w


def quantum_entropy(X: np.ndarray) -> float:
    """tr(X log X - X) with the 0*log(0) = 0 convention.

    X must be PSD with tr X <= 1 (both up to tolerance).
    """
    w = _psd_eigenvalues(X, "quantum_entropy argument")
    tr = float(np.sum(w))
    if tr > 1.0 + _TRACE_TOL:
        raise DomainError(f"quantum_entropy needs tr X <= 1, got {tr:.6g}")
    pos = w[w > ZERO_EIG_TOL]
    return float(np.sum(pos * np.log(pos)) - tr)


def conjugate_entropy(Y: np.ndarray) -> float:
    """log tr exp(Y + I), computed shift-invariantly so it never overflows."""
    w = eig(Y).eigenvalues
    m = float(w[0])
    return m + 1.0 + float(np.log(np.sum(np.exp(w - m))))


def gibbs_map(Y: np.ndarray) -> np.ndarray:
    """Normalized matrix exponential exp(Y + I) / tr exp(Y + I).

    This is the conjugate-entropy gradient: the closed-form mirror
    projection onto {X PSD, tr X = 1}. The constant shift I cancels in the
    normalization, and eigenvalues are max-shifted before exponentiating,
    so any Hermitian dual (spectra up to +-1e6 and beyond) is safe.
    """
    w, V = eig(Y)
    e = np.exp(w - w[0])
    e /= np.sum(e)
    X = hermitianize((V * e) @ V.conj().T)
    return X / float(np.trace(X).real)


def gibbs_map_bounded(Y: np.ndarray, p: float) -> np.ndarray:
    """Mirror projection onto {X PSD, tr X <= p} via a slack dimension.

    Y is embedded as diag(Y, 0), the Gibbs map applied in dimension n+1,
    the slack coordinate dropped, and the result scaled by p. The slack
    keeps a zero dual drift, so the output trace is strictly below p and
    approaches it as Y dominates the slack coordinate.
    """
    if p <= 0:
        raise ValueError(f"trace bound must be positive, got {p}")
    w, V = eig(Y)
    m = max(float(w[0]), 0.0)
    e = np.exp(w - m)
    denom = float(np.sum(e) + np.exp(-m))
    X = hermitianize((V * (e / denom)) @ V.conj().T)
    return p * X


def von_neumann_divergence(X: np.ndarray, Y: np.ndarray) -> float:
    """tr(X log X - X log Y): the Bregman divergence of the quantum entropy.

    X must be PSD with tr <= 1; Y must be positive definite
    (lambda_min >= 1e-12) with tr <= 1. A singular Y is rejected rather
    than clamped: the divergence against it is genuinely infinite, and
    silently flooring would mask solver bugs.
    """
    wx = _psd_eigenvalues(X, "divergence first argument")
    if float(np.sum(wx)) > 1.0 + _TRACE_TOL:
        raise DomainError("divergence first argument needs tr <= 1")
    wy, Vy = eig(Y)
    if wy[-1] < 1e-12:
        raise DomainError(
            f"divergence second argument must be PD (lambda_min >= 1e-12), "
            f"got lambda_min = {wy[-1]:.3e}"
        )
    if float(np.sum(wy)) > 1.0 + _TRACE_TOL:
        raise DomainError("divergence second argument needs tr <= 1")
    pos = wx[wx > ZERO_EIG_TOL]
    x_log_x = float(np.sum(pos * np.log(pos)))
    log_y = hermitianize((Vy * np.log(wy)) @ Vy.conj().T)
    return x_log_x - trace_inner(np.asarray(X, dtype=complex), log_y)


def fenchel_coupling(Q: np.ndarray, Y: np.ndarray) -> float:
    """omega(Q) + omega*(Y) - tr(Q Y) for feasible Q (PSD, tr Q = 1).

    Nonnegative, zero exactly when Q is the Gibbs state of Y; equals the
    von Neumann divergence between Q and gibbs_map(Y).
    """
    trq = float(np.trace(np.asarray(Q)).real)
    if abs(trq - 1.0) > _TRACE_TOL:
        raise DomainError(f"fenchel_coupling needs tr Q = 1, got {trq:.6g}")
    Q = np.asarray(Q, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    return quantum_entropy(Q) + conjugate_entropy(Y) - trace_inner(Q, Y)
