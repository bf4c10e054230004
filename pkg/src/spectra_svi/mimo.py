"""Seven-cell MIMO throughput game and its variational reformulation.

Each of seven users controls the input signal covariance of its own
MIMO link, subject to a power cap tr X_i <= p, and receives multi-user
interference from the other six. Rates use natural logs; the mapping
F(X) = -diag(grad_1 R_1, ..., grad_N R_N) is monotone because each -R_i
is convex in X_i, so Nash equilibria coincide with strong solutions of
the induced VI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DomainError
from .linalg import hermitianize
from .problem import (
    BlockProfile,
    BlockSpec,
    NoiseModel,
    SpectraSet,
    SviProblem,
    TraceMode,
)

# Transmitter-to-receiver distances in km for the canonical 7-cell
# hexagonal layout (cell radius 1 km); row j = transmitter j, column
# i = receiver i. Diagonals are the direct links and are the row minima.
DISTANCE_KM = np.array([
    [0.89, 1.01, 1.05, 1.10, 1.01, 1.05, 1.10],
    [1.01, 0.89, 1.05, 2.10, 2.69, 2.66, 1.99],
    [1.10, 1.90, 0.89, 1.01, 2.10, 2.72, 2.72],
    [1.99, 2.61, 1.94, 0.89, 1.10, 2.10, 2.76],
    [2.56, 2.69, 2.66, 1.99, 0.89, 1.05, 2.10],
    [2.52, 2.10, 2.72, 2.72, 1.90, 0.89, 1.01],
    [1.90, 1.10, 2.10, 2.76, 2.61, 1.94, 0.89],
])

# Reference draw of the transmitter-4 -> receiver-5 channel under
# m = n = 4, kept as a golden serialization fixture. Rows index transmit
# antennas, columns receive antennas, i.e. the transpose of the H[j][i]
# (receive x transmit) orientation used below.
CHANNEL_T4_R5 = np.array([
    [-0.54 - 0.71j, -1.39 + 2.24j, 0.65 - 2.17j, 0.84 + 0.17j],
    [-0.13 - 0.71j, -0.14 + 0.88j, 0.09 - 1.67j, -1.22 - 0.25j],
    [1.39 + 2.34j, -0.17 + 1.23j, 1.00 + 0.23j, 1.72 - 0.33j],
    [2.40 - 0.97j, 1.10 - 1.07j, 2.94 - 2.00j, 0.21 - 1.64j],
])


@dataclass(frozen=True)
class NetworkTopology:
    """User count, per-user antenna sizes, distances, and the power cap.

    distance_km[j][i] is the transmitter-j to receiver-i distance; the
    power cap applies per user as the trace bound on X_i.
    """

    tx_antennas: tuple[int, ...]
    rx_antennas: tuple[int, ...]
    distance_km: np.ndarray
    max_power: float = 1.0

    def __post_init__(self) -> None:
        D = np.asarray(self.distance_km, dtype=float)
        N = len(self.tx_antennas)
        if len(self.rx_antennas) != N:
            raise ValueError("tx and rx antenna lists must have equal length")
        if D.shape != (N, N):
            raise ValueError(f"distance matrix must be {N}x{N}, got {D.shape}")
        if np.any(D <= 0):
            raise ValueError("distances must be positive")
        if self.max_power <= 0:
            raise ValueError(f"power cap must be positive, got {self.max_power}")
        object.__setattr__(self, "distance_km", D)

    @property
    def users(self) -> int:
        return len(self.tx_antennas)

    def constraint_set(self) -> SpectraSet:
        return SpectraSet(tuple(
            BlockSpec(m, self.max_power, TraceMode.AT_MOST)
            for m in self.tx_antennas))


def canonical_topology(m: int = 2, n: int = 2) -> NetworkTopology:
    """The 7-cell hexagonal network with its measured distance matrix,
    uniform antenna counts (m transmit, n receive), unit power cap."""
    return NetworkTopology(
        tx_antennas=(m,) * 7,
        rx_antennas=(n,) * 7,
        distance_km=DISTANCE_KM.copy(),
    )


@dataclass(frozen=True)
class ChannelSet:
    """Cross-channel matrices: H[j][i] maps transmitter j's signal into
    receiver i's antenna space, shape rx_antennas[i] x tx_antennas[j]."""

    H: tuple[tuple[np.ndarray, ...], ...]

    @property
    def users(self) -> int:
        return len(self.H)

    def direct(self, i: int) -> np.ndarray:
        return self.H[i][i]


def sample_channels(topology: NetworkTopology,
                    rng: np.random.Generator) -> ChannelSet:
    """Rayleigh-fading draw: each entry of H[j][i] is circularly
    symmetric complex Gaussian with variance 1/distance^2 (real and
    imaginary parts i.i.d. with variance 1/(2 d^2))."""
    rows = []
    for j in range(topology.users):
        row = []
        for i in range(topology.users):
            d = topology.distance_km[j, i]
            shape = (topology.rx_antennas[i], topology.tx_antennas[j])
            scale = 1.0 / (d * np.sqrt(2.0))
            row.append(scale * (rng.standard_normal(shape)
                                + 1j * rng.standard_normal(shape)))
        rows.append(tuple(row))
    return ChannelSet(tuple(rows))


def _received_covariance(channels: ChannelSet, X: BlockProfile, i: int,
                         skip_own: bool) -> np.ndarray:
    n_i = channels.H[i][i].shape[0]
    W = np.eye(n_i, dtype=complex)
    for j in range(channels.users):
        if skip_own and j == i:
            continue
        Hji = channels.H[j][i]
        W = W + Hji @ X.blocks[j] @ Hji.conj().T
    return hermitianize(W)


def mui_covariance(channels: ChannelSet, X: BlockProfile, i: int) -> np.ndarray:
    """Interference-plus-noise covariance at receiver i:
    I + sum_{j != i} H_ji X_j H_ji^dag. PD with lambda_min >= 1."""
    return _received_covariance(channels, X, i, skip_own=True)


def _logdet_pd(W: np.ndarray) -> float:
    w = np.linalg.eigvalsh(W)
    if w[0] <= 0:
        raise DomainError(f"covariance not PD: lambda_min = {w[0]:.3e}")
    return float(np.sum(np.log(w)))


def throughput(channels: ChannelSet, X: BlockProfile, i: int) -> float:
    """User i's rate: log det(I + sum_j H_ji X_j H_ji^dag) minus the
    log det of the interference-only covariance. Nonnegative, and
    concave in X_i since the second term does not depend on X_i."""
    full = _received_covariance(channels, X, i, skip_own=False)
    return _logdet_pd(full) - _logdet_pd(mui_covariance(channels, X, i))


def throughput_gradient(channels: ChannelSet, X: BlockProfile,
                        i: int) -> np.ndarray:
    """Gradient of R_i in X_i: H_ii^dag W^{-1} H_ii with W the full
    received covariance at i (the interference-only term is constant in
    X_i, so it drops out). Hermitian PSD of the transmit dimension."""
    W = _received_covariance(channels, X, i, skip_own=False)
    Hii = channels.H[i][i]
    return hermitianize(Hii.conj().T @ np.linalg.solve(W, Hii))


def game_mapping(channels: ChannelSet, X: BlockProfile) -> BlockProfile:
    """Blockwise F(X) = -grad R_i: the monotone VI mapping of the game."""
    return BlockProfile(tuple(
        -throughput_gradient(channels, X, i) for i in range(channels.users)))


def game_to_svi(topology: NetworkTopology, channels: ChannelSet,
                sigma: float = 0.0) -> SviProblem:
    """Package the game as an SVI over the power-cap constraint set.

    The oracle bound uses the exact noiseless supremum
    max_i ||H_ii||_2^2 (W >= I makes ||H^dag W^{-1} H||_2 <= ||H||_2^2),
    plus a spectral margin for the Gaussian noise; no sampling needed.
    """
    C = max(linalg.spectral_norm(channels.direct(i)) ** 2
            for i in range(topology.users))
    if sigma > 0:
        C += 3.0 * sigma * math.sqrt(max(topology.tx_antennas))
    return SviProblem(
        constraints=topology.constraint_set(),
        mapping=lambda X: game_mapping(channels, X),
        noise=NoiseModel(sigma),
        oracle_bound=max(float(C), 1e-12),
    )
