"""Block-structured stochastic variational inequality problems.

A problem couples a product constraint set, one PSD trace-constrained
spectrahedron per player block, with a deterministic monotone mapping F
acting blockwise and a noise model that turns F into the stochastic
oracle Phi(X, xi) = F(X) + Z. Both merit functions live here: the strong
gap sup_Z tr(F(X)(X - Z)) in closed form (a minimum-eigenvalue problem
per block) and a sampled lower bound on the weak gap
sup_Z tr(F(Z)(X - Z)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .errors import DomainError
from .linalg import eig, hermitianize, trace_inner
from .mirror import gibbs_map

FEASIBILITY_PSD_TOL = 1e-9
FEASIBILITY_TRACE_TOL = 1e-8


class TraceMode(enum.Enum):
    """Trace constraint flavor: density-style equality or power-cap bound."""

    EQUAL = "eq"
    AT_MOST = "le"


@dataclass(frozen=True)
class BlockSpec:
    """One factor of the constraint set: {X PSD, tr X (= or <=) bound}."""

    dim: int
    bound: float = 1.0
    mode: TraceMode = TraceMode.EQUAL

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"block dimension must be >= 1, got {self.dim}")
        if self.bound <= 0:
            raise ValueError(f"trace bound must be positive, got {self.bound}")


@dataclass(frozen=True)
class SpectraSet:
    """Product of per-block spectrahedra; the feasible set of the VI."""

    blocks: tuple[BlockSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError("constraint set needs at least one block")

    @classmethod
    def single(cls, dim: int, bound: float = 1.0,
               mode: TraceMode = TraceMode.EQUAL) -> "SpectraSet":
        return cls((BlockSpec(dim, bound, mode),))

    @classmethod
    def uniform(cls, count: int, dim: int, bound: float = 1.0,
                mode: TraceMode = TraceMode.EQUAL) -> "SpectraSet":
        return cls(tuple(BlockSpec(dim, bound, mode) for _ in range(count)))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.dim for b in self.blocks)

    @property
    def total_dim(self) -> int:
        """Dimension of the block-diagonal ambient matrix, sum of block dims."""
        return sum(b.dim for b in self.blocks)

    def zeros(self) -> "BlockProfile":
        return BlockProfile(tuple(
            np.zeros((b.dim, b.dim), dtype=complex) for b in self.blocks))


@dataclass(frozen=True, eq=False)
class BlockProfile:
    """Ordered Hermitian blocks of a block-diagonal matrix diag(X_1,...,X_N).

    Supports the linear arithmetic the solvers need (addition,
    subtraction, scalar multiples), always returning new profiles. Norms
    follow block-diagonal semantics: Frobenius and trace norms add across
    blocks, the spectral norm is the blockwise maximum.
    """

    blocks: tuple[np.ndarray, ...]

    # Opt out of numpy ufunc dispatch: otherwise numpy_scalar * profile
    # broadcasts over the blocks instead of calling __rmul__.
    __array_ufunc__ = None

    def __post_init__(self) -> None:
        mats = tuple(np.asarray(b, dtype=complex) for b in self.blocks)
        for i, b in enumerate(mats):
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise ValueError(f"block {i} is not square: shape {b.shape}")
        object.__setattr__(self, "blocks", mats)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.blocks[i]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.shape[0] for b in self.blocks)

    def __add__(self, other: "BlockProfile") -> "BlockProfile":
        return BlockProfile(tuple(
            a + b for a, b in zip(self.blocks, other.blocks, strict=True)))

    def __sub__(self, other: "BlockProfile") -> "BlockProfile":
        return BlockProfile(tuple(
            a - b for a, b in zip(self.blocks, other.blocks, strict=True)))

    def __mul__(self, scalar: float) -> "BlockProfile":
        return BlockProfile(tuple(scalar * b for b in self.blocks))

    __rmul__ = __mul__

    def hermitianized(self) -> "BlockProfile":
        return BlockProfile(tuple(hermitianize(b) for b in self.blocks))

    def frobenius_norm(self) -> float:
        return math.sqrt(sum(linalg.frobenius_norm(b) ** 2 for b in self.blocks))

    def trace_norm(self) -> float:
        return sum(linalg.trace_norm(b) for b in self.blocks)

    def spectral_norm(self) -> float:
        return max(linalg.spectral_norm(b) for b in self.blocks)


def profile_inner(A: BlockProfile, B: BlockProfile) -> float:
    """Real trace pairing summed over blocks: sum_i Re tr(A_i B_i)."""
    return sum(trace_inner(a, b)
               for a, b in zip(A.blocks, B.blocks, strict=True))


def assert_feasible(X: BlockProfile, cset: SpectraSet,
                    psd_tol: float = FEASIBILITY_PSD_TOL,
                    trace_tol: float = FEASIBILITY_TRACE_TOL) -> None:
    """Raise DomainError unless every block is PSD with a conforming trace."""
    if X.dims != cset.dims:
        raise DomainError(f"profile dims {X.dims} do not match set {cset.dims}")
    for i, (Xi, spec) in enumerate(zip(X.blocks, cset.blocks, strict=True)):
        w = eig(Xi).eigenvalues
        if w[-1] < -psd_tol:
            raise DomainError(
                f"block {i} not PSD: lambda_min = {w[-1]:.3e}")
        tr = float(np.sum(w))
        if spec.mode is TraceMode.EQUAL and abs(tr - spec.bound) > trace_tol:
            raise DomainError(
                f"block {i} trace {tr:.12g} != bound {spec.bound:.12g}")
        if spec.mode is TraceMode.AT_MOST and tr > spec.bound + trace_tol:
            raise DomainError(
                f"block {i} trace {tr:.12g} exceeds bound {spec.bound:.12g}")


def is_feasible(X: BlockProfile, cset: SpectraSet,
                psd_tol: float = FEASIBILITY_PSD_TOL,
                trace_tol: float = FEASIBILITY_TRACE_TOL) -> bool:
    try:
        assert_feasible(X, cset, psd_tol, trace_tol)
    except DomainError:
        return False
    return True


@dataclass(frozen=True)
class NoiseModel:
    """Additive Hermitian Gaussian oracle noise; sigma = 0 means none.

    Each noise block is the Hermitian part of a matrix with i.i.d.
    circularly symmetric complex Gaussian entries of variance sigma^2,
    so the noise is zero-mean by construction.
    """

    sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError(f"noise level must be >= 0, got {self.sigma}")

    def sample(self, dims: tuple[int, ...], rng: np.random.Generator) -> BlockProfile:
        if self.sigma == 0:
            return BlockProfile(tuple(
                np.zeros((d, d), dtype=complex) for d in dims))
        s = self.sigma / math.sqrt(2.0)
        blocks = []
        for d in dims:
            A = s * (rng.standard_normal((d, d))
                     + 1j * rng.standard_normal((d, d)))
            blocks.append(hermitianize(A))
        return BlockProfile(tuple(blocks))


@dataclass(frozen=True)
class SviProblem:
    """Constraint set, deterministic mapping, noise model, oracle bound.

    `mapping` evaluates the blockwise Hermitian values of F at a profile.
    `oracle_bound` is the constant C with E ||Phi(X, xi)||_2^2 <= C^2 over
    feasible X; it bounds the full noisy oracle, not just the mean part,
    and feeds the horizon-tuned constant stepsize.
    """

    constraints: SpectraSet
    mapping: Callable[[BlockProfile], BlockProfile]
    noise: NoiseModel = NoiseModel()
    oracle_bound: float = 1.0

    def __post_init__(self) -> None:
        if self.oracle_bound <= 0:
            raise ValueError(
                f"oracle bound must be positive, got {self.oracle_bound}")


def oracle_sample(problem: SviProblem, X: BlockProfile,
                  rng: np.random.Generator) -> tuple[BlockProfile, BlockProfile]:
    """One stochastic oracle call: returns (F(X) + Z, Z).

    The rng stream is consumed only when the noise level is nonzero, and
    is passed explicitly so a seed fixes the sample path regardless of
    scheduling.
    """
    F = problem.mapping(X)
    if problem.noise.sigma == 0:
        return F, problem.constraints.zeros()
    Z = problem.noise.sample(X.dims, rng)
    return F + Z, Z


def best_response(F: BlockProfile, cset: SpectraSet) -> BlockProfile:
    """Blockwise minimizer of tr(F_i Z_i) over the constraint set.

    For a trace-equality block the minimizer is bound * (bottom
    eigenvector projector); with a trace cap the zero matrix wins
    whenever lambda_min(F_i) >= 0.
    """
    blocks = []
    for Fi, spec in zip(F.blocks, cset.blocks, strict=True):
        w, V = eig(Fi)
        if spec.mode is TraceMode.AT_MOST and w[-1] >= 0:
            blocks.append(np.zeros_like(Fi))
            continue
        v = V[:, -1]
        blocks.append(spec.bound * hermitianize(np.outer(v, v.conj())))
    return BlockProfile(tuple(blocks))


def strong_gap(problem: SviProblem, X: BlockProfile) -> float:
    """sup_Z tr(F(X)(X - Z)) over the constraint set, in closed form.

    The supremum of a linear functional over a spectrahedron is an
    eigenvalue problem: per block, inf_Z tr(F_i Z_i) equals
    bound * lambda_min(F_i) under trace equality and
    bound * min(0, lambda_min(F_i)) under a trace cap. Zero exactly at
    strong solutions; nonnegative on feasible profiles.
    """
    F = problem.mapping(X)
    total = 0.0
    for Fi, Xi, spec in zip(F.blocks, X.blocks, problem.constraints.blocks,
                            strict=True):
        lam_min = float(eig(Fi).eigenvalues[-1])
        if spec.mode is TraceMode.AT_MOST:
            lam_min = min(0.0, lam_min)
        total += trace_inner(Fi, Xi) - spec.bound * lam_min
    return total


def random_feasible_block(spec: BlockSpec, rng: np.random.Generator) -> np.ndarray:
    """Full-support sample of one spectrahedron block, without rejection.

    A random Hermitian matrix is pushed through the Gibbs map (trace
    exactly the bound); under a trace cap the result is additionally
    shrunk by a uniform factor to cover the interior.
    """
    X = gibbs_map(linalg.random_hermitian(rng, spec.dim))
    scale = spec.bound
    if spec.mode is TraceMode.AT_MOST:
        scale *= float(rng.uniform())
    return scale * X


def random_feasible_profile(cset: SpectraSet,
                            rng: np.random.Generator) -> BlockProfile:
    return BlockProfile(tuple(
        random_feasible_block(spec, rng) for spec in cset.blocks))


def weak_gap_estimate(problem: SviProblem, X: BlockProfile, probes: int,
                      rng: np.random.Generator) -> float:
    """Sampled lower bound on sup_Z tr(F(Z)(X - Z)).

    A lower bound only: the sup is nonconvex in Z for general F, so the
    candidate set is Z = X itself (making the estimate >= 0), the
    closed-form strong-gap maximizer, and `probes` random feasible
    profiles.
    """
    candidates = [X, best_response(problem.mapping(X), problem.constraints)]
    candidates.extend(
        random_feasible_profile(problem.constraints, rng)
        for _ in range(probes))
    best = -math.inf
    for Z in candidates:
        val = profile_inner(problem.mapping(Z), X - Z)
        best = max(best, val)
    return best


def monotonicity_witness(problem: SviProblem, X: BlockProfile,
                         Y: BlockProfile) -> float:
    """tr((X - Y)(F(X) - F(Y))); nonnegative iff the mapping is monotone."""
    return profile_inner(X - Y, problem.mapping(X) - problem.mapping(Y))


def quadratic_test_problem(B: BlockProfile, cset: SpectraSet,
                           sigma: float = 0.0) -> SviProblem:
    """VI with mapping F(X) = X - B, the gradient of 0.5 ||X - B||_F^2.

    Its unique solution is the Euclidean projection of B onto the
    constraint set, which an independent projection oracle can verify.
    The oracle bound is analytic: ||X_i - B_i||_2 <= bound_i + ||B_i||_2
    per block, plus a spectral-norm margin for the noise when sigma > 0.
    """
    if B.dims != cset.dims:
        raise DomainError(f"target dims {B.dims} do not match set {cset.dims}")
    C = max(spec.bound + linalg.spectral_norm(Bi)
            for Bi, spec in zip(B.blocks, cset.blocks, strict=True))
    if sigma > 0:
        C += 3.0 * sigma * math.sqrt(max(cset.dims))
    return SviProblem(
        constraints=cset,
        mapping=lambda X: X - B,
        noise=NoiseModel(sigma),
        oracle_bound=C,
    )


def estimate_oracle_bound(problem: SviProblem, rng: np.random.Generator,
                          probes: int = 100, safety: float = 1.5) -> float:
    """Empirical C: max spectral norm of Phi over random feasible probes,
    inflated by a safety factor."""
    worst = 0.0
    for _ in range(probes):
        X = random_feasible_profile(problem.constraints, rng)
        phi, _ = oracle_sample(problem, X, rng)
        worst = max(worst, phi.spectral_norm())
    if worst == 0.0:
        raise DomainError("oracle is identically zero on probes; "
                          "configure the bound explicitly")
    return safety * worst
