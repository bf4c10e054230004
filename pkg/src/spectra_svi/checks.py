"""Built-in invariant suite behind the `check` CLI subcommand.

Fast spot checks of the mathematical identities the solvers lean on:
mirror-map feasibility, the divergence inequalities, gap closed forms
against sampling, gradient formulas against finite differences, and
monotonicity of the game mapping (including a deliberately broken
fixture that must fail). Smaller sample counts than the acceptance
tests; the whole suite runs in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, mirror, oracles, solvers
from .mimo import (
    canonical_topology,
    game_to_svi,
    sample_channels,
    throughput,
    throughput_gradient,
)
from .problem import (
    BlockProfile,
    NoiseModel,
    SpectraSet,
    SviProblem,
    TraceMode,
    monotonicity_witness,
    oracle_sample,
    profile_inner,
    quadratic_test_problem,
    random_feasible_profile,
    strong_gap,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}: {self.detail}"


def _interior_state(rng: np.random.Generator, n: int,
                    floor_weight: float = 1e-3) -> np.ndarray:
    """Random density matrix mixed with the uniform state, so the smallest
    eigenvalue stays safely positive."""
    X = mirror.gibbs_map(linalg.random_hermitian(rng, n))
    return (1.0 - floor_weight) * X + (floor_weight / n) * np.eye(n)


def check_gibbs_feasibility(rng: np.random.Generator) -> CheckResult:
    worst_eig, worst_tr = 0.0, 0.0
    for k in range(300):
        n = (2, 4, 8)[k % 3]
        span = 10.0 ** (1 + k % 6)
        Y = linalg.random_spectrum_hermitian(rng, n, -span, span)
        X = mirror.gibbs_map(Y)
        w = linalg.eig(X).eigenvalues
        worst_eig = min(worst_eig, float(w[-1]))
        worst_tr = max(worst_tr, abs(float(np.sum(w)) - 1.0))
    ok = worst_eig >= -1e-10 and worst_tr <= 1e-10
    return CheckResult(
        "gibbs-feasibility", ok,
        f"min eigenvalue {worst_eig:.2e}, max |tr-1| {worst_tr:.2e} "
        "over 300 duals with spectra up to 1e6")


def check_pinsker(rng: np.random.Generator) -> CheckResult:
    worst = np.inf
    for _ in range(200):
        n = int(rng.integers(2, 6))
        X = _interior_state(rng, n)
        Y = _interior_state(rng, n)
        slack = (mirror.von_neumann_divergence(X, Y)
                 - 0.5 * linalg.trace_norm(X - Y) ** 2)
        worst = min(worst, slack)
    return CheckResult(
        "pinsker-lower-bound", worst >= -1e-8,
        f"min divergence slack {worst:.2e} over 200 pairs")


def check_smoothness(rng: np.random.Generator) -> CheckResult:
    worst = np.inf
    for _ in range(200):
        n = int(rng.integers(2, 6))
        X = mirror.gibbs_map(linalg.random_hermitian(rng, n))
        Y = linalg.random_hermitian(rng, n, scale=2.0)
        Z = linalg.random_hermitian(rng, n)
        Z = Z * (float(rng.uniform()) / max(linalg.spectral_norm(Z), 1e-12))
        lhs = mirror.fenchel_coupling(X, Y + Z)
        rhs = (mirror.fenchel_coupling(X, Y)
               + linalg.trace_inner(Z, mirror.gibbs_map(Y) - X)
               + linalg.spectral_norm(Z) ** 2)
        worst = min(worst, rhs - lhs)
    return CheckResult(
        "coupling-smoothness", worst >= -1e-8,
        f"min inequality slack {worst:.2e} over 200 triples")


def check_fenchel_identity(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 6))
        Q = mirror.gibbs_map(linalg.random_hermitian(rng, n))
        Y = linalg.random_hermitian(rng, n, scale=2.0)
        diff = abs(mirror.fenchel_coupling(Q, Y)
                   - mirror.von_neumann_divergence(Q, mirror.gibbs_map(Y)))
        worst = max(worst, diff)
    return CheckResult(
        "fenchel-bregman-identity", worst <= 1e-8,
        f"max |coupling - divergence| {worst:.2e} over 50 pairs")


def check_gibbs_gradient(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(3):
        Y = linalg.random_hermitian(rng, 3)
        G = oracles.finite_diff_gradient(mirror.conjugate_entropy, Y)
        worst = max(worst, float(np.max(np.abs(G - mirror.gibbs_map(Y)))))
    return CheckResult(
        "gibbs-is-conjugate-gradient", worst <= 1e-5,
        f"max finite-difference deviation {worst:.2e}")


def check_strong_gap_closed_form(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(10):
        mode = TraceMode.EQUAL if rng.uniform() < 0.5 else TraceMode.AT_MOST
        cset = SpectraSet.uniform(2, 3, bound=float(rng.uniform(0.5, 2.0)),
                                  mode=mode)
        B = BlockProfile(tuple(
            linalg.random_hermitian(rng, 3) for _ in range(2)))
        problem = quadratic_test_problem(B, cset)
        X = random_feasible_profile(cset, rng)
        F = problem.mapping(X)
        sampled = profile_inner(F, X) + oracles.sampled_sup_linear(
            F, cset, probes=200, rng=rng)
        worst = max(worst, abs(strong_gap(problem, X) - sampled))
    return CheckResult(
        "strong-gap-closed-form", worst <= 1e-8,
        f"max |closed - sampled sup| {worst:.2e} over 10 instances")


def check_mirror_step_descends(rng: np.random.Generator) -> CheckResult:
    cset = SpectraSet.single(4)
    B = BlockProfile((linalg.random_hermitian(rng, 4),))
    problem = quadratic_test_problem(B, cset)
    Y0 = cset.zeros()
    X0 = solvers.dual_to_primal(Y0, cset)
    _, X1 = solvers.mirror_step(Y0, problem.mapping(X0), 0.5, cset)
    g0, g1 = strong_gap(problem, X0), strong_gap(problem, X1)
    return CheckResult(
        "mirror-step-descends", g1 < g0,
        f"gap {g0:.4f} -> {g1:.4f} after one step")


def check_averaging_identity(rng: np.random.Generator) -> CheckResult:
    cset = SpectraSet.single(3)
    schedule = solvers.StepSchedule.harmonic_sqrt().resolve(1.0, 3, 50)
    points = [random_feasible_profile(cset, rng) for _ in range(51)]
    state = solvers.AveragingState(schedule(0), points[0])
    for t in range(50):
        state = solvers.update_average(state, points[t + 1], schedule(t + 1))
    etas = [schedule(t) for t in range(51)]
    direct = sum((e * P for e, P in zip(etas[1:], points[1:])),
                 etas[0] * points[0]) * (1.0 / sum(etas))
    err = (state.xbar - direct).frobenius_norm()
    return CheckResult(
        "averaging-recursion", err <= 1e-12 and
        abs(state.gamma - sum(etas)) <= 1e-12 * sum(etas),
        f"recursion vs direct weighted sum differs by {err:.2e}")


def check_throughput_gradient(rng: np.random.Generator) -> CheckResult:
    topo = canonical_topology(2, 2)
    channels = sample_channels(topo, rng)
    cset = topo.constraint_set()
    worst = 0.0
    for _ in range(2):
        X = random_feasible_profile(cset, rng)
        i = int(rng.integers(0, topo.users))
        analytic = throughput_gradient(channels, X, i)

        def rate_in_own_block(Xi: np.ndarray, X=X, i=i) -> float:
            blocks = list(X.blocks)
            blocks[i] = Xi
            return throughput(channels, BlockProfile(tuple(blocks)), i)

        numeric = oracles.finite_diff_gradient(rate_in_own_block, X.blocks[i])
        rel = (linalg.frobenius_norm(numeric - analytic)
               / max(linalg.frobenius_norm(analytic), 1e-12))
        worst = max(worst, rel)
    return CheckResult(
        "throughput-gradient", worst <= 1e-4,
        f"max relative deviation from finite differences {worst:.2e}")


def check_monotonicity(rng: np.random.Generator) -> CheckResult:
    topo = canonical_topology(2, 2)
    channels = sample_channels(topo, rng)
    problem = game_to_svi(topo, channels, sigma=0.0)
    worst = np.inf
    for _ in range(100):
        X = random_feasible_profile(problem.constraints, rng)
        Y = random_feasible_profile(problem.constraints, rng)
        worst = min(worst, monotonicity_witness(problem, X, Y))

    anti = SviProblem(
        constraints=problem.constraints,
        mapping=lambda X: -1.0 * X,
        noise=NoiseModel(),
        oracle_bound=1.0,
    )
    anti_worst = np.inf
    for _ in range(100):
        X = random_feasible_profile(anti.constraints, rng)
        Y = random_feasible_profile(anti.constraints, rng)
        anti_worst = min(anti_worst, monotonicity_witness(anti, X, Y))

    ok = worst >= -1e-8 and anti_worst < -1e-8
    return CheckResult(
        "game-monotonicity", ok,
        f"min witness {worst:.2e}; anti-fixture min {anti_worst:.2e} "
        "(must be negative)")


def check_oracle_statistics(rng: np.random.Generator) -> CheckResult:
    topo = canonical_topology(2, 2)
    channels = sample_channels(topo, rng)
    problem = game_to_svi(topo, channels, sigma=1.0)
    dims = problem.constraints.dims
    total = problem.constraints.zeros()
    draws = 2000
    for _ in range(draws):
        total = total + problem.noise.sample(dims, rng)
    mean_norm = (total * (1.0 / draws)).frobenius_norm()
    mean_ok = mean_norm <= 5.0 * problem.noise.sigma * sum(dims) / np.sqrt(draws)

    bound_ok = True
    worst_ratio = 0.0
    for _ in range(50):
        X = random_feasible_profile(problem.constraints, rng)
        phi, _ = oracle_sample(problem, X, rng)
        ratio = phi.spectral_norm() / problem.oracle_bound
        worst_ratio = max(worst_ratio, ratio)
        bound_ok = bound_ok and ratio <= 1.0
    return CheckResult(
        "oracle-statistics", mean_ok and bound_ok,
        f"noise mean norm {mean_norm:.2e} over {draws} draws; "
        f"max ||Phi||/C = {worst_ratio:.3f}")


def run_checks(seed: int = 7) -> list[CheckResult]:
    suite = (
        check_gibbs_feasibility,
        check_pinsker,
        check_smoothness,
        check_fenchel_identity,
        check_gibbs_gradient,
        check_strong_gap_closed_form,
        check_mirror_step_descends,
        check_averaging_identity,
        check_throughput_gradient,
        check_monotonicity,
        check_oracle_statistics,
    )
    return [fn(np.random.default_rng([seed, k]))
            for k, fn in enumerate(suite)]
