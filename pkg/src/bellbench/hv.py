"""Noncontextual local hidden-variables models sampled by Monte Carlo.

Each party's outcome is the dichotomic d=2 rule

    response(n, a, lam) = sign(a . (n + lam)),  sign(0) := +1,

with ``n`` the party's marginal Bloch vector and ``lam`` uniform on the unit
sphere.  Averaging over ``lam`` gives exactly ``a . n``.  Two joint weight
densities are provided: ``factorized`` (independent lam1, lam2) and
``delta_correlated`` (lam2 = lam1).

Random streams: the seed is fed to ``numpy.random.SeedSequence`` and
spawned into one child per fixed-size chunk of ``CHUNK_SIZE`` samples; each
chunk draws from its own Philox (counter-based) generator.  Chunk results
are reduced in chunk-index order, so the estimate depends only on
(seed, n_samples, inputs) and not on the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .criteria import ChshConfig
from .errors import InvariantError
from .quantum import IDENTITY, TwoQubitState, as_direction, bloch_vectors, is_product_state

CHUNK_SIZE = 1 << 16
SEED_MASK = (1 << 64) - 1
SIGMA_MULTIPLIER = 5.0

Kind = Literal["factorized", "delta_correlated"]
Response = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def d2_response(n, a, lam) -> np.ndarray | int:
    """sign(a . (n + lam)) with ties resolved to +1.

    ``lam`` may be a single 3-vector (returns an int) or an (N, 3) array of
    hidden variables (returns an int8 array of length N).
    """
    n = np.asarray(n, dtype=float)
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=float)
    proj = lam @ a + float(a @ n)
    out = np.where(proj >= 0.0, 1, -1).astype(np.int8)
    if out.ndim == 0:
        return int(out)
    return out


@dataclass(frozen=True)
class HvModel:
    kind: Kind = "factorized"
    response: Response = d2_response

    def __post_init__(self) -> None:
        if self.kind not in ("factorized", "delta_correlated"):
            raise ValueError(f"unknown hidden-variables model kind {self.kind!r}")


FACTORIZED = HvModel("factorized")
DELTA_CORRELATED = HvModel("delta_correlated")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int
    metadata: dict = field(default_factory=dict, compare=False)

    def consistent_with(self, value: float, k: float = SIGMA_MULTIPLIER) -> bool:
        return abs(self.mean - value) <= k * self.std_error


def sample_sphere(rng: np.random.Generator, m: int) -> np.ndarray:
    """m points uniform on the unit sphere (uniform z, uniform azimuth)."""
    z = rng.uniform(-1.0, 1.0, m)
    phi = rng.uniform(0.0, 2.0 * np.pi, m)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack((r * np.cos(phi), r * np.sin(phi), z))


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for sub-runs (e.g. scan points)."""
    ss = np.random.SeedSequence([int(seed) & SEED_MASK, *keys])
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


def _chunk_sizes(n_samples: int) -> list[int]:
    full, rest = divmod(n_samples, CHUNK_SIZE)
    return [CHUNK_SIZE] * full + ([rest] if rest else [])


def _default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))


def run_chunks(
    seed: int,
    n_samples: int,
    kernel: Callable[[np.random.Generator, int], np.ndarray],
    workers: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``kernel`` chunk by chunk and return per-column (sum, sum of squares).

    ``kernel(rng, m)`` must return an (m, k) array of per-sample statistics.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    sizes = _chunk_sizes(n_samples)
    children = np.random.SeedSequence(int(seed) & SEED_MASK).spawn(len(sizes))

    def job(i: int) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.Generator(np.random.Philox(children[i]))
        cols = np.asarray(kernel(rng, sizes[i]), dtype=float)
        return cols.sum(axis=0), (cols * cols).sum(axis=0)

    workers = _default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(sizes) == 1:
        parts = [job(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    total = np.zeros_like(parts[0][0])
    total_sq = np.zeros_like(parts[0][1])
    for s, sq in parts:  # fixed chunk order
        total = total + s
        total_sq = total_sq + sq
    return total, total_sq


def _mean_and_error(total: float, total_sq: float, n: int) -> tuple[float, float]:
    mean = total / n
    if n < 2:
        return float(mean), math.inf
    var = max(0.0, (total_sq - n * mean * mean) / (n - 1))
    return float(mean), float(math.sqrt(var / n))


def _draw(model: HvModel, rng: np.random.Generator, m: int) -> tuple[np.ndarray, np.ndarray]:
    lam1 = sample_sphere(rng, m)
    lam2 = sample_sphere(rng, m) if model.kind == "factorized" else lam1
    return lam1, lam2


def _state_metadata(model: HvModel, state: TwoQubitState) -> dict:
    product = is_product_state(state)
    meta = {"kind": model.kind, "product_state": product}
    if model.kind == "factorized" and not product:
        meta["warning"] = "non-product state: the factorized model only reproduces its marginals"
    return meta


def d2_mean(n, a, n_samples: int, seed: int, workers: int | None = None) -> McEstimate:
    """Monte Carlo average of the single-party response over uniform lam."""
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or np.linalg.norm(n) > 1.0 + 1e-12:
        raise ValueError("Bloch vector must be a 3-vector of norm <= 1")
    a = as_direction(a)

    def kernel(rng, m):
        return d2_response(n, a, sample_sphere(rng, m))[:, None]

    total, total_sq = run_chunks(seed, n_samples, kernel, workers)
    mean, se = _mean_and_error(total[0], total_sq[0], n_samples)
    return McEstimate(mean, se, n_samples, seed)


def hv_correlation(
    model: HvModel,
    state: TwoQubitState,
    a,
    b,
    n_samples: int,
    seed: int,
    workers: int | None = None,
) -> McEstimate:
    """Estimate the correlation integral of a(psi, lam1) b(psi, lam2) under ``model``."""
    a = as_direction(a)
    b = as_direction(b)
    n1, n2 = bloch_vectors(state)

    def kernel(rng, m):
        lam1, lam2 = _draw(model, rng, m)
        prod = model.response(n1, a, lam1).astype(np.int64) * model.response(n2, b, lam2)
        return prod[:, None]

    total, total_sq = run_chunks(seed, n_samples, kernel, workers)
    mean, se = _mean_and_error(total[0], total_sq[0], n_samples)
    return McEstimate(mean, se, n_samples, seed, _state_metadata(model, state))


def hv_chsh(
    model: HvModel,
    state: TwoQubitState,
    config: ChshConfig,
    n_samples: int,
    seed: int,
    workers: int | None = None,
) -> McEstimate:
    """Estimate <B> by sampling ab + ab' + a'b - a'b' per hidden-variable draw.

    Every per-sample combination is checked to be exactly +2 or -2.
    """
    n1, n2 = bloch_vectors(state)

    def kernel(rng, m):
        lam1, lam2 = _draw(model, rng, m)
        ra = model.response(n1, config.a, lam1).astype(np.int64)
        rap = model.response(n1, config.a_prime, lam1).astype(np.int64)
        rb = model.response(n2, config.b, lam2).astype(np.int64)
        rbp = model.response(n2, config.b_prime, lam2).astype(np.int64)
        combo = ra * rb + ra * rbp + rap * rb - rap * rbp
        if not np.all(np.abs(combo) == 2):
            raise InvariantError("per-sample CHSH combination is not +-2")
        return combo[:, None]

    total, total_sq = run_chunks(seed, n_samples, kernel, workers)
    mean, se = _mean_and_error(total[0], total_sq[0], n_samples)
    meta = _state_metadata(model, state)
    meta["per_sample_pm2"] = True
    return McEstimate(mean, se, n_samples, seed, meta)


@dataclass(frozen=True)
class PointwiseReport:
    """Certificate that |b+b'| b~(lam) = b(lam) + b'(lam) has no solution for any lam."""

    norm_sum: float
    lhs_values: tuple[float, float]
    rhs_values: tuple[float, float, float]
    unsatisfiable: bool


def _check_non_collinear(b: np.ndarray, b_prime: np.ndarray) -> None:
    if abs(float(b @ b_prime)) >= 1.0 - 1e-9:
        raise ValueError("b and b' are collinear; the pointwise relation is not ruled out")


def pointwise_linearity_failure(b, b_prime) -> PointwiseReport:
    b = as_direction(b)
    b_prime = as_direction(b_prime)
    _check_non_collinear(b, b_prime)
    s = float(np.linalg.norm(b + b_prime))
    lhs = (-s, s)
    rhs = (-2.0, 0.0, 2.0)
    # |b+b'| is strictly between 0 and 2 for non-collinear unit vectors
    unsat = all(abs(x - y) > 1e-12 for x in lhs for y in rhs)
    if not unsat:
        raise InvariantError(f"|b+b'| = {s!r} coincides with a dichotomic sum")
    return PointwiseReport(norm_sum=s, lhs_values=lhs, rhs_values=rhs, unsatisfiable=unsat)


@dataclass(frozen=True)
class LinearityReport:
    lhs: float
    rhs: float
    discrepancy: float
    std_error: float
    n_samples: int
    seed: int
    consistent: bool


def ensemble_linearity_check(
    model: HvModel,
    state: TwoQubitState,
    a_or_identity,
    b,
    b_prime,
    n_samples: int,
    seed: int,
    workers: int | None = None,
) -> LinearityReport:
    """Compare |b+b'| <a x b~> with <a x b> + <a x b'> on the same hidden-variable draws.

    ``a_or_identity`` may be ``IDENTITY`` for the single-party form of the
    relation.  The discrepancy error comes from the per-sample differences.
    """
    b = as_direction(b)
    b_prime = as_direction(b_prime)
    _check_non_collinear(b, b_prime)
    s = float(np.linalg.norm(b + b_prime))
    b_tilde = (b + b_prime) / s
    a = None if a_or_identity is IDENTITY else as_direction(a_or_identity)
    n1, n2 = bloch_vectors(state)

    def kernel(rng, m):
        lam1, lam2 = _draw(model, rng, m)
        ra = np.ones(m) if a is None else model.response(n1, a, lam1).astype(float)
        lhs = s * ra * model.response(n2, b_tilde, lam2)
        rhs = ra * model.response(n2, b, lam2) + ra * model.response(n2, b_prime, lam2)
        return np.column_stack((lhs, rhs, lhs - rhs))

    total, total_sq = run_chunks(seed, n_samples, kernel, workers)
    lhs_mean, _ = _mean_and_error(total[0], total_sq[0], n_samples)
    rhs_mean, _ = _mean_and_error(total[1], total_sq[1], n_samples)
    diff, se = _mean_and_error(total[2], total_sq[2], n_samples)
    return LinearityReport(
        lhs=lhs_mean,
        rhs=rhs_mean,
        discrepancy=diff,
        std_error=se,
        n_samples=n_samples,
        seed=seed,
        consistent=abs(diff) <= SIGMA_MULTIPLIER * se,
    )


@dataclass(frozen=True)
class ProbeRow:
    probe: np.ndarray
    conditioned: float
    conditioned_se: float
    unconditioned: float
    unconditioned_se: float
    agree: bool


@dataclass(frozen=True)
class ConditionalDensityReport:
    acceptance: float
    n_accepted: int
    vacuous: bool
    rows: list[ProbeRow]

    @property
    def agree(self) -> bool:
        return not self.vacuous and all(r.agree for r in self.rows)


def conditional_density_demo(
    a,
    state: TwoQubitState,
    n_samples: int,
    seed: int,
    *,
    model: HvModel = FACTORIZED,
    probes=None,
    workers: int | None = None,
) -> ConditionalDensityReport:
    """Reweight lam2 by (1 - a(psi, lam1))/2 and compare second-party means.

    Rejection keeps the draws where the first party's a-response is -1.  In
    the factorized model the surviving lam2 follow the same law as before,
    so each probe direction's mean is unchanged.
    """
    a = as_direction(a)
    probes = [as_direction(p) for p in (np.eye(3) if probes is None else probes)]
    n1, n2 = bloch_vectors(state)

    def kernel(rng, m):
        lam1, lam2 = _draw(model, rng, m)
        keep = (model.response(n1, a, lam1) == -1).astype(float)
        cols = [keep]
        for p in probes:
            rb = model.response(n2, p, lam2).astype(float)
            cols += [rb, keep * rb]
        return np.column_stack(cols)

    total, total_sq = run_chunks(seed, n_samples, kernel, workers)
    n_acc = int(round(total[0]))
    acceptance = n_acc / n_samples
    if n_acc == 0:
        return ConditionalDensityReport(acceptance, 0, True, [])
    rows = []
    for i, p in enumerate(probes):
        u_mean, u_se = _mean_and_error(total[1 + 2 * i], total_sq[1 + 2 * i], n_samples)
        # kept values are +-1, so their sum of squares equals the kept count
        c_mean, c_se = _mean_and_error(total[2 + 2 * i], total_sq[2 + 2 * i], n_acc)
        combined = math.hypot(c_se, u_se)
        rows.append(
            ProbeRow(
                probe=p,
                conditioned=c_mean,
                conditioned_se=c_se,
                unconditioned=u_mean,
                unconditioned_se=u_se,
                agree=abs(c_mean - u_mean) <= SIGMA_MULTIPLIER * combined,
            )
        )
    return ConditionalDensityReport(acceptance, n_acc, False, rows)
