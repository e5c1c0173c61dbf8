"""Dense linear algebra for two-qubit pure states.

Basis order is fixed as (|++>, |+->, |-+>, |-->) with |+>, |-> the
eigenstates of sigma_z (eigenvalues +1, -1).  Every expectation value is
computed by an explicit 4x4 contraction; closed forms are kept out of this
module on purpose so tests can use them as independent checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import InvariantError

NORM_TOL = 1e-12
IMAG_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
EYE2 = np.eye(2, dtype=complex)

AXES = np.eye(3)

Side = Literal["first", "second"]


class _Identity:
    """Marker for the unit operator in place of a measurement direction."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "IDENTITY"


IDENTITY = _Identity()


def as_direction(v: Sequence[float] | np.ndarray, *, normalize: bool = False) -> np.ndarray:
    """Return ``v`` as a float unit 3-vector.

    Raises ValueError for the wrong shape, non-finite entries, or (unless
    ``normalize``) a norm that is off by more than 1e-12.
    """
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"direction must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"direction has non-finite components: {arr}")
    norm = float(np.linalg.norm(arr))
    if normalize:
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return arr / norm
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"direction is not a unit vector (norm={norm!r})")
    return arr


def planar_direction(angle: float) -> np.ndarray:
    """Unit vector (sin t, 0, cos t) in the x-z plane."""
    return np.array([np.sin(angle), 0.0, np.cos(angle)])


def spherical_direction(polar: float, azimuth: float) -> np.ndarray:
    st = np.sin(polar)
    return np.array([st * np.cos(azimuth), st * np.sin(azimuth), np.cos(polar)])


def spin_operator(a: np.ndarray) -> np.ndarray:
    """a . sigma as a 2x2 Hermitian matrix."""
    return a[0] * SIGMA_X + a[1] * SIGMA_Y + a[2] * SIGMA_Z


def projector(a: np.ndarray) -> np.ndarray:
    """P(a) = (1 + a . sigma) / 2."""
    return 0.5 * (EYE2 + spin_operator(a))


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Normalized pure state of two qubits.

    ``amplitudes`` is a length-4 complex vector in the fixed basis order.
    Use :meth:`from_amplitudes` to normalize arbitrary input; the plain
    constructor only validates.
    """

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (4,):
            raise ValueError(f"two-qubit state needs 4 amplitudes, got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.sqrt(np.sum(np.abs(amps) ** 2)))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex] | np.ndarray) -> TwoQubitState:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (4,):
            raise ValueError(f"two-qubit state needs 4 amplitudes, got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = np.sqrt(np.sum(np.abs(amps) ** 2))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm)

    @classmethod
    def product(cls, first: Sequence[complex], second: Sequence[complex]) -> TwoQubitState:
        """Tensor product of two single-qubit kets (each normalized first)."""
        kets = []
        for ket in (first, second):
            k = np.asarray(ket, dtype=complex).reshape(-1)
            if k.shape != (2,):
                raise ValueError("single-qubit ket needs 2 amplitudes")
            n = np.linalg.norm(k)
            if n == 0.0 or not np.isfinite(n):
                raise ValueError("single-qubit ket must be finite and nonzero")
            kets.append(k / n)
        return cls.from_amplitudes(np.kron(kets[0], kets[1]))

    @property
    def matrix(self) -> np.ndarray:
        """Amplitudes as a 2x2 array indexed [first, second]."""
        return self.amplitudes.reshape(2, 2)

    def expect(self, operator: np.ndarray) -> float:
        """<psi|O|psi> for a Hermitian 4x4 operator; checks the imaginary residue."""
        value = np.vdot(self.amplitudes, operator @ self.amplitudes)
        if abs(value.imag) > IMAG_TOL:
            raise InvariantError(f"expectation has imaginary residue {value.imag:.3e}")
        return float(value.real)

    def __repr__(self) -> str:
        return f"TwoQubitState({np.array2string(self.amplitudes, precision=6)})"


def make_alpha_beta_state(alpha: complex, beta: complex) -> TwoQubitState:
    """(alpha |+-> - beta |-+>) / sqrt(|alpha|^2 + |beta|^2)."""
    alpha = complex(alpha)
    beta = complex(beta)
    if not (np.isfinite(alpha) and np.isfinite(beta)):
        raise ValueError("alpha and beta must be finite")
    weight = abs(alpha) ** 2 + abs(beta) ** 2
    if weight == 0.0:
        raise ValueError("alpha and beta cannot both be zero")
    scale = 1.0 / np.sqrt(weight)
    return TwoQubitState(np.array([0.0, alpha * scale, -beta * scale, 0.0], dtype=complex))


def alpha2_state(alpha2: float) -> TwoQubitState:
    """Real, non-negative family alpha = sqrt(alpha2), beta = sqrt(1 - alpha2)."""
    if not 0.0 <= alpha2 <= 1.0:
        raise ValueError(f"alpha2 must lie in [0, 1], got {alpha2!r}")
    return make_alpha_beta_state(np.sqrt(alpha2), np.sqrt(1.0 - alpha2))


def _local_operator(a, side: Side) -> np.ndarray:
    single = EYE2 if a is IDENTITY else spin_operator(as_direction(a))
    if side == "first":
        return np.kron(single, EYE2)
    if side == "second":
        return np.kron(EYE2, single)
    raise ValueError(f"side must be 'first' or 'second', got {side!r}")


def pauli_expectation(state: TwoQubitState, a, b) -> float:
    """<psi| (a.sigma) x (b.sigma) |psi>."""
    op = np.kron(spin_operator(as_direction(a)), spin_operator(as_direction(b)))
    return state.expect(op)


def marginal_expectation(state: TwoQubitState, a, side: Side = "first") -> float:
    """<(a.sigma) x 1> for side='first', <1 x (a.sigma)> for side='second'."""
    return state.expect(_local_operator(as_direction(a), side))


def projector_expectation(state: TwoQubitState, a, b) -> float:
    """<psi| P(a) x P(b) |psi>; either argument may be ``IDENTITY``."""
    pa = EYE2 if a is IDENTITY else projector(as_direction(a))
    pb = EYE2 if b is IDENTITY else projector(as_direction(b))
    return state.expect(np.kron(pa, pb))


def bloch_vectors(state: TwoQubitState) -> tuple[np.ndarray, np.ndarray]:
    """Marginal Bloch vectors (m1, m2) of the two qubits."""
    m1 = np.array([marginal_expectation(state, e, "first") for e in AXES])
    m2 = np.array([marginal_expectation(state, e, "second") for e in AXES])
    return m1, m2


@dataclass(frozen=True)
class CorrelationTensor:
    T: np.ndarray
    m1: np.ndarray
    m2: np.ndarray

    def correlation(self, a, b) -> float:
        return float(np.asarray(a) @ self.T @ np.asarray(b))

    @property
    def connected(self) -> np.ndarray:
        """T - m1 m2^T, the bilinear form of the factorization criterion."""
        return self.T - np.outer(self.m1, self.m2)


def correlation_tensor(state: TwoQubitState) -> CorrelationTensor:
    T = np.array([[pauli_expectation(state, ei, ej) for ej in AXES] for ei in AXES])
    m1, m2 = bloch_vectors(state)
    return CorrelationTensor(T=T, m1=m1, m2=m2)


def concurrence(state: TwoQubitState) -> float:
    a = state.amplitudes
    return float(2.0 * abs(a[0] * a[3] - a[1] * a[2]))


def is_product_state(state: TwoQubitState, tol: float = 1e-12) -> bool:
    return concurrence(state) <= tol


# Random generators used by tests, acceptance runs and the CLI demo paths.

def random_direction(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_ket(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_state(rng: np.random.Generator) -> TwoQubitState:
    return TwoQubitState.from_amplitudes(random_ket(rng, 4))


def random_product_state(rng: np.random.Generator) -> TwoQubitState:
    return TwoQubitState.product(random_ket(rng, 2), random_ket(rng, 2))
