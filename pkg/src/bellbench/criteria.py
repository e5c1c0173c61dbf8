"""CHSH functional, separable/Tsirelson bounds and the factorization criterion G(a, b)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import InvariantError
from .quantum import (
    IDENTITY,
    TwoQubitState,
    as_direction,
    correlation_tensor,
    marginal_expectation,
    pauli_expectation,
    planar_direction,
    projector_expectation,
)

TSIRELSON = 2.0 * math.sqrt(2.0)
TSIRELSON_TOL = 1e-9
G_TOL = 1e-10

# (theta, phi, theta', phi') of the three planar configurations plotted in the figures.
NAMED_ANGLES: dict[str, tuple[float, float, float, float]] = {
    "A": (math.pi / 3, math.pi / 8, math.pi / 4, math.pi / 6),
    "B": (math.pi / 4, math.pi / 2, 3 * math.pi / 4, 0.0),
    "C": (math.pi / 6, 3 * math.pi / 4, math.pi, 0.0),
}


@dataclass(frozen=True, eq=False)
class ChshConfig:
    """Four measurement directions a, a', b, b'.

    ``angles`` holds (theta, phi, theta', phi') when the config was built
    from the planar family v(t) = (sin t, 0, cos t).
    """

    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray
    angles: tuple[float, float, float, float] | None = None

    def __post_init__(self) -> None:
        for name in ("a", "a_prime", "b", "b_prime"):
            vec = as_direction(getattr(self, name))
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)
        if self.angles is not None:
            angles = tuple(float(t) for t in self.angles)
            if len(angles) != 4:
                raise ValueError("planar angles must be (theta, phi, theta', phi')")
            regenerated = [planar_direction(t) for t in (angles[0], angles[2], angles[1], angles[3])]
            for vec, regen in zip((self.a, self.a_prime, self.b, self.b_prime), regenerated):
                if np.max(np.abs(vec - regen)) > 1e-12:
                    raise ValueError("planar angles do not regenerate the stored directions")
            object.__setattr__(self, "angles", angles)

    @classmethod
    def planar(cls, theta: float, phi: float, theta_prime: float, phi_prime: float) -> ChshConfig:
        return cls(
            a=planar_direction(theta),
            a_prime=planar_direction(theta_prime),
            b=planar_direction(phi),
            b_prime=planar_direction(phi_prime),
            angles=(theta, phi, theta_prime, phi_prime),
        )

    def pairs(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        """The four (first, second) direction pairs in CHSH order."""
        return {
            "ab": (self.a, self.b),
            "ab'": (self.a, self.b_prime),
            "a'b": (self.a_prime, self.b),
            "a'b'": (self.a_prime, self.b_prime),
        }

    def __repr__(self) -> str:
        if self.angles is not None:
            return "ChshConfig.planar({:.6g}, {:.6g}, {:.6g}, {:.6g})".format(*self.angles)
        return f"ChshConfig(a={self.a}, a'={self.a_prime}, b={self.b}, b'={self.b_prime})"


def named_config(label: str) -> ChshConfig:
    try:
        return ChshConfig.planar(*NAMED_ANGLES[label.upper()])
    except KeyError:
        raise ValueError(f"unknown config label {label!r}; expected one of A, B, C") from None


CHSH_SIGNS = {"ab": 1.0, "ab'": 1.0, "a'b": 1.0, "a'b'": -1.0}


def chsh_value(state: TwoQubitState, config: ChshConfig) -> float:
    """E(a,b) + E(a,b') + E(a',b) - E(a',b')."""
    value = sum(
        CHSH_SIGNS[key] * pauli_expectation(state, x, y) for key, (x, y) in config.pairs().items()
    )
    if abs(value) > TSIRELSON + TSIRELSON_TOL:
        raise InvariantError(f"CHSH value {value!r} exceeds the Tsirelson bound")
    return float(value)


def g_value(state: TwoQubitState, a, b) -> float:
    """<a.s x b.s> - <a.s x 1><1 x b.s>; zero for every pair iff correlations factorize."""
    return pauli_expectation(state, a, b) - marginal_expectation(state, a, "first") * marginal_expectation(
        state, b, "second"
    )


def g_value_projector(state: TwoQubitState, a, b) -> float:
    """Same quantity as :func:`g_value`, built from projectors P = (1 + a.s)/2."""
    joint = projector_expectation(state, a, b)
    return 4.0 * (joint - projector_expectation(state, a, IDENTITY) * projector_expectation(state, IDENTITY, b))


def g_tensor(state: TwoQubitState) -> np.ndarray:
    """3x3 matrix M with g_value(a, b) = a^T M b."""
    return correlation_tensor(state).connected


@dataclass(frozen=True)
class SeparabilityVerdict:
    compatible: bool
    max_g: float
    witness_a: np.ndarray
    witness_b: np.ndarray
    tol: float


def separability_test(state: TwoQubitState, tol: float = G_TOL) -> SeparabilityVerdict:
    """Local-realism compatible iff G vanishes for every direction pair.

    The largest singular value of the G tensor is max |G(a, b)|; its
    singular vectors are returned as a witness pair.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    u, s, vt = np.linalg.svd(g_tensor(state))
    return SeparabilityVerdict(
        compatible=bool(s[0] <= tol),
        max_g=float(s[0]),
        witness_a=u[:, 0].copy(),
        witness_b=vt[0].copy(),
        tol=tol,
    )


def four_corner_bound(m1_a: float, m1_a_prime: float, m2_b: float, m2_b_prime: float) -> tuple[float, float]:
    """Extrema of x(u + v) + y(u - v) over the box |x|<=|m1_a|, |y|<=|m1_a'|, |u|<=|m2_b|, |v|<=|m2_b'|.

    The form is linear in each variable, so the extrema sit on the 16 corners.
    With all four half-widths at 1 this is the separable-state range [-2, 2].
    """
    widths = (m1_a, m1_a_prime, m2_b, m2_b_prime)
    for w in widths:
        if not -1.0 <= w <= 1.0:
            raise ValueError(f"marginal expectations must lie in [-1, 1], got {w!r}")
    values = [
        sx * abs(widths[0]) * (su * abs(widths[2]) + sv * abs(widths[3]))
        + sy * abs(widths[1]) * (su * abs(widths[2]) - sv * abs(widths[3]))
        for sx, sy, su, sv in itertools.product((-1.0, 1.0), repeat=4)
    ]
    return min(values), max(values)


CaseLabel = Literal["QM", "CHSH-consistent", "G-consistent"]


@dataclass(frozen=True)
class CriterionVerdict:
    """Side-by-side outcome of the CHSH test and the four-pair G test.

    case_label is "QM" when the CHSH inequality is violated, "CHSH-consistent"
    when CHSH holds but some G is nonzero, and "G-consistent" when all four
    G values vanish.
    """

    chsh_value: float
    chsh_violated: bool
    tsirelson_ok: bool
    g_values: dict[str, float] = field(default_factory=dict)
    g_value: float = 0.0
    g_zero: bool = True
    case_label: CaseLabel = "G-consistent"
    tol: float = G_TOL


def classify(state: TwoQubitState, config: ChshConfig, tol: float = G_TOL) -> CriterionVerdict:
    value = chsh_value(state, config)
    g_values = {key: g_value(state, x, y) for key, (x, y) in config.pairs().items()}
    worst = max(g_values.values(), key=abs)
    violated = abs(value) > 2.0 + tol
    g_zero = all(abs(g) <= tol for g in g_values.values())
    if violated:
        label: CaseLabel = "QM"
    elif not g_zero:
        label = "CHSH-consistent"
    else:
        label = "G-consistent"
    return CriterionVerdict(
        chsh_value=value,
        chsh_violated=violated,
        tsirelson_ok=abs(value) <= TSIRELSON + tol,
        g_values=g_values,
        g_value=worst,
        g_zero=g_zero,
        case_label=label,
        tol=tol,
    )
