"""Measurement-direction searches: max |<B>|, max |G(a, b)|, and threshold crossings.

Searches run a three-level scheme: a coarse angle grid at pi/18, a local
grid at pi/90 around the coarse winner, then coordinate ascent.  Both
objectives are linear in each unit vector, so along any single polar or
azimuthal angle they have the form A cos t + B sin t + C.  Coordinate
ascent exploits this and moves each angle straight to its 1-D maximum,
recovered from three evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .criteria import ChshConfig, chsh_value, g_tensor, g_value
from .quantum import TwoQubitState, alpha2_state, correlation_tensor, spherical_direction

COARSE_STEP = math.pi / 18
FINE_STEP = math.pi / 90
LOCAL_HALF_WIDTH = 5  # fine steps on each side of the coarse winner
MAX_SWEEPS = 200
SWEEP_TOL = 1e-10
N_RANDOM_STARTS = 4


@dataclass(frozen=True, eq=False)
class SearchResult:
    best_value: float
    best_config: ChshConfig | tuple[np.ndarray, np.ndarray]
    iterations: int
    grid_resolution: float
    refined: bool
    coarse_value: float
    angles: tuple[float, ...]


def coordinate_ascent(
    f: Callable[[np.ndarray], float],
    x0,
    max_sweeps: int = MAX_SWEEPS,
    tol: float = SWEEP_TOL,
) -> tuple[np.ndarray, float, int]:
    """Maximize ``f`` one angle at a time.

    ``f`` must be a first-order trigonometric polynomial in every coordinate.
    Stops once a full sweep gains less than ``tol`` or after ``max_sweeps``.
    """
    x = np.array(x0, dtype=float)
    value = f(x)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        start = value
        for i in range(x.size):
            t = x[i]
            f0 = value
            x[i] = t + math.pi / 2
            f1 = f(x)
            x[i] = t + math.pi
            f2 = f(x)
            c = 0.5 * (f0 + f2)
            amp_cos = 0.5 * (f0 - f2)
            amp_sin = f1 - c
            candidate = t + math.atan2(amp_sin, amp_cos)
            x[i] = candidate
            new_value = f(x)
            if new_value > value:
                value = new_value
            else:
                x[i] = t
        if value - start < tol:
            break
    return np.mod(x, 2 * math.pi), value, sweeps


# --- CHSH -------------------------------------------------------------------

def _chsh_from_tensor(T: np.ndarray, a, ap, b, bp) -> float:
    return float(a @ T @ (b + bp) + ap @ T @ (b - bp))


def _chsh_grid(T: np.ndarray, dirs: list[np.ndarray]) -> np.ndarray:
    """Dense 4-D table of <B> over direction lists for (a, b, a', b')."""
    da, db, dap, dbp = dirs
    e_ab = da @ T @ db.T
    e_abp = da @ T @ dbp.T
    e_apb = dap @ T @ db.T
    e_apbp = dap @ T @ dbp.T
    return (
        e_ab[:, :, None, None]
        + e_abp[:, None, None, :]
        + e_apb.T[None, :, :, None]
        - e_apbp[None, None, :, :]
    )


# Each plane embedding maps one angle t to (polar, azimuth).
_PLANES = {
    "xz": lambda t: (t, np.zeros_like(t)),
    "yz": lambda t: (t, np.full_like(t, math.pi / 2)),
    "xy": lambda t: (np.full_like(t, math.pi / 2), t),
}


def _dirs(polar, azimuth) -> np.ndarray:
    polar = np.asarray(polar, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    st = np.sin(polar)
    return np.column_stack((st * np.cos(azimuth), st * np.sin(azimuth), np.cos(polar)))


def _planar_grid_search(T: np.ndarray, plane: str) -> tuple[np.ndarray, float, float]:
    """Coarse + local grid over (theta, phi, theta', phi') in one plane.

    Returns (angles, signed value at local-grid winner, |coarse winner|).
    """
    embed = _PLANES[plane]
    coarse = np.arange(36) * COARSE_STEP
    d = _dirs(*embed(coarse))
    table = _chsh_grid(T, [d, d, d, d])
    idx = np.unravel_index(int(np.argmax(np.abs(table))), table.shape)
    coarse_value = abs(float(table[idx]))
    centre = coarse[list(idx)]  # order: theta(a), phi(b), theta'(a'), phi'(b')
    offsets = np.arange(-LOCAL_HALF_WIDTH, LOCAL_HALF_WIDTH + 1) * FINE_STEP
    axes = [c + offsets for c in centre]
    local = _chsh_grid(T, [_dirs(*embed(ax)) for ax in axes])
    j = np.unravel_index(int(np.argmax(np.abs(local))), local.shape)
    angles = np.array([axes[k][j[k]] for k in range(4)])
    return angles, float(local[j]), coarse_value


def maximize_chsh(state: TwoQubitState, planar: bool = False, seed: int = 0) -> SearchResult:
    """Largest |<B>| found over measurement configurations.

    With ``planar`` the search is confined to the x-z family
    v(t) = (sin t, 0, cos t) for all four directions; otherwise each
    direction carries its own (polar, azimuth) pair.  ``seed`` fixes the
    extra random starting points of the general search.
    """
    T = correlation_tensor(state).T

    if planar:
        angles, signed, coarse_value = _planar_grid_search(T, "xz")
        sign = 1.0 if signed >= 0 else -1.0

        def f(x):
            v = _dirs(x, np.zeros(4))
            return sign * _chsh_from_tensor(T, v[0], v[2], v[1], v[3])

        x, _, sweeps = coordinate_ascent(f, angles)
        config = ChshConfig.planar(*x)
        return SearchResult(
            best_value=abs(chsh_value(state, config)),
            best_config=config,
            iterations=sweeps,
            grid_resolution=FINE_STEP,
            refined=True,
            coarse_value=abs(signed),
            angles=tuple(float(t) for t in x),
        )

    # general search: (polar, azimuth) for a, b, a', b'
    starts: list[tuple[np.ndarray, float]] = []
    for plane, embed in _PLANES.items():
        angles, signed, _ = _planar_grid_search(T, plane)
        polar, az = embed(angles)
        starts.append((np.column_stack((polar, az)).reshape(-1), signed))
    rng = np.random.default_rng(seed)
    for _ in range(N_RANDOM_STARTS):
        x0 = np.column_stack((np.arccos(rng.uniform(-1, 1, 4)), rng.uniform(0, 2 * math.pi, 4))).reshape(-1)
        starts.append((x0, _general_chsh(T, x0)))
    coarse_value = max(abs(s) for _, s in starts[: len(_PLANES)])

    best = None
    total_sweeps = 0
    for x0, signed in starts:
        sign = 1.0 if signed >= 0 else -1.0
        x, value, sweeps = coordinate_ascent(lambda x, s=sign: s * _general_chsh(T, x), x0)
        total_sweeps += sweeps
        if best is None or value > best[1]:
            best = (x, value)
    x = best[0]
    v = _dirs(x[0::2], x[1::2])
    config = ChshConfig(a=v[0], b=v[1], a_prime=v[2], b_prime=v[3])
    return SearchResult(
        best_value=abs(chsh_value(state, config)),
        best_config=config,
        iterations=total_sweeps,
        grid_resolution=FINE_STEP,
        refined=True,
        coarse_value=coarse_value,
        angles=tuple(float(t) for t in x),
    )


def _general_chsh(T: np.ndarray, x: np.ndarray) -> float:
    v = _dirs(x[0::2], x[1::2])
    return _chsh_from_tensor(T, v[0], v[2], v[1], v[3])


# --- G criterion ------------------------------------------------------------

def maximize_g(state: TwoQubitState) -> SearchResult:
    """Largest |G(a, b)| over direction pairs by grid search plus coordinate ascent."""
    M = g_tensor(state)
    polar = np.arange(19) * COARSE_STEP
    az = np.arange(36) * COARSE_STEP
    pp, aa = np.meshgrid(polar, az, indexing="ij")
    pp, aa = pp.ravel(), aa.ravel()
    d = _dirs(pp, aa)
    table = d @ M @ d.T
    i, j = np.unravel_index(int(np.argmax(np.abs(table))), table.shape)
    coarse_value = abs(float(table[i, j]))

    offsets = np.arange(-LOCAL_HALF_WIDTH, LOCAL_HALF_WIDTH + 1) * FINE_STEP
    lp, la = np.meshgrid(pp[i] + offsets, aa[i] + offsets, indexing="ij")
    rp, ra = np.meshgrid(pp[j] + offsets, aa[j] + offsets, indexing="ij")
    lp, la, rp, ra = lp.ravel(), la.ravel(), rp.ravel(), ra.ravel()
    local = _dirs(lp, la) @ M @ _dirs(rp, ra).T
    k, m = np.unravel_index(int(np.argmax(np.abs(local))), local.shape)
    x0 = np.array([lp[k], la[k], rp[m], ra[m]])
    sign = 1.0 if local[k, m] >= 0 else -1.0

    def f(x):
        return sign * float(spherical_direction(x[0], x[1]) @ M @ spherical_direction(x[2], x[3]))

    x, _, sweeps = coordinate_ascent(f, x0)
    a = spherical_direction(x[0], x[1])
    b = spherical_direction(x[2], x[3])
    return SearchResult(
        best_value=abs(g_value(state, a, b)),
        best_config=(a, b),
        iterations=sweeps,
        grid_resolution=FINE_STEP,
        refined=True,
        coarse_value=coarse_value,
        angles=tuple(float(t) for t in x),
    )


# --- threshold crossings ----------------------------------------------------

def find_crossings(
    config: ChshConfig,
    threshold: float = 2.0,
    n_scan: int = 1001,
    tol: float = 1e-10,
) -> list[float]:
    """alpha^2 values in [0, 1] where |<B>| of the real alpha-beta family crosses ``threshold``.

    Sign changes of |<B>| - threshold on a uniform scan are bisected until
    the bracket is narrower than ``tol``.
    """
    if n_scan < 2:
        raise ValueError("n_scan must be at least 2")

    def h(x: float) -> float:
        return abs(chsh_value(alpha2_state(x), config)) - threshold

    xs = np.linspace(0.0, 1.0, n_scan)
    hs = [h(x) for x in xs]
    roots: list[float] = []
    for i in range(n_scan - 1):
        lo, hi = float(xs[i]), float(xs[i + 1])
        h_lo, h_hi = hs[i], hs[i + 1]
        if h_lo == 0.0:
            if not roots or roots[-1] != lo:
                roots.append(lo)
            continue
        if h_hi == 0.0 or (h_lo < 0) == (h_hi < 0):
            continue
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            h_mid = h(mid)
            if (h_mid < 0) == (h_lo < 0):
                lo, h_lo = mid, h_mid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    if hs[-1] == 0.0 and (not roots or roots[-1] != 1.0):
        roots.append(1.0)
    return roots
