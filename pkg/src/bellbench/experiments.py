"""Figure data: CHSH and G scans over the alpha-beta family, and the Aspect G(phi) curve.

Output is tabular.  Figures 1 and 2 use the spin convention (G = -cos of the
angle for the maximally entangled state); figure 3 uses the photon
polarizer convention (cos 2 phi).  The two are kept on separate code paths.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from . import __version__
from .criteria import NAMED_ANGLES, ChshConfig, chsh_value, g_value, named_config
from .hv import FACTORIZED, HvModel, derive_seed, hv_correlation
from .quantum import TwoQubitState, alpha2_state, bloch_vectors, pauli_expectation, planar_direction

DEFAULT_POINTS = 101
STATE_FAMILY = "alpha|+->|-> - beta|->|+>, alpha,beta real >= 0, alpha^2 + beta^2 = 1"
CSV_DIGITS = 9


@dataclass
class FigureScan:
    """Series sharing one x grid, plus free-form metadata for the sibling file."""

    x_label: str
    y_label: str
    x: np.ndarray
    series: dict[str, np.ndarray]
    metadata: dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        if self.x.size > 1 and not np.all(np.diff(self.x) > 0):
            raise ValueError("x must be strictly increasing")
        for name, ys in self.series.items():
            ys = np.asarray(ys, dtype=float)
            if ys.shape != self.x.shape:
                raise ValueError(f"series {name!r} does not match the x grid")
            self.series[name] = ys

    def points(self, name: str) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.series[name].tolist()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join([self.x_label, *self.series]) + "\n")
        cols = [self.x, *self.series.values()]
        for row in zip(*cols):
            buf.write(",".join(format_number(v) for v in row) + "\n")
        return buf.getvalue()

    def metadata_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.metadata.items())

    def write(self, path: str | Path) -> tuple[Path, Path]:
        """Write ``path`` (CSV) and its ``.meta.txt`` sibling; returns both paths."""
        path = Path(path)
        meta_path = path.with_name(path.stem + ".meta.txt")
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(self.to_csv())
        with open(meta_path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(self.metadata_text())
        return path, meta_path


def format_number(value: float) -> str:
    """Positional decimal with 9 significant digits; negative zero printed as 0."""
    value = float(value)
    if value == 0.0:
        return "0.00000000"
    # the exponent after rounding fixes how many decimals give CSV_DIGITS significant digits
    exponent = int(f"{value:.{CSV_DIGITS - 1}e}".split("e")[1])
    return f"{value:.{max(0, CSV_DIGITS - 1 - exponent)}f}"


def _metadata(config: str, seed, n_points: int, **extra) -> dict[str, object]:
    meta: dict[str, object] = {
        "config": config,
        "state_family": STATE_FAMILY,
        "seed": "none" if seed is None else seed,
        "n_points": n_points,
        "tool_version": __version__,
    }
    meta.update(extra)
    return meta


def _alpha2_grid(n_points: int) -> np.ndarray:
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    return np.linspace(0.0, 1.0, n_points)


def _labels(configs: Iterable[str]) -> list[str]:
    labels = [c.upper() for c in configs]
    for c in labels:
        if c not in NAMED_ANGLES:
            raise ValueError(f"unknown config label {c!r}; expected A, B or C")
    return labels


def _config_meta(labels: list[str]) -> str:
    return ";".join(f"{c}:" + ",".join(f"{t:.12g}" for t in NAMED_ANGLES[c]) for c in labels)


def figure1_scan(configs: Iterable[str] = ("A", "B", "C"), n_points: int = DEFAULT_POINTS) -> FigureScan:
    """<B>_QM against alpha^2 for each named config, with the +-2 CHSH bounds."""
    labels = _labels(configs)
    xs = _alpha2_grid(n_points)
    states = [alpha2_state(x) for x in xs]
    series: dict[str, np.ndarray] = {}
    for c in labels:
        cfg = named_config(c)
        series[f"chsh_{c}"] = np.array([chsh_value(s, cfg) for s in states])
    series["chsh_bound_upper"] = np.full_like(xs, 2.0)
    series["chsh_bound_lower"] = np.full_like(xs, -2.0)
    return FigureScan(
        x_label="alpha_squared",
        y_label="chsh_value",
        x=xs,
        series=series,
        metadata=_metadata(_config_meta(labels), None, n_points),
    )


def figure2_scan(configs: Iterable[str] = ("A", "B", "C"), n_points: int = DEFAULT_POINTS) -> FigureScan:
    """G(a, b) and G(a, b') against alpha^2 per config; zero is the local-realism line."""
    labels = _labels(configs)
    xs = _alpha2_grid(n_points)
    states = [alpha2_state(x) for x in xs]
    series: dict[str, np.ndarray] = {}
    for c in labels:
        cfg = named_config(c)
        series[f"G_ab_{c}"] = np.array([g_value(s, cfg.a, cfg.b) for s in states])
        series[f"G_abprime_{c}"] = np.array([g_value(s, cfg.a, cfg.b_prime) for s in states])
    series["local_realism"] = np.zeros_like(xs)
    return FigureScan(
        x_label="alpha_squared",
        y_label="G",
        x=xs,
        series=series,
        metadata=_metadata(_config_meta(labels), None, n_points),
    )


@dataclass(frozen=True)
class AspectRates:
    """Polarizer transmissions and angular factor of the 1981 cascade setup.

    Defaults are the published values for that experiment; ``ideal()`` gives
    perfect polarizers and no angular loss.
    """

    eff1_plus: float = 0.971
    eff1_minus: float = 0.029
    eff2_plus: float = 0.968
    eff2_minus: float = 0.028
    angular_factor: float = 0.984

    def __post_init__(self) -> None:
        for name in ("eff1_plus", "eff1_minus", "eff2_plus", "eff2_minus", "angular_factor"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")

    @classmethod
    def ideal(cls) -> AspectRates:
        return cls(1.0, 0.0, 1.0, 0.0, 1.0)

    @property
    def coefficient(self) -> float:
        return (self.eff1_plus - self.eff1_minus) * (self.eff2_plus - self.eff2_minus) * self.angular_factor

    def g(self, phi):
        return self.coefficient * np.cos(2.0 * np.asarray(phi))


def figure3_curve(rates: AspectRates | None = None, n_points: int = DEFAULT_POINTS) -> FigureScan:
    """Predicted G(phi) = F cos 2 phi over phi in [0, pi] for the photon polarizer setup."""
    rates = AspectRates() if rates is None else rates
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    phi = np.linspace(0.0, math.pi, n_points)
    return FigureScan(
        x_label="phi",
        y_label="G",
        x=phi,
        series={"G_qm": rates.g(phi), "local_realism": np.zeros_like(phi)},
        metadata=_metadata(
            "aspect1981",
            None,
            n_points,
            coefficient=f"{rates.coefficient:.12g}",
            efficiencies=f"{rates.eff1_plus},{rates.eff1_minus},{rates.eff2_plus},{rates.eff2_minus},{rates.angular_factor}",
        ),
    )


def g_from_rates(rate_ratio: float, r1: float, r2: float) -> float:
    """4 (R(phi)/R0 - R1 R2 / R0^2) from measured rate ratios."""
    for name, v in (("rate_ratio", rate_ratio), ("r1", r1), ("r2", r2)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
    return 4.0 * (rate_ratio - r1 * r2)


def hv_scan(
    state: TwoQubitState,
    theta: float,
    n_points: int,
    n_samples: int,
    seed: int,
    model: HvModel = FACTORIZED,
    workers: int | None = None,
) -> FigureScan:
    """Monte Carlo correlation of a planar a(theta) with b(phi), phi over [0, pi].

    Point i runs with the child seed ``derive_seed(seed, i)``.  Alongside
    the estimate the scan carries the quantum correlation and the product
    of marginals, which the factorized model should reproduce.
    """
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    phis = np.linspace(0.0, math.pi, n_points)
    a = planar_direction(theta)
    m1, m2 = bloch_vectors(state)
    means, errs, qm, marg = [], [], [], []
    for i, phi in enumerate(phis):
        b = planar_direction(phi)
        est = hv_correlation(model, state, a, b, n_samples, derive_seed(seed, i), workers)
        means.append(est.mean)
        errs.append(est.std_error)
        qm.append(pauli_expectation(state, a, b))
        marg.append(float(m1 @ a) * float(m2 @ b))
    return FigureScan(
        x_label="phi",
        y_label="correlation",
        x=phis,
        series={
            "hv_mean": np.array(means),
            "hv_std_error": np.array(errs),
            "qm": np.array(qm),
            "marginal_product": np.array(marg),
        },
        metadata=_metadata(
            f"theta={theta:.12g}",
            seed,
            n_points,
            model=model.kind,
            n_samples=n_samples,
            amplitudes=",".join(f"{z.real:.12g}{z.imag:+.12g}j" for z in state.amplitudes),
        ),
    )
