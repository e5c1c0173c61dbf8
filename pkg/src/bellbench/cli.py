"""Command-line front end.

Exit codes: 0 success, 1 invalid input (all problems reported together),
2 an internal invariant failed (for example a CHSH value above the
Tsirelson bound), which means a bug.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .criteria import (
    NAMED_ANGLES,
    ChshConfig,
    chsh_value,
    classify,
    g_value,
    named_config,
    separability_test,
)
from .errors import InvariantError
from .experiments import AspectRates, figure1_scan, figure2_scan, figure3_curve, hv_scan
from .hv import HvModel, hv_chsh
from .optimize import find_crossings, maximize_chsh
from .quantum import TwoQubitState, alpha2_state, as_direction, make_alpha_beta_state, planar_direction

COMMANDS = ("chsh", "gisin", "hv-sim", "optimize", "figure1", "figure2", "figure3", "classify")
OUT_ENV = "BELLBENCH_OUT"
DEFAULT_FILES = {
    "figure1": "figure1.csv",
    "figure2": "figure2.csv",
    "figure3": "figure3.csv",
    "hv-sim": "hv_sim.csv",
}

# keys accepted in a config file, mapped to the flag they stand for
FILE_KEYS = {
    "command": "command",
    "alpha2": "--alpha2",
    "alpha": "--alpha",
    "beta": "--beta",
    "config": "--config",
    "theta": "--theta",
    "phi": "--phi",
    "theta_prime": "--theta-prime",
    "phi_prime": "--phi-prime",
    "a": "--a",
    "b": "--b",
    "a_prime": "--a-prime",
    "b_prime": "--b-prime",
    "n_samples": "--n-samples",
    "seed": "--seed",
    "model": "--model",
    "n_points": "--n-points",
    "configs": "--configs",
    "planar": "--planar",
    "threshold": "--threshold",
    "tol": "--tol",
    "efficiencies": "--efficiencies",
    "ideal": "--ideal",
    "workers": "--workers",
    "out": "--out",
}


class UsageError(Exception):
    def __init__(self, problems: list[str]):
        super().__init__("\n".join(problems))
        self.problems = problems


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; bad input is exit 1 here
        raise UsageError([message])


_ANGLE_RE = re.compile(r"^(?P<num>[+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/(?P<den>\d+(?:\.\d*)?))?$")


def parse_angle(text: str) -> float:
    """Radians from '0.3', 'pi', '-pi/8', '3pi/4' or '3*pi/4'."""
    s = str(text).strip().lower().replace(" ", "")
    m = _ANGLE_RE.match(s)
    if m is None:
        value = float(s)
    else:
        num = m.group("num")
        if num in ("", "+"):
            k = 1.0
        elif num == "-":
            k = -1.0
        else:
            k = float(num)
        den = float(m.group("den")) if m.group("den") else 1.0
        if den == 0.0:
            raise ValueError("zero denominator")
        value = k * math.pi / den
    if not math.isfinite(value):
        raise ValueError("angle must be finite")
    return value


def parse_vector(text: str) -> np.ndarray:
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise ValueError("expected three comma-separated components")
    return as_direction([float(p) for p in parts], normalize=True)


def parse_complex(text: str) -> complex:
    return complex(str(text).strip().replace(" ", "").replace("i", "j"))


def parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def load_config_file(path: str | Path) -> dict[str, str]:
    """Flat key=value file: UTF-8, '#' comments, one pair per line.

    Returns the pairs keyed by the flag they stand for.  Unknown or
    duplicate keys raise UsageError.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError([f"--config-file: cannot read {path}: {exc.strerror or exc}"]) from None
    values: dict[str, str] = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"--config-file: line {lineno}: expected key=value")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        norm = key.lower().replace("-", "_")
        if norm not in FILE_KEYS:
            problems.append(f"--config-file: line {lineno}: unknown key {key!r}")
            continue
        flag = FILE_KEYS[norm]
        if flag in values:
            problems.append(f"--config-file: line {lineno}: duplicate key {key!r}")
            continue
        values[flag] = value
    if problems:
        raise UsageError(problems)
    return values


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="bellbench",
        description=(
            "CHSH and factorization-criterion workbench. Commands: "
            "chsh (CHSH value and verdict), gisin (G(a,b) test and direction sweep), "
            "hv-sim (hidden-variables Monte Carlo), optimize (max |<B>|, max |G|, threshold crossings), "
            "figure1/figure2/figure3 (figure data as CSV), classify (three-case verdict)."
        ),
        argument_default=argparse.SUPPRESS,
        allow_abbrev=False,
    )
    # choices are checked in _validate: argparse rejects the suppressed default of an omitted positional
    p.add_argument("command", nargs="?", metavar="{" + ",".join(COMMANDS) + "}",
                   help="what to run (may also come from the config file)")
    p.add_argument("--version", action="version", version=f"bellbench {__version__}")
    p.add_argument("--config-file", metavar="PATH", help="key=value file; command-line flags take precedence")

    st = p.add_argument_group("state (alpha|+-> - beta|-+>, normalized)")
    st.add_argument("--alpha2", metavar="X", help="real family: alpha=sqrt(X), beta=sqrt(1-X)")
    st.add_argument("--alpha", metavar="Z", help="complex amplitude alpha, e.g. 1+0.5j")
    st.add_argument("--beta", metavar="Z", help="complex amplitude beta")

    cf = p.add_argument_group("measurement directions (angles accept pi fractions such as 3pi/4)")
    cf.add_argument("--config", metavar="LABEL", help="named planar config A, B or C")
    for label in "abc":
        cf.add_argument(f"--config-{label}", dest="config", action="store_const", const=label.upper(),
                        help=f"shortcut for --config {label.upper()} {NAMED_ANGLES[label.upper()]}")
    cf.add_argument("--theta", metavar="ANGLE", help="a = (sin theta, 0, cos theta)")
    cf.add_argument("--phi", metavar="ANGLE", help="b = (sin phi, 0, cos phi)")
    cf.add_argument("--theta-prime", metavar="ANGLE", help="a'")
    cf.add_argument("--phi-prime", metavar="ANGLE", help="b'")
    cf.add_argument("--a", metavar="X,Y,Z", help="direction a as a vector (normalized)")
    cf.add_argument("--b", metavar="X,Y,Z", help="direction b")
    cf.add_argument("--a-prime", metavar="X,Y,Z", help="direction a'")
    cf.add_argument("--b-prime", metavar="X,Y,Z", help="direction b'")

    mc = p.add_argument_group("Monte Carlo")
    mc.add_argument("--n-samples", metavar="N", help="samples per estimate (default 100000)")
    mc.add_argument("--seed", metavar="S", help="64-bit seed (default 0)")
    mc.add_argument("--model", metavar="KIND", help="factorized (default) or delta_correlated")
    mc.add_argument("--workers", metavar="N", help="threads for sampling; results do not depend on it")

    ot = p.add_argument_group("other")
    ot.add_argument("--n-points", metavar="N", help="points per scan (default 101)")
    ot.add_argument("--configs", metavar="LIST", help="figure1/figure2 configs, e.g. A,B,C")
    ot.add_argument("--planar", action="store_const", const="true", help="optimize: restrict to the x-z plane")
    ot.add_argument("--threshold", metavar="T", help="optimize: |<B>| level for crossings (default 2)")
    ot.add_argument("--tol", metavar="TOL", help="tolerance for G = 0 verdicts (default 1e-10)")
    ot.add_argument("--efficiencies", metavar="LIST",
                    help="figure3: eff1+,eff1-,eff2+,eff2-,angular (default 0.971,0.029,0.968,0.028,0.984)")
    ot.add_argument("--ideal", action="store_const", const="true", help="figure3: ideal polarizers")
    ot.add_argument("--out", metavar="PATH", help=f"CSV output path (default ${OUT_ENV}/<command>.csv or ./)")
    return p


@dataclass
class RunConfig:
    command: str
    state: TwoQubitState | None = None
    config: ChshConfig | None = None
    pair: tuple[np.ndarray, np.ndarray] | None = None
    theta: float | None = None
    n_samples: int = 100_000
    seed: int = 0
    model: str = "factorized"
    workers: int | None = None
    n_points: int = 101
    configs: list[str] = field(default_factory=lambda: ["A", "B", "C"])
    planar: bool = False
    threshold: float = 2.0
    tol: float = 1e-10
    rates: AspectRates = field(default_factory=AspectRates)
    out: Path | None = None


def _validate(values: dict[str, str]) -> RunConfig:
    problems: list[str] = []

    def grab(flag, parser, default=None):
        if flag not in values:
            return default
        try:
            return parser(values[flag])
        except (ValueError, TypeError) as exc:
            problems.append(f"{flag}: invalid value {values[flag]!r} ({exc})")
            return default

    command = values.get("command")
    if command is None:
        raise UsageError(["command: missing (one of " + ", ".join(COMMANDS) + ")"])
    if command not in COMMANDS:
        raise UsageError([f"command: unknown command {command!r}"])
    rc = RunConfig(command=command)

    # state
    alpha2 = grab("--alpha2", float)
    alpha = grab("--alpha", parse_complex)
    beta = grab("--beta", parse_complex)
    if "--alpha2" in values and ("--alpha" in values or "--beta" in values):
        problems.append("--alpha2: cannot be combined with --alpha/--beta")
    elif alpha2 is not None:
        if 0.0 <= alpha2 <= 1.0:
            rc.state = alpha2_state(alpha2)
        else:
            problems.append(f"--alpha2: must lie in [0, 1], got {alpha2!r}")
    elif ("--alpha" in values) != ("--beta" in values):
        problems.append("--alpha/--beta: both amplitudes are required")
    elif alpha is not None and beta is not None:
        try:
            rc.state = make_alpha_beta_state(alpha, beta)
        except ValueError as exc:
            problems.append(f"--alpha/--beta: state is not normalizable ({exc})")

    # directions
    label = values.get("--config")
    angle_flags = ["--theta", "--phi", "--theta-prime", "--phi-prime"]
    vec_flags = ["--a", "--b", "--a-prime", "--b-prime"]
    angles = [grab(f, parse_angle) for f in angle_flags]
    vecs = [grab(f, parse_vector) for f in vec_flags]
    given_angles = [f in values for f in angle_flags]
    given_vecs = [f in values for f in vec_flags]
    if label is not None:
        if label.upper() not in NAMED_ANGLES:
            problems.append(f"--config: unknown config {label!r}; expected A, B or C")
        elif any(given_angles) or any(given_vecs):
            problems.append("--config: cannot be combined with explicit angles or vectors")
        else:
            rc.config = named_config(label)
    elif any(given_angles) and any(given_vecs):
        problems.append("--theta/--a: give directions either as angles or as vectors, not both")
    else:
        dirs = [
            planar_direction(t) if t is not None else v
            for t, v in zip(angles, vecs)
        ]
        given = [ga or gv for ga, gv in zip(given_angles, given_vecs)]
        if all(given) and all(d is not None for d in dirs):
            if all(given_angles):
                rc.config = ChshConfig.planar(*angles)
            else:
                rc.config = ChshConfig(a=dirs[0], b=dirs[1], a_prime=dirs[2], b_prime=dirs[3])
        if given[0] and given[1] and dirs[0] is not None and dirs[1] is not None:
            rc.pair = (dirs[0], dirs[1])
        if given_angles[0]:
            rc.theta = angles[0]
    if rc.config is not None and rc.pair is None:
        rc.pair = (rc.config.a, rc.config.b)

    # numbers
    rc.n_samples = grab("--n-samples", int, rc.n_samples)
    if rc.n_samples < 1:
        problems.append("--n-samples: must be at least 1")
    rc.seed = grab("--seed", int, rc.seed)
    if not -(1 << 63) <= rc.seed < (1 << 64):
        problems.append("--seed: must fit in 64 bits")
    rc.model = values.get("--model", rc.model)
    if rc.model not in ("factorized", "delta_correlated"):
        problems.append(f"--model: unknown model {rc.model!r}")
    rc.workers = grab("--workers", int)
    if rc.workers is not None and rc.workers < 1:
        problems.append("--workers: must be at least 1")
    rc.n_points = grab("--n-points", int, rc.n_points)
    if rc.n_points < 2:
        problems.append("--n-points: must be at least 2")
    if "--configs" in values:
        rc.configs = [c.strip().upper() for c in values["--configs"].split(",") if c.strip()]
        bad = [c for c in rc.configs if c not in NAMED_ANGLES]
        if bad or not rc.configs:
            problems.append(f"--configs: expected labels from A, B, C, got {values['--configs']!r}")
    rc.planar = grab("--planar", parse_bool, False)
    rc.threshold = grab("--threshold", float, rc.threshold)
    rc.tol = grab("--tol", float, rc.tol)
    if not rc.tol > 0:
        problems.append("--tol: must be positive")
    ideal = grab("--ideal", parse_bool, False)
    if "--efficiencies" in values:
        if ideal:
            problems.append("--efficiencies: cannot be combined with --ideal")
        else:
            try:
                effs = [float(v) for v in values["--efficiencies"].split(",")]
                if len(effs) != 5:
                    raise ValueError("expected five numbers")
                rc.rates = AspectRates(*effs)
            except ValueError as exc:
                problems.append(f"--efficiencies: {exc}")
    elif ideal:
        rc.rates = AspectRates.ideal()

    # per-command requirements
    needs_state = {"chsh", "gisin", "hv-sim", "classify"}
    needs_config = {"chsh", "classify"}
    if command in needs_state and rc.state is None and not any("--alpha" in p for p in problems):
        problems.append(f"--alpha2: command {command} needs a state (--alpha2 or --alpha/--beta)")
    if command in needs_config and rc.config is None and not problems:
        problems.append(f"--config: command {command} needs four directions (--config-b, angles or vectors)")
    if command == "gisin" and rc.pair is None and not problems:
        problems.append("--theta/--phi: command gisin needs directions a and b (or a config)")
    if command == "optimize" and rc.state is None and rc.config is None and not problems:
        problems.append("--alpha2: command optimize needs a state (maximize) or a config (crossings)")
    if "--out" in values:
        if command not in DEFAULT_FILES:
            problems.append(f"--out: command {command} does not write a CSV")
        else:
            rc.out = Path(values["--out"])
    elif command in DEFAULT_FILES:
        rc.out = Path(os.environ.get(OUT_ENV, ".")) / DEFAULT_FILES[command]

    if problems:
        raise UsageError(problems)
    return rc


def parse_run_config(argv: Sequence[str]) -> RunConfig:
    parser = build_parser()
    ns = vars(parser.parse_args(list(argv)))
    file_values = load_config_file(ns.pop("config_file")) if "config_file" in ns else {}
    flag_values = {}
    for dest, value in ns.items():
        flag = "command" if dest == "command" else "--" + dest.replace("_", "-")
        flag_values[flag] = value
    return _validate({**file_values, **flag_values})


# --- reporting ---------------------------------------------------------------

def _fmt(x: float, digits: int = 6) -> str:
    s = f"{x:.{digits}f}"
    if s.startswith("-") and float(s) == 0.0:
        s = s[1:]
    return s


def _vec(v: np.ndarray) -> str:
    return "(" + ", ".join(_fmt(c, 4) for c in v) + ")"


PAIR_LABELS = {"ab": "G(a,b)", "ab'": "G(a,b')", "a'b": "G(a',b)", "a'b'": "G(a',b')"}


def _criteria_lines(state: TwoQubitState, config: ChshConfig, tol: float) -> list[str]:
    verdict = classify(state, config, tol)
    chsh_word = "violated" if verdict.chsh_violated else "satisfied"
    lines = [
        f"CHSH  <B> = {_fmt(verdict.chsh_value)}   verdict: {chsh_word}  (|<B>| <= 2 for local realism)",
        "G criterion (local realism predicts 0):",
    ]
    for key, g in verdict.g_values.items():
        word = "zero" if abs(g) <= tol else "nonzero"
        lines.append(f"  {PAIR_LABELS[key]:<8} = {_fmt(g)}   {word}")
    lines.append(f"case: {verdict.case_label}")
    return lines


def _run(rc: RunConfig) -> list[str]:
    out: list[str] = []
    if rc.command in ("chsh", "classify"):
        out += _criteria_lines(rc.state, rc.config, rc.tol)
        if rc.command == "classify":
            sep = separability_test(rc.state, rc.tol)
            out.append(f"max |G| over all directions = {_fmt(sep.max_g)}  "
                       f"({'separable' if sep.compatible else 'entangled'})")
    elif rc.command == "gisin":
        a, b = rc.pair
        g = g_value(rc.state, a, b)
        verdict = "consistent with local realism" if abs(g) <= rc.tol else "inconsistent with local realism"
        out.append(f"G(a,b) = {_fmt(g)}   verdict: {verdict}")
        sep = separability_test(rc.state, rc.tol)
        out.append(f"max |G| over all directions = {_fmt(sep.max_g)} at a={_vec(sep.witness_a)}, b={_vec(sep.witness_b)}")
        best = maximize_chsh(rc.state)
        word = "violated" if best.best_value > 2.0 + rc.tol else "satisfied"
        out.append(f"max |<B>| over all configs = {_fmt(best.best_value)}   CHSH verdict: {word}")
        if rc.config is not None:
            out += _criteria_lines(rc.state, rc.config, rc.tol)
    elif rc.command == "hv-sim":
        model = HvModel(rc.model)
        if rc.config is not None:
            est = hv_chsh(model, rc.state, rc.config, rc.n_samples, rc.seed, rc.workers)
            qm = chsh_value(rc.state, rc.config)
            out.append(f"HV <B> = {_fmt(est.mean)} +- {_fmt(est.std_error)}  (model={rc.model}, n={rc.n_samples}, seed={rc.seed})")
            out.append(f"QM <B> = {_fmt(qm)}")
            if not est.metadata.get("product_state", True):
                out.append("note: non-product state; local models reproduce only its marginals")
        theta = rc.theta if rc.theta is not None else (rc.config.angles[0] if rc.config and rc.config.angles else 0.0)
        scan = hv_scan(rc.state, theta, rc.n_points, rc.n_samples, rc.seed, model, rc.workers)
        csv_path, meta_path = scan.write(rc.out)
        out.append(f"wrote {csv_path} and {meta_path}")
    elif rc.command == "optimize":
        if rc.state is not None:
            res = maximize_chsh(rc.state, planar=rc.planar)
            out.append(f"max |<B>| = {_fmt(res.best_value, 9)}  ({'planar' if rc.planar else 'general'} search, {res.iterations} sweeps)")
            cfg = res.best_config
            out.append(f"  a={_vec(cfg.a)} a'={_vec(cfg.a_prime)} b={_vec(cfg.b)} b'={_vec(cfg.b_prime)}")
            sep = separability_test(rc.state, rc.tol)
            out.append(f"max |G| = {_fmt(sep.max_g, 9)}")
        if rc.config is not None:
            roots = find_crossings(rc.config, rc.threshold)
            text = ", ".join(f"{r:.10f}" for r in roots) if roots else "none"
            out.append(f"alpha^2 where |<B>| crosses {rc.threshold:g}: {text}")
    elif rc.command in ("figure1", "figure2"):
        fn = figure1_scan if rc.command == "figure1" else figure2_scan
        scan = fn(rc.configs, rc.n_points)
        csv_path, meta_path = scan.write(rc.out)
        out.append(f"wrote {csv_path} and {meta_path}")
    elif rc.command == "figure3":
        scan = figure3_curve(rc.rates, rc.n_points)
        csv_path, meta_path = scan.write(rc.out)
        out.append(f"G(phi) = {_fmt(rc.rates.coefficient)} cos(2 phi)")
        out.append(f"wrote {csv_path} and {meta_path}")
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        rc = parse_run_config(argv)
    except UsageError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        lines = _run(rc)
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: --out: {exc}", file=sys.stderr)
        return 1
    print("\n".join(lines))
    return 0


if __name__ == "__main__":
    sys.exit(main())
