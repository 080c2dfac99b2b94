"""Command-line front end: figure data, bound sweeps and analytic self-checks."""

from __future__ import annotations

import argparse
import csv
import functools
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import channels as ch_mod
from .capacity import bounds, holevo
from .errors import CapboundError, DimensionGuardError, ParameterError
from .sdp import programs
from .symmetry import (bitwirl_average, bitwirl_closed_form, clifford1_rep, covariance_parameter,
                       pauli_rep)
from . import linalg as la

METHODS = ("covariance", "eb", "hadamard_s", "hadamard_deg", "c_beta", "holevo")
DEFAULT_POINTS = 51
SIG_DIGITS = 12


class SweepError(CapboundError):
    """A grid point failed; the message names the point."""


@dataclass
class SweepConfig:
    channel: str
    start: float = 0.0
    stop: float = 1.0
    points: int = DEFAULT_POINTS
    methods: tuple = ("holevo", "c_beta")
    restarts: int = holevo.DEFAULT_RESTARTS
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.points < 2:
            raise ParameterError("a grid needs at least 2 points")
        if not (0.0 <= self.start <= 1.0 and 0.0 <= self.stop <= 1.0):
            raise ParameterError(f"grid [{self.start}, {self.stop}] leaves [0, 1]")
        if not self.methods:
            raise ParameterError("select at least one method")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ParameterError(f"unknown methods {bad}; choose from {', '.join(METHODS)}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return f"{float(x):.{SIG_DIGITS}g}"


def worker_count(n_tasks: int) -> int:
    cap = os.environ.get("CAPBOUND_THREADS")
    workers = os.cpu_count() or 1
    if cap:
        workers = min(workers, max(int(cap), 1))
    return max(1, min(workers, n_tasks))


def run_grid(fn, ps, workers: int | None = None) -> list:
    """Evaluate ``fn`` on every grid point; results come back in grid order."""
    ps = [float(p) for p in ps]
    workers = worker_count(len(ps)) if workers is None else workers
    if workers == 1:
        return [fn(p) for p in ps]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, ps))


def _at(p, body, where=None):
    try:
        return body()
    except CapboundError as exc:
        where = where or f"p={p:.{SIG_DIGITS}g}"
        raise SweepError(f"{where}: {type(exc).__name__}: {exc}") from None


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------


def _fig1(p, restarts, seed):
    a = ch_mod.amplitude_damping(p)
    return _at(p, lambda: [programs.hadamard_s_parameter(a)[0], programs.hadamard_deg_parameter(a)[0]])


def _fig2(p, restarts, seed):
    a = ch_mod.amplitude_damping(p)

    def body():
        chi = holevo.holevo_information(a, restarts=restarts, seed=seed)[0]
        return [chi, programs.c_beta(a)]

    return _at(p, body)


def _fig3(p, restarts, seed):
    n = ch_mod.mix_ad_depol(p)

    def body():
        chi = holevo.holevo_information(n, restarts=restarts, seed=seed)[0]
        rep = bounds.bound_covariance(n, holevo_lower=chi)
        return [chi, rep.epsilon, rep.components["base_M"], rep.upper_form_M, rep.upper_form_N,
                programs.c_beta(n)]

    return _at(p, body)


def _fig4(p, restarts, seed):
    return _at(p, lambda: [programs.eb_parameter(ch_mod.ad_after_dephasing(p))[0]])


def _fig5(p, restarts, seed):
    m = ch_mod.ad_after_dephasing(p)

    def body():
        chi = holevo.holevo_information(m, restarts=restarts, seed=seed)[0]
        rep = bounds.bound_eb(m, holevo_lower=chi, restarts=restarts, seed=seed)
        return [chi, rep.epsilon, rep.components["base_M"], rep.upper_form_M, rep.upper_form_N,
                programs.c_beta(m)]

    return _at(p, body)


# name -> (point function, column names, upper-bound columns)
FIGURES = {
    "fig1": (_fig1, ("had_s", "had_deg"), ()),
    "fig2": (_fig2, ("holevo", "c_beta"), ("c_beta",)),
    "fig3": (_fig3, ("holevo", "cov", "holevo_twirled", "cov_bound_m", "cov_bound_n", "c_beta"),
             ("cov_bound_m", "cov_bound_n", "c_beta")),
    "fig4": (_fig4, ("eb",), ()),
    "fig5": (_fig5, ("holevo", "eb", "holevo_eb", "eb_bound_m", "eb_bound_n", "c_beta"),
             ("eb_bound_m", "eb_bound_n", "c_beta")),
}

FIGURE_CHANNELS = {"fig1": "amplitude_damping", "fig2": "amplitude_damping", "fig3": "mix_ad_depol",
                   "fig4": "ad_after_dephasing", "fig5": "ad_after_dephasing"}


def figure_table(name: str, points: int = DEFAULT_POINTS, restarts: int = holevo.DEFAULT_RESTARTS,
                 seed: int = 0, workers: int | None = None):
    """:returns: ``(header, rows)`` with rows as float lists, ``p`` first"""
    if name not in FIGURES:
        raise ParameterError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    fn, cols, _ = FIGURES[name]
    ps = np.linspace(0.0, 1.0, points)
    values = run_grid(functools.partial(fn, restarts=restarts, seed=seed), ps, workers)
    return ("p",) + cols, [[float(p)] + [float(v) for v in vals] for p, vals in zip(ps, values)]


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def write_meta(path, meta: dict):
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_figure(name, out=None, points=DEFAULT_POINTS, restarts=holevo.DEFAULT_RESTARTS, seed=0) -> Path:
    header, rows = figure_table(name, points=points, restarts=restarts, seed=seed)
    out = Path(out or f"{name}.csv")
    write_csv(out, header, rows)
    write_meta(out, {"figure": name, "channel_family": FIGURE_CHANNELS[name], "points": points,
                     "restarts": restarts, "seed": seed, "ensemble_cardinality": "dim_in**2",
                     "upper_bound_columns": list(FIGURES[name][2]), "version": __version__})
    return out


# ---------------------------------------------------------------------------
# Bound sweeps
# ---------------------------------------------------------------------------

BOUND_COLUMNS = ("p", "method", "epsilon", "holevo_lower", "upper_form_M", "upper_form_N", "upper_bound")


def resolve_channel(spec: str, p=None) -> ch_mod.Channel:
    """``family``, ``family:p`` or a path to a channel-spec JSON file."""
    if Path(spec).is_file():
        return ch_mod.load_channel(spec)
    name, _, val = spec.partition(":")
    if val:
        p = float(val)
    return ch_mod.named_channel(name, p)


def _sweeps_p(spec: str) -> bool:
    return not Path(spec).is_file() and ":" not in spec and spec in ch_mod.NAMED_FAMILIES


def _bound_point(p, channel, methods, restarts, seed):
    pv = None if np.isnan(p) else p
    name, _, val = channel.partition(":")
    if pv is None and val and not Path(channel).is_file():
        pv = float(val)
    where = f"p={pv:.{SIG_DIGITS}g}" if pv is not None else f"channel {channel}"
    chan = _at(p, lambda: resolve_channel(channel, pv), where)
    rows = []

    def body():
        chi = holevo.holevo_information(chan, restarts=restarts, seed=seed)[0]
        for m in methods:
            if m == "holevo":
                rows.append([pv, m, None, chi, None, None, None])
                continue
            try:
                rep = bounds.BOUND_METHODS[m](chan, holevo_lower=chi, restarts=restarts, seed=seed, p=pv)
            except DimensionGuardError as exc:
                raise DimensionGuardError(f"method {m}: {exc}") from None
            rec = rep.to_record()
            rows.append([pv, m] + [rec[k] for k in BOUND_COLUMNS[2:]])
        return rows

    return _at(p, body, where)


def cmd_bound(cfg: SweepConfig):
    ps = cfg.grid() if _sweeps_p(cfg.channel) else [float("nan")]
    fn = functools.partial(_bound_point, channel=cfg.channel, methods=tuple(cfg.methods),
                           restarts=cfg.restarts, seed=cfg.seed)
    rows = [r for chunk in run_grid(fn, ps) for r in chunk]
    if cfg.out:
        write_csv(cfg.out, BOUND_COLUMNS, rows)
        write_meta(cfg.out, {"channel": cfg.channel, "grid": [cfg.start, cfg.stop, cfg.points],
                             "methods": list(cfg.methods), "restarts": cfg.restarts, "seed": cfg.seed,
                             "ensemble_cardinality": "dim_in**2", "version": __version__})
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(BOUND_COLUMNS)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return rows


# ---------------------------------------------------------------------------
# Analytic self-checks
# ---------------------------------------------------------------------------

GRID10 = np.round(np.arange(1, 11) / 10, 10)


def _check_cov_ampdamp():
    g = pauli_rep()
    return max(abs(covariance_parameter(ch_mod.amplitude_damping(p), g) - p / 2) for p in GRID10)


def _check_cov_mixture():
    g = pauli_rep()
    return max(abs(covariance_parameter(ch_mod.mix_ad_depol(p), g) - p * p / 2) for p in GRID10)


def _check_diamond():
    ident = ch_mod.identity(2)
    return max(abs(programs.diamond_distance(ident, ch_mod.amplitude_damping(p)) - p) for p in GRID10)


def _check_diamond_certificate():
    worst = 0.0
    for p in GRID10:
        cert = programs.ampdamp_diamond_dual_certificate(p)
        if not cert.feasible(1e-9):
            return np.inf
        worst = max(worst, max(cert.checks.values()), abs(cert.value - p))
    return worst


def _check_c_beta():
    return max(abs(programs.c_beta(ch_mod.amplitude_damping(p)) - np.log2(1 + np.sqrt(1 - p)))
               for p in np.linspace(0, 1, DEFAULT_POINTS))


def _check_eb_lower():
    # positive part of f(p) - eb(A_p): the SDP value may not undercut the explicit EB channel
    worst = 0.0
    for p in GRID10:
        worst = max(worst, programs.eb_lower_bound_ampdamp(p) - programs.eb_parameter(ch_mod.amplitude_damping(p))[0])
    return max(worst, 0.0)


def _check_eb_certificate():
    worst = 0.0
    for p in GRID10:
        cert = programs.eb_primal_certificate_ampdamp(p)
        if not cert.feasible(1e-9):
            return np.inf
        worst = max(worst, abs(cert.value - programs.eb_lower_bound_ampdamp(p)))
    return worst


def _check_eb_zero():
    return abs(programs.eb_parameter(ch_mod.ad_after_dephasing(0.5))[0])


def _check_bitwirl():
    rng = np.random.default_rng(7)
    g = clifford1_rep()
    worst = 0.0
    for _ in range(20):
        t = la.random_hermitian(4, rng)
        worst = max(worst, np.max(np.abs(bitwirl_average(t, g) - bitwirl_closed_form(t, 2))))
    return float(worst)


VERIFY_CHECKS = (
    ("cov_pauli(A_p) = p/2", _check_cov_ampdamp, 1e-6),
    ("cov_pauli(N_p) = p^2/2", _check_cov_mixture, 1e-6),
    ("diamond(id, A_p) = p", _check_diamond, 1e-6),
    ("diamond dual certificate for A_p", _check_diamond_certificate, 1e-9),
    ("C_beta(A_p) = log2(1 + sqrt(1-p))", _check_c_beta, 1e-6),
    ("eb(A_p) >= f(p)", _check_eb_lower, 1e-6),
    ("explicit EB channel attains f(p)", _check_eb_certificate, 1e-9),
    ("eb(M_0.5) = 0", _check_eb_zero, 1e-6),
    ("Clifford bitwirl = closed form", _check_bitwirl, 1e-10),
)


def cmd_verify(stream=None) -> bool:
    stream = stream or sys.stdout
    ok = True
    for name, fn, tol in VERIFY_CHECKS:
        t0 = time.perf_counter()
        try:
            dev = float(fn())
        except CapboundError as exc:
            dev, name = np.inf, f"{name} ({type(exc).__name__}: {exc})"
        passed = dev <= tol
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}  max_dev={dev:.3e}  tol={tol:g}  "
              f"[{time.perf_counter() - t0:.2f}s]", file=stream)
    return ok


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _parse_grid(text):
    try:
        a, b, n = text.split(",")
        return float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be start,stop,points; got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="capbound", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("figure", help="write the CSV data behind one figure")
    fig.add_argument("name", choices=sorted(FIGURES))
    fig.add_argument("--out", help="output path (default <name>.csv)")
    fig.add_argument("--points", type=int, default=DEFAULT_POINTS)
    fig.add_argument("--restarts", type=int, default=holevo.DEFAULT_RESTARTS)
    fig.add_argument("--seed", type=int, default=0)

    bnd = sub.add_parser("bound", help="bound a named or user-supplied channel")
    bnd.add_argument("--channel", required=True, help="family, family:p, or a channel-spec JSON file")
    bnd.add_argument("--methods", default="holevo,c_beta", help=f"comma list from {','.join(METHODS)}")
    bnd.add_argument("--grid", type=_parse_grid, default=(0.0, 1.0, DEFAULT_POINTS), help="start,stop,points")
    bnd.add_argument("--restarts", type=int, default=holevo.DEFAULT_RESTARTS)
    bnd.add_argument("--seed", type=int, default=0)
    bnd.add_argument("--out")

    sub.add_parser("verify", help="check the analytic identities")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "figure":
            out = cmd_figure(args.name, args.out, args.points, args.restarts, args.seed)
            print(f"wrote {out}")
            return 0
        if args.command == "bound":
            a, b, n = args.grid
            cfg = SweepConfig(args.channel, a, b, n, tuple(m for m in args.methods.split(",") if m),
                              args.restarts, args.seed, args.out)
            cmd_bound(cfg)
            return 0
        return 0 if cmd_verify() else 1
    except CapboundError as exc:
        print(f"capbound: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
