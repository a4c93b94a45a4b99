"""Command-line front end.

Commands: ``spectrum``, ``verify``, ``limits``, ``wavefn`` and ``sweep``.
Parameters come from an optional JSON config file and are overridden by
flags. Exit codes: 0 success, 1 config error, 2 supercritical coupling in
range, 3 solver failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import suites
from .closed_form import (
    SpectrumRecord,
    energy_exact,
    energy_qt,
    qt_reconciliation,
    relativistic_correction,
    sommerfeld,
)
from .errors import (
    BracketingFailure,
    ConvergenceFailure,
    DefDiracError,
    InvalidGrid,
    InvalidParameter,
    MassParameterTooLarge,
    NoBoundState,
    SupercriticalCoupling,
)
from .params import Branch, DeformationParams, PhysicalConstants, state_for
from .radial_numeric import SolverOptions, export_wavefunction, self_consistent_energy

EXIT_OK, EXIT_CONFIG, EXIT_SUPERCRITICAL, EXIT_SOLVER = 0, 1, 2, 3

SOLVER_ERRORS = (ConvergenceFailure, BracketingFailure, NoBoundState)

DEFAULT_CONFIG = {
    "constants": {"hbar": 1.0, "m": 1.0, "c": 1.0, "e2": 1.0 / 137.035999084},
    "deformation": {"nu": 0.0, "a": None, "abar": None},
    "quantum": {"k": [1], "n_r": [0, 0], "branch": "both"},
    "solver": {"grid_points": 4001, "x_max": "auto", "tol": 1e-10},
    "output": {"format": "csv", "path": None},
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    consts: PhysicalConstants
    deform: DeformationParams
    ks: list[int]
    n_r_range: tuple[int, int]
    branches: list[Branch]
    solver: SolverOptions
    fmt: str = "csv"
    out: str | None = None
    raw: dict = field(default_factory=dict)

    def states(self):
        """(k, n_r, branch) in output order: k ascending, plus before minus, n_r ascending."""
        lo, hi = self.n_r_range
        for k in sorted(self.ks):
            for br in self.branches:
                for n_r in range(lo, hi + 1):
                    yield k, n_r, br


# --- config handling ---------------------------------------------------------


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def parse_nr_range(text) -> tuple[int, int]:
    """'0..3' -> (0, 3), inclusive. '2' -> (2, 2). 'lo > hi' gives an empty range."""
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise ConfigError("n_r range must have two entries [from, to]")
        lo, hi = text
    else:
        text = str(text).strip()
        lo, _, hi = text.partition("..")
        hi = hi or lo
    try:
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise ConfigError(f"n_r range {text!r} is not of the form from..to") from None
    if lo < 0:
        raise ConfigError(f"n_r must be >= 0, got {lo}")
    return lo, hi


def parse_k_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [t for t in str(text).replace(",", " ").split() if t]
    try:
        ks = [int(t) for t in items]
    except ValueError:
        raise ConfigError(f"k list {text!r} must contain integers") from None
    if any(k == 0 for k in ks):
        raise ConfigError("k must be a nonzero integer")
    return ks


def _flag_overrides(args: argparse.Namespace) -> dict:
    over: dict = {"constants": {}, "deformation": {}, "quantum": {}, "solver": {}, "output": {}}
    for name in ("hbar", "m", "c", "e2"):
        if getattr(args, name, None) is not None:
            over["constants"][name] = getattr(args, name)
    if getattr(args, "nu", None) is not None:
        over["deformation"]["nu"] = args.nu
    # a flag for one mass parameter clears the other from the file
    if getattr(args, "a", None) is not None:
        over["deformation"].update(a=args.a, abar=None)
    if getattr(args, "abar", None) is not None:
        over["deformation"].update(abar=args.abar, a=None)
    if getattr(args, "k", None) is not None:
        over["quantum"]["k"] = args.k
    if getattr(args, "nr", None) is not None:
        over["quantum"]["n_r"] = args.nr
    if getattr(args, "branch", None) is not None:
        over["quantum"]["branch"] = args.branch
    if getattr(args, "grid_points", None) is not None:
        over["solver"]["grid_points"] = args.grid_points
    if getattr(args, "x_max", None) is not None:
        over["solver"]["x_max"] = args.x_max
    if getattr(args, "tol", None) is not None:
        over["solver"]["tol"] = args.tol
    if getattr(args, "format", None) is not None:
        over["output"]["format"] = args.format
    if getattr(args, "out", None) is not None:
        over["output"]["path"] = args.out
    return over


def load_config(args: argparse.Namespace) -> RunConfig:
    raw = copy.deepcopy(DEFAULT_CONFIG)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - set(DEFAULT_CONFIG)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        raw = _merge(raw, data)
    raw = _merge(raw, _flag_overrides(args))
    return build_config(raw)


def build_config(raw: dict) -> RunConfig:
    try:
        consts = PhysicalConstants(**{k: float(v) for k, v in raw["constants"].items()})
        d = raw["deformation"]
        a, abar = d.get("a"), d.get("abar")
        if a is not None and abar is not None:
            raise ConfigError("give only one of a and abar")
        deform = DeformationParams.build(
            consts, float(d.get("nu") or 0.0),
            a=None if a is None else float(a), abar=None if abar is None else float(abar),
        )
        q = raw["quantum"]
        ks = parse_k_list(q["k"])
        n_r_range = parse_nr_range(q["n_r"])
        branch = str(q.get("branch", "both")).lower()
        branches = [Branch.PLUS, Branch.MINUS] if branch == "both" else [Branch.parse(branch)]
        s = raw["solver"]
        x_max = s.get("x_max", "auto")
        if x_max != "auto":
            x_max = float(x_max)
            if not x_max > 0:
                raise ConfigError(f"x_max must be 'auto' or positive, got {x_max}")
        n_points = int(s.get("grid_points", 4001))
        if n_points < 3:
            raise ConfigError(f"grid_points must be >= 3, got {n_points}")
        tol = float(s.get("tol", 1e-10))
        if not tol > 0:
            raise ConfigError(f"tol must be positive, got {tol}")
        solver = SolverOptions(n_points=n_points, x_max=x_max, tol=tol)
        o = raw["output"]
        fmt = str(o.get("format", "csv")).lower()
        if fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {fmt}")
    except (InvalidParameter, MassParameterTooLarge, InvalidGrid) as exc:
        raise ConfigError(str(exc)) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from None
    return RunConfig(consts, deform, ks, n_r_range, branches, solver, fmt, o.get("path"), raw)


# --- output ------------------------------------------------------------------


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def render_table(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        data = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _threads() -> int:
    raw = os.environ.get("DEFDIRAC_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _ordered_map(fn, items: list) -> list:
    # map() keeps input order, so output stays deterministic for any pool size
    n = min(_threads(), max(len(items), 1))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# --- spectrum and sweep ------------------------------------------------------


def spectrum_record(cfg: RunConfig, k: int, n_r: int, br: Branch, numeric: bool) -> SpectrumRecord:
    state = state_for(cfg.consts, cfg.deform, k, n_r, br)
    rec = energy_exact(state, cfg.consts, cfg.deform)
    if numeric and rec.status == "ok":
        E, diag = self_consistent_energy(state, cfg.consts, cfg.deform, cfg.solver)
        rec.E_numeric = E
        rec.node_count = diag["node_count"]
    return rec


def spectrum_rows(cfg: RunConfig, numeric: bool, tolerate_supercritical: bool = False) -> list[dict]:
    def one(item):
        k, n_r, br = item
        try:
            return spectrum_record(cfg, k, n_r, br, numeric).as_dict()
        except SupercriticalCoupling:
            if not tolerate_supercritical:
                raise
            row = {c: None for c in SpectrumRecord.COLUMNS}
            row.update(k=k, n_r=n_r, branch=br.label, status="supercritical")
            return row

    return _ordered_map(one, list(cfg.states()))


def cmd_spectrum(args, cfg: RunConfig) -> int:
    rows = spectrum_rows(cfg, args.numeric)
    emit(render_table(rows, list(SpectrumRecord.COLUMNS), cfg.fmt), cfg.out)
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    if args.steps < 1:
        raise ConfigError("steps must be >= 1")
    if args.start > args.stop:
        raise ConfigError("sweep needs from <= to")
    values = np.linspace(args.start, args.stop, args.steps)
    rows: list[dict] = []
    for v in values:
        raw = copy.deepcopy(cfg.raw)
        if args.param == "e2":
            raw["constants"]["e2"] = float(v)
        elif args.param == "nu":
            raw["deformation"]["nu"] = float(v)
        else:
            raw["deformation"].update(a=float(v), abar=None)
        point = build_config(raw)
        for r in spectrum_rows(point, args.numeric, tolerate_supercritical=True):
            rows.append({args.param: float(v), **r})
    emit(render_table(rows, [args.param, *SpectrumRecord.COLUMNS], cfg.fmt), cfg.out)
    return EXIT_OK


# --- limits ------------------------------------------------------------------


def _principal_c_inf(k: int, n_r: int, br: Branch) -> int:
    return n_r + abs(k) + (0 if br is Branch.PLUS else 1)


def limits_rows(mode: str, cfg: RunConfig, values: list[float] | None) -> tuple[list[dict], list[str]]:
    rows: list[dict] = []
    c0 = cfg.consts
    if mode == "nu0":
        nus = values or [1e-4, 1e-5, 1e-6]
        for k, n_r, br in cfg.states():
            st = suites.nu_zero_study(c0, cfg.deform.a, k, br, n_r, nus)
            for r in st["rows"]:
                rows.append({"k": k, "n_r": n_r, "branch": br.label, **r, "slope": st["slope"],
                             "extrapolated": st["extrapolated"],
                             "extrapolation_error": st["extrapolation_error"]})
        cols = ["k", "n_r", "branch", "nu", "E_exact", "E_nu0", "residual", "slope",
                "extrapolated", "extrapolation_error"]
    elif mode == "nonrel":
        cs = values or [10.0, 20.0, 40.0, 80.0]
        for k, n_r, br in cfg.states():
            st = suites.nonrel_study(c0.e2, cfg.deform.nu, cfg.deform.abar, k, br, n_r, cs,
                                     hbar=c0.hbar, m=c0.m)
            for r in st["rows"]:
                rows.append({"k": k, "n_r": n_r, "branch": br.label, "n": st["n0"], **r,
                             "slope": st["slope"], "slope_corrected": st["slope_corrected"]})
        cols = ["k", "n_r", "branch", "n", "c", "E_minus_mc2", "E_nonrel", "E1", "residual",
                "residual_corrected", "slope", "slope_corrected"]
    elif mode == "sommerfeld":
        plain = cfg.deform.nu == 0.0 and cfg.deform.abar == 0.0
        for k, n_r, br in cfg.states():
            n = _principal_c_inf(k, n_r, br)
            d = relativistic_correction(c0, cfg.deform.nu, cfg.deform.abar, k, n)
            ref = sommerfeld(c0, k, n)
            row = {"k": k, "n_r": n_r, "branch": br.label, "n": n, "delta1": d.delta1,
                   "delta2": d.delta2, "delta3": d.delta3, "correction": d.total,
                   "sommerfeld": ref, "residual": abs(d.total - ref),
                   "coefficient_extracted": math.nan, "coefficient_predicted": math.nan,
                   "extracted_rel_error": math.nan}
            if plain:
                # 1/c^2 coefficient in hbar = m = 1 units from the c-scaling of exact levels
                sc = suites.sommerfeld_coefficient(c0.e2, k, br, n_r, values or (10.0, 20.0, 40.0, 80.0))
                row.update(coefficient_extracted=sc["extracted"], coefficient_predicted=sc["predicted"],
                           extracted_rel_error=sc["relative_error"])
            rows.append(row)
        cols = ["k", "n_r", "branch", "n", "delta1", "delta2", "delta3", "correction",
                "sommerfeld", "residual", "coefficient_extracted", "coefficient_predicted",
                "extracted_rel_error"]
    else:
        for k, n_r, _ in _unique_positive(cfg):
            l = k - 1
            n = n_r + l + 1
            qt = energy_qt(c0.m, c0.hbar, c0.e2, cfg.deform.nu, l, n)
            rec = qt_reconciliation(c0.m, c0.hbar, c0.e2, cfg.deform.nu, l, n)
            rows.append({"l": l, "n": n, "E_qt": qt, "E_reconciled": rec,
                         "residual": abs(rec - qt)})
        cols = ["l", "n", "E_qt", "E_reconciled", "residual"]
    return rows, cols


def _unique_positive(cfg: RunConfig):
    # qt mode is spinless: k = l + 1, branch irrelevant
    lo, hi = cfg.n_r_range
    for k in sorted({abs(k) for k in cfg.ks}):
        for n_r in range(lo, hi + 1):
            yield k, n_r, Branch.PLUS


def cmd_limits(args, cfg: RunConfig) -> int:
    rows, cols = limits_rows(args.mode, cfg, args.values)
    emit(render_table(rows, cols, cfg.fmt), cfg.out)
    return EXIT_OK


# --- wavefunction ------------------------------------------------------------


def render_wavefunction(wf, fmt: str) -> str:
    meta = wf.meta
    if fmt == "json":
        doc = {key: _json_value(meta[key]) for key in ("E", "k", "n_r", "branch", "nu", "a", "node_count")}
        doc.update(h=wf.h, x=[float(v) for v in wf.x], r=[float(v) for v in wf.r],
                   chi=[float(v) for v in wf.chi])
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    for key in ("E", "k", "n_r", "branch", "nu", "a"):
        buf.write(f"# {key}={_fmt_cell(meta[key])}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "r", "chi"])
    for x, r, chi in zip(wf.x, wf.r, wf.chi):
        w.writerow([_fmt_cell(x), _fmt_cell(r), _fmt_cell(chi)])
    return buf.getvalue()


def cmd_wavefn(args, cfg: RunConfig) -> int:
    states = list(cfg.states())
    if not states:
        raise ConfigError("wavefn needs one state; the n_r range is empty")
    k, n_r, br = states[0]
    state = state_for(cfg.consts, cfg.deform, k, n_r, br)
    wf = export_wavefunction(state, cfg.consts, cfg.deform, solver_opts=cfg.solver)
    emit(render_wavefunction(wf, cfg.fmt), cfg.out)
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def cmd_verify(args, cfg: RunConfig) -> int:
    checks = suites.run_suite(args.suite, cfg.solver)
    if cfg.fmt == "json":
        text = render_table([c.__dict__ for c in checks], ["name", "value", "bound", "passed", "detail"], "json")
    else:
        text = "\n".join(c.line() for c in checks) + "\n"
        text += f"{sum(c.passed for c in checks)}/{len(checks)} checks passed\n"
    emit(text, cfg.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_SOLVER


# --- parser ------------------------------------------------------------------


def _shared(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("shared options")
    g.add_argument("--config", help="JSON config file; flags override its values")
    g.add_argument("--hbar", type=float)
    g.add_argument("--m", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--e2", type=float, help="coupling e^2")
    g.add_argument("--nu", type=float, help="deformation strength")
    mass = g.add_mutually_exclusive_group()
    mass.add_argument("--a", type=float, help="mass parameter a")
    mass.add_argument("--abar", type=float, help="dimensionless mass parameter a mc^2/e^2")
    g.add_argument("--k", help="comma- or space-separated list of nonzero k")
    g.add_argument("--nr", help="inclusive n_r range from..to")
    g.add_argument("--branch", choices=["plus", "minus", "both"])
    g.add_argument("--grid-points", type=int)
    g.add_argument("--x-max", help="'auto' or box length in the mapped coordinate")
    g.add_argument("--tol", type=float)
    g.add_argument("--format", choices=["csv", "json"])
    g.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="defdirac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="closed-form (and optionally numerical) levels")
    p.add_argument("--numeric", action="store_true", help="also solve the radial problem numerically")
    _shared(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", default="all", choices=suites.SUITES)
    _shared(p)

    p = sub.add_parser("limits", help="compare exact levels with limit formulas")
    p.add_argument("--mode", required=True, choices=["nu0", "nonrel", "sommerfeld", "qt"])
    p.add_argument("--values", type=float, nargs="+",
                   help="nu sequence (nu0) or c sequence (nonrel, sommerfeld)")
    _shared(p)

    p = sub.add_parser("wavefn", help="export chi(x) for the first selected state")
    _shared(p)

    p = sub.add_parser("sweep", help="spectrum over a parameter range")
    p.add_argument("--param", required=True, choices=["nu", "a", "e2"])
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True, help="number of sweep points")
    p.add_argument("--numeric", action="store_true")
    _shared(p)
    return parser


COMMANDS = {
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "limits": cmd_limits,
    "wavefn": cmd_wavefn,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; usage errors are config errors here
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SupercriticalCoupling as exc:
        print(f"supercritical coupling: {exc}", file=sys.stderr)
        return EXIT_SUPERCRITICAL
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InvalidParameter, MassParameterTooLarge, InvalidGrid) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DefDiracError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
