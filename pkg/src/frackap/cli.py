"""Command-line front end: ``frackap {kernel,transform,capacity,verify}``.

JSON in, CSV (or JSON) out. Exit codes: 0 success, 1 failed checks,
2 input errors, 3 numerical failures.
"""

import argparse
from dataclasses import dataclass
import json
import logging
import os
import sys

import numpy as np

from . import capacity, hankel, harness, kernels
from .errors import (DegenerateSetError, FrackapError, NonConvergenceError,
                     StagnationError)
from .special import BesselIndex, KernelSpec

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

INTERPRETATION = ("interpretation: an estimate tending to 0 under refinement is consistent with "
                  "removability of the set; a bounded-below estimate is consistent with a "
                  "non-removable set (all values are lower bounds of the capacity)")

log = logging.getLogger("frackap")


class InputError(Exception):
    """Bad or missing input; maps to exit code 2."""


@dataclass
class RunConfig:
    subcommand: str
    input: str = None
    output: str = None
    format: str = "csv"
    verbosity: int = 0
    threads: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.subcommand not in COMMANDS:
            raise InputError(f"unknown subcommand {self.subcommand!r}")
        if self.format not in ("csv", "json"):
            raise InputError("format must be csv or json")
        if self.output:
            parent = os.path.dirname(os.path.abspath(self.output))
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise InputError(f"output directory {parent} is not writable")


# -- helpers -------------------------------------------------------------------------

def _read_json(path, required=True):
    if path is None:
        if required:
            raise InputError("--input is required for this subcommand")
        return None
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _emit(cfg, text):
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sibling(path, suffix):
    stem, _ = os.path.splitext(path)
    return stem + suffix


def _num(v):
    # locale-free, round-trippable
    return repr(float(v))


def _csv(header, rows):
    lines = [",".join(header)]
    lines += [",".join(str(c) for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def _grid(spec, key):
    if isinstance(spec, dict):
        try:
            return np.linspace(float(spec["min"]), float(spec["max"]), int(spec["count"]))
        except KeyError as exc:
            raise InputError(f"{key} range needs min, max and count") from exc
    return np.atleast_1d(np.asarray(spec, dtype=float))


def _index(doc):
    try:
        n = int(doc["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("input needs an integer n") from exc
    a = doc.get("a") or [0.0] * n
    idx = BesselIndex(tuple(a))
    if idx.n != n:
        raise InputError("len(a) must equal n")
    return idx


# -- subcommands -----------------------------------------------------------------------

def cmd_kernel(cfg):
    """Tabulate ``P(r, t)`` with the requested route; CSV of (r, t, P, route_used, est_error)."""
    doc = _read_json(cfg.input)
    try:
        spec = KernelSpec(float(doc["gamma"]), _index(doc))
        ts = _grid(doc["t"], "t")
        rs = _grid(doc["r"], "r")
    except (KeyError, TypeError) as exc:
        raise InputError(f"kernel input needs gamma, n, t and r: {exc}") from exc
    route = doc.get("route", "auto")
    if route not in ("auto", "series", "quadrature"):
        raise InputError(f"unknown route {route!r}")
    if np.any(ts <= 0) or np.any(rs < 0):
        raise InputError("t must be > 0 and r >= 0")
    rows = []
    for t in ts:
        for r in rs:
            used, val, err = "quadrature", None, 1e-12
            if route != "quadrature" and r > 0:
                v, ok = kernels.P_series(spec, r, t)
                if ok:
                    used, val, err = "series", v, kernels.SERIES_RTOL
            if val is None:
                val = float(kernels.P_quadrature(spec, r, t))
            rows.append((r, t, val, used, err))
            log.info("r=%g t=%g P=%.12g via %s", r, t, val, used)
    if cfg.format == "json":
        _emit(cfg, json.dumps([dict(zip(("r", "t", "P", "route_used", "est_error"), row))
                               for row in rows], indent=2) + "\n")
    else:
        _emit(cfg, _csv(["r [length]", "t [time]", "P [length^-d]", "route_used",
                         "est_error [relative]"],
                        [(_num(r), _num(t), _num(v), u, _num(e)) for r, t, v, u, e in rows]))
    if doc.get("plot") and cfg.output and cfg.format == "csv":
        script = _sibling(cfg.output, ".gp")
        with open(script, "w") as fh:
            fh.write("set datafile separator ','\nset key autotitle columnhead\n"
                     "set xlabel 'r'\nset ylabel 'P(r,t)'\n"
                     f"plot for [tt in '{' '.join(repr(float(t)) for t in ts)}'] "
                     f"'{os.path.basename(cfg.output)}' using "
                     "($2 == tt+0 ? $1 : 1/0):3 with linespoints title 't='.tt\n")
    return EXIT_OK


FAMILIES = {
    "gaussian": lambda p: hankel.gaussian_profile(p.get("scale", 1.0), p.get("amplitude", 1.0)),
    "exponential": lambda p: hankel.exponential_profile(p.get("rate", 1.0),
                                                        p.get("amplitude", 1.0)),
}


def cmd_transform(cfg):
    """Radial transform of a named profile family on a rho grid."""
    doc = _read_json(cfg.input)
    fam = doc.get("family")
    if fam not in FAMILIES:
        raise InputError(f"unknown family {fam!r}; choose from {sorted(FAMILIES)}")
    idx = _index(doc)
    try:
        rho = _grid(doc["rho"], "rho")
    except KeyError as exc:
        raise InputError("transform input needs rho") from exc
    if np.any(rho < 0):
        raise InputError("rho must be >= 0")
    vals = np.atleast_1d(hankel.radial_transform(idx, FAMILIES[fam](doc.get("params", {})), rho))
    if cfg.format == "json":
        _emit(cfg, json.dumps([{"rho": float(q), "value": float(v)} for q, v in zip(rho, vals)],
                              indent=2) + "\n")
    else:
        _emit(cfg, _csv(["rho [1/length]", "transform [length^d]"],
                        [(_num(q), _num(v)) for q, v in zip(rho, vals)]))
    return EXIT_OK


def cmd_capacity(cfg):
    """Solve a capacity problem; optional ``trend`` block re-solves under refinement."""
    doc = _read_json(cfg.input)
    spec, kset, p, variant, params, scfg = capacity.problem_from_dict(doc)
    res = capacity.solve_capacity(spec, kset, p, variant, params, scfg)
    out = res.to_dict()
    if "trend" in doc:
        tr = doc["trend"]
        rep = capacity.refine_and_trend(spec, kset, p, variant, int(tr.get("levels", 4)), params,
                                        scfg, tr.get("mode", "T_max"))
        out["trend"] = rep.to_dict()
        if tr.get("mode", "T_max") == "T_max" and len(kset) == 1:
            try:
                out["trend"]["predicted_rate"] = capacity.predicted_trend_exponent(spec, p)
            except FrackapError:
                pass
    out["interpretation"] = INTERPRETATION
    log.info("capacity %.10g (gap %.2e, %d iterations)", res.capacity_value, res.duality_gap,
             res.iterations)
    if cfg.format == "json":
        _emit(cfg, json.dumps(out, indent=2, sort_keys=True) + "\n")
    else:
        n = kset.n
        head = [f"y_{i + 1} [length]" for i in range(n)] + ["tau [time]", "weight [1]"]
        rows = [[_num(v) for v in y] + [_num(tau), _num(w)]
                for (y, tau), w in zip(res.optimal_measure.atoms, res.optimal_measure.weights)]
        text = (f"# capacity_value={_num(res.capacity_value)} duality_gap={_num(res.duality_gap)} "
                f"variant={variant} p={_num(p)}\n")
        if "trend" in out:
            text += (f"# trend={out['trend']['classification']} "
                     f"fitted_rate={_num(out['trend']['fitted_rate'])}\n")
        _emit(cfg, text + _csv(head, rows))
    sys.stderr.write(INTERPRETATION + "\n")
    return EXIT_OK


def cmd_verify(cfg):
    """Run the verification suite; exit 1 if any selected check does not pass."""
    doc = _read_json(cfg.input, required=False)
    reports = harness.run_verification(doc, seed=cfg.seed, threads=cfg.threads)
    if cfg.format == "json":
        _emit(cfg, harness.reports_to_json(reports))
    else:
        _emit(cfg, harness.reports_to_csv(reports))
    text = harness.reports_to_text(reports)
    if cfg.output:
        with open(_sibling(cfg.output, ".txt"), "w") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


COMMANDS = {"kernel": cmd_kernel, "transform": cmd_transform, "capacity": cmd_capacity,
            "verify": cmd_verify}


def build_parser():
    ap = argparse.ArgumentParser(prog="frackap", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=sorted(COMMANDS))
    ap.add_argument("--input", help="JSON input file")
    ap.add_argument("--output", help="output file (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default=None)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0, help="fixes fixture sampling")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    return ap


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    fmt = args.format or ("json" if args.subcommand == "capacity" else "csv")
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = RunConfig(args.subcommand, args.input, args.output, fmt, args.verbose,
                        max(1, args.threads), args.seed)
        return COMMANDS[cfg.subcommand](cfg)
    except InputError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (NonConvergenceError, StagnationError, DegenerateSetError, ArithmeticError) as exc:
        sys.stderr.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        diag = getattr(exc, "diagnostics", None) or getattr(exc, "last_values", None)
        if diag is not None:
            sys.stderr.write(f"diagnostics: {diag}\n")
        return EXIT_NUMERIC
    except (FrackapError, ValueError) as exc:
        sys.stderr.write(f"input error: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
