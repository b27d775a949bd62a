"""Command-line front end.

Subcommands: capacity, simulate, verify, sweep, area, mane.  Every numeric
option may also come from a JSON file given with ``--config``; keys are the
option names (``ramp_w`` or ``ramp-w``), and explicit flags win.

Exit codes: 0 success, 1 internal or verification failure, 2 invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import analysis as an
from . import capacity as cp
from . import dynamics as dy
from . import verify as vf
from .errors import CertificationError, DomainError, IntegrationError, NotClosing, WeakField

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

DEFAULTS = {
    "kappa": 0.0, "s": 1.0, "r": 1.0, "tol": 1e-10, "out": None, "json": False,
    "x": 0.0, "y": 0.0, "u": 1.0, "w": 0.0, "kind": "kinetic", "duration": None,
    "samples": 201, "delta": 0.2, "eta": 0.1, "ramp_w": 0.1, "certify": False,
    "levels": 8, "param": "r", "min": None, "max": None, "steps": 10,
    "measure": False, "grid": 256, "energy": None, "v_below": None, "v_above": None,
    "horizon": 50.0, "threshold": 0.1, "transient": None, "suite": "all",
}


class InputError(ValueError):
    pass


def fmt(v) -> str:
    """17 significant digits, lossless for doubles."""
    return format(float(v), ".17g")


def _add_common(p):
    S = argparse.SUPPRESS
    p.add_argument("--kappa", type=float, default=S, help="curvature")
    p.add_argument("--s", type=float, default=S, help="magnetic strength")
    p.add_argument("--r", type=float, default=S, help="disc radius")
    p.add_argument("--tol", type=float, default=S, help="integrator tolerance")
    p.add_argument("--out", default=S, help="output file")
    p.add_argument("--json", action="store_true", default=S, help="JSON output")
    p.add_argument("--config", default=S, help="JSON config file")


def build_parser():
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(
        prog="magcap", description="Magnetic geodesic flow and Hofer-Zehnder capacity of "
                                   "disc tangent bundles over constant-curvature surfaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="closed-form capacity (optionally certified)")
    _add_common(p)
    p.add_argument("--certify", action="store_true", default=S,
                   help="also certify the lower bound with a profiled Hamiltonian")
    p.add_argument("--delta", type=float, default=S)
    p.add_argument("--eta", type=float, default=S)
    p.add_argument("--ramp-w", dest="ramp_w", type=float, default=S)
    p.add_argument("--levels", type=int, default=S)

    p = sub.add_parser("simulate", help="integrate one orbit and write a trajectory CSV")
    _add_common(p)
    for name in ("x", "y", "u", "w"):
        p.add_argument(f"--{name}", type=float, default=S)
    p.add_argument("--kind", choices=["kinetic", "circle", "profiled"], default=S)
    p.add_argument("--duration", type=float, default=S)
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--delta", type=float, default=S)
    p.add_argument("--eta", type=float, default=S)
    p.add_argument("--ramp-w", dest="ramp_w", type=float, default=S)

    p = sub.add_parser("verify", help="run invariant suites")
    _add_common(p)
    p.add_argument("suite", nargs="?", choices=["geometry", "dynamics", "analysis", "capacity", "all"],
                   default=S)

    p = sub.add_parser("sweep", help="capacity or period over a parameter range")
    _add_common(p)
    p.add_argument("--param", choices=["r", "s", "kappa", "energy"], default=S)
    p.add_argument("--min", type=float, default=S)
    p.add_argument("--max", type=float, default=S)
    p.add_argument("--steps", type=int, default=S)
    p.add_argument("--measure", action="store_true", default=S,
                   help="energy sweeps: measure periods by first return")

    p = sub.add_parser("area", help="swept symplectic area versus the oscillation of H")
    _add_common(p)
    p.add_argument("--grid", type=int, default=S)
    p.add_argument("--energy", type=float, default=S, help="target energy (default r^2/2)")

    p = sub.add_parser("mane", help="closure below and escape above the critical speed")
    _add_common(p)
    p.add_argument("--v-below", dest="v_below", type=float, default=S)
    p.add_argument("--v-above", dest="v_above", type=float, default=S)
    p.add_argument("--horizon", type=float, default=S)
    p.add_argument("--threshold", type=float, default=S)
    p.add_argument("--transient", type=float, default=S)
    return parser


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("config file must hold a JSON object")
    cfg = {}
    for key, val in data.items():
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise InputError(f"unknown config key {key!r}")
        cfg[key] = val
    return cfg


def resolve(ns) -> dict:
    flags = vars(ns).copy()
    command = flags.pop("command")
    cfg = dict(DEFAULTS)
    if "config" in flags:
        cfg.update(load_config(flags.pop("config")))
    cfg.update(flags)
    cfg["command"] = command
    return cfg


# -- commands -------------------------------------------------------------------

def cmd_capacity(cfg, out):
    k, s, r = cfg["kappa"], cfg["s"], cfg["r"]
    if not r > 0:
        raise InputError(f"r must be positive, got {r}")
    if cfg["certify"]:
        cert = cp.capacity_certificate(k, s, r, cfg["delta"], cfg["eta"], cfg["ramp_w"],
                                       cfg["levels"], integ_tol=cfg["tol"])
        if cfg["json"]:
            out.write(json.dumps(cert.to_dict(), indent=2) + "\n")
        else:
            out.write(f"{fmt(cert.value)}\ncertified_lower_bound {fmt(cert.certified_lower_bound)}\n")
        return EXIT_OK
    res = cp.capacity_value(k, s, r)
    if cfg["json"]:
        out.write(json.dumps(res.to_dict()) + "\n")
    else:
        out.write(fmt(res.value) + "\n")
    return EXIT_OK


TRAJECTORY_HEADER = ["t", "x", "y", "u", "w", "chart", "energy"]


def write_trajectory(fh, sys, traj):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRAJECTORY_HEADER)
    energies = traj.energies(sys)
    for t, y, c, e in zip(traj.times, traj.states, traj.charts, energies):
        writer.writerow([fmt(t), *(fmt(v) for v in y), int(c), fmt(e)])


def read_trajectory(path):
    """Parse a trajectory CSV into (times, states (n, 4), charts, energies)."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    states = np.column_stack([data[n] for n in ("x", "y", "u", "w")])
    return data["t"], states, data["chart"].astype(int), data["energy"]


def _atomic_write(path, writer):
    """Write through a temporary file so a failure leaves no partial output."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".magcap-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_simulate(cfg, out):
    sys_ = dy.MagneticSystem(cfg["kappa"], cfg["s"])
    st0 = dy.PhaseState(cfg["x"], cfg["y"], cfg["u"], cfg["w"])
    if cfg["kind"] == "kinetic":
        kind = dy.KINETIC
    elif cfg["kind"] == "circle":
        kind = dy.CIRCLE_ACTION
    else:
        cap = cp.capacity_value(cfg["kappa"], cfg["s"], cfg["r"]).value
        kind = dy.profiled(cp.build_profile(cap, cfg["delta"], cfg["eta"], cfg["ramp_w"]))
    duration = cfg["duration"]
    if duration is None:
        T = an.estimated_period(sys_, st0, kind)
        duration = T if T is not None and math.isfinite(T) else 10.0
    if cfg["samples"] < 1:
        raise InputError("samples must be at least 1")
    traj = dy.integrate(sys_, st0, kind, duration, cfg["tol"], n_samples=cfg["samples"])
    if cfg["out"]:
        _atomic_write(cfg["out"], lambda fh: write_trajectory(fh, sys_, traj))
    else:
        write_trajectory(out, sys_, traj)
    st = traj.stats
    print(f"steps={st.steps} rejected={st.rejected_steps} "
          f"max_energy_drift={st.max_energy_drift:.3e} chart_swaps={st.chart_swaps}",
          file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg, out):
    checks = vf.run(cfg["suite"])
    if cfg["json"]:
        out.write(json.dumps([c.__dict__ for c in checks], indent=2) + "\n")
    else:
        width = max(len(c.name) for c in checks)
        for c in checks:
            mark = "PASS" if c.passed else "FAIL"
            out.write(f"{mark}  {c.suite:<9} {c.name:<{width}}  observed {c.observed:.3e}"
                      f"  bound {c.bound:.1e}\n")
    failed = [c for c in checks if not c.passed]
    for c in failed:
        print(f"violated: [{c.suite}] {c.name}: residual {c.observed:.6e} > {c.bound:.1e}",
              file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


SWEEP_HEADER = ["param", "value", "capacity_or_period", "status"]


def sweep_rows(cfg):
    param, lo, hi, steps = cfg["param"], cfg["min"], cfg["max"], cfg["steps"]
    if lo is None or hi is None:
        raise InputError("sweep needs --min and --max")
    if not (isinstance(steps, int) and steps >= 2):
        raise InputError("steps must be an integer >= 2")
    if not lo < hi:
        raise InputError("min must be smaller than max")
    rows = []
    for v in np.linspace(lo, hi, steps):
        v = float(v)
        p = {"kappa": cfg["kappa"], "s": cfg["s"], "r": cfg["r"]}
        if param == "energy":
            sys_ = dy.MagneticSystem(p["kappa"], p["s"])
            if v < 0:
                raise InputError("energies must be non-negative")
            if not sys_.strong(v):
                rows.append([param, fmt(v), "", "weak_field"])
                continue
            if cfg["measure"] and v > 0:
                st = dy.PhaseState(0.0, 0.0, math.sqrt(2 * v), 0.0)
                rep = an.first_return(sys_, st, dy.KINETIC, cfg["tol"])
                rows.append([param, fmt(v), fmt(rep.period) if rep.converged else "",
                             "ok" if rep.converged else "no_return"])
            else:
                rows.append([param, fmt(v), fmt(dy.period_of_energy(sys_, v)), "ok"])
            continue
        p[param] = v
        if p["r"] <= 0:
            raise InputError("r must be positive")
        if cp.strong_field_check(p["kappa"], p["s"], p["r"]):
            rows.append([param, fmt(v), fmt(cp.capacity_value(**p).value), "ok"])
        else:
            rows.append([param, fmt(v), "", "weak_field"])
    return rows


def cmd_sweep(cfg, out):
    rows = sweep_rows(cfg)

    def write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        writer.writerows(rows)

    if cfg["out"]:
        _atomic_write(cfg["out"], write)
    else:
        write(out)
    return EXIT_OK


def cmd_area(cfg, out):
    k, s, r = cfg["kappa"], cfg["s"], cfg["r"]
    E = cfg["energy"] if cfg["energy"] is not None else 0.5 * r * r
    sys_ = dy.MagneticSystem(k, s)
    area = an.swept_symplectic_area(sys_, E, cfg["grid"], cfg["grid"])
    exact = float(dy.h_of_energy(sys_, E))
    res = {"swept_area": area, "closed_form": exact, "difference": area - exact,
           "kappa": k, "s": s, "energy": E, "grid": cfg["grid"]}
    if cfg["json"]:
        out.write(json.dumps(res) + "\n")
    else:
        out.write(f"swept_area  {fmt(area)}\nclosed_form {fmt(exact)}\n"
                  f"difference  {fmt(area - exact)}\n")
    return EXIT_OK


def mane_reports(cfg):
    k, s = cfg["kappa"], cfg["s"]
    if not k < 0:
        raise InputError("mane requires kappa < 0")
    if s == 0:
        raise InputError("mane requires s != 0")
    sys_ = dy.MagneticSystem(k, s)
    crit = abs(s) / math.sqrt(-k)
    speeds = [("below", cfg["v_below"] if cfg["v_below"] is not None else 0.5 * crit),
              ("critical", crit),
              ("above", cfg["v_above"] if cfg["v_above"] is not None else 2.0 * crit)]
    reports = []
    for label, v in speeds:
        if not v > 0:
            raise InputError("speeds must be positive")
        st = dy.PhaseState(0.0, 0.0, v, 0.0)
        T = an.estimated_period(sys_, st)
        t_max = 2.5 * T if T is not None else cfg["horizon"]
        ret = an.first_return(sys_, st, dy.KINETIC, cfg["tol"], t_max=t_max)
        esc = an.escape_witness(sys_, st, cfg["horizon"], cfg["threshold"], cfg["transient"],
                                tol=cfg["tol"])
        reports.append({
            "regime": label, "speed": v, "geodesic_curvature": abs(s) / v,
            "predicted_period": T, "period": ret.period if ret.converged else None,
            "closed": ret.converged, "closure_error": ret.closure_error,
            "escaped": esc.escaped, "max_distance": esc.max_distance,
            "min_return_after_transient": esc.min_return_after_transient,
        })
    return reports


MANE_HEADER = ["regime", "speed", "geodesic_curvature", "predicted_period", "period", "closed",
               "escaped", "max_distance", "min_return_after_transient"]


def cmd_mane(cfg, out):
    reports = mane_reports(cfg)
    if cfg["json"]:
        out.write(json.dumps(reports, indent=2) + "\n")
    else:
        out.write(f"critical speed |s|/sqrt(|kappa|) = {fmt(reports[1]['speed'])}\n")
        out.write(f"{'regime':<9}{'speed':>10}{'k_g':>8}  {'first return':<28}{'escape witness'}\n")
        for rep in reports:
            ret = (f"closed, T={rep['period']:.10f}" if rep["closed"] else "no return")
            esc = (f"escaped (min return {rep['min_return_after_transient']:.3g})" if rep["escaped"]
                   else f"stays (min return {rep['min_return_after_transient']:.3g})")
            out.write(f"{rep['regime']:<9}{rep['speed']:>10.4g}{rep['geodesic_curvature']:>8.4g}  "
                      f"{ret:<28}{esc}\n")
    if cfg["out"]:
        def write(fh):
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(MANE_HEADER)
            for rep in reports:
                writer.writerow(["" if rep[c] is None else (fmt(rep[c]) if isinstance(rep[c], float)
                                 else rep[c]) for c in MANE_HEADER])
        _atomic_write(cfg["out"], write)
    return EXIT_OK


COMMANDS = {"capacity": cmd_capacity, "simulate": cmd_simulate, "verify": cmd_verify,
            "sweep": cmd_sweep, "area": cmd_area, "mane": cmd_mane}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = resolve(ns)
        return COMMANDS[cfg["command"]](cfg, out)
    except WeakField as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, NotClosing, DomainError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (IntegrationError, CertificationError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


def run(argv):
    """main() with captured stdout, for tests and scripts."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
