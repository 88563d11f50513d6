"""Command line interface.

Subcommands:

    run      execute a scenario file or packaged preset
    compare  run a scenario with the full integrator adjudicating the
             angle-variable solver (forces compare mode)
    fit      recover family constants from a run CSV
    units    physical coupling, Rabi frequency, group delay numbers
    sweep    rerun a scenario over a swept parameter, in parallel

Exit codes: 0 success, 2 scenario validation failure, 3 the angle
parameterization hit its singular plane, 4 compare-mode thresholds
exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import (C_LIGHT, MediumParams, coupling_constant, group_delay,
                   group_velocity, rabi_from_intensity)
from .families import FamilyError, classify, fit_constants
from .reduced import SingularityError
from .runner import (EXIT_SINGULARITY, EXIT_VALIDATION, apply_override,
                     read_csv, run_scenario, sweep)
from .scenario import (ScenarioError, build, list_presets, parse_raw,
                       resolve_scenario)


def _scenario_text(arg):
    """Return (text, name) for a scenario path or preset name."""
    p = Path(arg)
    if p.is_file():
        return p.read_text(), p.stem
    if p.suffix == "" and "/" not in str(arg):
        from importlib import resources
        ref = resources.files("tripodsim") / "presets" / f"{arg}.ini"
        if ref.is_file():
            return ref.read_text(), str(arg)
        raise ScenarioError(
            [f"unknown preset {arg!r}; available: "
             f"{', '.join(list_presets())}"])
    raise ScenarioError([f"scenario file not found: {arg}"])


def _add_common(sub):
    sub.add_argument("--out", default="out",
                     help="output directory (default ./out)")
    sub.add_argument("--quiet", action="store_true",
                     help="suppress progress output")
    sub.add_argument("--seed", type=int, default=None,
                     help="reserved for future stochastic features")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tripodsim",
        description="Adiabatic propagation of three-component pulses "
                    "through a tripod atomic medium")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="execute a scenario")
    p_run.add_argument("scenario", nargs="?",
                       help="scenario file path or preset name")
    p_run.add_argument("--list-presets", action="store_true",
                       help="list packaged presets and exit")
    _add_common(p_run)

    p_cmp = subs.add_parser("compare",
                            help="adjudicate the angle solver against "
                                 "the full integrator")
    p_cmp.add_argument("scenario", help="scenario file path or preset")
    _add_common(p_cmp)

    p_fit = subs.add_parser("fit", help="fit family constants to a CSV")
    p_fit.add_argument("csv", help="CSV produced by run")
    p_fit.add_argument("--family", choices=("slow", "fast", "both"),
                       default="both")
    p_fit.add_argument("--beta", type=float, required=True,
                       help="entrance superposition angle of the run")
    p_fit.add_argument("--wmin", type=float, default=None)
    p_fit.add_argument("--wmax", type=float, default=None)
    p_fit.add_argument("--json", action="store_true",
                       help="print the result as JSON")

    p_units = subs.add_parser("units",
                              help="physical numbers for a medium")
    p_units.add_argument("--dipole", type=float, required=True,
                         help="transition dipole moment [CGS]")
    p_units.add_argument("--wavenumber", type=float, required=True,
                         help="resonant wavenumber [1/cm]")
    p_units.add_argument("--density", type=float, required=True,
                         help="atomic number density [1/cm^3]")
    p_units.add_argument("--intensity", type=float, default=None,
                         help="beam intensity [erg/s/cm^2]")
    p_units.add_argument("--length", type=float, default=None,
                         help="medium length [cm]")
    p_units.add_argument("--json", action="store_true")

    p_sweep = subs.add_parser("sweep",
                              help="rerun a scenario over a parameter")
    p_sweep.add_argument("scenario", help="scenario file path or preset")
    p_sweep.add_argument("--param", required=True,
                         help="scenario key, e.g. grid.dw")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")
    p_sweep.add_argument("--workers", type=int, default=None)
    _add_common(p_sweep)
    return parser


def _cmd_run(args, force_compare=False):
    if getattr(args, "list_presets", False):
        for name in list_presets():
            print(name)
        return 0
    if args.scenario is None:
        print("error: a scenario path or preset name is required",
              file=sys.stderr)
        return EXIT_VALIDATION
    text, name = _scenario_text(args.scenario)
    raw, errors = parse_raw(text)
    if errors:
        raise ScenarioError(errors)
    if force_compare:
        raw.setdefault("scenario", {})["mode"] = [("compare", 0)]
    sc = build(raw, name=name)
    rep = run_scenario(sc, outdir=args.out, quiet=args.quiet)
    return rep.exit_code


def _window_mask(data, wmin, wmax):
    zeta = data["zeta"]
    final = np.abs(zeta - zeta.max()) < 1e-12 * max(1.0, zeta.max())
    mask = final.copy()
    if wmin is not None:
        mask &= data["w"] >= wmin
    if wmax is not None:
        mask &= data["w"] <= wmax
    return mask


def _cmd_fit(args):
    data = read_csv(args.csv)
    mask = _window_mask(data, args.wmin, args.wmax)
    if not np.any(mask):
        print("error: no rows in the requested window", file=sys.stderr)
        return EXIT_VALIDATION
    theta = data["theta"][mask]
    phi = data["phi"][mask]
    nu = data["nu"][mask]
    mu = args.beta - np.where(np.isnan(nu), 0.0, nu)
    out = {}
    families = ("slow", "fast") if args.family == "both" \
        else (args.family,)
    for fam in families:
        fit = fit_constants(theta, phi, mu, fam)
        out[fam] = {"c_amp": fit.c_amp, "c_shift": fit.c_shift,
                    "rel_rms": fit.rel_rms}
    if args.family == "both":
        out["label"] = classify(theta, phi, mu).label
    if args.json:
        print(json.dumps(out, sort_keys=True, indent=2))
    else:
        for fam in families:
            f = out[fam]
            print(f"{fam:5s} c_amp={f['c_amp']:.6f} "
                  f"c_shift={f['c_shift']:+.6f} "
                  f"misfit={f['rel_rms']:.2%}")
        if "label" in out:
            print(f"label {out['label']}")
    return 0


def _cmd_units(args):
    medium = MediumParams(dipole=args.dipole,
                          wavenumber=args.wavenumber,
                          density=args.density)
    coupling = coupling_constant(medium)
    out = {"coupling": coupling}
    if args.intensity is not None:
        omega = rabi_from_intensity(args.intensity, args.dipole)
        out["rabi"] = omega
        out["drag"] = omega * omega / coupling
        for fam in ("slow", "fast", "mixed"):
            out[f"v_{fam}"] = group_velocity(omega, coupling, fam)
        if args.length is not None:
            for fam in ("slow", "fast", "mixed"):
                out[f"delay_{fam}"] = group_delay(
                    args.length, omega, coupling, fam)
    if args.json:
        print(json.dumps(out, sort_keys=True, indent=2))
        return 0
    print(f"coupling constant G = {out['coupling']:.4e} 1/(cm s)")
    if "rabi" in out:
        print(f"Rabi frequency     = {out['rabi']:.4e} 1/s")
        print(f"Omega^2/G          = {out['drag']:.4e} cm/s")
        for fam in ("slow", "fast", "mixed"):
            v = out[f"v_{fam}"]
            print(f"v_group ({fam:5s})   = {v:.4e} cm/s"
                  f"  ({v / C_LIGHT:.3e} c)")
    if "delay_slow" in out:
        for fam in ("slow", "fast", "mixed"):
            print(f"delay   ({fam:5s})   = {out[f'delay_{fam}']:.4e} s")
    return 0


def _cmd_sweep(args):
    text, name = _scenario_text(args.scenario)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ScenarioError(["sweep needs at least one value"])
    # fail early on an unknown parameter before spawning workers
    raw, errors = parse_raw(text)
    if errors:
        raise ScenarioError(errors)
    apply_override(raw, args.param, values[0])
    _, code = sweep(text, name, args.param, values, outdir=args.out,
                    workers=args.workers, quiet=args.quiet)
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "compare":
            return _cmd_run(args, force_compare=True)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "units":
            return _cmd_units(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
    except ScenarioError as exc:
        for msg in exc.messages:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except FamilyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SingularityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULARITY
    parser.error(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
