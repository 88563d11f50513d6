"""Execute scenarios and write their outputs.

Products are deterministic: CSV rows are fixed-format scientific
notation, JSON reports are dumped with sorted keys, and nothing
time-of-day dependent is written to disk (wall-clock timings go to the
console only).  Sweeps fan out over a process pool and their summary
is assembled in input order, so worker count cannot reorder results.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from .families import classify, fit_constants
from .oracle import (adiabaticity_report, compare_to_reduced,
                     conservation_check, propagate_full)
from .reduced import (SingularityError, mixed_state_propagate, propagate,
                      solvability_residual)
from .scenario import ScenarioError, build, parse_raw

CSV_COLUMNS = ("zeta", "w", "theta", "phi", "nu", "sin_theta", "sin_phi",
               "sin_nu")
CSV_FMT = "{:.8e}"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SINGULARITY = 3
EXIT_THRESHOLD = 4


@dataclass
class Window:
    """One detected disturbance window on the final slice.

    Spreads are the relative variation of the two family invariants
    across the window; the fit fields are filled only when the label
    names a pure family.
    """

    w_lo: float
    w_hi: float
    label: str
    slow_spread: float
    fast_spread: float
    fit_c_amp: float | None = None
    fit_c_shift: float | None = None
    fit_rel_rms: float | None = None

    def to_dict(self):
        return {k: getattr(self, k) for k in (
            "w_lo", "w_hi", "label", "slow_spread", "fast_spread",
            "fit_c_amp", "fit_c_shift", "fit_rel_rms")}


@dataclass
class RunReport:
    """Everything a finished run produced."""

    scenario: object
    exit_code: int
    report: dict
    reduced: object = None
    full: object = None
    compare: object = None
    windows: list = field(default_factory=list)
    csv_path: Path | None = None
    json_path: Path | None = None


def detect_windows(w, theta, phi, rel_threshold=0.05, merge_gap=None):
    """Find contiguous stretches where the angles leave the background.

    The background is the inflow value at the first node.  Stretches
    where the combined deviation exceeds rel_threshold of its peak are
    kept, and gaps shorter than merge_gap (default 5% of the w span)
    are bridged so one physical pulse is not split by a shallow dip.
    Returns a list of (index_lo, index_hi) inclusive pairs.
    """
    w = np.asarray(w, dtype=float)
    dev = np.abs(theta - theta[0]) + np.abs(phi - phi[0])
    peak = float(np.max(dev))
    if peak <= 0.0:
        return []
    if merge_gap is None:
        merge_gap = 0.05 * float(w[-1] - w[0])
    mask = dev > rel_threshold * peak
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    runs = []
    start = 0
    for brk in breaks:
        runs.append((idx[start], idx[brk]))
        start = brk + 1
    runs.append((idx[start], idx[-1]))
    merged = [runs[0]]
    for lo, hi in runs[1:]:
        if w[lo] - w[merged[-1][1]] < merge_gap:
            merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


def classify_windows(fld, rel_threshold=0.05, merge_gap=None, tol=0.02):
    """Detect and classify disturbance windows on the final slice."""
    theta = fld.theta[-1]
    phi = fld.phi[-1]
    mu = (fld.beta - fld.nu[-1]) if fld.nu is not None \
        else np.full_like(theta, fld.beta)
    spans = detect_windows(fld.w, theta, phi, rel_threshold, merge_gap)
    out = []
    for lo, hi in spans:
        sl = slice(lo, hi + 1)
        cls = classify(theta[sl], phi[sl], mu[sl], tol=tol)
        win = Window(w_lo=float(fld.w[lo]), w_hi=float(fld.w[hi]),
                     label=cls.label, slow_spread=cls.slow_spread,
                     fast_spread=cls.fast_spread)
        if cls.label in ("slow", "fast"):
            fit = fit_constants(theta[sl], phi[sl], mu[sl], cls.label,
                                check=False)
            win.fit_c_amp = fit.c_amp
            win.fit_c_shift = fit.c_shift
            win.fit_rel_rms = fit.rel_rms
        out.append(win)
    return out


def _csv_cell(x):
    return CSV_FMT.format(float(x))


def reduced_csv_rows(fld, which="stored"):
    """Rows (one per stored node) from an angle-variable run."""
    rows = []
    slices = range(fld.zeta.size) if which == "stored" \
        else [fld.zeta.size - 1]
    for i in slices:
        nu_i = fld.nu[i] if fld.nu is not None else None
        for j in range(fld.w.size):
            nu = float(nu_i[j]) if nu_i is not None else float("nan")
            rows.append((float(fld.zeta[i]), float(fld.w[j]),
                         float(fld.theta[i, j]), float(fld.phi[i, j]),
                         nu, float(np.sin(fld.theta[i, j])),
                         float(np.sin(fld.phi[i, j])),
                         float(np.sin(nu))))
    return rows


def oracle_csv_rows(run, which="stored"):
    """Rows from a full-system run, angles reconstructed from fields."""
    theta, phi = run.angles()
    rows = []
    slices = range(run.zeta.size) if which == "stored" \
        else [run.zeta.size - 1]
    nan = float("nan")
    for i in slices:
        for j in range(run.w.size):
            rows.append((float(run.zeta[i]), float(run.w[j]),
                         float(theta[i, j]), float(phi[i, j]), nan,
                         float(np.sin(theta[i, j])),
                         float(np.sin(phi[i, j])), nan))
    return rows


def write_csv(path, rows):
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_csv_cell(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Read a run CSV back into a dict of float arrays."""
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    data = np.array([[float(c) for c in line.split(",")]
                     for line in text[1:]])
    return {name: data[:, k] for k, name in enumerate(header)}


def _grid_dict(grid):
    if grid is None:
        return None
    return {"dw": grid.dw, "dzeta": grid.dzeta, "w_max": grid.w_max,
            "zeta_max": grid.zeta_max, "store_every": grid.store_every}


def _oracle_grid_dict(grid):
    if grid is None:
        return None
    return {"dtau": grid.dtau, "tau_max": grid.tau_max,
            "dzeta": grid.dzeta, "zeta_max": grid.zeta_max,
            "store_every": grid.store_every}


def run_scenario(sc, outdir=None, quiet=True, log=print):
    """Execute one scenario; optionally write CSV + JSON into outdir.

    Returns a RunReport whose exit_code follows the CLI convention:
    0 clean, 4 when compare-mode thresholds are exceeded.  Validation
    and singularity faults propagate as exceptions.
    """
    t0 = time.perf_counter()
    fld = None
    full = None
    comp = None
    cons = None
    adia = None
    windows = []
    exit_code = EXIT_OK

    if sc.mode == "reduced":
        fld = propagate(sc.boundary, sc.grid)
    elif sc.mode == "mixed":
        fld = mixed_state_propagate(sc.boundary, sc.grid)
    elif sc.mode == "oracle":
        full = propagate_full(sc.boundary, sc.oracle_grid, sc.coupling)
    else:
        fld = propagate(sc.boundary, sc.grid)
        full = propagate_full(sc.boundary, sc.oracle_grid, sc.coupling)
        comp = compare_to_reduced(full, fld)
        if comp.max_error > sc.compare_max_angle or \
                full.max_excited > sc.compare_max_excited:
            exit_code = EXIT_THRESHOLD

    if full is not None:
        cons = conservation_check(full)
        adia = adiabaticity_report(sc.boundary, sc.grid.w_axis(),
                                   run=full)
    if sc.windows == "auto" and fld is not None:
        windows = classify_windows(fld, sc.window_threshold,
                                   sc.window_merge)

    # every report carries the characteristic-consistency diagnostic,
    # taken from the angle solution (reduced if present, else the
    # oracle's reconstructed angles)
    if fld is not None:
        consistency = solvability_residual(fld)
    else:
        oth, oph = full.angles()
        consistency = solvability_residual(SimpleNamespace(
            theta=oth, phi=oph, zeta=full.zeta, w=full.w))

    results = {
        "exit_code": exit_code,
        "consistency_residual": float(np.max(np.abs(consistency))),
        "windows": [win.to_dict() for win in windows]
        if sc.windows == "auto" else None,
    }
    if fld is not None:
        results["final_zeta"] = float(fld.zeta[-1])
        results["tracked_nu"] = fld.nu is not None
    if comp is not None:
        results["compare"] = {
            "theta_max": comp.theta_max, "phi_max": comp.phi_max,
            "theta_rms": comp.theta_rms, "phi_rms": comp.phi_rms,
            "max_error": comp.max_error, "n_slices": comp.n_slices,
            "max_angle_threshold": sc.compare_max_angle,
            "max_excited_threshold": sc.compare_max_excited,
        }
    if full is not None:
        results["oracle"] = {
            "max_excited": full.max_excited,
            "norm_drift": full.norm_drift,
            "exchange_residual": cons.exchange_max,
            "max_theta_rate": adia.max_theta_rate,
            "max_phi_rate": adia.max_phi_rate,
            "adiabatic": adia.adiabatic,
        }

    report = {
        "scenario": {"name": sc.name, "title": sc.title, "mode": sc.mode,
                     "beta": sc.beta, "coupling": sc.coupling,
                     "omega0": sc.omega0},
        "grid": _grid_dict(sc.grid),
        "oracle_grid": _oracle_grid_dict(sc.oracle_grid),
        "results": results,
    }

    rep = RunReport(scenario=sc, exit_code=exit_code, report=report,
                    reduced=fld, full=full, compare=comp,
                    windows=windows)
    if outdir is not None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        if sc.csv != "none":
            rows = reduced_csv_rows(fld, sc.csv) if fld is not None \
                else oracle_csv_rows(full, sc.csv)
            rep.csv_path = outdir / f"{sc.name}.csv"
            write_csv(rep.csv_path, rows)
            report["files"] = {"csv": rep.csv_path.name}
        rep.json_path = outdir / f"{sc.name}.json"
        rep.json_path.write_text(
            json.dumps(report, sort_keys=True, indent=2) + "\n")

    if not quiet:
        dt = time.perf_counter() - t0
        log(f"[{sc.name}] mode={sc.mode} finished in {dt:.2f} s")
        log(f"[{sc.name}] consistency residual "
            f"{results['consistency_residual']:.3e}")
        if comp is not None:
            log(f"[{sc.name}] {comp}")
        if full is not None:
            log(f"[{sc.name}] leakage {full.max_excited:.3e}, norm "
                f"drift {full.norm_drift:.3e}")
        for win in windows:
            log(f"[{sc.name}] window [{win.w_lo:.3g}, {win.w_hi:.3g}] "
                f"-> {win.label} (slow spread {win.slow_spread:.2%}, "
                f"fast spread {win.fast_spread:.2%})")
        if rep.csv_path is not None:
            log(f"[{sc.name}] wrote {rep.csv_path}")
        if rep.json_path is not None:
            log(f"[{sc.name}] wrote {rep.json_path}")
    return rep


def split_override(param):
    """Split 'section.key' with sections that may contain a dot."""
    section, _, key = param.rpartition(".")
    return section, key


def apply_override(raw, param, value):
    from .scenario import SECTIONS
    section, key = split_override(param)
    if section not in SECTIONS or key not in SECTIONS[section]:
        raise ScenarioError(
            [f"sweep parameter {param!r} is not a known scenario key"])
    raw.setdefault(section, {})[key] = [(str(value), 0)]
    return raw


def _sweep_worker(args):
    text, name, param, value, outdir = args
    run_name = f"{name}__{split_override(param)[1]}={value}"
    try:
        raw, errors = parse_raw(text)
        if errors:
            raise ScenarioError(errors)
        apply_override(raw, param, value)
        sc = build(raw, name=run_name)
        rep = run_scenario(sc, outdir=outdir, quiet=True)
        return {"value": value, "name": run_name,
                "status": rep.exit_code, "results":
                    rep.report["results"]}
    except ScenarioError as exc:
        return {"value": value, "name": run_name,
                "status": EXIT_VALIDATION, "error": exc.messages}
    except SingularityError as exc:
        return {"value": value, "name": run_name,
                "status": EXIT_SINGULARITY, "error": [str(exc)]}


def sweep(text, name, param, values, outdir, workers=None, quiet=True,
          log=print):
    """Run one scenario repeatedly with a parameter swept over values.

    Each variant writes its own CSV/JSON; a summary lands in
    <name>__sweep.json with rows in the order the values were given.
    Returns (rows, exit_code) with exit_code the worst row status.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = [(text, name, param, v, str(outdir)) for v in values]
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_worker, jobs))
    else:
        rows = [_sweep_worker(job) for job in jobs]
    summary = {"scenario": name, "param": param, "rows": rows}
    path = outdir / f"{name}__sweep.json"
    path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    code = max((r["status"] for r in rows), default=EXIT_OK)
    if not quiet:
        for r in rows:
            log(f"[{r['name']}] status {r['status']}")
        log(f"sweep summary: {path}")
    return rows, code
