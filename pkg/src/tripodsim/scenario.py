"""Scenario files: parsing, validation, presets.

A scenario is an INI-style text file describing one propagation run.
Sections:

    [scenario]        mode = reduced | mixed | oracle | compare,
                      optional title and entrance angle beta
    [grid]            dw, dzeta, w_max, zeta_max, store_every
    [oracle]          dtau, dzeta, store_every, coupling, omega0
                      (required for oracle and compare modes)
    [boundary.theta]  base plus repeatable ramp/bump segments,
    [boundary.phi]    each "center width amplitude"
    [family.slow]     alternative to the boundary pair: c_amp, c_shift
    [family.fast]     and a mu profile (mu_base, mu_ramp/mu_bump)
    [compare]         max_angle_error, max_excited thresholds
    [outputs]         csv = stored | final | none, windows = auto | none,
                      window_threshold, window_merge

The parser is deliberately small and line-numbered: every violation in
the file is collected and reported at once inside a ScenarioError
instead of stopping at the first one.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .families import (FamilyAngleProfile, FamilyError, FamilyParams,
                       SuperposedProfile, generate_family)
from .oracle import DEPTH_STEP_PRODUCT, RATE_LIMIT, TAU_STEP_LIMIT, \
    OracleGrid
from .profiles import BoundaryProfile, ConstantProfile, Grid, Profile, \
    Segment
from .reduced import COS_PHI_FLOOR

MODES = ("reduced", "mixed", "oracle", "compare")
CSV_CHOICES = ("stored", "final", "none")
WINDOW_CHOICES = ("auto", "none")

SECTIONS = {
    "scenario": {"mode", "title", "beta"},
    "grid": {"dw", "dzeta", "w_max", "zeta_max", "store_every"},
    "oracle": {"dtau", "dzeta", "store_every", "coupling", "omega0"},
    "boundary.theta": {"base", "ramp", "bump"},
    "boundary.phi": {"base", "ramp", "bump"},
    "family.slow": {"c_amp", "c_shift", "mu_base", "mu_ramp", "mu_bump"},
    "family.fast": {"c_amp", "c_shift", "mu_base", "mu_ramp", "mu_bump"},
    "compare": {"max_angle_error", "max_excited"},
    "outputs": {"csv", "windows", "window_threshold", "window_merge"},
}
REPEATABLE = {"ramp", "bump", "mu_ramp", "mu_bump"}


class ScenarioError(ValueError):
    """All scenario violations, collected."""

    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("\n".join(self.messages))


@dataclass
class Scenario:
    """A validated, runnable scenario."""

    name: str
    title: str
    mode: str
    beta: float
    grid: Grid
    boundary: BoundaryProfile
    oracle_grid: OracleGrid | None
    coupling: float
    omega0: float
    families: tuple
    compare_max_angle: float
    compare_max_excited: float
    csv: str
    windows: str
    window_threshold: float
    window_merge: float | None


def _strip_inline(value):
    for mark in (" #", " ;", "\t#", "\t;"):
        pos = value.find(mark)
        if pos >= 0:
            value = value[:pos]
    return value.strip()


def parse_raw(text):
    """Parse scenario text into {section: {key: [(value, line)]}}.

    Returns (raw, errors); structural problems (bad headers, keys
    outside sections, duplicates) land in errors with line numbers.
    """
    raw = {}
    errors = []
    current = None
    current_name = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                errors.append(f"line {lineno}: unterminated section header")
                current = None
                continue
            name = stripped[1:-1].strip().lower()
            if not name:
                errors.append(f"line {lineno}: empty section name")
                current = None
                continue
            if name in raw:
                errors.append(f"line {lineno}: duplicate section [{name}]")
            if name not in SECTIONS:
                errors.append(f"line {lineno}: unknown section [{name}]")
                current = None
                continue
            current = raw.setdefault(name, {})
            current_name = name
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value', got "
                          f"{stripped!r}")
            continue
        if current is None:
            errors.append(f"line {lineno}: key outside any section")
            continue
        key, _, value = stripped.partition("=")
        key = key.strip().lower()
        value = _strip_inline(value)
        if key not in SECTIONS[current_name]:
            errors.append(f"line {lineno}: unknown key {key!r} in "
                          f"[{current_name}]")
            continue
        if key in current and key not in REPEATABLE:
            errors.append(f"line {lineno}: duplicate key {key!r} in "
                          f"[{current_name}]")
            continue
        current.setdefault(key, []).append((value, lineno))
    return raw, errors


class _Builder:
    """Typed access into the raw mapping, accumulating violations."""

    def __init__(self, raw):
        self.raw = raw
        self.errors = []

    def fail(self, lineno, msg):
        where = f"line {lineno}: " if lineno else ""
        self.errors.append(where + msg)

    def has(self, section):
        return section in self.raw

    def get(self, section, key, conv, default=None, required=False):
        entries = self.raw.get(section, {}).get(key)
        if not entries:
            if required:
                self.fail(0, f"[{section}] is missing required key {key!r}")
            return default
        value, lineno = entries[0]
        try:
            return conv(value)
        except ValueError as exc:
            self.fail(lineno, f"[{section}] {key}: {exc}")
            return default

    def get_all(self, section, key, conv):
        out = []
        for value, lineno in self.raw.get(section, {}).get(key, []):
            try:
                out.append(conv(value))
            except ValueError as exc:
                self.fail(lineno, f"[{section}] {key}: {exc}")
        return out


def _float(value):
    return float(value)


def _int(value):
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"expected an integer, got {value!r}")


def _enum(options):
    def conv(value):
        v = value.strip().lower()
        if v not in options:
            raise ValueError(
                f"expected one of {', '.join(options)}, got {value!r}")
        return v
    return conv


def _triple(value):
    parts = value.split()
    if len(parts) != 3:
        raise ValueError(
            f"expected 'center width amplitude', got {value!r}")
    return tuple(float(p) for p in parts)


def _segments(builder, section, prefix=""):
    segs = []
    for shape in ("ramp", "bump"):
        for center, width, amplitude in builder.get_all(
                section, prefix + shape, _triple):
            try:
                segs.append(Segment(shape=shape, center=center,
                                    width=width, amplitude=amplitude))
            except ValueError as exc:
                builder.fail(0, f"[{section}] {prefix}{shape}: {exc}")
    return tuple(segs)


def _family_boundary(specs, omega0):
    """Assemble a BoundaryProfile from one or two family specs.

    With two specs (one slow, one fast) the members must rest on the
    same background angles and their mu disturbances must occupy
    disjoint windows; the profiles then superpose exactly.
    """
    if len(specs) == 1:
        params, mu_profile = specs[0]
        beta = float(mu_profile(0.0))
        boundary = BoundaryProfile(
            theta0=FamilyAngleProfile(params, mu_profile, "theta"),
            phi0=FamilyAngleProfile(params, mu_profile, "phi"),
            beta=beta, omega0=ConstantProfile(omega0))
        return boundary, beta

    (ps, mps), (pf, mpf) = specs
    base_s = float(mps(0.0))
    base_f = float(mpf(0.0))
    if abs(base_s - base_f) > 1e-9:
        raise FamilyError(
            f"the two family mu profiles disagree at w = 0 "
            f"({base_s:.9g} vs {base_f:.9g}); both pulses must share "
            "one entrance superposition angle")
    th_s, ph_s = generate_family(ps, base_s)
    th_f, ph_f = generate_family(pf, base_f)
    mismatch = max(abs(float(th_s) - float(th_f)),
                   abs(float(ph_s) - float(ph_f)))
    if mismatch > 1e-6:
        raise FamilyError(
            f"family backgrounds disagree at mu = {base_s:.6g}: the "
            f"slow member rests at (theta, phi) = ({float(th_s):.9g}, "
            f"{float(ph_s):.9g}) but the fast member at "
            f"({float(th_f):.9g}, {float(ph_f):.9g}); adjust c_amp and "
            "c_shift so both share one background")
    for lo_s, hi_s in (seg.support() for seg in mps.segments):
        for lo_f, hi_f in (seg.support() for seg in mpf.segments):
            if lo_s < hi_f and lo_f < hi_s:
                raise FamilyError(
                    f"family disturbances overlap in w: "
                    f"[{lo_s:g}, {hi_s:g}] vs [{lo_f:g}, {hi_f:g}]; "
                    "launch them from disjoint windows")
    theta0 = SuperposedProfile(
        (FamilyAngleProfile(ps, mps, "theta"),
         FamilyAngleProfile(pf, mpf, "theta")), float(th_s))
    phi0 = SuperposedProfile(
        (FamilyAngleProfile(ps, mps, "phi"),
         FamilyAngleProfile(pf, mpf, "phi")), float(ph_s))
    boundary = BoundaryProfile(theta0=theta0, phi0=phi0, beta=base_s,
                               omega0=ConstantProfile(omega0))
    return boundary, base_s


def build(raw, name="scenario"):
    """Validate a raw mapping and assemble a Scenario.

    Raises ScenarioError carrying every violation found.
    """
    b = _Builder(raw)

    mode = b.get("scenario", "mode", _enum(MODES), required=True)
    title = b.get("scenario", "title", str, default=name)
    beta_given = b.get("scenario", "beta", _float)

    grid = None
    if b.has("grid"):
        kwargs = dict(
            dw=b.get("grid", "dw", _float, required=True),
            dzeta=b.get("grid", "dzeta", _float, required=True),
            w_max=b.get("grid", "w_max", _float, required=True),
            zeta_max=b.get("grid", "zeta_max", _float, required=True),
            store_every=b.get("grid", "store_every", _int, default=1),
        )
        if all(v is not None for v in kwargs.values()):
            try:
                grid = Grid(**kwargs)
            except ValueError as exc:
                b.fail(0, f"[grid] {exc}")
    else:
        b.fail(0, "missing required section [grid]")

    coupling = b.get("oracle", "coupling", _float, default=1.0)
    omega0 = b.get("oracle", "omega0", _float, default=1.0)

    # boundary: either the explicit angle sections or family sections
    has_bnd = b.has("boundary.theta") or b.has("boundary.phi")
    fam_sections = [s for s in ("family.slow", "family.fast") if b.has(s)]
    families = ()
    boundary = None
    implied_beta = None
    if has_bnd and fam_sections:
        b.fail(0, "give either [boundary.*] sections or [family.*] "
                  "sections, not both")
    elif fam_sections:
        specs = []
        for section in fam_sections:
            fam_name = section.split(".")[1]
            c_amp = b.get(section, "c_amp", _float, required=True)
            c_shift = b.get(section, "c_shift", _float, default=0.0)
            mu_base = b.get(section, "mu_base", _float, required=True)
            mu_segs = _segments(b, section, prefix="mu_")
            if c_amp is None or mu_base is None:
                continue
            try:
                params = FamilyParams(fam_name, c_amp, c_shift)
            except FamilyError as exc:
                b.fail(0, f"[{section}] {exc}")
                continue
            specs.append((params, Profile(base=mu_base,
                                          segments=mu_segs)))
        if len(specs) == len(fam_sections):
            try:
                boundary, implied_beta = _family_boundary(specs, omega0)
            except FamilyError as exc:
                b.fail(0, str(exc))
            families = tuple(s[0] for s in specs)
    elif b.has("boundary.theta") and b.has("boundary.phi"):
        theta0 = Profile(
            base=b.get("boundary.theta", "base", _float, default=0.0),
            segments=_segments(b, "boundary.theta"))
        phi0 = Profile(
            base=b.get("boundary.phi", "base", _float, default=0.0),
            segments=_segments(b, "boundary.phi"))
        boundary = BoundaryProfile(
            theta0=theta0, phi0=phi0,
            beta=0.0 if beta_given is None else beta_given,
            omega0=ConstantProfile(omega0))
    else:
        b.fail(0, "boundary is underspecified: need both "
                  "[boundary.theta] and [boundary.phi], or [family.*] "
                  "sections")

    # entrance superposition angle
    beta = 0.0 if beta_given is None else float(beta_given)
    if boundary is not None and implied_beta is not None:
        if beta_given is not None and \
                abs(beta_given - implied_beta) > 1e-9:
            b.fail(0, f"[scenario] beta = {beta_given:g} contradicts the "
                      f"family mu profile at w = 0 "
                      f"({implied_beta:.9g}); the entrance superposition "
                      "angle equals that value")
        beta = implied_beta

    oracle_grid = None
    needs_oracle = mode in ("oracle", "compare")
    if needs_oracle and not b.has("oracle"):
        b.fail(0, f"mode = {mode} requires an [oracle] section")
    if b.has("oracle") and grid is not None:
        dtau = b.get("oracle", "dtau", _float, required=True)
        odzeta = b.get("oracle", "dzeta", _float, default=grid.dzeta)
        ostore = b.get("oracle", "store_every", _int, default=1)
        if dtau is not None and coupling is not None and omega0:
            # tau axis sized so the stretched time covers the w grid
            tau_max = grid.w_max * coupling / (omega0 * omega0)
            try:
                oracle_grid = OracleGrid(
                    dtau=dtau, tau_max=tau_max, dzeta=odzeta,
                    zeta_max=grid.zeta_max, store_every=ostore)
            except ValueError as exc:
                b.fail(0, f"[oracle] {exc}")
            if dtau * omega0 > TAU_STEP_LIMIT * (1.0 + 1e-9):
                b.fail(0, f"[oracle] dtau = {dtau:g} does not resolve "
                          f"the Rabi oscillation at omega0 = {omega0:g}; "
                          f"need dtau * omega0 <= {TAU_STEP_LIMIT:g}")
            product = odzeta * coupling * tau_max
            if product > DEPTH_STEP_PRODUCT:
                b.fail(0, f"[oracle] dzeta = {odzeta:g} is unstable for "
                          f"this window: dzeta * coupling * tau_max = "
                          f"{product:g} exceeds {DEPTH_STEP_PRODUCT:g} "
                          "(the secular resonant response amplifies the "
                          "depth stepper; aim for 40 or less)")

    if b.has("compare") and mode != "compare":
        b.fail(0, "[compare] section is only valid in compare mode")
    compare_max_angle = b.get("compare", "max_angle_error", _float,
                              default=0.05)
    compare_max_excited = b.get("compare", "max_excited", _float,
                                default=1e-3)

    csv = b.get("outputs", "csv", _enum(CSV_CHOICES), default="stored")
    windows = b.get("outputs", "windows", _enum(WINDOW_CHOICES),
                    default="none")
    window_threshold = b.get("outputs", "window_threshold", _float,
                             default=0.05)
    window_merge = b.get("outputs", "window_merge", _float)

    # physics-level validation on the assembled pieces
    if grid is not None and mode in ("reduced", "mixed", "compare"):
        try:
            grid.check_cfl()
        except ValueError as exc:
            b.fail(0, f"[grid] {exc}")
    if mode == "mixed" and abs(np.sin(beta) ** 2 - 0.5) > 1e-9:
        b.fail(0, f"mixed mode needs an equal-weight entrance "
                  f"superposition (sin^2 beta = 1/2); beta = "
                  f"{beta:g} is not")
    if windows == "auto" and mode == "oracle":
        b.fail(0, "[outputs] windows = auto needs an angle-variable run "
                  "(reduced, mixed or compare mode)")
    if boundary is not None and grid is not None:
        w = grid.w_axis()
        try:
            _, ph = boundary.sample(w)
        except FamilyError as exc:
            b.fail(0, f"boundary evaluation failed: {exc}")
        else:
            worst = float(np.min(np.abs(np.cos(ph))))
            if worst < COS_PHI_FLOOR:
                b.fail(0, f"entrance profile touches the degenerate "
                          f"plane: min |cos phi| = {worst:.3g} is below "
                          f"{COS_PHI_FLOOR:g}")
            if needs_oracle:
                th_rate, ph_rate = boundary.max_rates(w)
                rate = max(th_rate, ph_rate)
                if rate > RATE_LIMIT:
                    b.fail(0, f"entrance angles change too fast for an "
                              f"adiabatic comparison: max rate "
                              f"{rate:.3g} exceeds {RATE_LIMIT:g} per "
                              "unit stretched time")

    if mode == "compare" and oracle_grid is not None and grid is not None:
        rz = grid.zeta_stored()
        oz = oracle_grid.stored_steps() * oracle_grid.dzeta
        common = sum(1 for z in oz if np.min(np.abs(rz - z)) < 1e-9)
        if common == 0:
            b.fail(0, "compare mode: the reduced and oracle runs store "
                      "no common depths; align dzeta * store_every")

    # every report carries the characteristic-consistency diagnostic,
    # which needs at least 3 stored depth slices to difference
    if grid is not None and mode in ("reduced", "mixed", "compare") \
            and len(grid.stored_steps()) < 3:
        b.fail(0, "[grid] fewer than 3 stored depth slices; lower "
                  "store_every or raise zeta_max")
    if oracle_grid is not None and needs_oracle \
            and len(oracle_grid.stored_steps()) < 3:
        b.fail(0, "[oracle] fewer than 3 stored depth slices; lower "
                  "store_every or raise zeta_max")

    if b.errors:
        raise ScenarioError(b.errors)
    return Scenario(
        name=name, title=title, mode=mode, beta=beta, grid=grid,
        boundary=boundary, oracle_grid=oracle_grid, coupling=coupling,
        omega0=omega0, families=families,
        compare_max_angle=compare_max_angle,
        compare_max_excited=compare_max_excited, csv=csv,
        windows=windows, window_threshold=window_threshold,
        window_merge=window_merge)


def parse_scenario(text, name="scenario"):
    """Parse and validate scenario text; raise ScenarioError on faults."""
    raw, errors = parse_raw(text)
    if errors:
        # structural faults often cascade; report them alone first
        raise ScenarioError(errors)
    return build(raw, name=name)


def load_scenario(path):
    """Load a scenario from a file path."""
    from pathlib import Path
    p = Path(path)
    return parse_scenario(p.read_text(), name=p.stem)


def list_presets():
    root = resources.files("tripodsim") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir()
                  if p.name.endswith(".ini"))


def load_preset(name):
    """Load a packaged preset scenario by name (e.g. 'splitting')."""
    root = resources.files("tripodsim") / "presets"
    ref = root / f"{name}.ini"
    if not ref.is_file():
        raise ScenarioError(
            [f"unknown preset {name!r}; available: "
             f"{', '.join(list_presets())}"])
    return parse_scenario(ref.read_text(), name=name)


def resolve_scenario(arg):
    """Interpret a CLI argument as a scenario path or a preset name."""
    from pathlib import Path
    p = Path(arg)
    if p.is_file():
        return load_scenario(p)
    if p.suffix == "" and "/" not in str(arg):
        return load_preset(str(arg))
    raise ScenarioError([f"scenario file not found: {arg}"])
