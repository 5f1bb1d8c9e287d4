"""Command-line front end; every subcommand writes CSV.

Configuration is TOML with dotted keys, e.g. ``side2.graphene.delta_eV``.
``--config`` takes a file path or the name of a shipped preset
(``fig1``, ``fig2l``, ``fig2l_real``, ``fig2r``, ``fig3``, ``fig5``).

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 input/output error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from casimir_graphene import __version__
from casimir_graphene.core import DomainError, QuadratureError, ev_to_rad_per_s
from casimir_graphene.experiment import (
    NM,
    UN_PER_M,
    CavityTemplate,
    GrapheneSampleSpec,
    MeasurementFormatError,
    MeasurementValidationError,
    SphereProbe,
    compare,
    ingest_measurements,
    theory_band,
)
from casimir_graphene.graphene import GrapheneSheet
from casimir_graphene.lifshitz import (
    CavityConfig,
    entropy,
    normalization_B,
    pressure,
    pressure_implicit_only,
    pressure_T0,
)
from casimir_graphene.materials import (
    Drude,
    Oscillator,
    Plasma,
    TableFormatError,
    TableValidationError,
    default_library,
    load_material_table,
)
from casimir_graphene.reflection import (
    BarePlate,
    FreestandingGraphene,
    GrapheneCoatedFilm,
    GrapheneCoatedPlate,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
PRESETS = ("fig1", "fig2l", "fig2l_real", "fig2r", "fig3", "fig5")


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


# --- configuration -------------------------------------------------------------

def load_config(ref):
    """Parse a TOML file, or a shipped preset by name.  Returns ``(dict, base_dir)``."""
    path = Path(ref)
    if not path.exists() and ref in PRESETS:
        text = resources.files("casimir_graphene.presets").joinpath(f"{ref}.toml").read_text(encoding="utf-8")
        base = None
    else:
        text = path.read_text(encoding="utf-8")
        base = path.parent
    try:
        return tomllib.loads(text), base
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {ref}: {exc}") from None


def config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _get(cfg, dotted, default=..., kind=None):
    node = cfg
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            if default is ...:
                raise ConfigError(f"missing key {dotted!r}")
            return default
        node = node[part]
    if kind is not None and node is not None:
        try:
            node = kind(node)
        except (TypeError, ValueError):
            raise ConfigError(f"key {dotted!r} must be {kind.__name__}, got {node!r}") from None
    return node


def build_library(cfg, base):
    lib = default_library()
    for name, spec in (cfg.get("materials") or {}).items():
        kind = spec.get("type")
        try:
            if kind == "drude":
                model = Drude(ev_to_rad_per_s(spec["omega_p_eV"]), ev_to_rad_per_s(spec["gamma_eV"]))
            elif kind == "plasma":
                model = Plasma(ev_to_rad_per_s(spec["omega_p_eV"]))
            elif kind == "oscillator":
                model = Oscillator(tuple(tuple(t) for t in spec["terms"]))
            elif kind == "table":
                p = Path(spec["path"])
                model = load_material_table(p if p.is_absolute() or base is None else base / p)
            else:
                raise ConfigError(f"material {name!r}: unknown type {kind!r}")
        except KeyError as exc:
            raise ConfigError(f"material {name!r}: missing {exc}") from None
        lib.add(name, model, spec.get("note", kind), replace=True)
    return lib


def _material(lib, name):
    try:
        return lib[name]
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None


def _sheet(side):
    g = side.get("graphene") or {}
    try:
        return GrapheneSheet(float(g.get("delta_eV", 0.0)), float(g.get("mu_eV", 0.0)),
                             float(g.get("v_F", GrapheneSheet.v_F)))
    except DomainError as exc:
        raise ConfigError(f"graphene: {exc}") from None


def build_structure(cfg, key, lib):
    side = _get(cfg, key)
    kind = side.get("type")
    if kind == "plate":
        return BarePlate(_material(lib, side.get("material", "au")))
    if kind == "graphene":
        return FreestandingGraphene(_sheet(side))
    if kind == "coated":
        return GrapheneCoatedPlate(_sheet(side), _material(lib, side.get("material", "sio2")))
    if kind == "film":
        try:
            return GrapheneCoatedFilm(_sheet(side), _material(lib, side.get("film_material", "sio2")),
                                      float(side["film_thickness_nm"]) * NM,
                                      _material(lib, side.get("substrate_material", "si_low")))
        except KeyError as exc:
            raise ConfigError(f"{key}: missing {exc}") from None
        except DomainError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    raise ConfigError(f"{key}.type must be plate, graphene, coated or film; got {kind!r}")


def grid(cfg, key="grid"):
    """Separations (m) from ``values_nm`` or ``start_nm``/``stop_nm``/``count``/``scale``."""
    values = _get(cfg, f"{key}.values_nm", None)
    if values is not None:
        a = np.asarray(values, dtype=float)
    else:
        start = _get(cfg, f"{key}.start_nm", kind=float)
        stop = _get(cfg, f"{key}.stop_nm", start, kind=float)
        count = _get(cfg, f"{key}.count", 1, kind=int)
        scale = _get(cfg, f"{key}.scale", "log")
        if count < 1:
            raise ConfigError("grid count must be >= 1")
        if scale == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError("log grid needs positive bounds")
            a = np.geomspace(start, stop, count)
        elif scale == "linear":
            a = np.linspace(start, stop, count)
        else:
            raise ConfigError(f"grid scale must be log or linear, got {scale!r}")
    if a.size < 1 or np.any(a <= 0):
        raise ConfigError("separations must be positive")
    return a * NM


class Run:
    """Parsed configuration plus command-line overrides."""

    def __init__(self, cfg, base, args):
        self.cfg = cfg
        self.base = base
        self.lib = build_library(cfg, base)
        self.tolerance = args.tolerance if args.tolerance is not None else _get(cfg, "cavity.tolerance", 1e-9, float)
        if not 0 < self.tolerance < 1:
            raise ConfigError("tolerance must lie in (0, 1)")
        self.T = _get(cfg, "cavity.T_K", 300.0, float)
        if self.T < 0:
            raise ConfigError("temperature must be >= 0")
        self.t_zero = bool(args.t_zero)
        self.threads = max(1, int(args.threads or 1))
        self.hash = config_hash({"config": cfg, "tolerance": self.tolerance, "t_zero": self.t_zero})

    def structures(self):
        return build_structure(self.cfg, "side1", self.lib), build_structure(self.cfg, "side2", self.lib)

    def cavity(self, a, T=None):
        s1, s2 = self.structures()
        return CavityConfig(s1, s2, a, self.T if T is None else T, self.tolerance)

    def map(self, fn, items):
        items = list(items)
        if self.threads == 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.threads) as pool:
            return list(pool.map(fn, items))


# --- output --------------------------------------------------------------------

def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    return format(float(v), ".12g")


def write_csv(out, run, command, header, rows, notes=()):
    lines = [
        f"# casimir-graphene {__version__} {command}",
        f"# config_hash = {run.hash}",
        f"# tolerance = {fmt(run.tolerance)}",
        f"# t_zero = {int(run.t_zero)}",
    ]
    lines += [f"# {n}" for n in notes]
    lines.append(",".join(header))
    lines += [",".join(fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# --- commands ------------------------------------------------------------------

def cmd_pressure(run, args):
    a_grid = grid(run.cfg)

    def one(a):
        cfg = run.cavity(a)
        res = pressure_T0(cfg) if run.t_zero or run.T == 0 else pressure(cfg)
        b = normalization_B(a, run.T) if run.T > 0 else float("nan")
        return [a / NM, res.value, res.value / b, res.l_terms_used, res.truncation_error]

    rows = run.map(one, a_grid)
    notes = [f"T_K = {fmt(run.T)}", "l_terms counts frequency panels when t_zero = 1"]
    write_csv(args.out, run, "pressure", ["a_nm", "P_Pa", "P_over_B", "l_terms", "trunc_err"], rows, notes)


def cmd_thermal_correction(run, args):
    if not run.T > 0:
        raise ConfigError("thermal-correction needs cavity.T_K > 0")
    a_grid = grid(run.cfg)

    def one(a):
        cfg = run.cavity(a)
        p0 = pressure_T0(cfg).value
        return [a / NM, pressure(cfg).value / p0 - 1.0, pressure_implicit_only(cfg).value / p0 - 1.0]

    rows = run.map(one, a_grid)
    write_csv(args.out, run, "thermal-correction", ["a_nm", "delta_T_total", "delta_T_implicit"], rows,
              [f"T_K = {fmt(run.T)}"])


def cmd_entropy(run, args):
    a = _get(run.cfg, "entropy.a_nm", kind=float) * NM
    temps = _get(run.cfg, "entropy.T_K", None)
    if temps is None:
        temps = np.geomspace(_get(run.cfg, "entropy.T_start_K", kind=float),
                             _get(run.cfg, "entropy.T_stop_K", kind=float),
                             _get(run.cfg, "entropy.count", 5, kind=int))
    temps = np.atleast_1d(np.asarray(temps, dtype=float))
    if np.any(temps <= 0):
        raise ConfigError("entropy temperatures must be positive")

    def one(T):
        res = entropy(run.cavity(a, T))
        return [T, res.value, res.error]

    rows = run.map(one, temps)
    write_csv(args.out, run, "entropy", ["T_K", "S_J_per_m2K", "err_est"], rows, [f"a_nm = {fmt(a / NM)}"])


def _experiment(run):
    e = _get(run.cfg, "experiment")
    side2 = _get(run.cfg, "side2")
    g = side2.get("graphene") or {}
    try:
        probe = SphereProbe(float(e["radius_um"]) * 1e-6, float(e.get("radius_error_um", 0.0)) * 1e-6,
                            float(e.get("sphere_roughness_nm", 0.0)) * NM)
        n_bar = e.get("n_bar_cm2")
        sample = GrapheneSampleSpec(float(g.get("delta_eV", 0.0)), float(e.get("delta_error_eV", 0.0)),
                                    float(g.get("mu_eV", 0.0)), float(e.get("mu_error_eV", 0.0)),
                                    float(e.get("graphene_roughness_nm", 0.0)) * NM,
                                    None if n_bar is None else float(n_bar) * 1e4,
                                    float(g.get("v_F", GrapheneSheet.v_F)))
    except KeyError as exc:
        raise ConfigError(f"experiment: missing {exc}") from None
    except DomainError as exc:
        raise ConfigError(f"experiment: {exc}") from None
    s1, s2 = run.structures()
    policy = e.get("pfa_policy", "conservative")
    if policy not in ("conservative", "off"):
        raise ConfigError(f"experiment.pfa_policy must be conservative or off, got {policy!r}")
    return probe, sample, CavityTemplate(s1, s2), policy


def _band(run, T):
    probe, sample, template, policy = _experiment(run)
    return theory_band(probe, sample, template, T, grid(run.cfg), policy, run.tolerance, map_fn=run.map)


def _band_rows(band):
    return [[a / NM, lo / UN_PER_M, hi / UN_PER_M] for a, lo, hi in zip(band.separations, band.lower, band.upper)]


def cmd_band(run, args):
    T = 0.0 if run.t_zero else run.T
    band = _band(run, T)
    prov = band.provenance
    notes = [f"T_K = {fmt(T)}",
             f"upper: delta_eV = {fmt(prov['upper']['delta'])}, mu_eV = {fmt(prov['upper']['mu'])}",
             f"lower: delta_eV = {fmt(prov['lower']['delta'])}, mu_eV = {fmt(prov['lower']['mu'])}, "
             f"pfa = {prov['lower']['pfa']}"]
    write_csv(args.out, run, "band", ["a_nm", "lower_uN_per_m", "upper_uN_per_m"], _band_rows(band), notes)


def cmd_compare(run, args):
    meas_path = args.measurements or _get(run.cfg, "experiment.measurements", None)
    if meas_path is None:
        raise ConfigError("compare needs --measurements or experiment.measurements")
    p = Path(meas_path)
    if not p.is_absolute() and args.measurements is None and run.base is not None:
        p = run.base / p
    measurements = ingest_measurements(p)
    if not run.T > 0:
        raise ConfigError("compare needs cavity.T_K > 0")
    band_T = _band(run, run.T)
    band_0 = _band(run, 0.0)
    report = compare(measurements, band_T, band_0)
    rows = [[r.a / NM, r.measured / UN_PER_M, r.error / UN_PER_M, r.inside_T_band, r.inside_T0_band,
             r.thermal_residual / UN_PER_M] for r in report.rows]
    disjoint = report.disjoint_up_to
    notes = [f"T_K = {fmt(run.T)}",
             f"fraction_inside_T_band = {fmt(report.fraction_inside_T)}",
             f"fraction_inside_T0_band = {fmt(report.fraction_inside_T0)}",
             f"bands_disjoint_up_to_nm = {fmt(None if disjoint is None else disjoint / NM)}",
             "thermal_residual = measured - zero-temperature central curve (uN/m)"]
    write_csv(args.out, run, "compare",
              ["a_nm", "measured", "err", "inside_T_band", "inside_T0_band", "thermal_residual"], rows, notes)
    if args.band_out:
        write_csv(args.band_out, run, "band", ["a_nm", "lower_uN_per_m", "upper_uN_per_m"], _band_rows(band_T),
                  [f"T_K = {fmt(run.T)}"])


def cmd_materials(run, args):
    rows = [[name, type(model).__name__, note.replace(",", ";")] for name, model, note in run.lib.items()]
    lines = ["name,model,note"] + [",".join(r) for r in rows]
    text = "\n".join([f"# casimir-graphene {__version__} materials", f"# config_hash = {run.hash}"] + lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")


COMMANDS = {
    "pressure": cmd_pressure,
    "thermal-correction": cmd_thermal_correction,
    "entropy": cmd_entropy,
    "band": cmd_band,
    "compare": cmd_compare,
    "materials": cmd_materials,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="casimir-graphene", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file or preset name")
    common.add_argument("--out", help="output CSV path (default: stdout)")
    common.add_argument("--tolerance", type=float, help="relative tolerance of the Matsubara sum")
    common.add_argument("--threads", type=int, default=1, help="worker threads across grid points")
    common.add_argument("--t-zero", action="store_true", help="zero temperature (pressure, band)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "compare":
            p.add_argument("--measurements", help="measurement CSV (a_nm,grad_uN_per_m,err_uN_per_m)")
            p.add_argument("--band-out", help="also write the finite-temperature band here")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.command != "materials":
                raise ConfigError("--config is required")
            cfg, base = {}, None
        else:
            cfg, base = load_config(args.config)
        run = Run(cfg, base, args)
        COMMANDS[args.command](run, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, DomainError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, MeasurementFormatError, MeasurementValidationError, TableFormatError,
            TableValidationError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
