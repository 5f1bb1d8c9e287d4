"""Sphere-plate force gradients and comparison with measurements.

The proximity force approximation turns the plate-plate pressure into the
gradient of the sphere-plate force, ``F'(a) = -2 pi R P(a)``, positive for
attraction.  Small surface roughness multiplies it by
``1 + 10 (delta_s^2 + delta_g^2) / a^2``.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from casimir_graphene.core import EV, HBAR, DomainError
from casimir_graphene.graphene import GrapheneSheet
from casimir_graphene.lifshitz import CavityConfig, pressure
from casimir_graphene.materials import (
    SI_OMEGA_P_RANGE,
    DopedSemiconductor,
    au_drude,
    sio2,
)
from casimir_graphene.reflection import BarePlate, GrapheneCoatedFilm, GrapheneCoatedPlate

NM = 1e-9
UN_PER_M = 1e-6
PFA_WARN_RATIO = 0.02
#: relative error of optical data and sphere radius, applied to both band edges
OPTICAL_ERROR = 0.005

MEASUREMENT_HEADER = ["a_nm", "grad_uN_per_m", "err_uN_per_m"]


class MeasurementFormatError(ValueError):
    """Measurement file row that cannot be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MeasurementValidationError(ValueError):
    """Measurement row that parses but is physically invalid."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def chemical_potential_from_density(n_bar, v_F=GrapheneSheet.v_F):
    """Chemical potential in eV, ``hbar v_F sqrt(pi n_bar)``, from ``n_bar`` in 1/m^2."""
    n_bar = np.asarray(n_bar, dtype=float)
    if np.any(n_bar <= 0):
        raise DomainError("impurity density must be positive")
    mu = HBAR * v_F * np.sqrt(math.pi * n_bar) / EV
    return float(mu) if mu.ndim == 0 else mu


@dataclass(frozen=True)
class SphereProbe:
    radius: float
    radius_error: float = 0.0
    roughness: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("sphere radius must be positive")
        if self.roughness < 0 or self.radius_error < 0:
            raise DomainError("roughness and radius error must be >= 0")


@dataclass(frozen=True)
class GrapheneSampleSpec:
    """Measured graphene parameters with their half-widths (eV) and roughness (m)."""

    delta: float
    delta_error: float
    mu: float
    mu_error: float
    roughness: float = 0.0
    n_bar: Optional[float] = None
    v_F: float = GrapheneSheet.v_F

    def __post_init__(self):
        if self.delta_error < 0 or self.mu_error < 0:
            raise DomainError("parameter uncertainties must be >= 0")
        if self.delta - self.delta_error < 0 or self.mu - self.mu_error < 0:
            raise DomainError("uncertainty interval reaches negative gap or chemical potential")
        if self.roughness < 0:
            raise DomainError("roughness must be >= 0")
        if self.n_bar is not None:
            mu_n = chemical_potential_from_density(self.n_bar, self.v_F)
            if abs(mu_n - self.mu) > self.mu_error + 1e-12:
                raise DomainError(f"mu = {self.mu} eV inconsistent with density (gives {mu_n:.4f} eV)")

    def sheet(self, delta=None, mu=None):
        return GrapheneSheet(self.delta if delta is None else delta, self.mu if mu is None else mu, self.v_F)

    @property
    def corners(self):
        """``{"upper": (delta, mu), "lower": ..., "central": ...}``.

        The gradient grows with mu and falls with delta, so the upper edge
        pairs the smallest gap with the largest chemical potential.
        """
        return {
            "upper": (self.delta - self.delta_error, self.mu + self.mu_error),
            "lower": (self.delta + self.delta_error, self.mu - self.mu_error),
            "central": (self.delta, self.mu),
        }


@dataclass(frozen=True)
class MeasurementRecord:
    a: float
    force_gradient: float
    total_error: float

    def __post_init__(self):
        if not self.a > 0:
            raise MeasurementValidationError(f"separation must be positive, got {self.a}")
        if not self.total_error > 0:
            raise MeasurementValidationError(f"total error must be positive, got {self.total_error}")


@dataclass(frozen=True)
class TheoryBand:
    """Force-gradient band on a separation grid (m, N/m).

    ``central`` is the curve at the central parameters without the band
    margins; ``provenance`` records which parameters built each edge.
    """

    separations: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    provenance: dict = field(default_factory=dict)
    central: Optional[np.ndarray] = None

    def __post_init__(self):
        if np.any(np.asarray(self.lower) > np.asarray(self.upper)):
            raise ValueError("band lower edge exceeds upper edge")

    def _interp(self, values, a):
        x = np.asarray(self.separations, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.size == 1:
            return np.full_like(np.asarray(a, dtype=float), values[0])
        # monotone cubic in log-log; gradients are near power laws in a
        la = np.log(a)
        if np.all(values > 0):
            return np.exp(PchipInterpolator(np.log(x), np.log(values))(la))
        return PchipInterpolator(np.log(x), values)(la)

    def at(self, a):
        """``(lower, upper)`` interpolated at separations ``a`` inside the grid."""
        a = np.asarray(a, dtype=float)
        x = np.asarray(self.separations)
        if np.any(a < x.min() * (1 - 1e-12)) or np.any(a > x.max() * (1 + 1e-12)):
            raise DomainError("separation outside the band grid")
        return self._interp(self.lower, a), self._interp(self.upper, a)

    def midline(self, a):
        """Central-parameter curve, or the band midpoint when absent."""
        a = np.asarray(a, dtype=float)
        if self.central is not None:
            return self._interp(self.central, a)
        lo, hi = self.at(a)
        return 0.5 * (lo + hi)


def roughness_factor(a, delta_s, delta_g):
    """Multiplicative roughness correction to the force gradient."""
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise DomainError("separation must be positive")
    out = 1.0 + 10.0 * (delta_s**2 + delta_g**2) / a**2
    return float(out) if out.ndim == 0 else out


def pfa_force_gradient(probe: SphereProbe, config: CavityConfig, mode="full"):
    """``-2 pi R P(a, T)`` in N/m; positive for an attractive pressure."""
    if config.a / probe.radius > PFA_WARN_RATIO:
        warnings.warn(f"a/R = {config.a / probe.radius:.3g} exceeds {PFA_WARN_RATIO}; PFA is unreliable",
                      stacklevel=2)
    return -2.0 * math.pi * probe.radius * pressure(config, mode).value


def _with_sheet(structure, sheet):
    if hasattr(structure, "sheet"):
        return dataclasses.replace(structure, sheet=sheet)
    return structure


def _substrate_variants(structure):
    """Doped-Si substrates are swept over the two ends of the plasma-frequency range."""
    for name in ("material", "substrate_material"):
        mat = getattr(structure, name, None)
        if isinstance(mat, DopedSemiconductor):
            return [dataclasses.replace(structure, **{name: dataclasses.replace(mat, omega_p=wp)})
                    for wp in SI_OMEGA_P_RANGE]
    return [structure]


@dataclass(frozen=True)
class CavityTemplate:
    """Sphere-side structure and graphene-side structure; the sheet is swapped per corner."""

    sphere_side: object
    plate_side: object

    def configs(self, sheet, a, T, tolerance=1e-9):
        plate = _with_sheet(self.plate_side, sheet)
        return [CavityConfig(self.sphere_side, p, a, T, tolerance) for p in _substrate_variants(plate)]


def _corner_gradients(probe, template, sheet, T, separations, tolerance, pick, map_fn):
    jobs = [(a, cfg) for a in separations for cfg in template.configs(sheet, a, T, tolerance)]
    values = list(map_fn(lambda job: pfa_force_gradient(probe, job[1]), jobs))
    out = []
    for a in separations:
        vals = [v for (aa, _), v in zip(jobs, values) if aa == a]
        out.append(pick(vals))
    return np.array(out)


def theory_band(probe: SphereProbe, sample: GrapheneSampleSpec, template: CavityTemplate, T,
                separations: Sequence[float], pfa_policy="conservative", tolerance=1e-9,
                optical_error=OPTICAL_ERROR, map_fn: Callable = map) -> TheoryBand:
    """Conservative force-gradient band over the parameter uncertainties.

    The upper edge uses (delta_min, mu_max), the lower edge
    (delta_max, mu_min); both carry the roughness factor and are widened by
    ``optical_error``.  With ``pfa_policy="conservative"`` the lower edge
    is further multiplied by ``1 - a/R`` since PFA overestimates the
    gradient; ``"off"`` skips that.  ``map_fn`` may be a parallel map; the
    result does not depend on evaluation order.
    """
    if pfa_policy not in ("conservative", "off"):
        raise ValueError(f"unknown pfa_policy {pfa_policy!r}")
    a = np.sort(np.asarray(separations, dtype=float))
    rough = roughness_factor(a, probe.roughness, sample.roughness)
    corners = sample.corners
    edges = {}
    for name, pick in (("upper", max), ("lower", min), ("central", lambda v: float(np.mean(v)))):
        d, m = corners[name]
        edges[name] = rough * _corner_gradients(probe, template, sample.sheet(d, m), T, a, tolerance,
                                                pick, map_fn)
    upper = edges["upper"] * (1.0 + optical_error)
    lower = edges["lower"] * (1.0 - optical_error)
    if pfa_policy == "conservative":
        lower = lower * (1.0 - a / probe.radius)
    provenance = {
        "T": T,
        "upper": {"delta": corners["upper"][0], "mu": corners["upper"][1], "factor": 1.0 + optical_error},
        "lower": {"delta": corners["lower"][0], "mu": corners["lower"][1], "factor": 1.0 - optical_error,
                  "pfa": pfa_policy},
        "central": {"delta": corners["central"][0], "mu": corners["central"][1]},
    }
    # corner extremality is physical, not guaranteed for arbitrary templates
    lo, hi = np.minimum(lower, upper), np.maximum(lower, upper)
    return TheoryBand(a, lo, hi, provenance, edges["central"])


@dataclass(frozen=True)
class ComparisonRow:
    a: float
    measured: float
    error: float
    inside_T_band: bool
    inside_T0_band: bool
    thermal_residual: float


@dataclass(frozen=True)
class ComparisonReport:
    rows: list
    disjoint_up_to: Optional[float]

    @property
    def fraction_inside_T(self):
        return float(np.mean([r.inside_T_band for r in self.rows]))

    @property
    def fraction_inside_T0(self):
        return float(np.mean([r.inside_T0_band for r in self.rows]))

    def thermal_fractions(self):
        """Observed thermal correction relative to the measured gradient."""
        return np.array([r.thermal_residual / r.measured for r in self.rows])


def disjoint_up_to(band_T: TheoryBand, band_T0: TheoryBand, n_dense=400):
    """Largest separation below which the two bands do not intersect, or None."""
    x = np.asarray(band_T.separations)
    y = np.asarray(band_T0.separations)
    lo_a, hi_a = max(x.min(), y.min()), min(x.max(), y.max())
    if not lo_a <= hi_a:
        return None
    a = np.geomspace(lo_a, hi_a, n_dense) if hi_a > lo_a else np.array([lo_a])
    t_lo, t_hi = band_T.at(a)
    z_lo, z_hi = band_T0.at(a)
    apart = (t_lo > z_hi) | (z_lo > t_hi)
    if not apart[0]:
        return None
    overlap = np.flatnonzero(~apart)
    return float(a[-1] if overlap.size == 0 else a[overlap[0] - 1])


def compare(measurements: Sequence[MeasurementRecord], band_T: TheoryBand, band_T0: TheoryBand) -> ComparisonReport:
    """Check each measurement against both bands.

    A point is inside a band when its error bar touches the band.  The
    thermal residual is the measured gradient minus the zero-temperature
    central curve.
    """
    if not measurements:
        raise ValueError("no measurements to compare")
    rows = []
    for m in sorted(measurements, key=lambda r: r.a):
        t_lo, t_hi = band_T.at(m.a)
        z_lo, z_hi = band_T0.at(m.a)
        lo, hi = m.force_gradient - m.total_error, m.force_gradient + m.total_error
        rows.append(ComparisonRow(
            a=m.a, measured=m.force_gradient, error=m.total_error,
            inside_T_band=bool(hi >= t_lo and lo <= t_hi),
            inside_T0_band=bool(hi >= z_lo and lo <= z_hi),
            thermal_residual=float(m.force_gradient - band_T0.midline(m.a)),
        ))
    return ComparisonReport(rows, disjoint_up_to(band_T, band_T0))


def synthetic_measurements(band: TheoryBand, separations, error):
    """Records lying on the central curve of ``band``, for round-trip checks."""
    a = np.asarray(separations, dtype=float)
    return [MeasurementRecord(float(x), float(g), float(error)) for x, g in zip(a, band.midline(a))]


def ingest_measurements(path) -> list:
    """Read a measurement CSV (nm, uN/m) into records in SI units, sorted by separation."""
    records = []
    with open(Path(path), encoding="utf-8", newline="") as fh:
        lines = [(i, ln) for i, ln in enumerate(fh, start=1) if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise MeasurementFormatError("empty measurement file")
    header_line, header = lines[0]
    cols = [c.strip() for c in next(csv.reader([header]))]
    if cols != MEASUREMENT_HEADER:
        raise MeasurementFormatError(f"expected header {','.join(MEASUREMENT_HEADER)}", header_line)
    for lineno, raw in lines[1:]:
        row = next(csv.reader([raw]))
        if len(row) != 3:
            raise MeasurementFormatError(f"expected 3 columns, got {len(row)}", lineno)
        try:
            a_nm, g, e = (float(x) for x in row)
        except ValueError as exc:
            raise MeasurementFormatError(f"cannot parse numbers ({exc})", lineno) from None
        if not all(math.isfinite(v) for v in (a_nm, g, e)):
            raise MeasurementFormatError("non-finite value", lineno)
        try:
            records.append(MeasurementRecord(a_nm * NM, g * UN_PER_M, e * UN_PER_M))
        except MeasurementValidationError as exc:
            raise MeasurementValidationError(str(exc), lineno) from None
    if not records:
        raise MeasurementFormatError("measurement file has no data rows")
    return sorted(records, key=lambda r: r.a)


# --- second experiment -------------------------------------------------------

SECOND_EXPERIMENT_T = 294.0


def second_experiment():
    """Probe, graphene sample and cavity of the thick-SiO2 experiment.

    Au sphere of radius 60.35 um against graphene on a SiO2 plate thick
    enough to count as a semispace; gap 0.29 +- 0.05 eV, chemical potential
    0.24 +- 0.01 eV from an impurity density of 4.2e12 cm^-2.
    """
    probe = SphereProbe(radius=60.35e-6, radius_error=0.5e-6, roughness=0.9 * NM)
    sample = GrapheneSampleSpec(delta=0.29, delta_error=0.05, mu=0.24, mu_error=0.01,
                                roughness=1.5 * NM, n_bar=4.2e16)
    template = CavityTemplate(BarePlate(au_drude()), GrapheneCoatedPlate(sample.sheet(), sio2()))
    return probe, sample, template


def film_template(sphere_material, film_material, film_thickness, substrate_material, sheet=None):
    """Cavity with graphene on a film covering a substrate."""
    sheet = sheet or GrapheneSheet()
    return CavityTemplate(BarePlate(sphere_material),
                          GrapheneCoatedFilm(sheet, film_material, film_thickness, substrate_material))
