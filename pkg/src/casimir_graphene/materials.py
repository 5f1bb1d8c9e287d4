"""Dielectric permittivities of bulk materials along the imaginary axis.

Every model returns ``eps(i xi)`` for ``xi >= 0`` in rad/s.  Models with a
free-carrier term diverge at ``xi = 0``; they return :data:`DIVERGENT`
(``inf``) there, and :func:`static_eps_xi2` gives the finite limit of
``eps(i xi) xi**2`` that reflection coefficients need at zero frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from casimir_graphene.core import DomainError, ev_to_rad_per_s

DIVERGENT = math.inf


class TableFormatError(ValueError):
    """Malformed permittivity table."""

    def __init__(self, message, row=None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


class TableValidationError(ValueError):
    """Permittivity table parsed but violates a physical constraint."""

    def __init__(self, message, row=None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


def _check_xi(xi):
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0) or np.any(np.isnan(xi)):
        raise DomainError("permittivity is defined for xi >= 0 only")
    return xi


def _out(val):
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class Vacuum:
    def eps(self, xi):
        xi = _check_xi(xi)
        return _out(np.ones_like(xi))


@dataclass(frozen=True)
class Drude:
    omega_p: float
    gamma: float

    def eps(self, xi):
        xi = _check_xi(xi)
        with np.errstate(divide="ignore"):
            val = 1.0 + self.omega_p**2 / (xi * (xi + self.gamma))
        return _out(np.where(xi == 0, DIVERGENT, val))


@dataclass(frozen=True)
class Plasma:
    omega_p: float

    def eps(self, xi):
        xi = _check_xi(xi)
        with np.errstate(divide="ignore"):
            val = 1.0 + self.omega_p**2 / xi**2
        return _out(np.where(xi == 0, DIVERGENT, val))


@dataclass(frozen=True)
class Oscillator:
    """Sum of damped oscillators, ``1 + sum C w^2 / (w^2 + xi^2 + g xi)``.

    ``terms`` holds ``(strength, omega, damping)`` triples.
    """

    terms: tuple

    def eps(self, xi):
        xi = _check_xi(xi)
        val = np.ones_like(xi)
        for strength, omega, damping in self.terms:
            val = val + strength * omega**2 / (omega**2 + xi**2 + damping * xi)
        return _out(val)


@dataclass(frozen=True)
class Tabulated:
    """Table of ``(xi, eps)`` points, linear in eps against log xi.

    Values outside the table are clamped to the boundary entries.
    """

    xi: tuple
    values: tuple
    _logx: np.ndarray = field(init=False, repr=False, compare=False)
    _vals: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.xi, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.size < 2 or x.size != v.size:
            raise TableValidationError("need at least two (xi, eps) points")
        if np.any(x <= 0):
            raise TableValidationError("tabulated xi must be positive")
        if np.any(np.diff(x) <= 0):
            raise TableValidationError("xi must be strictly increasing")
        if np.any(v < 1):
            raise TableValidationError("eps must be >= 1 on the imaginary axis")
        if np.any(np.diff(v) >= 0):
            raise TableValidationError("eps must be strictly decreasing in xi")
        object.__setattr__(self, "_logx", np.log(x))
        object.__setattr__(self, "_vals", v)

    def eps(self, xi):
        xi = _check_xi(xi)
        with np.errstate(divide="ignore"):
            lx = np.log(xi)
        val = np.interp(lx, self._logx, self._vals)
        return _out(val)

    def __len__(self):
        return len(self.xi)


@dataclass(frozen=True)
class DopedSemiconductor:
    """Bound-charge core plus a free-carrier ``omega_p**2 / xi**2`` term."""

    core: Union[Oscillator, Tabulated]
    omega_p: float

    def eps(self, xi):
        xi = _check_xi(xi)
        with np.errstate(divide="ignore"):
            val = np.asarray(self.core.eps(xi)) + self.omega_p**2 / xi**2
        return _out(np.where(xi == 0, DIVERGENT, val))


@dataclass(frozen=True)
class DrudeOscillator:
    """Drude free-electron term plus bound-electron oscillators.

    Used for noble metals whose interband transitions matter above a few eV.
    """

    omega_p: float
    gamma: float
    oscillators: Oscillator

    def eps(self, xi):
        xi = _check_xi(xi)
        bound = np.asarray(self.oscillators.eps(xi)) - 1.0
        with np.errstate(divide="ignore"):
            val = 1.0 + self.omega_p**2 / (xi * (xi + self.gamma)) + bound
        return _out(np.where(xi == 0, DIVERGENT, val))


PermittivityModel = Union[Vacuum, Drude, Plasma, Oscillator, Tabulated, DopedSemiconductor, DrudeOscillator]


def eval_permittivity(model: PermittivityModel, xi):
    """``eps(i xi)`` of ``model``; :data:`DIVERGENT` at ``xi = 0`` for conductors."""
    return model.eps(xi)


def is_divergent_at_zero(model) -> bool:
    return isinstance(model, (Drude, Plasma, DopedSemiconductor, DrudeOscillator))


def static_eps_xi2(model) -> float:
    """Limit of ``eps(i xi) xi**2`` as ``xi -> 0``.

    Zero for dielectrics and Drude-type metals, ``omega_p**2`` for
    plasma-type free carriers.
    """
    if isinstance(model, (Plasma, DopedSemiconductor)):
        return model.omega_p**2
    return 0.0


def load_material_table(path) -> Tabulated:
    """Read a two-column ``xi_rad_per_s epsilon`` text table.

    Blank lines and ``#`` comments are ignored.

    Raises
    ------
    TableFormatError
        Unparseable rows, fewer than two rows, or a xi column that is not
        strictly increasing.
    TableValidationError
        Any eps below one, or eps not decreasing.
    """
    xs, vs = [], []
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise TableFormatError(f"expected 2 columns, got {len(parts)}", lineno)
            try:
                x, v = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise TableFormatError(f"cannot parse numbers ({exc})", lineno) from None
            if not (math.isfinite(x) and math.isfinite(v)):
                raise TableFormatError("non-finite value", lineno)
            if xs and x <= xs[-1]:
                raise TableFormatError("xi column must be strictly increasing", lineno)
            if x <= 0:
                raise TableFormatError("xi must be positive", lineno)
            if v < 1.0:
                raise TableValidationError(f"eps={v} < 1", lineno)
            if vs and v >= vs[-1]:
                raise TableValidationError("eps must decrease with xi", lineno)
            xs.append(x)
            vs.append(v)
    if len(xs) < 2:
        raise TableFormatError("table needs at least two rows")
    return Tabulated(tuple(xs), tuple(vs))


def save_material_table(path, model: Tabulated, comment=None):
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append("# xi_rad_per_s epsilon")
    lines.extend(f"{x:.12e} {v:.12e}" for x, v in zip(model.xi, model.values))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --- default library -------------------------------------------------------

AU_OMEGA_P_EV = 9.0
AU_GAMMA_EV = 0.035

# Six-oscillator interband term for Au (strength g_j in eV^2, omega_j and
# damping in eV); C_j = g_j / omega_j^2 in the Oscillator convention.
_AU_OSC_EV = (
    (7.091, 3.05, 0.75),
    (41.46, 4.15, 1.85),
    (2.7, 5.4, 1.0),
    (154.7, 8.5, 7.0),
    (44.55, 13.5, 6.0),
    (309.6, 21.5, 9.0),
)

SIO2_TERMS = (
    (1.703, 1.88e14, 0.0),   # infrared
    (1.098, 2.034e16, 0.0),  # ultraviolet
)

SI_CORE_TERMS = ((10.87, 6.6e15, 0.0),)

SI_OMEGA_P_RANGE = (5e14, 11e14)


def au_drude():
    return Drude(ev_to_rad_per_s(AU_OMEGA_P_EV), ev_to_rad_per_s(AU_GAMMA_EV))


def au_plasma():
    return Plasma(ev_to_rad_per_s(AU_OMEGA_P_EV))


def au_drude_oscillator():
    terms = tuple((g / w**2, ev_to_rad_per_s(w), ev_to_rad_per_s(d)) for g, w, d in _AU_OSC_EV)
    return DrudeOscillator(ev_to_rad_per_s(AU_OMEGA_P_EV), ev_to_rad_per_s(AU_GAMMA_EV), Oscillator(terms))


def sio2():
    return Oscillator(SIO2_TERMS)


def doped_si(omega_p):
    if not SI_OMEGA_P_RANGE[0] <= omega_p <= SI_OMEGA_P_RANGE[1]:
        raise DomainError(f"Si plasma frequency {omega_p:.3e} outside {SI_OMEGA_P_RANGE}")
    return DopedSemiconductor(Oscillator(SI_CORE_TERMS), omega_p)


@dataclass(frozen=True)
class LibraryEntry:
    model: PermittivityModel
    note: str


class MaterialLibrary:
    """Named permittivity models with a provenance note per entry."""

    def __init__(self, entries=None):
        self._entries: dict[str, LibraryEntry] = {}
        for name, (model, note) in (entries or {}).items():
            self.add(name, model, note)

    def add(self, name, model, note="", replace=False):
        if name in self._entries and not replace:
            raise KeyError(f"material {name!r} already defined")
        self._entries[name] = LibraryEntry(model, note)

    def __getitem__(self, name) -> PermittivityModel:
        try:
            return self._entries[name].model
        except KeyError:
            raise KeyError(f"unknown material {name!r}; known: {sorted(self._entries)}") from None

    def __contains__(self, name):
        return name in self._entries

    def __iter__(self):
        return iter(self._entries)

    def note(self, name):
        return self._entries[name].note

    def items(self):
        return ((k, e.model, e.note) for k, e in self._entries.items())


def default_library() -> MaterialLibrary:
    lo, hi = SI_OMEGA_P_RANGE
    return MaterialLibrary({
        "vacuum": (Vacuum(), "eps = 1"),
        "au": (au_drude(), "Drude, omega_p = 9.0 eV, gamma = 0.035 eV"),
        "au_plasma": (au_plasma(), "plasma model, omega_p = 9.0 eV"),
        "au_drude_osc": (au_drude_oscillator(), "Drude 9.0/0.035 eV plus six interband oscillators"),
        "sio2": (sio2(), "two oscillators: C_IR=1.703 at 1.88e14, C_UV=1.098 at 2.034e16 rad/s"),
        "si_low": (doped_si(lo), f"Si core oscillator, free carriers omega_p = {lo:.1e} rad/s"),
        "si_high": (doped_si(hi), f"Si core oscillator, free carriers omega_p = {hi:.1e} rad/s"),
    })
