"""TM/TE reflection coefficients of the planar structures.

All functions broadcast over arrays of ``xi`` (rad/s) and ``k_perp`` (1/m).
``mode`` selects how a graphene sheet responds:

``"full"``
    zero-temperature part plus explicit thermal part at ``T``
    (the T -> 0 limit when ``T == 0``);
``"implicit"``
    temperature enters only through the Matsubara frequencies; the tensor
    is its ``T -> 0`` limit;
``"zero_T"``
    only the mu-independent zero-temperature part;
``"none"``
    the sheet is transparent (Pi = 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from casimir_graphene.core import C, DomainError
from casimir_graphene.graphene import (
    GrapheneSheet,
    PolarizationValues,
    polarization_full,
    polarization_T0_limit,
    polarization_zero_T,
)
from casimir_graphene.materials import (
    PermittivityModel,
    Vacuum,
    is_divergent_at_zero,
    static_eps_xi2,
)

MODES = ("full", "implicit", "zero_T", "none")


@dataclass(frozen=True)
class BarePlate:
    material: PermittivityModel


@dataclass(frozen=True)
class FreestandingGraphene:
    sheet: GrapheneSheet


@dataclass(frozen=True)
class GrapheneCoatedPlate:
    sheet: GrapheneSheet
    material: PermittivityModel


@dataclass(frozen=True)
class GrapheneCoatedFilm:
    sheet: GrapheneSheet
    film_material: PermittivityModel
    film_thickness: float
    substrate_material: PermittivityModel

    def __post_init__(self):
        if not self.film_thickness > 0:
            raise DomainError("film thickness must be positive")


PlanarStructure = Union[BarePlate, FreestandingGraphene, GrapheneCoatedPlate, GrapheneCoatedFilm]


@dataclass(frozen=True)
class ReflectionPair:
    r_tm: np.ndarray
    r_te: np.ndarray


def _kinematics(xi, k_perp):
    xi, k = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(k_perp, dtype=float))
    if np.any(xi < 0):
        raise DomainError("xi must be >= 0")
    if np.any(k <= 0):
        raise DomainError("k_perp must be positive")
    q = np.sqrt(k * k + (xi / C) ** 2)
    return xi, k, q


def _medium(material, xi, k):
    """Permittivity, ``eps xi^2 / c^2`` and wavenumber ``k_n`` inside ``material``."""
    eps = np.asarray(material.eps(xi), dtype=float)
    static = xi == 0
    # same rounding as q in _kinematics, so that eps = 1 gives k_n == q exactly
    with np.errstate(invalid="ignore"):
        exi2 = np.where(static, static_eps_xi2(material) / (C * C), eps * (xi / C) ** 2)
    kn = np.sqrt(k * k + exi2)
    return eps, exi2, kn


def polarization(sheet, xi, k_perp, T, mode="full") -> PolarizationValues:
    if mode == "full":
        return polarization_full(sheet, xi, k_perp, T)
    if mode == "implicit":
        return polarization_T0_limit(sheet, xi, k_perp)
    if mode == "zero_T":
        return polarization_zero_T(sheet, xi, k_perp)
    if mode == "none":
        z = np.zeros(np.broadcast(np.asarray(xi), np.asarray(k_perp)).shape)
        return PolarizationValues(z, z, z, z, z, z)
    raise ValueError(f"unknown polarization mode {mode!r}; expected one of {MODES}")


def _coated(material, xi, k, q, pi00, pi):
    eps, exi2, kn = _medium(material, xi, k)
    k2 = k * k
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        num = k2 * (eps * q - kn) + q * kn * pi00
        den = k2 * (eps * q + kn) + q * kn * pi00
        r_tm = num / den
        # q - k_n without cancellation
        q_minus_kn = ((xi / C) ** 2 - exi2) / (q + kn)
        r_te = (k2 * q_minus_kn - pi) / (k2 * (q + kn) + pi)
    if is_divergent_at_zero(material):
        r_tm = np.where(xi == 0, 1.0, r_tm)
    return r_tm, r_te


def fresnel_pair(material, xi, k_perp) -> ReflectionPair:
    """Reflection on a bare semispace; the coated formula with ``Pi = 0``."""
    xi, k, q = _kinematics(xi, k_perp)
    z = np.zeros_like(q)
    return ReflectionPair(*_coated(material, xi, k, q, z, z))


def graphene_coated_pair(sheet, material, xi, k_perp, T, mode="full", values=None) -> ReflectionPair:
    """Graphene sheet on top of a semispace of ``material``."""
    xi, k, q = _kinematics(xi, k_perp)
    if values is None:
        values = polarization(sheet, xi, k, T, mode)
    return ReflectionPair(*_coated(material, xi, k, q, values.pi00, values.pi))


def freestanding_pair(sheet, xi, k_perp, T, mode="full", values=None) -> ReflectionPair:
    """Graphene sheet in vacuum."""
    xi, k, q = _kinematics(xi, k_perp)
    if values is None:
        values = polarization(sheet, xi, k, T, mode)
    k2 = k * k
    qp = q * values.pi00
    r_tm = qp / (qp + 2.0 * k2)
    r_te = -values.pi / (2.0 * k2 * q + values.pi)
    return ReflectionPair(r_tm, r_te)


def interface_pair(upper, lower, xi, k_perp, te_variant="conventional") -> ReflectionPair:
    """Reflection at the boundary between two semispaces, seen from ``upper``.

    ``te_variant="printed"`` uses ``(k_u - eps_u k_l) / (k_u + eps_u k_l)``
    for TE, kept only to compare against the conventional form.
    """
    xi, k, q = _kinematics(xi, k_perp)
    eu, _, ku = _medium(upper, xi, k)
    el, _, kl = _medium(lower, xi, k)
    with np.errstate(invalid="ignore", divide="ignore"):
        r_tm = (el * ku - eu * kl) / (el * ku + eu * kl)
        if te_variant == "conventional":
            r_te = (ku - kl) / (ku + kl)
        elif te_variant == "printed":
            r_te = (ku - eu * kl) / (ku + eu * kl)
        else:
            raise ValueError(f"unknown TE variant {te_variant!r}")
    static = xi == 0
    if static.any():
        inf_u, inf_l = np.isinf(eu), np.isinf(el)
        r_tm = np.where(static & inf_l & ~inf_u, 1.0, r_tm)
        r_tm = np.where(static & inf_u & ~inf_l, -1.0, r_tm)
        r_tm = np.where(static & inf_u & inf_l, 0.0, r_tm)
        if te_variant == "printed":
            r_te = np.where(static & inf_u, -1.0, r_te)
    return ReflectionPair(r_tm, r_te)


def film_on_substrate_pair(sheet, film, thickness, substrate, xi, k_perp, T, mode="full",
                           te_variant="conventional", values=None) -> ReflectionPair:
    """Graphene on a film of ``thickness`` covering a ``substrate`` semispace."""
    if not thickness > 0:
        raise DomainError("film thickness must be positive")
    xi, k, q = _kinematics(xi, k_perp)
    top = graphene_coated_pair(sheet, film, xi, k, T, mode, values)
    inner = interface_pair(film, substrate, xi, k, te_variant)
    _, _, kf = _medium(film, xi, k)
    att = np.exp(-2.0 * thickness * kf)
    r_tm = (top.r_tm + inner.r_tm * att) / (1.0 + top.r_tm * inner.r_tm * att)
    r_te = (top.r_te + inner.r_te * att) / (1.0 + top.r_te * inner.r_te * att)
    return ReflectionPair(r_tm, r_te)


def sheet_of(structure):
    return getattr(structure, "sheet", None)


def reflection(structure: PlanarStructure, xi, k_perp, T, mode="full", values=None,
               te_variant="conventional") -> ReflectionPair:
    """Dispatch on the structure type."""
    if isinstance(structure, BarePlate):
        return fresnel_pair(structure.material, xi, k_perp)
    if isinstance(structure, FreestandingGraphene):
        return freestanding_pair(structure.sheet, xi, k_perp, T, mode, values)
    if isinstance(structure, GrapheneCoatedPlate):
        return graphene_coated_pair(structure.sheet, structure.material, xi, k_perp, T, mode, values)
    if isinstance(structure, GrapheneCoatedFilm):
        return film_on_substrate_pair(structure.sheet, structure.film_material, structure.film_thickness,
                                      structure.substrate_material, xi, k_perp, T, mode, te_variant, values)
    raise TypeError(f"not a planar structure: {structure!r}")


def vacuum_plate():
    return BarePlate(Vacuum())
