"""Polarization tensor of gapped, doped graphene at imaginary frequencies.

Values are returned divided by hbar: ``pi00`` in 1/m and ``pi`` in 1/m^3,
so that they enter the reflection coefficients without further factors.

The tensor splits into a zero-temperature part (no explicit T, no mu) and
an explicit thermal part given by a Fermi-weighted integral over the
dimensionless variable ``u``.  For that integral the combination
``xi**2 * [...]`` of the transverse component is rewritten as
``c^2 qt^2 [gamma^2 - Re(...)]``, which stays regular when ``xi -> 0``;
the brackets are evaluated in cancellation-free form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from casimir_graphene import quadrature
from casimir_graphene.core import ALPHA, C, EV, HBAR, KB, DomainError

FERMI_EFOLDINGS = 40.0
U_RTOL = 1e-10


@dataclass(frozen=True)
class GrapheneSheet:
    """One graphene layer.

    Parameters
    ----------
    delta : float
        Energy gap in eV.
    mu : float
        Chemical potential in eV.
    v_F : float
        Fermi velocity in m/s.
    """

    delta: float = 0.0
    mu: float = 0.0
    v_F: float = C / 300.0

    def __post_init__(self):
        if self.delta < 0 or self.mu < 0:
            raise DomainError("graphene gap and chemical potential must be >= 0")
        if not 0 < self.v_F < C:
            raise DomainError("Fermi velocity must lie in (0, c)")

    @property
    def delta_J(self):
        return self.delta * EV

    @property
    def mu_J(self):
        return self.mu * EV

    @property
    def pristine(self):
        return self.delta == 0.0 and self.mu == 0.0

    @property
    def fermi_sea_at_zero_T(self):
        """True when ``delta < 2 mu``: the T -> 0 tensor keeps a mu dependence."""
        return self.delta < 2.0 * self.mu


@dataclass(frozen=True)
class PolarizationValues:
    """``Pi_00 / hbar`` and ``Pi / hbar`` with their zero-T / thermal parts."""

    pi00: np.ndarray
    pi: np.ndarray
    pi00_zero_T: Optional[np.ndarray] = None
    pi_zero_T: Optional[np.ndarray] = None
    pi00_thermal: Optional[np.ndarray] = None
    pi_thermal: Optional[np.ndarray] = None


@dataclass(frozen=True)
class KinematicAux:
    q_tilde: np.ndarray
    D: np.ndarray
    gamma: np.ndarray
    B: Optional[np.ndarray]
    one_minus_g2: Optional[np.ndarray] = None


def kinematics(sheet: GrapheneSheet, xi, k_perp, T=None) -> KinematicAux:
    xi, k = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(k_perp, dtype=float))
    qt = np.sqrt((sheet.v_F * k / C) ** 2 + (xi / C) ** 2)
    if np.any(qt == 0):
        raise DomainError("k_perp = 0 together with xi = 0 is a singular point")
    D = sheet.delta_J / (HBAR * C * qt)
    gamma = xi / (C * qt)
    B = HBAR * C * qt / (2.0 * KB * T) if T else None
    # 1 - gamma^2 without cancellation when gamma -> 1
    one_minus_g2 = (sheet.v_F * k / (C * qt)) ** 2
    return KinematicAux(qt, D, gamma, B, one_minus_g2)


_PSI_SERIES = np.array([
    (-1) ** m * 4.0 * (m + 1) / ((2 * m + 1) * (2 * m + 3)) for m in range(14)
])


def psi(x):
    """``2 [x + (1 - x^2) arctan(1/x)]``, equal to pi at ``x = 0``.

    Large arguments use the asymptotic series, the closed form cancels there.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("psi is defined for x >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = 2.0 * (x + (1.0 - x * x) * np.arctan2(1.0, x))
        inv = 1.0 / np.maximum(x, 12.0)
        powers = inv[..., None] ** (2 * np.arange(_PSI_SERIES.size) + 1)
        series = 2.0 * powers @ _PSI_SERIES
    out = np.where(x > 12.0, series, direct)
    return float(out) if out.ndim == 0 else out


def polarization_zero_T(sheet: GrapheneSheet, xi, k_perp) -> PolarizationValues:
    """Zero-temperature, zero-mu part of the tensor at frequency ``i xi``."""
    if np.any(np.asarray(k_perp) < 0):
        raise DomainError("k_perp must be non-negative")
    kin = kinematics(sheet, xi, k_perp)
    k = np.broadcast_to(np.asarray(k_perp, dtype=float), kin.q_tilde.shape)
    base = ALPHA * k * k * psi(kin.D)
    pi00 = base / kin.q_tilde
    pi = base * kin.q_tilde
    zeros = np.zeros_like(pi00)
    return PolarizationValues(pi00, pi, pi00, pi, zeros, zeros)


def _brackets(u, w0, v, D, gamma, eps, above):
    """Integrand brackets of the longitudinal and transverse thermal parts.

    ``w0 = u0^2 - u^2`` with ``u0 = sqrt(1 + D^2)``, the branch point of the
    square root at ``gamma = 0``, and ``v = u^2 - D^2 = 1 - w0`` are passed
    separately because callers know them more accurately than ``u``.  With
    ``z = 1 - u^2 + 2 i gamma u + D^2 (1 - gamma^2)`` and ``S = sqrt(z)``
    the brackets are

        b00 = 1 - Re S + D^2 eps Re(1/S)
        bpi = gamma^2 - Re S + eps Re(1/S),      eps = 1 - gamma^2.

    Each regime uses a rearrangement free of large cancellations:
    ``Y = 1 - S = (1 - z) / (1 + S)`` and ``1/S - 1 = Y/S`` for small
    ``u``; ``Re S`` itself, which vanishes exactly above the branch point
    at ``gamma = 0``; and ``Y = eps v / (S + w)`` with ``w = 1 + i gamma u``,
    ``v = u^2 - D^2`` to expose the factor ``eps`` when ``gamma -> 1``;
    ``eps`` is passed in because ``1 - gamma^2`` from a rounded ``gamma``
    loses digits there.
    """
    g2 = gamma * gamma
    z = w0 - g2 * D * D + 2j * gamma * u
    S = np.sqrt(z)
    re_s = S.real
    one_minus_z = (v + g2 * D * D) - 2j * gamma * u
    with np.errstate(divide="ignore", invalid="ignore"):
        re_inv = re_s / np.abs(z)
        Y = one_minus_z / (1.0 + S)
        re_y_over_s = np.real(Y / S)
        near_one = g2 >= 0.5
        x = np.real(v / (S + 1.0 + 1j * gamma * u))
    b00 = np.where(near_one, eps * (x + D * D * re_inv), Y.real + D * D * eps * re_inv)
    bpi = np.where(near_one, eps * (x + re_y_over_s),
                   np.where(above, g2 - re_s + eps * re_inv, Y.real + eps * re_y_over_s))
    return b00, bpi


def _segments(D, t_end, t_extra):
    """Integration intervals covering ``u - D`` in ``[0, t_end]``.

    Offsets ``t = u - D`` are used directly up to half the distance to the
    branch point, where ``u`` near ``D`` must stay exact for sharp Fermi
    factors.  Beyond it the signed root ``s`` with ``u = u0 + s|s|`` absorbs
    the ``1/sqrt`` behaviour at ``u0``.  Returns ``(lo, hi, owner, is_s)``;
    for large ``D`` the gap ``u0 - D = 1 / (u0 + D)`` is below the spacing of
    floats near ``D``, so all points are built from offsets.
    """
    n = D.size
    u0 = np.sqrt(1.0 + D * D)
    gap = 1.0 / (u0 + D)
    t_end = np.maximum(t_end, 0.0)
    cuts = [np.zeros(n), 0.5 * gap, gap, t_extra, t_end]
    pts = np.sort(np.stack([np.clip(c, 0.0, t_end) for c in cuts], axis=1), axis=1)
    los, his, own, kinds = [], [], [], []
    idx = np.arange(n)
    for i in range(len(cuts) - 1):
        ta, tb = pts[:, i], pts[:, i + 1]
        ok = tb > ta
        if not ok.any():
            continue
        ta, tb, g, o = ta[ok], tb[ok], gap[ok], idx[ok]
        direct = tb <= 0.5 * g * (1.0 + 1e-12)
        sa = np.where(ta < g, -np.sqrt(np.abs(g - ta)), np.sqrt(np.abs(ta - g)))
        sb = np.where(tb <= g, -np.sqrt(np.abs(g - tb)), np.sqrt(np.abs(tb - g)))
        los.append(np.where(direct, ta, sa))
        his.append(np.where(direct, tb, sb))
        own.append(o)
        kinds.append(~direct)
    if not los:
        e = np.empty(0)
        return e, e, np.empty(0, dtype=np.intp), np.empty(0, dtype=bool)
    return np.concatenate(los), np.concatenate(his), np.concatenate(own), np.concatenate(kinds)


def _thermal_integrals(sheet, kin: KinematicAux, T, rtol=U_RTOL):
    """The two u-integrals, at temperature ``T`` or (``T=None``) in the T -> 0 limit.

    Returns flattened arrays ``(I00, Ipi)``.
    """
    qt = kin.q_tilde.ravel()
    D = kin.D.ravel()
    gamma = kin.gamma.ravel()
    n = qt.size
    u_fermi = 2.0 * sheet.mu_J / (HBAR * C * qt)
    if T is None:
        u_end = u_fermi
        active = u_fermi > D
        m = None
        B = None
    else:
        B = kin.B.ravel()
        m = sheet.mu_J / (KB * T)
        u_end = np.maximum(D, u_fermi) + FERMI_EFOLDINGS / B
        active = np.ones(n, dtype=bool)
    I00 = np.zeros(n)
    Ipi = np.zeros(n)
    if not active.any():
        return I00, Ipi
    sel = np.flatnonzero(active)
    Ds, qts, gs = D[sel], qt[sel], gamma[sel]
    one_minus_g2 = kin.one_minus_g2
    es = (1.0 - gamma * gamma if one_minus_g2 is None else one_minus_g2.ravel())[sel]
    Bs = None if B is None else B[sel]
    u0 = np.sqrt(1.0 + Ds * Ds)
    gap = 1.0 / (u0 + Ds)
    t_end = (u_end[sel] - Ds) if Bs is None else (np.maximum(u_fermi[sel] - Ds, 0.0) + FERMI_EFOLDINGS / Bs)
    lo, hi, own, is_s = _segments(Ds, t_end, u_fermi[sel] - Ds)
    # direct-offset intervals get owners shifted by n_sel
    n_sel = sel.size
    own = own + n_sel * (~is_s)

    def integrand(x, o):
        direct = o >= n_sel
        i = np.where(direct, o - n_sel, o)
        d, g0 = Ds[i], gap[i]
        s2 = x * np.abs(x)
        # u0^2 - u^2 from the offset (direct) or the signed root
        w0 = np.where(direct, (g0 - x) * (u0[i] + d + x), -s2 * (2.0 * u0[i] + s2))
        t = np.where(direct, x, g0 + s2)
        u = d + t
        v = np.where(direct, t * (2.0 * d + t), 1.0 - w0)
        b00, bpi = _brackets(u, w0, v, d, gs[i], es[i], ~direct & (x > 0))
        if Bs is None:
            fermi = 1.0
        else:
            bu = Bs[i] * d + Bs[i] * t
            fermi = expit(m - bu) + expit(-bu - m)
        w = np.where(direct, 1.0, 2.0 * np.abs(x)) * fermi
        return np.stack([b00 * w, bpi * w])

    val, _ = quadrature.integrate(integrand, lo, hi, own, 2 * n_sel, ncomp=2, rtol=rtol)
    val = val[:, :n_sel] + val[:, n_sel:]
    I00[sel] = val[0]
    Ipi[sel] = val[1]
    return I00, Ipi


def _thermal_from_integrals(sheet, kin, I00, Ipi):
    qt = kin.q_tilde
    pref = 4.0 * ALPHA * C * C * qt / sheet.v_F**2
    pi00 = pref * I00.reshape(qt.shape)
    pi = -pref * qt * qt * Ipi.reshape(qt.shape)
    return pi00, pi


def polarization_thermal(sheet: GrapheneSheet, xi, k_perp, T, rtol=U_RTOL) -> PolarizationValues:
    """Explicitly temperature-dependent part of the tensor.

    At ``xi = 0`` the transverse part is the exact ``xi -> 0`` limit of the
    regularized integrand; see :func:`te_static_extrapolation` for the
    independent numerical limit.
    """
    if not T > 0:
        raise DomainError("thermal part needs T > 0")
    if np.any(np.asarray(k_perp) <= 0):
        raise DomainError("k_perp must be positive")
    kin = kinematics(sheet, xi, k_perp, T)
    I00, Ipi = _thermal_integrals(sheet, kin, T, rtol)
    pi00, pi = _thermal_from_integrals(sheet, kin, I00, Ipi)
    zeros = np.zeros_like(pi00)
    return PolarizationValues(pi00, pi, zeros, zeros, pi00, pi)


def _combine(zero, thermal):
    return PolarizationValues(
        zero.pi00 + thermal.pi00,
        zero.pi + thermal.pi,
        zero.pi00,
        zero.pi,
        thermal.pi00,
        thermal.pi,
    )


def polarization_full(sheet: GrapheneSheet, xi, k_perp, T, rtol=U_RTOL) -> PolarizationValues:
    """Zero-temperature part plus explicit thermal part at temperature ``T``.

    ``T = 0`` is routed to :func:`polarization_T0_limit`.
    """
    if T == 0:
        return polarization_T0_limit(sheet, xi, k_perp, rtol)
    return _combine(polarization_zero_T(sheet, xi, k_perp), polarization_thermal(sheet, xi, k_perp, T, rtol))


def polarization_T0_limit(sheet: GrapheneSheet, xi, k_perp, rtol=U_RTOL) -> PolarizationValues:
    """Tensor at ``T = 0`` with chemical potential.

    For ``delta >= 2 mu`` the thermal part vanishes in the limit; otherwise
    the Fermi factors become a step that fills ``D <= u < 2 mu / (hbar c qt)``.
    """
    zero = polarization_zero_T(sheet, xi, k_perp)
    if not sheet.fermi_sea_at_zero_T:
        return zero
    kin = kinematics(sheet, xi, k_perp)
    I00, Ipi = _thermal_integrals(sheet, kin, None, rtol)
    pi00, pi = _thermal_from_integrals(sheet, kin, I00, Ipi)
    zeros = np.zeros_like(pi00)
    return _combine(zero, PolarizationValues(pi00, pi, zeros, zeros, pi00, pi))


def te_static_extrapolation(sheet: GrapheneSheet, k_perp, T, gammas=(1e-3, 1e-4)):
    """``Pi / hbar`` at ``xi = 0`` from its values along ``xi -> 0``.

    The frequencies are chosen so that ``gamma = xi / (c qt)`` takes the
    values in ``gammas``; the approach is linear in ``gamma``, so a
    two-point Richardson step of order one is applied.  The quantity is
    independent of the exact limit used by :func:`polarization_full` and
    serves as a check on it.

    Returns
    -------
    value : ndarray
        Extrapolated ``Pi / hbar``.
    spread : ndarray
        ``|value - Pi(gamma_min)|``, the size of the extrapolation step.
    """
    k = np.asarray(k_perp, dtype=float)
    g1, g2 = gammas
    vals = []
    for g in (g1, g2):
        xi = g * sheet.v_F * k / math.sqrt(1.0 - g * g)
        vals.append(polarization_full(sheet, xi, k, T).pi)
    p1, p2 = vals
    ratio = g1 / g2
    value = (ratio * p2 - p1) / (ratio - 1.0)
    return value, np.abs(value - p2)


def nonlocal_permittivities(sheet: GrapheneSheet, xi, k_perp, T, values: PolarizationValues | None = None):
    """Transverse and longitudinal permittivities of the sheet.

    Returns
    -------
    eps_transverse, eps_longitudinal
    """
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0):
        raise DomainError("transverse permittivity needs xi > 0")
    k = np.asarray(k_perp, dtype=float)
    if values is None:
        values = polarization_full(sheet, xi, k_perp, T)
    eps_l = 1.0 + values.pi00 / (2.0 * k)
    eps_tr = 1.0 + C * C * values.pi / (2.0 * k * xi_arr**2)
    return eps_tr, eps_l
