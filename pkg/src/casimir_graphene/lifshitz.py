"""Lifshitz free energy and pressure between two planar structures.

With ``y = 2 a q`` the Matsubara terms read

    P(a, T) = -k_B T / (8 pi a^3) sum'_l int_{y_l}^inf dy y^2
              sum_lambda r1 r2 e^{-y} / (1 - r1 r2 e^{-y})

    F(a, T) =  k_B T / (8 pi a^2) sum'_l int_{y_l}^inf dy y
              sum_lambda ln(1 - r1 r2 e^{-y})

with ``y_l = 2 a xi_l / c``.  The ``y`` integral is cut 80 e-foldings above
its lower limit; it is evaluated in ``t = y - y_l`` so that
``k_perp = sqrt(t (2 y_l + t)) / (2a)`` keeps full precision near the light
cone.  At ``T = 0`` the primed sum becomes an integral over
``zeta = 2 a xi / c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from casimir_graphene import quadrature
from casimir_graphene.core import (
    C,
    HBAR,
    KB,
    L_MAX,
    DomainError,
    stopping_length,
    tail_estimate,
)
from casimir_graphene.graphene import PolarizationValues, te_static_extrapolation
from casimir_graphene.reflection import PlanarStructure, polarization, reflection, sheet_of

Y_CUTOFF = 80.0
T_PANELS = np.array([0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, Y_CUTOFF])
ZETA_PANELS = np.concatenate([[0.0], np.geomspace(1e-6, 1.0, 13), [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]])
K_RTOL = 1e-9
ZETA_RTOL = 1e-8
#: ``int t^2 / (e^t - 1) dt``, the static term of a perfect reflector
STATIC_SCALE = 2.0 * 1.2020569031595942


@dataclass(frozen=True)
class CavityConfig:
    """Two planar structures facing each other across a vacuum gap ``a`` (m)."""

    side_1: PlanarStructure
    side_2: PlanarStructure
    a: float
    T: float
    tolerance: float = 1e-9
    k_rtol: float = K_RTOL

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"separation must be positive, got {self.a}")
        if not self.T >= 0:
            raise DomainError(f"temperature must be >= 0, got {self.T}")
        if not 0 < self.tolerance < 1:
            raise DomainError("tolerance must lie in (0, 1)")

    def at(self, a=None, T=None):
        """Copy with a different separation and/or temperature."""
        return CavityConfig(self.side_1, self.side_2, self.a if a is None else a,
                            self.T if T is None else T, self.tolerance, self.k_rtol)

    @property
    def has_graphene(self):
        return sheet_of(self.side_1) is not None or sheet_of(self.side_2) is not None


@dataclass(frozen=True)
class PressureResult:
    """Casimir pressure with its companions.

    ``l_terms_used`` is the number of Matsubara terms, or for ``T = 0`` the
    number of frequency panels of the outer quadrature.  ``te_static`` is the
    TE part of the ``l = 0`` pressure term and ``te_static_spread`` the
    amount by which it moves when the ``xi -> 0`` transverse tensor is
    replaced by its numerical extrapolation (None without graphene).
    """

    value: float
    free_energy: float
    truncation_error: float
    l_terms_used: int
    quadrature_error: float = 0.0
    te_static: Optional[float] = None
    te_static_spread: Optional[float] = None
    per_l: Optional[np.ndarray] = field(default=None, repr=False, compare=False)


def normalization_B(a, T):
    """``k_B T / (8 pi a^3)``, the pressure unit of the thermal regime."""
    return KB * T / (8.0 * math.pi * a**3)


def _pair(config, xi, k, T, mode, values=None):
    """Reflection of both sides at matching nodes; ``values`` overrides Pi per side."""
    v1, v2 = values if values is not None else (None, None)
    r1 = reflection(config.side_1, xi, k, T, mode, v1)
    if config.side_2 == config.side_1 and v1 is v2:
        return r1, r1
    return r1, reflection(config.side_2, xi, k, T, mode, v2)


def _kernels(r1, r2, y):
    e = np.exp(-y)
    x_tm = r1.r_tm * r2.r_tm * e
    x_te = r1.r_te * r2.r_te * e
    p = y * y * (x_tm / (1.0 - x_tm) + x_te / (1.0 - x_te))
    f = y * (np.log1p(-x_tm) + np.log1p(-x_te))
    return p, f


def _t_intervals(n):
    lo = np.tile(T_PANELS[:-1], n)
    hi = np.tile(T_PANELS[1:], n)
    own = np.repeat(np.arange(n), T_PANELS.size - 1)
    return lo, hi, own


def _y_integrals(config, xi, T, mode, rtol):
    """``int y^2 (...) dy`` and ``int y ln(...) dy`` for each frequency in ``xi``.

    Returns arrays of shape ``(2, xi.size)`` for value and error.
    """
    a = config.a
    xi = np.asarray(xi, dtype=float)
    y0 = 2.0 * a * xi / C
    lo, hi, own = _t_intervals(xi.size)

    def integrand(t, o):
        yl = y0[o]
        y = yl + t
        k = np.sqrt(t * (2.0 * yl + t)) / (2.0 * a)
        r1, r2 = _pair(config, xi[o], k, T, mode)
        return np.stack(_kernels(r1, r2, y))

    return quadrature.integrate(integrand, lo, hi, own, xi.size, ncomp=2, rtol=rtol)


def _matsubara_block(config, mode, l_start, l_stop):
    T = config.T
    l = np.arange(l_start, l_stop)
    xi = 2.0 * math.pi * KB * T * l / HBAR
    val, err = _y_integrals(config, xi, T, mode, config.k_rtol)
    w = np.where(l == 0, 0.5, 1.0)
    return val * w, err * w


def _static_te(config, mode):
    """TE part of the ``l = 0`` pressure integral and its extrapolation spread."""
    if not config.has_graphene:
        return None, None
    a, T = config.a, config.T
    lo, hi, own = _t_intervals(1)

    def integrand(t, o):
        k = t / (2.0 * a)
        xi = np.zeros_like(k)
        exact = []
        for side in (config.side_1, config.side_2):
            sheet = sheet_of(side)
            if sheet is None:
                exact.append(None)
                continue
            vals = polarization(sheet, xi, k, T, mode)
            if mode == "full" and T > 0:
                pi_ext, _ = te_static_extrapolation(sheet, k, T)
                extr = PolarizationValues(vals.pi00, pi_ext)
            else:
                extr = vals
            exact.append((vals, extr))
        out = []
        for pick in (0, 1):
            values = tuple(None if e is None else e[pick] for e in exact)
            r1 = reflection(config.side_1, xi, k, T, mode, values[0])
            r2 = reflection(config.side_2, xi, k, T, mode, values[1])
            x = r1.r_te * r2.r_te * np.exp(-t)
            out.append(t * t * x / (1.0 - x))
        return np.stack(out)

    # absolute floor: the TE term vanishes identically for some tensors
    val, _ = quadrature.integrate(integrand, lo, hi, own, 1, ncomp=2, rtol=config.k_rtol,
                                  atol=config.k_rtol * STATIC_SCALE)
    scale = -0.5 * KB * T / (8.0 * math.pi * a**3)
    exact, extr = scale * val[0, 0], scale * val[1, 0]
    return exact, abs(extr - exact)


def _matsubara_sum(config, mode="full", with_static=True):
    if not config.T > 0:
        raise DomainError("Matsubara sums need T > 0; use pressure_T0 for T = 0")
    tol = config.tolerance
    p_terms = np.empty(0)
    f_terms = np.empty(0)
    errs = np.empty((2, 0))
    block = 16
    n = None
    while p_terms.size < L_MAX:
        start = p_terms.size
        stop = min(start + block, L_MAX)
        val, err = _matsubara_block(config, mode, start, stop)
        p_terms = np.concatenate([p_terms, val[0]])
        f_terms = np.concatenate([f_terms, val[1]])
        errs = np.concatenate([errs, err], axis=1)
        n_p = stopping_length(p_terms, tol)
        n_f = stopping_length(f_terms, tol)
        if n_p is not None and n_f is not None:
            n = max(n_p, n_f)
            break
        block *= 2
    if n is None:
        n = p_terms.size
    p_terms, f_terms, errs = p_terms[:n], f_terms[:n], errs[:, :n]
    a, T = config.a, config.T
    p_sum = math.fsum(p_terms)
    f_sum = math.fsum(f_terms)
    trunc = max(tail_estimate(list(p_terms)), tail_estimate(list(f_terms)))
    qerr = 0.0
    if p_sum != 0.0:
        qerr = float(errs[0].sum()) / abs(p_sum)
    p_pref = -KB * T / (8.0 * math.pi * a**3)
    f_pref = KB * T / (8.0 * math.pi * a**2)
    te0 = spread = None
    if with_static:
        te0, spread = _static_te(config, mode)
    return PressureResult(
        value=p_pref * p_sum,
        free_energy=f_pref * f_sum,
        truncation_error=trunc,
        l_terms_used=int(n),
        quadrature_error=qerr,
        te_static=te0,
        te_static_spread=spread,
        per_l=p_pref * p_terms,
    )


def pressure(config: CavityConfig, mode="full") -> PressureResult:
    """Casimir pressure (Pa, negative for attraction) and free energy.

    ``T = 0`` is routed to :func:`pressure_T0`.
    """
    if config.T == 0:
        return pressure_T0(config, mode)
    return _matsubara_sum(config, mode)


def free_energy(config: CavityConfig, mode="full") -> float:
    """Casimir free energy per unit area (J/m^2)."""
    if not config.T > 0:
        raise DomainError("free_energy needs T > 0; pressure_T0 also returns the T = 0 energy")
    return _matsubara_sum(config, mode, with_static=False).free_energy


def pressure_implicit_only(config: CavityConfig, tensor="T0_limit") -> PressureResult:
    """Pressure with temperature entering only through the Matsubara frequencies.

    Graphene responds with its zero-temperature tensor.  ``tensor="T0_limit"``
    keeps the mu dependence that survives at ``T = 0`` when ``delta < 2 mu``;
    ``tensor="zero_T"`` drops it.  The two agree whenever ``delta >= 2 mu``.
    """
    mode = {"T0_limit": "implicit", "zero_T": "zero_T"}[tensor]
    return _matsubara_sum(config, mode)


def pressure_T0(config: CavityConfig, mode="full", rtol=ZETA_RTOL) -> PressureResult:
    """Zero-temperature pressure; ``config.T`` is ignored.

    The frequency integral runs over ``zeta = 2 a xi / c`` on log-spaced
    panels from 0 to 64; graphene responds with its ``T -> 0`` tensor.
    """
    zero_cfg = config.at(T=0.0)
    if mode == "full":
        mode = "implicit"
    a = config.a
    stats = {}

    def outer(zeta, o):
        xi = zeta * C / (2.0 * a)
        val, _ = _y_integrals(zero_cfg, xi, 0.0, mode, config.k_rtol)
        return val

    n_panels = ZETA_PANELS.size - 1
    val, err = quadrature.integrate(outer, ZETA_PANELS[:-1], ZETA_PANELS[1:], np.zeros(n_panels, dtype=int), 1,
                                    ncomp=2, rtol=rtol, stats=stats)
    p_int, f_int = val[0, 0], val[1, 0]
    p = -HBAR * C / (32.0 * math.pi**2 * a**4) * p_int
    f = HBAR * C / (32.0 * math.pi**2 * a**3) * f_int
    qerr = float(err[0, 0] / abs(p_int)) if p_int else 0.0
    return PressureResult(value=p, free_energy=f, truncation_error=0.0,
                          l_terms_used=stats.get("intervals", n_panels), quadrature_error=qerr)


def thermal_correction(config: CavityConfig, variant="total", p0: Optional[float] = None) -> float:
    """Relative thermal correction ``(P(a, T) - P(a, 0)) / P(a, 0)``.

    ``variant="implicit"`` uses :func:`pressure_implicit_only` for ``P(a, T)``.
    A precomputed ``p0`` avoids a repeated zero-temperature evaluation.
    """
    if p0 is None:
        p0 = pressure_T0(config).value
    if p0 == 0.0:
        raise ZeroDivisionError("P(a, 0) vanishes; the relative thermal correction is undefined")
    if variant == "total":
        pt = pressure(config).value
    elif variant == "implicit":
        pt = pressure_implicit_only(config).value
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return (pt - p0) / p0


@dataclass(frozen=True)
class EntropyResult:
    value: float
    error: float
    steps: tuple


def entropy(config: CavityConfig, dT: Optional[float] = None) -> EntropyResult:
    """Entropy per unit area ``-dF/dT`` (J/(m^2 K)) by Richardson-extrapolated differences.

    Central differences with steps ``dT``, ``dT/2`` and ``dT/4`` give two
    Richardson estimates; their difference is the reported error.

    Raises
    ------
    ArithmeticError
        If the successive differences grow instead of shrinking above the
        noise level of the free energy.
    """
    T = config.T
    if dT is None:
        dT = 0.1 * T
    if not T > dT > 0:
        raise DomainError(f"entropy needs T > dT > 0, got T={T}, dT={dT}")
    steps = (dT, dT / 2.0, dT / 4.0)
    cache = {}

    def F(temp):
        if temp not in cache:
            cache[temp] = free_energy(config.at(T=temp))
        return cache[temp]

    S = [-(F(T + h) - F(T - h)) / (2.0 * h) for h in steps]
    r1 = (4.0 * S[1] - S[0]) / 3.0
    r2 = (4.0 * S[2] - S[1]) / 3.0
    d1, d2 = abs(S[1] - S[0]), abs(S[2] - S[1])
    noise = 10.0 * config.tolerance * max(abs(v) for v in cache.values()) / steps[-1]
    if d2 > d1 and d2 > noise:
        raise ArithmeticError(f"Richardson sequence does not converge at T={T} K")
    return EntropyResult(value=r2, error=max(abs(r2 - r1), noise), steps=steps)
