"""Physical constants, Matsubara frequencies and the truncation rule.

All internal quantities are SI (J, m, s, K).  Energies quoted in eV and
lengths in nm are converted at the configuration boundary only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import constants as _sc
from scipy.integrate import quad

#: one electron-volt in joules
EV = 1.602176634e-19
NM = 1e-9

L_MAX = 1_000_000
SMALL_TERMS_TO_STOP = 3


class DomainError(ValueError):
    """Argument outside the domain of a physical formula."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach its tolerance.

    Attributes
    ----------
    residual : float
        Worst relative error estimate left when refinement stopped.
    """

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = _sc.hbar
    c: float = _sc.c
    k_B: float = _sc.k
    alpha: float = 7.2973525693e-3

    @property
    def v_F_default(self) -> float:
        return self.c / 300.0


CONSTANTS = PhysicalConstants()
HBAR = CONSTANTS.hbar
C = CONSTANTS.c
KB = CONSTANTS.k_B
ALPHA = CONSTANTS.alpha


def ev_to_joule(value_ev):
    return value_ev * EV


def ev_to_rad_per_s(value_ev):
    """Angular frequency whose quantum hbar*omega equals ``value_ev``."""
    return value_ev * EV / HBAR


def matsubara_frequency(l, T):
    """Matsubara frequency ``2 pi k_B T l / hbar`` in rad/s.

    Raises
    ------
    DomainError
        If ``T <= 0``; the zero-temperature limit is an integral over a
        continuous frequency, not a sum.
    """
    if not T > 0:
        raise DomainError(f"Matsubara frequencies need T > 0, got T={T}")
    if np.any(np.asarray(l) < 0):
        raise DomainError("Matsubara index must be non-negative")
    if np.ndim(l):
        l = np.asarray(l, dtype=float)
    return 2.0 * math.pi * KB * T * l / HBAR


@dataclass(frozen=True)
class MatsubaraSpectrum:
    """Truncated set of Matsubara frequencies with the primed-sum weights."""

    T: float
    frequencies: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.frequencies)

    @classmethod
    def of_length(cls, T, n):
        l = np.arange(n)
        w = np.ones(n)
        w[0] = 0.5
        return cls(T=T, frequencies=2.0 * math.pi * KB * T * l / HBAR, weights=w)


def stopping_length(terms, tolerance):
    """Apply the truncation rule to a sequence of weighted terms.

    Terms are accepted in order until ``SMALL_TERMS_TO_STOP`` consecutive
    terms are each smaller than ``tolerance`` times the accumulated sum.

    Returns
    -------
    n : int or None
        Number of terms to keep, or None if the rule did not fire within
        ``terms``.
    """
    total = comp = 0.0
    small = 0
    for i, t in enumerate(terms):
        # Neumaier compensated running sum
        s = total + t
        if abs(total) >= abs(t):
            comp += (total - s) + t
        else:
            comp += (t - s) + total
        total = s
        acc = total + comp
        if i > 0 and abs(t) <= tolerance * abs(acc):
            small += 1
        else:
            small = 0
        if small >= SMALL_TERMS_TO_STOP:
            return i + 1
    return None


def tail_estimate(terms):
    """Relative size of the neglected tail, from the decay of the last terms.

    Uses the geometric bound ``t_n r / (1 - r)`` with the observed ratio of
    the last two terms, doubled.  The terms of a Lifshitz sum decay like a
    polynomial times an exponential, for which the observed ratio only
    overestimates the future ratios.
    """
    total = math.fsum(terms)
    if total == 0.0 or len(terms) < 2:
        return 0.0
    last, prev = abs(terms[-1]), abs(terms[-2])
    if last == 0.0:
        return 0.0
    r = last / prev if prev > 0 else 1.0
    if r >= 1.0:
        return len(terms) * last / abs(total)
    return 2.0 * last * r / (1.0 - r) / abs(total)


def sum_matsubara_terms(term_block: Callable[[int, int], np.ndarray], tolerance, l_max=L_MAX, first_block=16):
    """Evaluate Matsubara terms in growing blocks until truncation fires.

    Parameters
    ----------
    term_block : callable
        ``term_block(l_start, l_stop)`` returns the already weighted terms
        for ``l_start <= l < l_stop``.
    tolerance : float
        Relative truncation tolerance.

    Returns
    -------
    terms : list of float
        Accepted terms in ascending l.  The list never depends on how the
        blocks were cut.
    """
    terms: list[float] = []
    block = first_block
    while len(terms) < l_max:
        stop = min(len(terms) + block, l_max)
        start = len(terms)
        terms.extend(float(t) for t in term_block(start, stop))
        n = stopping_length(terms, tolerance)
        if n is not None:
            return terms[:n]
        block *= 2
    return terms


def _ideal_metal_term(l, T, a):
    # both polarizations reflect perfectly: 2 y^2 / (e^y - 1)
    y_l = 2.0 * a * 2.0 * math.pi * KB * T * l / (HBAR * C)
    val, _ = quad(lambda y: 2.0 * y * y / math.expm1(y) if y > 0 else 0.0,
                  y_l, y_l + 80.0, epsabs=0.0, epsrel=1e-12, limit=200)
    return val * (0.5 if l == 0 else 1.0)


def build_spectrum(T, tolerance=1e-9, term: Callable[[int], float] | None = None, separation=100e-9):
    """Truncated Matsubara spectrum for temperature ``T``.

    The length is set by the truncation rule applied to ``term(l)``, the
    weighted contribution of index ``l``.  Without ``term`` the reference
    is the ideal-metal pressure series for a vacuum gap of ``separation``.
    """
    if not T > 0:
        raise DomainError(f"spectrum needs T > 0, got T={T}")
    if not 0 < tolerance < 1:
        raise DomainError("tolerance must lie in (0, 1)")
    if term is None:
        def term(l):
            return _ideal_metal_term(l, T, separation)

    def block(lo, hi):
        return [term(l) for l in range(lo, hi)]

    terms = sum_matsubara_terms(block, tolerance)
    return MatsubaraSpectrum.of_length(T, len(terms))
