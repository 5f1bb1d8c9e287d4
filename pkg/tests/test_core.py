import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_graphene import core
from casimir_graphene.core import (
    CONSTANTS,
    DomainError,
    MatsubaraSpectrum,
    build_spectrum,
    matsubara_frequency,
    stopping_length,
    sum_matsubara_terms,
    tail_estimate,
)

# 2 pi k_B 300 / hbar from the SI defining constants, by hand
XI1_300K = 2.0 * math.pi * 1.380649e-23 * 300.0 / (6.62607015e-34 / (2.0 * math.pi))


def test_constants():
    assert CONSTANTS.alpha == pytest.approx(7.2973525693e-3, rel=1e-12)
    assert CONSTANTS.v_F_default == CONSTANTS.c / 300.0
    assert core.EV == 1.602176634e-19


def test_matsubara_examples():
    assert matsubara_frequency(0, 300.0) == 0.0
    assert matsubara_frequency(1, 300.0) == pytest.approx(XI1_300K, rel=1e-14)
    assert matsubara_frequency(1, 300.0) == pytest.approx(2.47e14, rel=1e-3)
    assert matsubara_frequency(2, 300.0) == 2.0 * matsubara_frequency(1, 300.0)


@pytest.mark.parametrize("T", [0.0, -1.0, float("nan")])
def test_matsubara_rejects_non_positive_T(T):
    with pytest.raises(DomainError):
        matsubara_frequency(1, T)


def test_matsubara_rejects_negative_index():
    with pytest.raises(DomainError):
        matsubara_frequency(-1, 300.0)


@given(st.integers(0, 10_000), st.floats(0.1, 1000.0))
def test_matsubara_linear_in_l_and_T(l, T):
    xi = matsubara_frequency(l, T)
    assert matsubara_frequency(2 * l, T) == pytest.approx(2.0 * xi, rel=1e-15)
    assert matsubara_frequency(l, 2.0 * T) == pytest.approx(2.0 * xi, rel=1e-15)


def test_matsubara_vectorized():
    xi = matsubara_frequency(np.arange(4), 300.0)
    np.testing.assert_allclose(xi, np.arange(4) * XI1_300K, rtol=1e-14)


def test_spectrum_weights_and_frequencies():
    s = MatsubaraSpectrum.of_length(300.0, 5)
    assert len(s) == 5
    assert s.frequencies[0] == 0.0 and s.weights[0] == 0.5
    assert np.all(s.weights[1:] == 1.0)
    np.testing.assert_allclose(s.frequencies, matsubara_frequency(np.arange(5), 300.0), rtol=1e-15)


def test_build_spectrum_last_term_below_tolerance():
    s = build_spectrum(300.0, 1e-9)
    terms = [core._ideal_metal_term(l, 300.0, 100e-9) for l in range(2 * len(s))]
    partial = math.fsum(terms[: len(s)])
    assert terms[len(s) - 1] < 1e-9 * partial
    # the neglected tail is of the same order
    assert math.fsum(terms[len(s):]) < 1e-8 * partial


def test_build_spectrum_monotone_in_tolerance_and_T():
    fine = build_spectrum(300.0, 1e-9)
    coarse = build_spectrum(300.0, 1e-3)
    hot = build_spectrum(600.0, 1e-9)
    assert len(coarse) <= len(fine)
    assert len(hot) < len(fine)
    # prefix stability
    np.testing.assert_array_equal(coarse.frequencies, fine.frequencies[: len(coarse)])
    assert np.all(np.diff(fine.frequencies) > 0)


@pytest.mark.parametrize("T, tol", [(0.0, 1e-9), (300.0, 0.0), (300.0, 1.0)])
def test_build_spectrum_domain(T, tol):
    with pytest.raises(DomainError):
        build_spectrum(T, tol)


def test_stopping_length_needs_three_small_terms():
    terms = [1.0, 0.5, 1e-12, 1e-12, 0.1, 1e-12, 1e-12, 1e-12, 5.0]
    assert stopping_length(terms, 1e-9) == 8
    assert stopping_length(terms[:7], 1e-9) is None


@given(st.floats(0.05, 0.95), st.floats(1e-12, 1e-4))
def test_stopping_length_geometric(r, tol):
    terms = [r**n for n in range(5000)]
    n = stopping_length(terms, tol)
    assert n is not None
    partial = math.fsum(terms[:n])
    assert all(t <= tol * partial * (1 + 1e-12) for t in terms[n - 3:n])
    assert terms[n - 4] > tol * math.fsum(terms[: n - 3])


@given(st.integers(1, 40))
@settings(max_examples=20)
def test_sum_terms_independent_of_blocking(first_block):
    def block(lo, hi):
        return [math.exp(-0.3 * l) * (1 + l) for l in range(lo, hi)]

    ref = sum_matsubara_terms(block, 1e-10, first_block=16)
    assert sum_matsubara_terms(block, 1e-10, first_block=first_block) == ref


def test_tail_estimate_geometric():
    r = 0.5
    terms = [r**n for n in range(30)]
    tail = r**30 / (1 - r) / math.fsum(terms)
    est = tail_estimate(terms)
    assert tail <= est <= 4 * tail
    assert tail_estimate([1.0]) == 0.0
