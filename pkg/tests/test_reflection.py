import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_graphene.core import C, DomainError, matsubara_frequency
from casimir_graphene.graphene import GrapheneSheet, PolarizationValues, polarization_zero_T
from casimir_graphene.materials import (
    SI_OMEGA_P_RANGE,
    Drude,
    Oscillator,
    Plasma,
    Vacuum,
    doped_si,
    sio2,
)
from casimir_graphene.reflection import (
    BarePlate,
    FreestandingGraphene,
    GrapheneCoatedFilm,
    GrapheneCoatedPlate,
    film_on_substrate_pair,
    freestanding_pair,
    fresnel_pair,
    graphene_coated_pair,
    interface_pair,
    reflection,
)
from tests.oracles import independent as ref

XI1 = matsubara_frequency(1, 300.0)
REAL = GrapheneSheet(0.29, 0.24)
PRISTINE = GrapheneSheet()


def constant_eps(eps):
    return Oscillator(((eps - 1.0, 1e30, 0.0),))


def test_fresnel_vacuum():
    r = fresnel_pair(Vacuum(), XI1, 1e7)
    assert r.r_tm == 0.0 and r.r_te == 0.0


def test_fresnel_ideal_metal_limit():
    r = fresnel_pair(constant_eps(1e20), XI1, 1e7)
    assert r.r_tm == pytest.approx(1.0, abs=1e-5)
    assert r.r_te == pytest.approx(-1.0, abs=1e-5)


def test_fresnel_static_eps4():
    r = fresnel_pair(constant_eps(4.0), 0.0, 1e7)
    assert r.r_tm == pytest.approx(0.6, rel=1e-15)
    assert r.r_te == 0.0


def test_static_metal_conventions():
    wp = 1.37e16
    drude = fresnel_pair(Drude(wp, 5.3e13), 0.0, 1e7)
    assert drude.r_tm == 1.0 and drude.r_te == 0.0
    plasma = fresnel_pair(Plasma(wp), 0.0, 1e7)
    kn = math.sqrt(1e14 + (wp / C) ** 2)
    assert plasma.r_tm == 1.0
    assert plasma.r_te == pytest.approx((1e7 - kn) / (1e7 + kn), rel=1e-14)


def test_transparent_sheet_equals_fresnel():
    for mat in (sio2(), Drude(1.37e16, 5.3e13), constant_eps(2.0)):
        a = graphene_coated_pair(REAL, mat, np.array([0.0, XI1]), np.array([1e6, 1e7]), 300.0, mode="none")
        b = fresnel_pair(mat, np.array([0.0, XI1]), np.array([1e6, 1e7]))
        np.testing.assert_array_equal(a.r_tm, b.r_tm)
        np.testing.assert_array_equal(a.r_te, b.r_te)


@pytest.mark.parametrize("mode", ["full", "zero_T", "implicit"])
def test_coated_on_vacuum_equals_freestanding(mode):
    xi = np.array([0.0, XI1, 7 * XI1])
    k = np.array([3e6, 1e7, 4e7])
    a = graphene_coated_pair(REAL, Vacuum(), xi, k, 300.0, mode)
    b = freestanding_pair(REAL, xi, k, 300.0, mode)
    np.testing.assert_allclose(a.r_tm, b.r_tm, rtol=1e-14)
    np.testing.assert_allclose(a.r_te, b.r_te, rtol=1e-14)


def test_pristine_on_eps2_by_hand():
    xi, k = 3e14, 2e7
    p00, p = ref.zero_T(0.0, xi, k)
    q = math.sqrt(k * k + (xi / C) ** 2)
    kn = math.sqrt(k * k + 2.0 * (xi / C) ** 2)
    r_tm = (k * k * (2.0 * q - kn) + q * kn * p00) / (k * k * (2.0 * q + kn) + q * kn * p00)
    r_te = (k * k * (q - kn) - p) / (k * k * (q + kn) + p)
    r = graphene_coated_pair(PRISTINE, constant_eps(2.0), xi, k, 0.0, mode="zero_T")
    assert r.r_tm == pytest.approx(r_tm, rel=1e-13)
    assert r.r_te == pytest.approx(r_te, rel=1e-12)


def test_freestanding_limits():
    k = 1e7
    big = PolarizationValues(np.array(1e30), np.array(0.0))
    r = freestanding_pair(PRISTINE, 0.0, k, 300.0, values=big)
    assert r.r_tm == pytest.approx(1.0, abs=1e-15)
    none = PolarizationValues(np.array(0.0), np.array(0.0))
    r = freestanding_pair(PRISTINE, XI1, k, 300.0, values=none)
    assert r.r_tm == 0.0 and r.r_te == 0.0


def test_freestanding_pristine_T0_generic_point():
    xi, k = 2e14, 5e6
    a = freestanding_pair(PRISTINE, xi, k, 0.0)
    b = graphene_coated_pair(PRISTINE, Vacuum(), xi, k, 0.0)
    assert a.r_tm == pytest.approx(float(b.r_tm), rel=1e-15)
    assert a.r_te == pytest.approx(float(b.r_te), rel=1e-15)


def test_film_thick_limit_and_index_matching():
    xi, k = np.array([XI1, 5e15]), np.array([1e7, 3e7])
    thick = film_on_substrate_pair(REAL, sio2(), 1.0, doped_si(5e14), xi, k, 300.0)
    coated = graphene_coated_pair(REAL, sio2(), xi, k, 300.0)
    np.testing.assert_allclose(thick.r_tm, coated.r_tm, rtol=1e-14)
    np.testing.assert_allclose(thick.r_te, coated.r_te, rtol=1e-14)
    matched = film_on_substrate_pair(REAL, sio2(), 300e-9, sio2(), xi, k, 300.0)
    np.testing.assert_allclose(matched.r_tm, coated.r_tm, rtol=1e-14)
    np.testing.assert_allclose(matched.r_te, coated.r_te, rtol=1e-14)


def test_interface_same_material_is_transparent():
    r = interface_pair(sio2(), sio2(), np.array([0.0, XI1]), 1e7)
    np.testing.assert_array_equal(r.r_tm, 0.0)
    np.testing.assert_array_equal(r.r_te, 0.0)


def test_film_si_endpoints_bracket():
    xi, k = matsubara_frequency(np.arange(0, 3), 300.0), 5e6
    lo, hi = (film_on_substrate_pair(REAL, sio2(), 300e-9, doped_si(wp), xi, k, 300.0) for wp in SI_OMEGA_P_RANGE)
    assert np.all(lo.r_tm[1:] != hi.r_tm[1:])
    # more free carriers reflect more
    assert np.all(hi.r_tm[1:] > lo.r_tm[1:])


def test_printed_te_variant_differs():
    xi, k = XI1, 1e7
    conv = interface_pair(sio2(), doped_si(5e14), xi, k)
    printed = interface_pair(sio2(), doped_si(5e14), xi, k, te_variant="printed")
    assert conv.r_tm == printed.r_tm
    assert conv.r_te != printed.r_te
    with pytest.raises(ValueError):
        interface_pair(sio2(), sio2(), xi, k, te_variant="other")


def test_film_requires_positive_thickness():
    with pytest.raises(DomainError):
        GrapheneCoatedFilm(REAL, sio2(), 0.0, doped_si(5e14))
    with pytest.raises(DomainError):
        film_on_substrate_pair(REAL, sio2(), -1e-9, sio2(), XI1, 1e7, 300.0)


def test_dispatch_and_domain():
    for s in (BarePlate(sio2()), FreestandingGraphene(REAL), GrapheneCoatedPlate(REAL, sio2()),
              GrapheneCoatedFilm(REAL, sio2(), 3e-7, doped_si(5e14))):
        r = reflection(s, XI1, 1e7, 300.0)
        assert np.isfinite(r.r_tm) and np.isfinite(r.r_te)
    with pytest.raises(TypeError):
        reflection(object(), XI1, 1e7, 300.0)
    with pytest.raises(DomainError):
        fresnel_pair(sio2(), XI1, 0.0)
    with pytest.raises(ValueError):
        graphene_coated_pair(REAL, sio2(), XI1, 1e7, 300.0, mode="bogus")


sheets = st.builds(GrapheneSheet, st.floats(0.0, 0.5), st.floats(0.0, 0.4))
materials = st.sampled_from([sio2(), Drude(1.37e16, 5.3e13), Plasma(1.37e16), constant_eps(1.0),
                             constant_eps(11.7), doped_si(5e14)])


@settings(max_examples=60, deadline=None)
@given(sheets, materials, st.integers(0, 50), st.floats(4.0, 9.0), st.sampled_from(["zero_T", "implicit"]))
def test_coated_bounded_and_signed(sheet, mat, l, log_k, mode):
    xi = matsubara_frequency(l, 300.0)
    r = graphene_coated_pair(sheet, mat, xi, 10.0**log_k, 300.0, mode)
    assert -1e-15 <= r.r_tm <= 1.0 and -1.0 <= r.r_te <= 1e-15


@settings(max_examples=20, deadline=None)
@given(sheets, st.integers(0, 20), st.floats(5.0, 9.0), st.floats(1e-8, 1e-5))
def test_film_bounded(sheet, l, log_k, thickness):
    xi = matsubara_frequency(l, 300.0)
    r = film_on_substrate_pair(sheet, sio2(), thickness, doped_si(1e15), xi, 10.0**log_k, 300.0)
    assert abs(r.r_tm) <= 1.0 and abs(r.r_te) <= 1.0


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 30), st.floats(5.0, 8.0))
def test_full_mode_bounded(l, log_k):
    xi = matsubara_frequency(l, 300.0)
    for s in (FreestandingGraphene(REAL), GrapheneCoatedPlate(REAL, sio2())):
        r = reflection(s, xi, 10.0**log_k, 300.0)
        assert 0.0 <= r.r_tm <= 1.0 and -1.0 <= r.r_te <= 0.0


def test_zero_T_tensor_helper_consistent():
    v = polarization_zero_T(PRISTINE, XI1, 1e7)
    r = freestanding_pair(PRISTINE, XI1, 1e7, 0.0, mode="zero_T")
    q = math.sqrt(1e14 + (XI1 / C) ** 2)
    assert r.r_tm == pytest.approx(q * v.pi00 / (q * v.pi00 + 2e14), rel=1e-15)
