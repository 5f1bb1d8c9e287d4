import math

import numpy as np
import pytest

from casimir_graphene.core import C, HBAR, DomainError
from casimir_graphene.graphene import GrapheneSheet
from casimir_graphene.lifshitz import (
    CavityConfig,
    entropy,
    free_energy,
    normalization_B,
    pressure,
    pressure_implicit_only,
    pressure_T0,
    thermal_correction,
)
from casimir_graphene.materials import Oscillator, Plasma, Vacuum, au_drude, au_plasma, sio2
from casimir_graphene.reflection import BarePlate, FreestandingGraphene, GrapheneCoatedPlate

# fixed-grid oracle, tests/oracles/freeze.py (agrees to 1e-10 when frozen)
PRISTINE_F_200NM = -2.4663330204988514e-09

PRISTINE = FreestandingGraphene(GrapheneSheet())
REAL = FreestandingGraphene(GrapheneSheet(0.29, 0.24))
AU = BarePlate(au_drude())
IDEAL = BarePlate(Oscillator(((1e8 - 1.0, 1e30, 0.0),)))
VAC = BarePlate(Vacuum())


def casimir_pressure(a):
    return -math.pi**2 * HBAR * C / (240.0 * a**4)


def casimir_energy(a):
    return -math.pi**2 * HBAR * C / (720.0 * a**3)


def test_config_validation():
    with pytest.raises(DomainError):
        CavityConfig(AU, AU, 0.0, 300.0)
    with pytest.raises(DomainError):
        CavityConfig(AU, AU, 1e-7, -1.0)
    with pytest.raises(DomainError):
        CavityConfig(AU, AU, 1e-7, 300.0, tolerance=2.0)
    cfg = CavityConfig(AU, REAL, 1e-7, 300.0)
    assert cfg.has_graphene and not CavityConfig(AU, AU, 1e-7, 300.0).has_graphene
    assert cfg.at(a=2e-7).a == 2e-7 and cfg.at(T=0.0).T == 0.0


def test_vacuum_sides_give_zero():
    cfg = CavityConfig(VAC, VAC, 1e-7, 300.0)
    res = pressure(cfg)
    assert res.value == 0.0 and res.free_energy == 0.0
    assert pressure_T0(cfg).value == 0.0
    with pytest.raises(ZeroDivisionError):
        thermal_correction(cfg)


def test_ideal_metal_T0():
    a = 1e-6
    res = pressure_T0(CavityConfig(IDEAL, IDEAL, a, 0.0))
    assert res.value == pytest.approx(casimir_pressure(a), rel=2e-3)
    assert res.free_energy == pytest.approx(casimir_energy(a), rel=5e-3)


def test_ideal_metal_low_T_proxy():
    a = 1e-6
    res = pressure(CavityConfig(IDEAL, IDEAL, a, 1.0))
    assert res.value == pytest.approx(casimir_pressure(a), rel=5e-3)
    assert res.free_energy == pytest.approx(casimir_energy(a), rel=5e-3)
    assert res.truncation_error < 1e-6


def test_drude_pair_continuity_in_T():
    cfg = CavityConfig(AU, AU, 5e-7, 1.0)
    assert pressure(cfg).value == pytest.approx(pressure_T0(cfg).value, rel=1e-2)


def test_zero_T_routing():
    cfg = CavityConfig(AU, REAL, 3e-7, 0.0)
    assert pressure(cfg).value == pressure_T0(cfg).value
    with pytest.raises(DomainError):
        free_energy(cfg)


def test_implicit_equals_full_without_graphene():
    cfg = CavityConfig(AU, BarePlate(sio2()), 4e-7, 300.0)
    assert pressure_implicit_only(cfg).value == pressure(cfg).value


def test_implicit_tensor_variants_agree_without_fermi_sea():
    side = FreestandingGraphene(GrapheneSheet(0.29, 0.02))
    cfg = CavityConfig(AU, side, 4e-7, 300.0)
    a = pressure_implicit_only(cfg, "T0_limit").value
    b = pressure_implicit_only(cfg, "zero_T").value
    assert a == b


def test_pristine_pair_free_energy_oracle():
    cfg = CavityConfig(PRISTINE, PRISTINE, 200e-9, 300.0)
    assert free_energy(cfg) == pytest.approx(PRISTINE_F_200NM, rel=1e-6)


def test_pristine_pair_normalized_pressure():
    a = 100e-9
    res = pressure(CavityConfig(PRISTINE, PRISTINE, a, 300.0))
    B = normalization_B(a, 300.0)
    assert B == pytest.approx(1.380649e-23 * 300.0 / (8 * math.pi * a**3), rel=1e-15)
    assert 0.0 < -res.value < -casimir_pressure(a)
    assert res.te_static is not None and res.te_static_spread is not None
    assert res.per_l.size == res.l_terms_used
    assert math.fsum(res.per_l) == pytest.approx(res.value, rel=1e-14)


def test_results_attractive():
    for side_2 in (PRISTINE, REAL, GrapheneCoatedPlate(GrapheneSheet(0.29, 0.24), sio2())):
        for T in (0.0, 300.0):
            res = pressure(CavityConfig(AU, side_2, 3e-7, T))
            assert res.value < 0 and res.free_energy < 0


def test_tolerance_controls_truncation():
    cfg = CavityConfig(AU, PRISTINE, 3e-7, 300.0)
    tight = pressure(cfg)
    loose = pressure(CavityConfig(AU, PRISTINE, 3e-7, 300.0, tolerance=1e-4))
    assert loose.l_terms_used <= tight.l_terms_used
    assert loose.value == pytest.approx(tight.value, rel=1e-3)
    assert tight.truncation_error < 1e-8


def test_plasma_and_drude_gold_agree_for_graphene():
    cfg_d = CavityConfig(AU, PRISTINE, 5e-7, 300.0)
    cfg_p = CavityConfig(BarePlate(au_plasma()), PRISTINE, 5e-7, 300.0)
    assert pressure(cfg_p).value == pytest.approx(pressure(cfg_d).value, rel=1e-2)


def test_thermal_correction_variants():
    cfg = CavityConfig(PRISTINE, PRISTINE, 1e-7, 300.0)
    p0 = pressure_T0(cfg).value
    total = thermal_correction(cfg, p0=p0)
    implicit = thermal_correction(cfg, "implicit", p0=p0)
    assert total > implicit > 0
    with pytest.raises(ValueError):
        thermal_correction(cfg, "other", p0=p0)


def test_entropy_ideal_metal_nonnegative():
    # plasma sheets with omega_p >> c / a reflect both polarizations fully at every
    # frequency; a large-eps dielectric would not (r_te = 0 at xi = 0)
    ideal = BarePlate(Plasma(1e19))
    for T in (50.0, 150.0, 300.0):
        res = entropy(CavityConfig(ideal, ideal, 2e-6, T))
        assert res.value >= -res.error
    with pytest.raises(DomainError):
        entropy(CavityConfig(ideal, ideal, 2e-6, 1.0), dT=2.0)


def test_entropy_matches_free_energy_difference():
    cfg = CavityConfig(PRISTINE, PRISTINE, 5e-7, 300.0)
    res = entropy(cfg)
    fd = -(free_energy(cfg.at(T=301.0)) - free_energy(cfg.at(T=299.0))) / 2.0
    assert res.value == pytest.approx(fd, rel=1e-4)
