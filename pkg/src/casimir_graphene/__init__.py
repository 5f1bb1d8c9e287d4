"""Thermal Casimir interaction in graphene systems.

Lifshitz theory on the imaginary frequency axis with the exact
finite-temperature polarization tensor of gapped, doped graphene.
"""

from casimir_graphene.core import (
    CONSTANTS,
    EV,
    MatsubaraSpectrum,
    build_spectrum,
    matsubara_frequency,
)
from casimir_graphene.graphene import (
    GrapheneSheet,
    PolarizationValues,
    nonlocal_permittivities,
    polarization_full,
    polarization_T0_limit,
    polarization_thermal,
    polarization_zero_T,
    psi,
)
from casimir_graphene.lifshitz import (
    CavityConfig,
    PressureResult,
    entropy,
    free_energy,
    pressure,
    pressure_implicit_only,
    pressure_T0,
    thermal_correction,
)

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "EV",
    "MatsubaraSpectrum",
    "build_spectrum",
    "matsubara_frequency",
    "GrapheneSheet",
    "PolarizationValues",
    "nonlocal_permittivities",
    "polarization_full",
    "polarization_T0_limit",
    "polarization_thermal",
    "polarization_zero_T",
    "psi",
    "CavityConfig",
    "PressureResult",
    "entropy",
    "free_energy",
    "pressure",
    "pressure_implicit_only",
    "pressure_T0",
    "thermal_correction",
]
