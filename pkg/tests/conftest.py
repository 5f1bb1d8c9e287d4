import numpy as np
import pytest

from casimir_graphene.experiment import SECOND_EXPERIMENT_T, second_experiment, theory_band

NM = 1e-9
SECOND_GRID = np.array([250, 300, 350, 400, 450, 500, 550, 600, 700]) * NM


@pytest.fixture(scope="session")
def second_bands():
    """Theory bands of the second experiment at 294 K and at T = 0 (expensive, shared)."""
    probe, sample, template = second_experiment()
    band_T = theory_band(probe, sample, template, SECOND_EXPERIMENT_T, SECOND_GRID)
    band_0 = theory_band(probe, sample, template, 0.0, SECOND_GRID)
    return band_T, band_0
