import numpy as np
import pytest

from molspin import scenarios
from molspin.angular import build_basis
from molspin.molecule import get_molecule


@pytest.fixture(scope="session")
def krb():
    return get_molecule("KRb")


@pytest.fixture(scope="session")
def yo():
    return get_molecule("YO")


@pytest.fixture(scope="session")
def yo_basis(yo):
    return build_basis(yo, 3)


@pytest.fixture(scope="session")
def krb_stark_track():
    """KRb Ising/transition states along E in [0, 30] kV/cm at 400 G."""
    Es = np.arange(0.0, 30.01, 0.25)
    return Es, scenarios.krb_ising_track(Es)


@pytest.fixture(scope="session")
def yo_crossing_5():
    return scenarios.yo_crossing(5.0)


@pytest.fixture(scope="session")
def krb_dressed():
    return scenarios.krb_dressed_setup()
