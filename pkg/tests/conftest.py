import numpy as np
import pytest

import thermomap as tm


def cos_potential(x):
    return 0.2 * np.cos(2 * np.pi * x)


@pytest.fixture(scope="session")
def mp05():
    return tm.manneville_pomeau(0.5)


@pytest.fixture(scope="session")
def omega_a():
    return tm.omega_ab(0.75, 0.0)


@pytest.fixture(scope="session")
def Omega_a():
    return tm.omega_ab(0.25, 0.0)


@pytest.fixture(scope="session")
def compat_a(mp05, omega_a, Omega_a):
    return tm.check_compatibility(mp05, omega_a, Omega_a, c=0.1)


@pytest.fixture(scope="session")
def expansion05(mp05):
    return tm.estimate_expansion(mp05, rng=np.random.default_rng(202))


@pytest.fixture(scope="session")
def pot4096(omega_a):
    return tm.Potential.from_function(cos_potential, omega_a, 4096,
                                      rng=np.random.default_rng(7))


@pytest.fixture(scope="session")
def eig4096(mp05, pot4096):
    return tm.solve_eigendata(mp05, pot4096, 4096)


@pytest.fixture(scope="session")
def pot14(omega_a):
    return tm.Potential.from_function(cos_potential, omega_a, 2 ** 14,
                                      rng=np.random.default_rng(7))


@pytest.fixture(scope="session")
def eig14(mp05, pot14):
    return tm.solve_eigendata(mp05, pot14, 2 ** 14)


@pytest.fixture(scope="session")
def eig0_14(mp05, omega_a):
    f0 = tm.Potential.constant(0.0, omega_a, 2 ** 14)
    return f0, tm.solve_eigendata(mp05, f0, 2 ** 14)
