import numpy as np
import pytest

from frontlab import HFunction, KineticsParams, compute_separatrix

# symmetric reference kinetics: exchange symmetry forces the diagonal
# separatrix, the saddle at (1/3, 1/3), and a zero-speed wave
P_SYM = dict(D1=1.0, D2=1.0, R1=1.0, R2=1.0, a1=1.0, b1=2.0, a2=2.0, b2=1.0)

# asymmetric admissible set with saddle (0.5, 0.25)
P_ASYM = dict(D1=1.0, D2=1.0, R1=1.0, R2=1.0, a1=1.0, b1=2.0, a2=1.5, b2=1.0)


@pytest.fixture(scope="session")
def p_sym():
    return KineticsParams(**P_SYM)


@pytest.fixture(scope="session")
def p_asym():
    return KineticsParams(**P_ASYM)


@pytest.fixture(scope="session")
def sep_sym(p_sym):
    return compute_separatrix(p_sym)


@pytest.fixture(scope="session")
def sep_asym(p_asym):
    return compute_separatrix(p_asym)


@pytest.fixture(scope="session")
def h_sym(sep_sym):
    return HFunction(sep_sym)


@pytest.fixture(scope="session")
def h_asym(sep_asym):
    return HFunction(sep_asym)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260822)
