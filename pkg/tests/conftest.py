import numpy as np
import pytest

from popdyn import analyze, build_queuing_preset

RHO2, P2, PS, C = 0.4, 0.6, 1.0, 2.0
RHO3, P3 = 0.3, 0.7


def queuing2(alpha_cm: float, rho: float = RHO2):
    return build_queuing_preset(rho, 1.0 - rho, PS, C, [1.0 - alpha_cm, alpha_cm])


def queuing3(alpha_cs: float, alpha_cm: float, alpha_ac: float):
    return build_queuing_preset(RHO3, P3, PS, C, [alpha_cs, alpha_cm, alpha_ac])


def region_of(regions, labels):
    """Region with the given 1-based action profile."""
    e = tuple(a - 1 for a in labels)
    for r in regions:
        if r.e == e:
            return r
    raise KeyError(labels)


def random_simplex(rng, k, n):
    return rng.dirichlet(np.ones(k), size=n)


@pytest.fixture(scope="session")
def cyclic2():
    g = queuing2(0.8)
    return g, analyze(g)


@pytest.fixture(scope="session")
def classical2():
    g = queuing2(0.5)
    return g, analyze(g)


@pytest.fixture(scope="session")
def filippov2_case():
    g = queuing2(0.2)
    return g, analyze(g)
