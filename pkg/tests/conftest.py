import math

import pytest
from hypothesis import HealthCheck, settings

from passagekit import CompoundPoissonExp, Gamma, Stable, stable_half

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SQRT2 = math.sqrt(2.0)


def all_kinds():
    return [
        Stable(alpha=0.3, s=2.0),
        stable_half(),
        Stable(alpha=0.8),
        Gamma(a=1.0, theta=1.0),
        Gamma(a=2.5, theta=0.3, drift_b=0.1),
        CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5),
        CompoundPoissonExp(rate=3.0, eta=0.2),
    ]


@pytest.fixture
def half():
    return stable_half()


@pytest.fixture
def gamma11():
    return Gamma(a=1.0, theta=1.0)


@pytest.fixture
def cp_drift():
    return CompoundPoissonExp(rate=1.0, eta=1.0, drift_b=0.5)
