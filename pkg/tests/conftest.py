from __future__ import annotations

import pytest

from cgmy_atm.models import CgmyParams, QuadratureConfig


def params(C: float = 1.0, G: float = 3.0, M: float = 5.0, Y: float = 1.5) -> CgmyParams:
    return CgmyParams(C=C, G=G, M=M, Y=Y)


@pytest.fixture
def p15() -> CgmyParams:
    return params(Y=1.5)


@pytest.fixture
def p17() -> CgmyParams:
    return params(Y=1.7)


@pytest.fixture
def p13() -> CgmyParams:
    return params(Y=1.3)


@pytest.fixture
def qcfg() -> QuadratureConfig:
    return QuadratureConfig()
