import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hawkes_scaling import ExpKernel, HawkesModel, KernelMatrix, LeadLagModel, MicrostructureModel, ZeroKernel

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def micro():
    return MicrostructureModel(1.0, ExpKernel(0.5, 1.0))


@pytest.fixture(scope="session")
def micro_hawkes(micro):
    return micro.hawkes


@pytest.fixture(scope="session")
def epps():
    h = ExpKernel(0.5, 1.0)
    return LeadLagModel(1.0, 1.0, h, h)


@pytest.fixture(scope="session")
def poisson2():
    return HawkesModel([1.0, 2.0], KernelMatrix.zeros(2))


def exp_model(mu, alpha, beta):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d = alpha.shape[0]
    rows = tuple(tuple(ExpKernel(alpha[i, j], beta[i, j]) if alpha[i, j] > 0 else ZeroKernel()
                       for j in range(d)) for i in range(d))
    return HawkesModel(mu, KernelMatrix(rows))
