import math

import numpy as np
import pytest

from laserspin import PhysicalConfig
from laserspin.model import CIRCULAR_EPSILON


def brute_force_k(m, terms=400):
    """Maclaurin series of K(m) = pi/2 sum [(2n-1)!!/(2n)!!]^2 m^n."""
    coeff, out = 1.0, [1.0]
    for n in range(1, terms):
        coeff *= ((2 * n - 1) / (2 * n)) ** 2
        out.append(coeff * m**n)
    return 0.5 * math.pi * math.fsum(out)


def rk4_jacobi(u_targets, m, h=1e-3):
    """sn, cn, dn from classical RK4 on sn' = cn dn, cn' = -sn dn,
    dn' = -m sn cn, started at u = 0.  ``u_targets`` must be >= 0."""
    def f(y):
        s, c, d = y
        return np.array([c * d, -s * d, -m * s * c])

    out = {}
    y, u = np.array([0.0, 1.0, 1.0]), 0.0
    for target in sorted(u_targets):
        while u < target:
            step = min(h, target - u)
            k1 = f(y)
            k2 = f(y + 0.5 * step * k1)
            k3 = f(y + 0.5 * step * k2)
            k4 = f(y + step * k3)
            y = y + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            u += step
        out[target] = y.copy()
    return out


@pytest.fixture
def circular():
    return PhysicalConfig(eta=0.3, epsilon=CIRCULAR_EPSILON, kappa=1.0)


@pytest.fixture
def linear():
    return PhysicalConfig(eta=0.3, epsilon=0.0)
