import numpy as np
import pytest

from bibolilo.kernel import MatrixMeasure
from bibolilo.signals import TimeGrid, ValueSpace
from bibolilo.sysnode import DiscreteSystemNode


def random_kernel(rng, n=None, m=None, dt=0.1, n_density=None, with_delays=True):
    """Feedthrough atom at 0, density with D_0 = 0, delay atoms past the density."""
    n = n or int(rng.integers(1, 5))
    m = m or int(rng.integers(1, 5))
    L = n_density or int(rng.integers(2, 12))
    dens = rng.standard_normal((L, n, m)) * (rng.random((L, n, m)) < 0.7)
    dens[0] = 0.0
    atoms = [(0.0, rng.standard_normal((n, m)))]
    if with_delays:
        for lag in sorted(rng.choice(np.arange(L, L + 8), size=int(rng.integers(0, 3)), replace=False)):
            atoms.append((lag * dt, rng.standard_normal((n, m))))
    return MatrixMeasure.from_parts(atoms, TimeGrid(dt, L), dens, shape=(n, m))


def random_space(rng, dim):
    kind = ['sup', 'weighted-1', 'weighted-2'][int(rng.integers(3))]
    return ValueSpace(dim, kind, rng.uniform(0.2, 3.0, dim))


def random_system(rng, nx=None, m=None, n=None, radius=0.9, dt=None, spaces=True):
    nx = nx or int(rng.integers(1, 9))
    m = m or int(rng.integers(1, 4))
    n = n or int(rng.integers(1, 4))
    dt = dt or float(rng.choice([0.05, 0.1, 0.25]))
    A = rng.standard_normal((nx, nx))
    rho = max(abs(np.linalg.eigvals(A)))
    F = A * (radius * rng.uniform(0.3, 1.0) / rho) if rho > 0 else A
    G = dt * rng.standard_normal((nx, m))
    H = rng.standard_normal((n, nx))
    J = rng.standard_normal((n, m)) * (rng.random() < 0.5)
    if spaces:
        X = ValueSpace.l2(nx, rng.uniform(0.2, 3.0, nx))
        U, Y = random_space(rng, m), random_space(rng, n)
    else:
        X, U, Y = ValueSpace.l2(nx), ValueSpace.sup(m), ValueSpace.sup(n)
    return DiscreteSystemNode(F, G, H, J, dt, X, U, Y)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
