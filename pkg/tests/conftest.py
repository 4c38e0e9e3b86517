import pytest

from pamlab import EnvKind, RngStream, Torus, env_evolve, env_init


@pytest.fixture
def ring8():
    return Torus(1, 8)


@pytest.fixture
def ring16():
    return Torus(1, 16)


@pytest.fixture
def grid2d():
    return Torus(2, 6)


def make_traj(kind, torus, rho, t_end, seed, index=0):
    stream = RngStream(seed, index)
    state = env_init(kind, torus, rho, stream.child(0))
    return env_evolve(kind, state, t_end, stream.child(1))


@pytest.fixture
def isrw_traj(ring8):
    return make_traj(EnvKind.ISRW, ring8, 1.0, 3.0, 101)


@pytest.fixture
def sep_traj(ring16):
    return make_traj(EnvKind.SEP, ring16, 0.5, 4.0, 102)


@pytest.fixture
def svm_traj(ring16):
    return make_traj(EnvKind.SVM, ring16, 0.5, 4.0, 103)
