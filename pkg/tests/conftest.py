import numpy as np
import pytest

from qfock import RepresentationSpec, build_fock, build_representation


def make_rep(q, fixed_dim=0, blocks=()):
    return build_representation(RepresentationSpec(q, fixed_dim, tuple(blocks)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def free_pair():
    rep = make_rep(0.5, 1)
    return rep, build_fock(1, 0.5, 6)


def rand_vec(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance as acc
    except ImportError:
        return
    if not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acc.RESULTS):
        terminalreporter.write_line(acc.format_line(k))
