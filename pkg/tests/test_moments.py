import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfock import (
    PreconditionError,
    build_fock,
    crossing_polynomial,
    enumerate_pairings,
    moment_pairing_formula,
    vacuum_state,
    wick,
)
from qfock.errors import CapExceeded
from qfock.moments import catalan, double_factorial, odd_moment
from qfock.operators import identity

from conftest import make_rep


def _brute_matchings(n):
    """All perfect matchings of 1..2n via set partitions, independent of the DFS."""
    pts = list(range(1, 2 * n + 1))
    seen = set()
    for perm in itertools.permutations(pts):
        m = tuple(sorted(tuple(sorted(perm[2 * k: 2 * k + 2])) for k in range(n)))
        seen.add(m)
    return seen


def _crossings(pairs):
    return sum(1 for (a, b), (c, d) in itertools.combinations(pairs, 2)
               if a < c < b < d or c < a < d < b)


def test_n2_by_hand():
    ps = enumerate_pairings(2)
    assert [p.pairs for p in ps] == [((1, 2), (3, 4)), ((1, 3), (2, 4)), ((1, 4), (2, 3))]
    assert sorted(p.crossings for p in ps) == [0, 0, 1]


def test_n3_polynomial():
    ps = enumerate_pairings(3)
    assert len(ps) == 15
    assert crossing_polynomial(3) == [5, 6, 3, 1]


@pytest.mark.parametrize("n", range(0, 6))
def test_against_brute_force(n):
    ps = enumerate_pairings(n)
    got = {p.pairs for p in ps}
    assert len(got) == len(ps) == double_factorial(2 * n - 1)
    if n <= 4:
        assert got == _brute_matchings(n)
    for p in ps:
        assert p.crossings == _crossings(p.pairs)
        assert 0 <= p.crossings <= n * (n - 1) // 2
        flat = sorted(x for pr in p.pairs for x in pr)
        assert flat == list(range(1, 2 * n + 1))


@pytest.mark.parametrize("n", range(1, 7))
def test_polynomial_specializations(n):
    c = crossing_polynomial(n)
    assert sum(c) == double_factorial(2 * n - 1)
    assert c[0] == catalan(n)


def test_cap():
    with pytest.raises(CapExceeded):
        crossing_polynomial(9)


def test_deterministic_order():
    a = [p.pairs for p in enumerate_pairings(4)]
    assert a == [p.pairs for p in enumerate_pairings(4)]
    assert a[0] == ((1, 2), (3, 4), (5, 6), (7, 8))


def test_tracial_moments():
    rep = make_rep(0.0, 1)
    e = np.array([1.0])
    for q in (-0.7, 0.0, 0.5, 0.9):
        assert abs(moment_pairing_formula(rep, q, e, e, e, e) - (2 + q)) < 1e-14
        ref6 = 5 + 6 * q + 3 * q ** 2 + q ** 3
        assert abs(moment_pairing_formula(rep, q, *[e] * 6) - ref6) < 1e-13
    assert moment_pairing_formula(rep, 0.3) == 1


def test_two_point_matches_expansion():
    q = 0.2
    rep = make_rep(q, 1, [(2, 1)])
    F = build_fock(3, q, 2)
    r = np.random.default_rng(3)
    for _ in range(5):
        x, y = r.normal(size=(2, 3)) + 1j * r.normal(size=(2, 3))
        fock = vacuum_state(F, wick(F, rep, x) @ wick(F, rep, y))
        assert abs(moment_pairing_formula(rep, q, x, y) - fock) < 1e-12


def test_odd():
    rep = make_rep(0.1, 1)
    with pytest.raises(PreconditionError):
        moment_pairing_formula(rep, 0.1, [1.0], [1.0], [1.0])
    assert odd_moment(rep, 0.1, [1.0]) == 0
    F = build_fock(1, 0.1, 5)
    w = wick(F, rep, [1.0])
    x = identity(F)
    for k in range(1, 6):
        x = x @ w
        if k % 2:
            assert abs(vacuum_state(F, x)) < 1e-12


def test_free_case_noncrossing():
    rep = make_rep(0.0, 1)
    e = np.array([1.0])
    for n in range(1, 5):
        assert abs(moment_pairing_formula(rep, 0.0, *[e] * (2 * n)) - catalan(n)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([-0.5, 0.0, 0.5]), st.sampled_from([1.5, 2.0, 4.0]),
       st.sampled_from([2, 4, 6]), st.integers(0, 2 ** 31))
def test_oracle_matches_fock(q, lam, m, seed):
    rep = make_rep(q, 1, [(lam, 1)])
    F = build_fock(3, q, 4)
    r = np.random.default_rng(seed)
    letters = [rep.basis_vector(int(i)) for i in r.integers(0, 3, size=m)]
    x = identity(F)
    for v in letters:
        x = x @ wick(F, rep, v)
    assert abs(moment_pairing_formula(rep, q, *letters) - vacuum_state(F, x)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([-0.5, 0.0, 0.5]), st.integers(0, 2 ** 31))
def test_oracle_generic_letters(q, seed):
    # non-eigenvector letters on the tested domain
    rep = make_rep(q, 1, [(2, 1)])
    F = build_fock(3, q, 4)
    r = np.random.default_rng(seed)
    letters = list(r.normal(size=(4, 3)) + 1j * r.normal(size=(4, 3)))
    x = identity(F)
    for v in letters:
        x = x @ wick(F, rep, v)
    scale = np.prod([np.linalg.norm(v) for v in letters])
    assert abs(moment_pairing_formula(rep, q, *letters) - vacuum_state(F, x)) < 1e-10 * scale
