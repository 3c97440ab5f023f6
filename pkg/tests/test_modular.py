import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfock import (
    Monomial,
    PreconditionError,
    StabilityError,
    StablePolynomial,
    adjoint_q,
    apply_I,
    apply_U,
    build_fock,
    centralizer_residual,
    identity,
    kms_residual,
    modular_conjugation,
    modular_data,
    modular_flow,
    q_norm,
    realize_stable,
    stable_monomials,
    tomita_residual,
    vacuum_state,
    wick,
    wick_word,
)
from qfock.errors import CapExceeded
from qfock.modular import (
    T_GRID,
    delta_power,
    flow_residual,
    is_stable,
    monomial_weight,
    vacuum_level_mass,
    word_eigenvalues,
)
from qfock.operators import operator_norm_q

from conftest import make_rep, rand_vec


@pytest.fixture(scope="module")
def blocks_space():
    q = 0.4
    rep = make_rep(q, 1, [(1.5, 1), (2, 1), (4, 1)])
    return rep, build_fock(rep.dim_H, q, 3)


@pytest.fixture(scope="module")
def lam2():
    q = -0.3
    rep = make_rep(q, 0, [(2, 1)])
    return rep, build_fock(2, q, 4)


def test_delta_examples(lam2):
    rep, F = lam2
    xp = rep.basis_vector(0)
    for s in (0.3, 1.0, -2.0, 0.7j):
        assert delta_power(F, rep, s).apply(F.vacuum())[0] == 1
    v = delta_power(F, rep, 1.0).apply(F.tensor(xp, xp))
    np.testing.assert_allclose(v, 0.25 * F.tensor(xp, xp))
    d = delta_power(F, rep, 0.9j).mat.diagonal()
    np.testing.assert_allclose(np.abs(d), 1.0, rtol=1e-15)


def test_J_examples(rng):
    rep = make_rep(0.2, 2)
    F = build_fock(2, 0.2, 3)
    J = modular_conjugation(F, rep)
    np.testing.assert_allclose(J(F.vacuum()), F.vacuum())
    np.testing.assert_allclose(J(F.word_vector((0, 1))), F.word_vector((1, 0)))
    # antilinear
    v = rand_vec(rng, F.total_dim)
    np.testing.assert_allclose(J(1j * v), -1j * J(v))


def test_modular_data_invariants(blocks_space, rng):
    rep, F = blocks_space
    md = modular_data(F, rep)
    v = rand_vec(rng, F.total_dim)
    assert np.abs(md.J(md.J(v)) - v).max() < 1e-12
    dd = md.delta_diag
    np.testing.assert_allclose(dd[md.J.perm], 1.0 / dd, rtol=1e-12)
    assert md.delta()[0] == 1 and md.J.perm[0] == 0
    # Delta^{it} is q-unitary
    u = delta_power(F, rep, 0.77j)
    assert abs(q_norm(F, u.apply(v)) - q_norm(F, v)) < 1e-12 * q_norm(F, v)
    np.testing.assert_allclose(word_eigenvalues(F, rep), 1.0 / dd)


def test_tomita_examples(lam2):
    rep, F = lam2
    assert tomita_residual(F, rep, identity(F)) == 0
    xp = rep.basis_vector(0)
    assert tomita_residual(F, rep, wick(F, rep, xp)) < 1e-10
    rep1 = make_rep(0.5, 1)
    F1 = build_fock(1, 0.5, 3)
    assert tomita_residual(F1, rep1, wick(F1, rep1, [1.0])) < 1e-12


def test_flow_examples(lam2):
    rep, F = lam2
    xp = rep.basis_vector(0)
    x = wick(F, rep, xp)
    assert flow_residual(F, modular_flow(F, rep, 0.0, x), x) == 0
    for t in T_GRID:
        ref = x * (2.0 ** (-1j * t))
        assert flow_residual(F, modular_flow(F, rep, t, x), ref) < 1e-10
    rep1 = make_rep(0.5, 1)
    F1 = build_fock(1, 0.5, 3)
    w = wick(F1, rep1, [1.0])
    assert flow_residual(F1, modular_flow(F1, rep1, 2.5, w), w) < 1e-14


def test_kms_examples(lam2):
    rep, F = lam2
    xp = rep.basis_vector(0)
    a, b = wick(F, rep, xp), wick(F, rep, apply_I(rep, xp))
    assert kms_residual(F, rep, identity(F), b) < 1e-15
    assert kms_residual(F, rep, a, b) < 1e-10
    # non-trivial: phi(ab) and phi(ba) differ by the factor lambda
    assert abs(vacuum_state(F, a @ b) - vacuum_state(F, b @ a)) > 0.1


def test_monomial_parse_and_weight():
    m = Monomial.parse("X1^2Y2")
    assert m.degree == 3 and str(m) == "X1X1Y2"
    assert Monomial.parse("1").degree == 0
    with pytest.raises(PreconditionError):
        Monomial.parse("Z1")
    assert monomial_weight((2,), Monomial.parse("X1Y1")) == 1
    assert abs(monomial_weight((2, 3), Monomial.parse("X1X2Y1")) - 3) < 1e-14
    assert is_stable((2, 4), Monomial.parse("X1^2Y2"))
    with pytest.raises(PreconditionError):
        monomial_weight((2,), Monomial.parse("X2"))


def test_stable_monomials_examples():
    assert [str(m) for m in stable_monomials((2,), 2)] == ["1", "X1Y1", "Y1X1"]
    assert [str(m) for m in stable_monomials((2, 3), 1)] == ["1"]
    with pytest.raises(CapExceeded):
        stable_monomials((2,), 9)


@pytest.mark.parametrize("deg", [2, 4])
def test_stable_balanced_for_independent(deg):
    lams = (math.e, math.pi)
    got = stable_monomials(lams, deg)
    for m in got:
        for i in (1, 2):
            xs = sum(1 for s, k in m.letters if s == "X" and k == i)
            ys = sum(1 for s, k in m.letters if s == "Y" and k == i)
            assert xs == ys
    # count of balanced words: sum over degree 2k of multinomial choices
    expected = sum(
        math.comb(2 * k, 2 * a) * math.comb(2 * a, a) * math.comb(2 * (k - a), k - a)
        for k in range(deg // 2 + 1) for a in range(k + 1)
    )
    assert len(got) == expected


def test_realize_examples(lam2):
    rep, F = lam2
    xp = rep.basis_vector(0)
    p1 = realize_stable(F, rep, Monomial(()), [xp])
    assert centralizer_residual(F, rep, p1) < 1e-15
    p = realize_stable(F, rep, Monomial.parse("X1Y1"), [xp])
    assert centralizer_residual(F, rep, p) < 1e-10
    ref = wick(F, rep, xp) @ adjoint_q(wick(F, rep, xp))
    assert operator_norm_q(F, p - ref) < 1e-12
    with pytest.raises(StabilityError):
        realize_stable(F, rep, Monomial.parse("X1"), [xp])
    with pytest.raises(PreconditionError):
        realize_stable(F, rep, Monomial.parse("X1Y1"), [xp + apply_I(rep, xp)])


def test_stable_polynomial_rejects():
    with pytest.raises(StabilityError):
        StablePolynomial(((1.0, Monomial.parse("X1")),), (2.0,))
    StablePolynomial(((1.0, Monomial.parse("X1Y1")), (2.0, Monomial(()))), (2.0,))


def test_vacuum_level_mass(lam2):
    rep, F = lam2
    xp = rep.basis_vector(0)
    p = realize_stable(F, rep, Monomial.parse("Y1X1"), [xp])
    v = p.apply(F.vacuum())
    masses = [vacuum_level_mass(F, p, n) for n in range(F.N + 1)]
    assert all(a <= b + 1e-14 for a, b in zip(masses, masses[1:]))
    assert abs(masses[-1] - q_norm(F, v)) < 1e-14
    assert abs(masses[0] - abs(v[0])) < 1e-14


def test_centralizer_trace_and_kms(rng):
    q = 0.3
    rep = make_rep(q, 0, [(2, 1), (3, 1)])
    F = build_fock(4, q, 4)
    xis = [rep.basis_vector(0), rep.basis_vector(2)]
    monos = stable_monomials((2.0, 3.0), 2)
    ps = [realize_stable(F, rep, m, xis) for m in monos]
    for a in ps:
        assert centralizer_residual(F, rep, a) < 1e-8
        for b in ps:
            assert abs(vacuum_state(F, a @ b) - vacuum_state(F, b @ a)) < 1e-8
            assert kms_residual(F, rep, a, b) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 3))
def test_tomita_and_flow_random_words(seed, n):
    q = 0.4
    rep = make_rep(q, 1, [(1.5, 1), (2, 1), (4, 1)])
    F = build_fock(rep.dim_H, q, 3)
    r = np.random.default_rng(seed)
    letters = [rand_vec(r, rep.dim_H) for _ in range(n)]
    x = wick_word(F, rep, *letters)
    assert tomita_residual(F, rep, x) < 1e-8
    for t in T_GRID:
        y = wick_word(F, rep, *[apply_U(rep, -t, v) for v in letters])
        assert flow_residual(F, modular_flow(F, rep, t, x), y) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.lists(st.sampled_from([2.0, 3.0, 4.0, 1.5]), min_size=1, max_size=2), st.integers(0, 4))
def test_stable_weights_exact(lams, deg):
    for m in stable_monomials(tuple(lams), deg):
        assert abs(monomial_weight(tuple(lams), m) - 1) <= 1e-12
