"""Vacuum moments of Wick letters from pair partitions weighted by crossings.

This is an oracle independent of the Fock-space matrices: it only uses the
two-point covariance ``<T xi_l, xi_r>`` of each pair ``l < r``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import CapExceeded, PreconditionError
from .representation import Representation, apply_T

__all__ = [
    "PAIRING_CAP",
    "PairPartition",
    "iter_pairings",
    "enumerate_pairings",
    "crossing_polynomial",
    "double_factorial",
    "catalan",
    "covariance_matrix",
    "moment_pairing_formula",
    "odd_moment",
]

PAIRING_CAP = 8


@dataclass(frozen=True)
class PairPartition:
    n_pairs: int
    pairs: tuple  # ((l, r), ...) 1-based, l < r, sorted by l
    crossings: int


def _check_cap(n: int) -> None:
    if n > PAIRING_CAP:
        raise CapExceeded(f"{n} pairs exceeds the enumeration cap {PAIRING_CAP}")
    if n < 0:
        raise PreconditionError("number of pairs must be nonnegative")


def _dfs(n: int):
    """Yield (pairs, crossings); the smallest open point is paired first."""
    free = list(range(1, 2 * n + 1))
    pairs = []

    def rec(cr):
        if not free:
            yield tuple(pairs), cr
            return
        a = free.pop(0)
        for idx in range(len(free)):
            b = free.pop(idx)
            # earlier pairs (c, d) have c < a; they cross (a, b) iff a < d < b
            extra = sum(1 for c, d in pairs if a < d < b)
            pairs.append((a, b))
            yield from rec(cr + extra)
            pairs.pop()
            free.insert(idx, b)
        free.insert(0, a)

    yield from rec(0)


def iter_pairings(n: int) -> Iterator[PairPartition]:
    _check_cap(n)
    for pairs, cr in _dfs(n):
        yield PairPartition(n, pairs, cr)


def enumerate_pairings(n: int) -> list[PairPartition]:
    return list(iter_pairings(n))


def crossing_polynomial(n: int) -> list[int]:
    """Coefficients c_k of sum_pi q^cr(pi) = sum_k c_k q^k."""
    _check_cap(n)
    coeffs = [0] * (n * (n - 1) // 2 + 1)
    for _, cr in _dfs(n):
        coeffs[cr] += 1
    return coeffs


def double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def catalan(n: int) -> int:
    from math import comb

    return comb(2 * n, n) // (n + 1)


def covariance_matrix(rep: Representation, vectors) -> np.ndarray:
    """``c[l, r] = <T xi_l, xi_r>``."""
    vs = [np.asarray(v, dtype=complex) for v in vectors]
    tv = np.array([apply_T(rep, v) for v in vs])
    return np.conj(tv) @ np.array(vs).T


def moment_pairing_formula(rep: Representation, q: float, *vectors) -> complex:
    """phi(W(xi_1) ... W(xi_2n)) = sum_pi q^cr(pi) prod_{(l,r) in pi} <T xi_l, xi_r>."""
    if len(vectors) == 1 and isinstance(vectors[0], (list, tuple)):
        vectors = tuple(vectors[0])
    m = len(vectors)
    if m % 2:
        raise PreconditionError("pairing formula needs an even number of letters")
    n = m // 2
    _check_cap(n)
    if n == 0:
        return 1.0 + 0j
    cov = covariance_matrix(rep, vectors)
    total = 0j
    for pairs, cr in _dfs(n):
        term = q ** cr
        for l, r in pairs:
            term *= cov[l - 1, r - 1]
            if term == 0:
                break
        total += term
    return complex(total)


def odd_moment(rep: Representation, q: float, *vectors) -> complex:
    if len(vectors) == 1 and isinstance(vectors[0], (list, tuple)):
        vectors = tuple(vectors[0])
    if len(vectors) % 2 == 0:
        raise PreconditionError("odd_moment needs an odd number of letters")
    return 0j
