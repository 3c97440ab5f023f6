"""Modular data of the vacuum state and the stable-polynomial centralizer machinery.

Word basis vectors are A-eigenvectors, so ``Delta`` is diagonal with entry
``prod_k mu_{w_k}^-1`` and ``J`` sends a word to its reversal with every letter
replaced by its I-partner, conjugating the coefficient.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CapExceeded, PreconditionError, StabilityError
from .fock import TruncatedFockSpace, q_norm
from .operators import (
    FockOperator,
    adjoint_q,
    identity,
    operator_norm_q,
    spectral_norm,
    vacuum_state,
    wick,
)
from .representation import Representation

__all__ = [
    "T_GRID",
    "ModularConjugation",
    "ModularData",
    "word_eigenvalues",
    "delta_power",
    "modular_conjugation",
    "modular_data",
    "tomita_residual",
    "modular_flow",
    "flow_residual",
    "kms_residual",
    "Monomial",
    "StablePolynomial",
    "monomial_weight",
    "is_stable",
    "stable_monomials",
    "realize_stable",
    "centralizer_residual",
    "vacuum_level_mass",
]

T_GRID = (0.1, 0.37, 1.0, math.pi)
MONOMIAL_CAP = 8


def word_eigenvalues(F: TruncatedFockSpace, rep: Representation) -> np.ndarray:
    """Product of the letters' A-eigenvalues, one entry per basis word."""
    out = [np.ones(1)]
    for n in range(1, F.N + 1):
        out.append(np.prod(rep.a_eigenvalues[F.words[n]], axis=1))
    return np.concatenate(out)


def delta_power(F: TruncatedFockSpace, rep: Representation, s) -> FockOperator:
    """``Delta^s``; ``s`` may be complex (``s = i t`` gives the modular unitaries)."""
    diag = word_eigenvalues(F, rep).astype(complex) ** (-s)
    return FockOperator(F, sp.diags(diag, format="csr"), f"Delta^{s}")


@dataclass(frozen=True, eq=False)
class ModularConjugation:
    """Antilinear map ``v -> conj(v)[perm]``."""

    perm: np.ndarray

    def __call__(self, v) -> np.ndarray:
        return np.conj(np.asarray(v, dtype=complex))[self.perm]

    def conjugate_operator(self, x: FockOperator) -> FockOperator:
        """``J x J`` (linear)."""
        m = x.mat.conj()[self.perm][:, self.perm]
        return FockOperator(x.space, m, f"J{x.label}J")


def modular_conjugation(F: TruncatedFockSpace, rep: Representation) -> ModularConjugation:
    perm = [np.zeros(1, dtype=np.intp)]
    for n in range(1, F.N + 1):
        partner = rep.conjugation_pairing[F.words[n][:, ::-1]]
        weights = F.dim_H ** np.arange(n - 1, -1, -1)
        perm.append(F.offsets[n] + partner @ weights)
    # the word map is an involution, so it is its own inverse permutation
    return ModularConjugation(np.concatenate(perm))


@dataclass(frozen=True, eq=False)
class ModularData:
    delta_diag: np.ndarray
    J: ModularConjugation
    space: TruncatedFockSpace = field(repr=False)

    def delta(self, s=1.0) -> np.ndarray:
        return self.delta_diag.astype(complex) ** s

    def S(self, v) -> np.ndarray:
        return self.J(self.delta(0.5) * np.asarray(v))


def modular_data(F: TruncatedFockSpace, rep: Representation) -> ModularData:
    return ModularData(1.0 / word_eigenvalues(F, rep), modular_conjugation(F, rep), F)


def tomita_residual(F: TruncatedFockSpace, rep: Representation, x: FockOperator) -> float:
    """``|| J Delta^{1/2} x Omega - x^* Omega ||_q``."""
    md = modular_data(F, rep)
    omega = F.vacuum()
    return q_norm(F, md.S(x.apply(omega)) - adjoint_q(x).apply(omega))


def modular_flow(F: TruncatedFockSpace, rep: Representation, t: float,
                 x: FockOperator) -> FockOperator:
    u = delta_power(F, rep, 1j * t).mat
    u_inv = delta_power(F, rep, -1j * t).mat
    return FockOperator(F, u @ x.mat @ u_inv, f"sigma_{t}({x.label})")


def flow_residual(F: TruncatedFockSpace, x: FockOperator, y: FockOperator,
                  levels: int | None = None) -> float:
    """q-operator norm of ``x - y`` restricted to levels ``<= levels``."""
    diff = (x - y).orthonormal()
    if levels is not None:
        diff = diff[:, : F.offsets[levels + 1]]
    return spectral_norm(diff)


def kms_residual(F: TruncatedFockSpace, rep: Representation, a: FockOperator,
                 b: FockOperator) -> float:
    """``|phi(ab) - phi(b sigma_{-i}(a))|`` with ``sigma_{-i}(a) = Delta a Delta^-1``."""
    d = delta_power(F, rep, 1.0).mat
    d_inv = delta_power(F, rep, -1.0).mat
    cont = FockOperator(F, d @ a.mat @ d_inv, "sigma_-i(a)")
    return abs(vacuum_state(F, a @ b) - vacuum_state(F, b @ cont))


@dataclass(frozen=True)
class Monomial:
    """Word in the free symbols X_i, Y_i (1-based indices), e.g. (("X", 1), ("Y", 1))."""

    letters: tuple = ()

    @classmethod
    def parse(cls, text: str) -> "Monomial":
        import re

        text = text.strip()
        if text in ("", "1"):
            return cls(())
        toks = re.findall(r"([XY])(\d+)(?:\^(\d+))?", text)
        if "".join(f"{s}{i}" + (f"^{e}" if e else "") for s, i, e in toks) != text.replace(" ", ""):
            raise PreconditionError(f"cannot parse monomial {text!r}")
        letters = []
        for s, i, e in toks:
            letters += [(s, int(i))] * (int(e) if e else 1)
        return cls(tuple(letters))

    @property
    def degree(self) -> int:
        return len(self.letters)

    def __str__(self):
        return "".join(f"{s}{i}" for s, i in self.letters) or "1"


@dataclass(frozen=True)
class StablePolynomial:
    terms: tuple  # ((coefficient, Monomial), ...)
    lambdas: tuple

    def __post_init__(self):
        bad = [str(m) for _, m in self.terms if not is_stable(self.lambdas, m)]
        if bad:
            raise StabilityError(
                f"monomials {bad} are not stable under {self.lambdas}-perturbation"
            )


def _log_weight(lambdas, m: Monomial) -> float:
    n = len(lambdas)
    total = 0.0
    for s, i in m.letters:
        if not 1 <= i <= n:
            raise PreconditionError(f"index {i} outside 1..{n}")
        total += math.log(lambdas[i - 1]) * (1 if s == "X" else -1)
    return total


def monomial_weight(lambdas, m: Monomial) -> float:
    return math.exp(_log_weight(lambdas, m))


def is_stable(lambdas, m: Monomial, rtol: float = 1e-12) -> bool:
    return abs(_log_weight(lambdas, m)) <= rtol


def stable_monomials(lambdas, max_degree: int) -> list[Monomial]:
    """All weight-one monomials of degree <= max_degree, by degree then lexicographic."""
    if max_degree > MONOMIAL_CAP:
        raise CapExceeded(f"max_degree {max_degree} exceeds cap {MONOMIAL_CAP}")
    symbols = [(s, i) for i in range(1, len(lambdas) + 1) for s in ("X", "Y")]
    out = []
    for deg in range(max_degree + 1):
        for word in itertools.product(symbols, repeat=deg):
            m = Monomial(tuple(word))
            if is_stable(lambdas, m):
                out.append(m)
    return out


def realize_stable(F: TruncatedFockSpace, rep: Representation, p, xis) -> FockOperator:
    """``p(W(xi_1), W(xi_1)^*, ..., W(xi_n), W(xi_n)^*)``.

    ``p`` is a StablePolynomial or a single Monomial (coefficient 1).  Each
    ``xi_i`` must be a unit A-eigenvector with eigenvalue ``lambdas[i]``.
    """
    if isinstance(p, Monomial):
        lambdas = tuple(
            float(np.vdot(x, rep.a_eigenvalues * np.asarray(x)).real) for x in xis
        )
        p = StablePolynomial(((1.0, p),), lambdas)
    if len(xis) != len(p.lambdas):
        raise PreconditionError("one vector per eigenvalue is required")
    gens = {}
    for i, (lam, xi) in enumerate(zip(p.lambdas, xis), start=1):
        xi = np.asarray(xi, dtype=complex)
        if abs(np.linalg.norm(xi) - 1) > 1e-10 or \
                np.linalg.norm(rep.a_eigenvalues * xi - lam * xi) > 1e-10:
            raise PreconditionError(f"xi_{i} is not a unit eigenvector for lambda={lam}")
        w = wick(F, rep, xi)
        gens[("X", i)] = w.mat
        gens[("Y", i)] = adjoint_q(w).mat
    total = sp.csr_matrix((F.total_dim, F.total_dim), dtype=complex)
    for c, m in p.terms:
        mat = identity(F).mat
        for letter in m.letters:
            mat = mat @ gens[letter]
        total = total + c * mat
    return FockOperator(F, total, "p_xi")


def centralizer_residual(F: TruncatedFockSpace, rep: Representation, x: FockOperator,
                         t_grid=T_GRID) -> float:
    """max over t of ``|| Delta^{it} x Delta^{-it} - x ||``."""
    return max(operator_norm_q(F, modular_flow(F, rep, t, x) - x) for t in t_grid)


def vacuum_level_mass(F: TruncatedFockSpace, x: FockOperator, level: int) -> float:
    """``|| P_{<=level} x Omega ||_q``."""
    v = x.apply(F.vacuum())
    v[F.offsets[level + 1]:] = 0
    return q_norm(F, v)
