"""Creation, annihilation and Wick operators on the truncated Fock space.

Operators are sparse matrices in word coordinates.  Creation maps the top
level ``N`` to zero, so operator identities are exact only on the truncation
interior (levels ``<= N - word length``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ContractViolation, PreconditionError
from .fock import TruncatedFockSpace, q_norm
from .representation import Representation, apply_T, apply_A_power, apply_I

__all__ = [
    "FockOperator",
    "identity",
    "creation_left",
    "annihilation_left",
    "creation_right",
    "annihilation_right",
    "wick",
    "wick_right",
    "wick_word",
    "vacuum_state",
    "adjoint_q",
    "operator_norm_q",
    "spectral_norm",
    "DENSE_LIMIT",
]

DENSE_LIMIT = 3000


@dataclass(eq=False)
class FockOperator:
    space: TruncatedFockSpace
    mat: sp.csr_matrix
    label: str = ""
    notes: str = ""

    def __post_init__(self):
        self.mat = sp.csr_matrix(self.mat, dtype=complex)

    def _wrap(self, mat, label):
        return FockOperator(self.space, mat, label)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return self._wrap(self.mat @ other.mat, f"{self.label}*{other.label}")
        return self.mat @ np.asarray(other)

    def __add__(self, other):
        return self._wrap(self.mat + other.mat, f"({self.label}+{other.label})")

    def __sub__(self, other):
        return self._wrap(self.mat - other.mat, f"({self.label}-{other.label})")

    def __mul__(self, c):
        return self._wrap(self.mat * c, f"{c}*{self.label}")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def apply(self, v) -> np.ndarray:
        return self.mat @ np.asarray(v, dtype=complex)

    def dense(self) -> np.ndarray:
        return self.mat.toarray()

    def adjoint(self) -> "FockOperator":
        return adjoint_q(self)

    def orthonormal(self):
        """Matrix in coordinates where the q-inner product is standard."""
        F = self.space
        return F.G_half @ self.mat @ F.G_invhalf


def identity(F: TruncatedFockSpace) -> FockOperator:
    return FockOperator(F, sp.identity(F.total_dim, format="csr"), "1")


def _letter(rep: Representation, F: TruncatedFockSpace, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (F.dim_H,) or rep.dim_H != F.dim_H:
        raise PreconditionError(
            f"vector of shape {xi.shape} does not match dim_H={F.dim_H}"
        )
    return xi


def _assemble(F, rows, cols, vals) -> sp.csr_matrix:
    n = F.total_dim
    if not rows:
        return sp.csr_matrix((n, n), dtype=complex)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n), dtype=complex,
    )


def _creation(F, xi, right: bool) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    d = F.dim_H
    for n in range(F.N):
        m = d ** n
        j = np.arange(m)
        for a in np.flatnonzero(xi):
            target = j * d + a if right else a * m + j
            rows.append(F.offsets[n + 1] + target)
            cols.append(F.offsets[n] + j)
            vals.append(np.full(m, xi[a]))
    return _assemble(F, rows, cols, vals)


def _annihilation(F, xi, right: bool) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    q = F.q
    cxi = np.conj(xi)
    for n in range(1, F.N + 1):
        words = F.words[n]
        j = np.arange(words.shape[0])
        for k in range(n):
            power = n - 1 - k if right else k
            w = q ** power * cxi[words[:, k]]
            keep = w != 0
            if not keep.any():
                continue
            rows.append(F.offsets[n - 1] + F.drop[n][keep, k])
            cols.append(F.offsets[n] + j[keep])
            vals.append(w[keep])
    return _assemble(F, rows, cols, vals)


def creation_left(F: TruncatedFockSpace, rep: Representation, xi) -> FockOperator:
    xi = _letter(rep, F, xi)
    return FockOperator(F, _creation(F, xi, right=False), "l(xi)",
                        notes=f"top level {F.N} compressed to 0")


def annihilation_left(F: TruncatedFockSpace, rep: Representation, xi) -> FockOperator:
    """``l(xi)^*``: eta_1..eta_n -> sum_k q^(k-1) <xi, eta_k> eta_1..^eta_k..eta_n."""
    xi = _letter(rep, F, xi)
    return FockOperator(F, _annihilation(F, xi, right=False), "l(xi)*")


def creation_right(F: TruncatedFockSpace, rep: Representation, xi) -> FockOperator:
    xi = _letter(rep, F, xi)
    return FockOperator(F, _creation(F, xi, right=True), "r(xi)",
                        notes=f"top level {F.N} compressed to 0")


def annihilation_right(F: TruncatedFockSpace, rep: Representation, xi) -> FockOperator:
    """``r(xi)^*``: eta_1..eta_n -> sum_k q^(n-k) <xi, eta_k> eta_1..^eta_k..eta_n."""
    xi = _letter(rep, F, xi)
    return FockOperator(F, _annihilation(F, xi, right=True), "r(xi)*")


def wick(F: TruncatedFockSpace, rep: Representation, xi) -> FockOperator:
    xi = _letter(rep, F, xi)
    mat = _creation(F, xi, right=False) + _annihilation(F, apply_T(rep, xi), right=False)
    return FockOperator(F, mat, "W(xi)")


def wick_right(F: TruncatedFockSpace, rep: Representation, zeta) -> FockOperator:
    """``W^r(zeta) = r(zeta) + r(I T I zeta)^*``; ``zeta`` plays the role of ``I xi``."""
    zeta = _letter(rep, F, zeta)
    iti = apply_I(rep, apply_T(rep, apply_I(rep, zeta)))
    mat = _creation(F, zeta, right=True) + _annihilation(F, iti, right=True)
    return FockOperator(F, mat, "Wr(zeta)")


def adjoint_q(x: FockOperator) -> FockOperator:
    """Adjoint for the q-inner product: ``G^-1 X^H G``."""
    F = x.space
    return FockOperator(F, F.G_inv @ x.mat.conj().T @ F.G, f"{x.label}^*")


def vacuum_state(F: TruncatedFockSpace, x: FockOperator) -> complex:
    # <Omega, x Omega>_q with G_0 = 1 and Omega orthogonal to higher levels
    return complex(x.mat[0, 0])


def spectral_norm(mat) -> float:
    """Largest singular value of a sparse or dense matrix."""
    if sp.issparse(mat):
        if min(mat.shape) <= DENSE_LIMIT:
            mat = mat.toarray()
        else:
            if mat.nnz == 0:
                return 0.0
            return float(spla.svds(mat, k=1, return_singular_vectors=False)[0])
    if mat.size == 0:
        return 0.0
    return float(np.linalg.norm(mat, 2))


def operator_norm_q(F: TruncatedFockSpace, x: FockOperator) -> float:
    return spectral_norm(x.orthonormal())


def wick_word(F: TruncatedFockSpace, rep: Representation, *letters,
              atol: float = 1e-10) -> FockOperator:
    """The operator in the Wick algebra whose vacuum image is ``xi_1 (x) ... (x) xi_n``.

    Recursion: W(xi (x) u) = W(xi) W(u) - sum_k q^(k-1) <T xi, u_k> W(u without slot k).
    """
    if len(letters) == 1 and isinstance(letters[0], (list, tuple)):
        letters = tuple(letters[0])
    n = len(letters)
    if n > F.N:
        raise PreconditionError(f"word length {n} exceeds truncation N={F.N}")
    vecs = [_letter(rep, F, v) for v in letters]
    tv = [apply_T(rep, v) for v in vecs]
    singles = {}
    memo = {(): identity(F).mat}

    def build(idx: tuple):
        if idx in memo:
            return memo[idx]
        head, rest = idx[0], idx[1:]
        if head not in singles:
            singles[head] = wick(F, rep, vecs[head]).mat
        mat = singles[head] @ build(rest)
        for k, slot in enumerate(rest):
            c = np.vdot(tv[head], vecs[slot])
            if c != 0:
                mat = mat - (F.q ** k * c) * build(rest[:k] + rest[k + 1:])
        memo[idx] = mat
        return mat

    op = FockOperator(F, build(tuple(range(n))), f"W(word[{n}])")
    err = q_norm(F, op.apply(F.vacuum()) - F.tensor(*vecs)) if n else 0.0
    if err >= atol:
        raise ContractViolation(
            f"wick_word vacuum contract violated: residual {err:.3e} (truncation N={F.N})"
        )
    return op
