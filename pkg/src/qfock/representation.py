"""Finite-dimensional almost periodic orthogonal representations.

A real Hilbert space ``H_R`` carrying an orthogonal action ``U_t`` is modelled by
a number of fixed vectors plus 2-dimensional rotation blocks.  After
complexification every block splits into two ``A``-eigenvectors with
eigenvalues ``lam`` and ``1/lam``.  All vectors are coordinate arrays in that
eigenbasis, ordered as: fixed indices first, then blocks in input order with
the ``lam`` vector before its ``1/lam`` partner.

For a block with real orthonormal basis ``f1, f2`` the eigenvectors are
``xi_plus = (f1 - i f2)/sqrt(2)`` and ``xi_minus = I xi_plus``.  The involution
``I`` therefore conjugates coordinates and swaps paired indices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSpectralMass, PreconditionError

__all__ = [
    "RepresentationSpec",
    "Representation",
    "EigenvectorFamily",
    "build_representation",
    "apply_U",
    "apply_A_power",
    "apply_I",
    "apply_T",
    "j_map",
    "spectral_subspace",
    "build_eigenvector_family",
]


@dataclass(frozen=True)
class RepresentationSpec:
    q: float
    fixed_dim: int = 0
    blocks: tuple[tuple[float, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "blocks", tuple((float(lam), int(c)) for lam, c in self.blocks)
        )

    @property
    def dim(self) -> int:
        return self.fixed_dim + 2 * sum(c for _, c in self.blocks)


@dataclass(frozen=True, eq=False)
class Representation:
    q: float
    dim_H: int
    a_eigenvalues: np.ndarray
    conjugation_pairing: np.ndarray
    spec: RepresentationSpec = field(repr=False)

    def a_matrix(self, s: float = 1.0) -> np.ndarray:
        return np.diag(self.a_eigenvalues ** s).astype(complex)

    def i_permutation(self) -> np.ndarray:
        """Real permutation matrix P with ``I v = P conj(v)``."""
        P = np.zeros((self.dim_H, self.dim_H))
        P[self.conjugation_pairing, np.arange(self.dim_H)] = 1.0
        return P

    def basis_vector(self, k: int) -> np.ndarray:
        v = np.zeros(self.dim_H, dtype=complex)
        v[k] = 1.0
        return v


@dataclass(frozen=True, eq=False)
class EigenvectorFamily:
    vectors: np.ndarray  # shape (d, dim_H)
    C: float

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    def as_columns(self) -> np.ndarray:
        return self.vectors.T.copy()


def build_representation(spec: RepresentationSpec) -> Representation:
    if not -1.0 < spec.q < 1.0:
        raise PreconditionError("q must lie in (-1,1)")
    if spec.fixed_dim < 0:
        raise PreconditionError("fixed_dim must be nonnegative")
    for lam, count in spec.blocks:
        if not lam > 1.0:
            raise PreconditionError(f"block eigenvalue lambda={lam} must exceed 1")
        if count < 1:
            raise PreconditionError(f"block count must be positive, got {count}")
    if spec.dim < 1:
        raise PreconditionError("representation must have dimension >= 1")

    eig = [1.0] * spec.fixed_dim
    pairing = list(range(spec.fixed_dim))
    for lam, count in spec.blocks:
        for _ in range(count):
            k = len(eig)
            eig += [lam, 1.0 / lam]
            pairing += [k + 1, k]
    return Representation(
        q=float(spec.q),
        dim_H=spec.dim,
        a_eigenvalues=np.array(eig, dtype=float),
        conjugation_pairing=np.array(pairing, dtype=np.intp),
        spec=spec,
    )


def _check(rep: Representation, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (rep.dim_H,):
        raise PreconditionError(
            f"vector has shape {v.shape}, expected ({rep.dim_H},)"
        )
    return v


def apply_U(rep: Representation, t: float, v) -> np.ndarray:
    v = _check(rep, v)
    return rep.a_eigenvalues.astype(complex) ** (1j * t) * v


def apply_A_power(rep: Representation, s: float, v) -> np.ndarray:
    v = _check(rep, v)
    return rep.a_eigenvalues ** s * v


def apply_I(rep: Representation, v) -> np.ndarray:
    v = _check(rep, v)
    return np.conj(v)[rep.conjugation_pairing]


def apply_T(rep: Representation, v) -> np.ndarray:
    """``T = I A^{-1/2}`` (antilinear)."""
    return apply_I(rep, apply_A_power(rep, -0.5, v))


def j_map(rep: Representation, v, require_real: bool = False, atol: float = 1e-10):
    v = _check(rep, v)
    if require_real and np.linalg.norm(apply_I(rep, v) - v) > atol:
        raise PreconditionError("j_map input is not I-fixed")
    return np.sqrt(2.0 / (1.0 + 1.0 / rep.a_eigenvalues)) * v


def spectral_subspace(rep: Representation, lo: float, hi: float) -> np.ndarray:
    if not 0 < lo <= hi:
        raise PreconditionError("need 0 < lo <= hi")
    a = rep.a_eigenvalues
    # relative slack so that e.g. C**-2 == 0.25 is not lost to rounding
    eps = 1e-12
    return np.flatnonzero((a >= lo * (1 - eps)) & (a <= hi * (1 + eps)))


def build_eigenvector_family(rep: Representation, C: float, d: int) -> EigenvectorFamily:
    """Orthonormal I-fixed family supported in the spectral window [C^-2, C^2].

    Fixed basis vectors come first.  Each admissible block then contributes
    ``(xi + I xi)/|.|`` and ``(i xi + I(i xi))/|.|`` where ``xi`` is its
    ``lam`` eigenvector; blocks are taken in ascending ``lam`` (stable).
    """
    if C < 1:
        raise PreconditionError("C must be >= 1")
    if d < 1:
        raise PreconditionError("d must be >= 1")
    fixed = [k for k in range(rep.dim_H) if rep.conjugation_pairing[k] == k]
    block_heads = [
        k
        for k in range(rep.dim_H)
        if rep.conjugation_pairing[k] > k and rep.a_eigenvalues[k] <= C * C * (1 + 1e-12)
    ]
    block_heads.sort(key=lambda k: rep.a_eigenvalues[k])  # sort is stable
    available = len(fixed) + 2 * len(block_heads)
    if available < d:
        raise InsufficientSpectralMass(available, d)

    vecs = []
    for k in fixed:
        vecs.append(rep.basis_vector(k))
    for k in block_heads:
        xi = rep.basis_vector(k)
        for phase in (1.0, 1j):
            w = phase * xi + apply_I(rep, phase * xi)
            vecs.append(w / np.linalg.norm(w))
    return EigenvectorFamily(vectors=np.array(vecs[:d]), C=float(C))
