"""Truncated q-deformed Fock space.

Level ``n`` has the basis of words ``(w_1, ..., w_n)`` over the one-particle
eigenbasis, in lexicographic order; a vector on the truncated space is a flat
complex array of length ``total_dim`` with level ``n`` occupying
``offsets[n]:offsets[n+1]``.

The q-Gram matrix only couples words with the same multiset of letters, so
every level is block diagonal in "content" blocks.  Square roots and inverses
are computed block by block with batched Hermitian eigendecompositions.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CapExceeded, GramSingularError, PreconditionError

__all__ = [
    "NAIVE_CAP",
    "MAX_WORDS",
    "SINGULAR_TOL",
    "inversions",
    "gram_naive",
    "gram_fast",
    "q_factorial",
    "BlockStructure",
    "TruncatedFockSpace",
    "build_fock",
    "q_inner",
    "q_norm",
    "level_projection",
]

NAIVE_CAP = 8
MAX_WORDS = 200_000
SINGULAR_TOL = 1e-12


def inversions(perm) -> int:
    n = len(perm)
    return sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])


def q_factorial(n: int, q: float) -> float:
    """``[n]_q! = prod_k (1 - q^k)/(1 - q)``."""
    out = 1.0
    for k in range(1, n + 1):
        out *= sum(q ** j for j in range(k))
    return out


def _words(dim_H: int, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((1, 0), dtype=np.intp)
    return np.array(
        np.unravel_index(np.arange(dim_H ** n), (dim_H,) * n), dtype=np.intp
    ).T.copy()


def _word_index(words: np.ndarray, dim_H: int) -> np.ndarray:
    n = words.shape[1]
    if n == 0:
        return np.zeros(words.shape[0], dtype=np.intp)
    weights = dim_H ** np.arange(n - 1, -1, -1, dtype=np.intp)
    return words @ weights


def gram_naive(dim_H: int, n: int, q: float, cap: int = NAIVE_CAP) -> np.ndarray:
    """q-Gram matrix at level ``n`` from the literal sum over permutations."""
    if n > cap:
        raise CapExceeded(f"gram_naive: level {n} exceeds cap {cap}")
    words = _words(dim_H, n)
    m = words.shape[0]
    G = np.zeros((m, m))
    cols = np.arange(m)
    for perm in itertools.permutations(range(n)):
        # entry (u, w) gets q^inv(pi) whenever u_k = w_{pi(k)} for all k
        rows = _word_index(words[:, list(perm)], dim_H)
        G[rows, cols] += q ** inversions(perm)
    return G


def _drop_index(words: np.ndarray, dim_H: int) -> np.ndarray:
    """Index at level n-1 of each word with slot k deleted, shape (m, n)."""
    m, n = words.shape
    out = np.empty((m, n), dtype=np.intp)
    for k in range(n):
        out[:, k] = _word_index(np.delete(words, k, axis=1), dim_H)
    return out


def _next_gram(G_prev: sp.csr_matrix, words: np.ndarray, drop: np.ndarray,
               dim_H: int, q: float) -> sp.csr_matrix:
    # G_n = (1 (x) G_{n-1}) R_n, R_n moving slot k to the front with weight q^(k-1)
    m, n = words.shape
    block = dim_H ** (n - 1)
    rows, cols, vals = [], [], []
    j = np.arange(m)
    for k in range(n):
        w = q ** k
        if w == 0.0:
            continue
        rows.append(words[:, k] * block + drop[:, k])
        cols.append(j)
        vals.append(np.full(m, w))
    R = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(m, m),
    )
    G = sp.kron(sp.identity(dim_H, format="csr"), G_prev, format="csr") @ R
    G.eliminate_zeros()
    return G.tocsr()


def gram_fast(dim_H: int, n: int, q: float, sparse: bool = False):
    """Same matrix as :func:`gram_naive`, via the level recursion."""
    G = sp.csr_matrix(np.ones((1, 1)))
    for level in range(1, n + 1):
        words = _words(dim_H, level)
        G = _next_gram(G, words, _drop_index(words, dim_H), dim_H, q)
    return G if sparse else G.toarray()


class BlockStructure:
    """Partition of one level's words into content (letter multiset) blocks,
    grouped into size classes for batched dense linear algebra."""

    def __init__(self, words: np.ndarray, dim_H: int):
        m, n = words.shape
        if n == 0:
            keys = np.zeros(1, dtype=np.intp)
        else:
            keys = _word_index(np.sort(words, axis=1), dim_H)
        _, group = np.unique(keys, return_inverse=True)
        group = group.ravel()
        order = np.argsort(group, kind="stable")
        sizes = np.bincount(group)
        starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        local = np.empty(m, dtype=np.intp)
        local[order] = np.arange(m) - np.repeat(starts, sizes)

        self.m = m
        self.group = group
        self.local = local
        self.classes = []  # (size, member index array of shape (num, size))
        self.class_of_group = np.empty(len(sizes), dtype=np.intp)
        self.row_in_class = np.empty(len(sizes), dtype=np.intp)
        for ci, s in enumerate(np.unique(sizes)):
            gids = np.flatnonzero(sizes == s)
            members = order[starts[gids][:, None] + np.arange(s)[None, :]]
            self.classes.append((int(s), members))
            self.class_of_group[gids] = ci
            self.row_in_class[gids] = np.arange(len(gids))

    def to_batches(self, M) -> list[np.ndarray]:
        coo = sp.coo_matrix(M)
        coo.sum_duplicates()
        g = self.group[coo.row]
        if np.any(g != self.group[coo.col]):
            raise ValueError("matrix couples different content blocks")
        cls = self.class_of_group[g]
        out = []
        for ci, (s, members) in enumerate(self.classes):
            arr = np.zeros((members.shape[0], s, s), dtype=coo.dtype)
            mask = cls == ci
            arr[self.row_in_class[g[mask]], self.local[coo.row[mask]],
                self.local[coo.col[mask]]] = coo.data[mask]
            out.append(arr)
        return out

    def from_batches(self, batches) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for (s, members), arr in zip(self.classes, batches):
            rows.append(np.broadcast_to(members[:, :, None], arr.shape).ravel())
            cols.append(np.broadcast_to(members[:, None, :], arr.shape).ravel())
            vals.append(arr.ravel())
        M = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.m, self.m),
        )
        M.eliminate_zeros()
        return M

    def eigvalsh(self, M) -> np.ndarray:
        return np.concatenate([np.linalg.eigvalsh(a).ravel() for a in self.to_batches(M)])


@dataclass(frozen=True, eq=False)
class TruncatedFockSpace:
    q: float
    dim_H: int
    N: int
    words: tuple
    offsets: np.ndarray
    drop: tuple  # drop[n][j, k]: level n-1 index of word j with slot k removed
    blocks: tuple
    grams: tuple
    gram_half: tuple
    gram_invhalf: tuple
    gram_inv: tuple
    min_eigenvalues: tuple
    G: sp.csr_matrix = field(repr=False)
    G_half: sp.csr_matrix = field(repr=False)
    G_invhalf: sp.csr_matrix = field(repr=False)
    G_inv: sp.csr_matrix = field(repr=False)

    @property
    def total_dim(self) -> int:
        return int(self.offsets[-1])

    def level_dim(self, n: int) -> int:
        return self.dim_H ** n

    def level_slice(self, n: int) -> slice:
        return slice(int(self.offsets[n]), int(self.offsets[n + 1]))

    def level_indices(self, lo: int, hi: int) -> np.ndarray:
        """Global indices of levels lo..hi inclusive."""
        return np.arange(int(self.offsets[lo]), int(self.offsets[hi + 1]))

    def level_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.N + 1), [self.dim_H ** n for n in range(self.N + 1)])

    def gram(self, n: int) -> np.ndarray:
        return self.grams[n].toarray()

    def index(self, word) -> int:
        word = np.asarray(word, dtype=np.intp).reshape(1, -1)
        n = word.shape[1]
        if n > self.N or np.any(word >= self.dim_H) or np.any(word < 0):
            raise PreconditionError(f"word {word.ravel().tolist()} not in the truncated basis")
        return int(self.offsets[n] + _word_index(word, self.dim_H)[0])

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.total_dim, dtype=complex)
        v[0] = 1.0
        return v

    def tensor(self, *vectors) -> np.ndarray:
        """Embed ``xi_1 (x) ... (x) xi_n`` as a Fock vector."""
        n = len(vectors)
        if n > self.N:
            raise PreconditionError(f"tensor of length {n} exceeds truncation N={self.N}")
        out = np.zeros(self.total_dim, dtype=complex)
        t = np.ones(1, dtype=complex)
        for v in vectors:
            t = np.kron(t, np.asarray(v, dtype=complex))
        out[self.level_slice(n)] = t
        return out

    def word_vector(self, word) -> np.ndarray:
        v = np.zeros(self.total_dim, dtype=complex)
        v[self.index(word)] = 1.0
        return v

    def orthonormal(self, v) -> np.ndarray:
        """Coordinates in which the q-inner product is the standard one."""
        return self.G_half @ np.asarray(v)


def build_fock(dim_H: int, q: float, N: int, max_words: int = MAX_WORDS,
               singular_tol: float = SINGULAR_TOL) -> TruncatedFockSpace:
    if not -1.0 < q < 1.0:
        raise PreconditionError("q must lie in (-1,1)")
    if N < 1:
        raise PreconditionError("truncation level N must be >= 1")
    if dim_H < 1:
        raise PreconditionError("dim_H must be >= 1")
    if dim_H ** N > max_words:
        raise CapExceeded(
            f"dim_H^N = {dim_H ** N} exceeds the word budget {max_words}"
        )

    words, drops, blocks = [], [], []
    grams, halves, invhalves, invs, mins = [], [], [], [], []
    G = sp.csr_matrix(np.ones((1, 1)))
    for n in range(N + 1):
        w = _words(dim_H, n)
        drop = _drop_index(w, dim_H)
        if n > 0:
            G = _next_gram(G, w, drop, dim_H, q)
        bs = BlockStructure(w, dim_H)
        hb, ihb, ib = [], [], []
        lo = np.inf
        for arr in bs.to_batches(G):
            arr = 0.5 * (arr + arr.transpose(0, 2, 1))
            lam, V = np.linalg.eigh(arr)
            lo = min(lo, float(lam.min()))
            if lam.min() < singular_tol:
                raise GramSingularError(n, float(lam.min()))
            Vt = V.transpose(0, 2, 1)
            hb.append((V * np.sqrt(lam)[:, None, :]) @ Vt)
            ihb.append((V / np.sqrt(lam)[:, None, :]) @ Vt)
            ib.append((V / lam[:, None, :]) @ Vt)
        words.append(w)
        drops.append(drop)
        blocks.append(bs)
        grams.append(G)
        halves.append(bs.from_batches(hb))
        invhalves.append(bs.from_batches(ihb))
        invs.append(bs.from_batches(ib))
        mins.append(lo)

    offsets = np.concatenate([[0], np.cumsum([dim_H ** n for n in range(N + 1)])])
    return TruncatedFockSpace(
        q=float(q), dim_H=dim_H, N=N,
        words=tuple(words), offsets=offsets, drop=tuple(drops), blocks=tuple(blocks),
        grams=tuple(grams), gram_half=tuple(halves), gram_invhalf=tuple(invhalves),
        gram_inv=tuple(invs), min_eigenvalues=tuple(mins),
        G=sp.block_diag(grams, format="csr"),
        G_half=sp.block_diag(halves, format="csr"),
        G_invhalf=sp.block_diag(invhalves, format="csr"),
        G_inv=sp.block_diag(invs, format="csr"),
    )


def _vec(F: TruncatedFockSpace, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (F.total_dim,):
        raise PreconditionError(f"Fock vector has shape {v.shape}, expected ({F.total_dim},)")
    return v


def q_inner(F: TruncatedFockSpace, u, v) -> complex:
    """Sesquilinear, conjugate-linear in ``u``."""
    return complex(np.vdot(_vec(F, u), F.G @ _vec(F, v)))


def q_norm(F: TruncatedFockSpace, v) -> float:
    return math.sqrt(max(q_inner(F, v, v).real, 0.0))


def level_projection(F: TruncatedFockSpace, level: int, cumulative: bool = False):
    from .operators import FockOperator

    if not 0 <= level <= F.N:
        raise PreconditionError(f"level {level} outside 0..{F.N}")
    diag = np.zeros(F.total_dim, dtype=complex)
    if cumulative:
        diag[: F.offsets[level + 1]] = 1.0
        label = f"P_<={level}"
    else:
        diag[F.level_slice(level)] = 1.0
        label = f"P_{level}"
    return FockOperator(F, sp.diags(diag, format="csr"), label)
