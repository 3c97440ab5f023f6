"""Shift embeddings, the fullness operator M and a numerical fullness certificate.

Coordinates on ``H (x) F`` are ``a * T + w`` (one-particle index ``a``, Fock
word index ``w``, ``T = total_dim``); on ``F (x) H`` they are ``w * dim_H + a``.
Each space carries its own Gram geometry, and every norm or spectrum is taken
in orthonormalized coordinates.

The constants ``C1``, ``C2`` bounding the shift embeddings and their inverses
have no closed form here.  ``estimate_constants`` returns their values on the
truncated space.  These are lower estimates of the true suprema, not proofs.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import PreconditionError
from .fock import TruncatedFockSpace, build_fock
from .operators import (
    annihilation_left,
    annihilation_right,
    creation_left,
    creation_right,
    spectral_norm,
    wick,
    wick_right,
)
from .representation import (
    EigenvectorFamily,
    Representation,
    RepresentationSpec,
    apply_A_power,
    apply_T,
    build_eigenvector_family,
    build_representation,
)

__all__ = [
    "Geometry",
    "LinearMap",
    "phi_embed",
    "psi_embed",
    "ConstantsEstimate",
    "estimate_constants",
    "FullnessMaps",
    "fullness_operator",
    "build_m_maps",
    "NormLemmaReport",
    "check_norm_lemmas",
    "spectral_gap",
    "fullness_inequality",
    "FullnessConfig",
    "FullnessCertificate",
    "certify_fullness",
]

DENSE_EIG_LIMIT = 2500


@dataclass(frozen=True, eq=False)
class Geometry:
    gram: sp.csr_matrix
    half: sp.csr_matrix
    invhalf: sp.csr_matrix
    inv: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @classmethod
    def fock(cls, F: TruncatedFockSpace) -> "Geometry":
        return cls(F.G, F.G_half, F.G_invhalf, F.G_inv)

    @classmethod
    def h_tensor_fock(cls, F: TruncatedFockSpace) -> "Geometry":
        eye = sp.identity(F.dim_H, format="csr")
        return cls(*(sp.kron(eye, m, format="csr")
                     for m in (F.G, F.G_half, F.G_invhalf, F.G_inv)))

    @classmethod
    def fock_tensor_h(cls, F: TruncatedFockSpace) -> "Geometry":
        eye = sp.identity(F.dim_H, format="csr")
        return cls(*(sp.kron(m, eye, format="csr")
                     for m in (F.G, F.G_half, F.G_invhalf, F.G_inv)))

    def restrict(self, idx) -> "Geometry":
        # only valid for index sets that are unions of Gram blocks (whole levels)
        return Geometry(*(m[idx][:, idx] for m in (self.gram, self.half, self.invhalf, self.inv)))


@dataclass(eq=False)
class LinearMap:
    mat: sp.csr_matrix
    domain: Geometry
    codomain: Geometry
    label: str = ""

    def orthonormal(self):
        return self.codomain.half @ self.mat @ self.domain.invhalf

    def norm(self) -> float:
        return spectral_norm(self.orthonormal())

    def min_singular(self) -> float:
        A = self.orthonormal()
        A = A.toarray() if sp.issparse(A) else A
        if A.shape[1] == 0:
            return math.inf
        s = np.linalg.svd(A, compute_uv=False)
        return float(s.min()) if A.shape[0] >= A.shape[1] else 0.0

    def adjoint(self) -> "LinearMap":
        mat = self.domain.inv @ self.mat.conj().T @ self.codomain.gram
        return LinearMap(sp.csr_matrix(mat), self.codomain, self.domain, f"{self.label}^*")

    def restrict(self, dom_idx=None, cod_idx=None) -> "LinearMap":
        mat, dom, cod = self.mat, self.domain, self.codomain
        if dom_idx is not None:
            mat, dom = mat[:, dom_idx], dom.restrict(dom_idx)
        if cod_idx is not None:
            mat, cod = mat[cod_idx], cod.restrict(cod_idx)
        return LinearMap(sp.csr_matrix(mat), dom, cod, self.label)

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        return LinearMap(sp.csr_matrix(self.mat @ other.mat), other.domain, self.codomain,
                         f"{self.label}.{other.label}")

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        return LinearMap(sp.csr_matrix(self.mat - other.mat), self.domain, self.codomain,
                         f"({self.label}-{other.label})")


def _interior_ht(F: TruncatedFockSpace, hi: int, lo: int = 0) -> np.ndarray:
    """H (x) F indices with the Fock factor on levels lo..hi."""
    w = F.level_indices(lo, hi)
    return (np.arange(F.dim_H)[:, None] * F.total_dim + w[None, :]).ravel()


def phi_embed(F: TruncatedFockSpace) -> LinearMap:
    """``xi (x) (eta_1..eta_n) -> xi eta_1..eta_n``; defined on Fock levels <= N-1."""
    if F.N < 1:
        raise PreconditionError("truncation too small for the shift embedding")
    d, T = F.dim_H, F.total_dim
    rows, cols = [], []
    for n in range(F.N):
        m = d ** n
        j = np.arange(m)
        for a in range(d):
            rows.append(F.offsets[n + 1] + a * m + j)
            cols.append(a * T + F.offsets[n] + j)
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    mat = sp.csr_matrix((np.ones(len(rows), dtype=complex), (rows, cols)), shape=(T, d * T))
    return LinearMap(mat, Geometry.h_tensor_fock(F), Geometry.fock(F), "Phi")


def psi_embed(F: TruncatedFockSpace) -> LinearMap:
    """``(eta_1..eta_n) (x) xi -> eta_1..eta_n xi``; defined on Fock levels <= N-1."""
    if F.N < 1:
        raise PreconditionError("truncation too small for the shift embedding")
    d, T = F.dim_H, F.total_dim
    rows, cols = [], []
    for n in range(F.N):
        j = np.arange(d ** n)
        for a in range(d):
            rows.append(F.offsets[n + 1] + j * d + a)
            cols.append((F.offsets[n] + j) * d + a)
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    mat = sp.csr_matrix((np.ones(len(rows), dtype=complex), (rows, cols)), shape=(T, d * T))
    return LinearMap(mat, Geometry.fock_tensor_h(F), Geometry.fock(F), "Psi")


@dataclass(frozen=True)
class ConstantsEstimate:
    C1: float
    C2: float
    level_C1: int  # source level n of the map n -> n+1 achieving the max
    level_C2: int
    sigma_max: tuple  # per source level
    sigma_min: tuple


def estimate_constants(F: TruncatedFockSpace) -> ConstantsEstimate:
    """Truncation-level values of ``||Phi||`` and ``||Phi^-1||``.

    On level n the squared singular values of Phi are the eigenvalues of
    ``(1 (x) G_n)^-1/2 G_{n+1} (1 (x) G_n)^-1/2``; both matrices respect the
    content blocks of level n+1, so the problem splits blockwise.
    """
    if F.N < 2:
        raise PreconditionError("estimate_constants needs N >= 2")
    eye = sp.identity(F.dim_H, format="csr")
    smax, smin = [], []
    for n in range(F.N):
        K = sp.kron(eye, F.gram_invhalf[n], format="csr")
        ev = F.blocks[n + 1].eigvalsh(K @ F.grams[n + 1] @ K)
        smax.append(math.sqrt(float(ev.max())))
        smin.append(math.sqrt(float(ev.min())))
    inv = [1.0 / s for s in smin]
    return ConstantsEstimate(
        C1=max(smax), C2=max(inv),
        level_C1=int(np.argmax(smax)), level_C2=int(np.argmax(inv)),
        sigma_max=tuple(smax), sigma_min=tuple(smin),
    )


def _sum_tensor(E: np.ndarray, ops) -> sp.csr_matrix:
    """Matrix of ``x -> sum_i e_i (x) X_i x`` in H (x) F coordinates."""
    out = None
    for e, X in zip(E, ops):
        term = sp.kron(sp.csr_matrix(e.reshape(-1, 1)), X, format="csr")
        out = term if out is None else out + term
    return out


def fullness_operator(F: TruncatedFockSpace, rep: Representation,
                      fam: EigenvectorFamily) -> LinearMap:
    """``M xi = sum_i e_i (x) (W(e_i) - W^r(e_i)) xi`` as a map F -> H (x) F."""
    if fam.vectors.shape[1] != F.dim_H:
        raise PreconditionError("eigenvector family does not live on this space")
    ops = [(wick(F, rep, e) - wick_right(F, rep, e)).mat for e in fam.vectors]
    return LinearMap(_sum_tensor(fam.vectors, ops), Geometry.fock(F),
                     Geometry.h_tensor_fock(F), "M")


@dataclass(eq=False)
class FullnessMaps:
    space: TruncatedFockSpace
    family: EigenvectorFamily
    m_left: LinearMap
    m_right: LinearMap
    m_left_dag: LinearMap
    m_right_dag: LinearMap
    f: LinearMap
    S: LinearMap
    M: LinearMap
    P_D: np.ndarray
    a_eigenvalues: np.ndarray
    X: list = field(repr=False)  # W(e_i) - W^r(e_i), word coordinates
    # W(e_i) is q-self-adjoint iff T e_i = e_i, i.e. e_i sits in the lambda = 1 part
    selfadjoint_letters: bool = False
    t_residual: float = 0.0  # max_i |T e_i - A^{1/2} e_i|

    @property
    def m_dag(self) -> LinearMap:
        return self.m_left_dag - self.m_right_dag

    @property
    def m(self) -> LinearMap:
        return self.m_left - self.m_right


def build_m_maps(F: TruncatedFockSpace, rep: Representation,
                 fam: EigenvectorFamily) -> FullnessMaps:
    if F.N < 2:
        raise PreconditionError("build_m_maps needs N >= 2")
    if fam.vectors.shape[1] != F.dim_H:
        raise PreconditionError("eigenvector family does not live on this space")
    E = fam.vectors
    d_H, T = F.dim_H, F.total_dim
    gF, gHF = Geometry.fock(F), Geometry.h_tensor_fock(F)

    def tmap(ops, label):
        return LinearMap(_sum_tensor(E, ops), gF, gHF, label)

    m_left = tmap([annihilation_left(F, rep, apply_A_power(rep, 0.5, e)).mat for e in E], "m_l")
    m_right = tmap([annihilation_right(F, rep, apply_A_power(rep, -0.5, e)).mat for e in E], "m_r")
    m_left_dag = tmap([creation_left(F, rep, e).mat for e in E], "m_l_dag")
    m_right_dag = tmap([creation_right(F, rep, e).mat for e in E], "m_r_dag")
    X = [(wick(F, rep, e) - wick_right(F, rep, e)).mat for e in E]
    M = tmap(X, "M")

    # f(b_a (x) b_w) = sum_i <e_i, b_a> <e_i, b_{w_1}> b_{w_2..w_n}
    c = np.conj(E).T @ np.conj(E)
    rows, cols, vals = [], [], []
    for n in range(1, F.N + 1):
        words = F.words[n]
        j = np.arange(words.shape[0])
        for a in range(d_H):
            v = c[a, words[:, 0]]
            keep = v != 0
            rows.append(F.offsets[n - 1] + F.drop[n][keep, 0])
            cols.append(a * T + F.offsets[n] + j[keep])
            vals.append(v[keep])
    f = LinearMap(sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                shape=(T, d_H * T)), gHF, gF, "f")

    # S(b_w) = b_{w_2..w_n} (x) P_D b_{w_1}
    P = E.T @ np.conj(E)
    rows, cols, vals = [], [], []
    for n in range(1, F.N + 1):
        words = F.words[n]
        j = np.arange(words.shape[0])
        for cc in range(d_H):
            v = P[cc, words[:, 0]]
            keep = v != 0
            rows.append(F.offsets[n] + F.drop[n][keep, 0] * d_H + cc)
            cols.append(F.offsets[n] + j[keep])
            vals.append(v[keep])
    S = LinearMap(sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                shape=(T, T)), gF, gF, "S")
    t_res = max(np.linalg.norm(apply_T(rep, e) - apply_A_power(rep, 0.5, e)) for e in E)
    selfadj = all(np.linalg.norm(apply_T(rep, e) - e) < 1e-12 for e in E)
    return FullnessMaps(F, fam, m_left, m_right, m_left_dag, m_right_dag, f, S, M, P,
                        rep.a_eigenvalues.copy(), X, selfadj, float(t_res))


def _orth_residual(F, A: LinearMap, B: LinearMap) -> float:
    return spectral_norm(A.codomain.half @ (A.mat - B.mat) @ A.domain.invhalf)


def spectral_gap(maps_or_M, F: TruncatedFockSpace | None = None) -> float:
    """Smallest eigenvalue of ``M^*M`` on F^+ restricted to levels 1..N-1."""
    M = maps_or_M.M if isinstance(maps_or_M, FullnessMaps) else maps_or_M
    if F is None:
        F = maps_or_M.space
    inner = F.level_indices(1, F.N - 1)
    A = M.restrict(dom_idx=inner).orthonormal()
    H = sp.csr_matrix(A.conj().T @ A)
    n = H.shape[0]
    if n <= DENSE_EIG_LIMIT:
        return float(np.linalg.eigvalsh(H.toarray()).min())
    if not np.iscomplexobj(H.data) or np.abs(H.data.imag).max() == 0:
        H = H.real
    val = spla.eigsh(H.tocsc(), k=1, sigma=-1.0, which="LM", return_eigenvectors=False)
    return float(val[0])


@dataclass
class NormLemmaReport:
    C: float
    C1: float
    C2: float
    d: int
    values: dict
    bounds: dict
    passed: dict
    tolerance: float
    info: dict = field(default_factory=dict)  # computed but not asserted

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def check_norm_lemmas(maps: FullnessMaps, C: float, C1: float, C2: float,
                      d: int | None = None, tol: float = 1e-10) -> NormLemmaReport:
    """Evaluate every norm inequality and operator identity of the fullness argument."""
    F, fam = maps.space, maps.family
    d = fam.d if d is None else d
    vals, bounds = {}, {}
    T = F.total_dim
    interior = F.level_indices(1, F.N - 1)
    plus = F.level_indices(1, F.N)
    below_top = F.level_indices(0, F.N - 1)

    vals["norm_m_left"] = maps.m_left.norm()
    bounds["norm_m_left"] = C * C1
    vals["norm_m_right"] = maps.m_right.norm()
    bounds["norm_m_right"] = C * C1
    f_plus = maps.f.restrict(dom_idx=_interior_ht(F, F.N, lo=1))
    vals["norm_f"] = f_plus.norm()
    bounds["norm_f"] = C2 * math.sqrt(d)
    S_plus = maps.S.restrict(dom_idx=plus, cod_idx=plus)
    vals["norm_S"] = S_plus.norm()
    bounds["norm_S"] = C1 * C2

    # m_l^* = Phi o (A^{1/2} P_D (x) id), m_r^* = Psi o swap o (A^{-1/2} P_D (x) id)
    a_eig = maps.a_eigenvalues
    eyeT = sp.identity(T, format="csr")
    left_fac = sp.kron(sp.csr_matrix(np.diag(a_eig ** 0.5) @ maps.P_D), eyeT, format="csr")
    right_fac = sp.kron(sp.csr_matrix(np.diag(a_eig ** -0.5) @ maps.P_D), eyeT, format="csr")
    dom = _interior_ht(F, F.N - 1)
    gHF = Geometry.h_tensor_fock(F)
    phi = phi_embed(F)
    lhs = maps.m_left.adjoint()
    rhs = LinearMap(sp.csr_matrix(phi.mat @ left_fac), gHF, phi.codomain)
    vals["factorization_left"] = _orth_residual(F, lhs.restrict(dom_idx=dom), rhs.restrict(dom_idx=dom))
    bounds["factorization_left"] = tol
    psi = psi_embed(F)
    swap = _swap(F)
    lhs = maps.m_right.adjoint()
    rhs = LinearMap(sp.csr_matrix(psi.mat @ swap @ right_fac), gHF, psi.codomain)
    vals["factorization_right"] = _orth_residual(F, lhs.restrict(dom_idx=dom), rhs.restrict(dom_idx=dom))
    bounds["factorization_right"] = tol

    # f o m_l_dag = d and f o m_r_dag = S on interior levels of F^+
    fml = (maps.f @ maps.m_left_dag).restrict(dom_idx=interior)
    d_id = LinearMap(sp.csr_matrix(d * sp.identity(T, format="csr")[:, interior]),
                     fml.domain, fml.codomain)
    vals["f_m_left_dag_minus_d"] = _orth_residual(F, fml, d_id)
    bounds["f_m_left_dag_minus_d"] = tol
    fmr = (maps.f @ maps.m_right_dag).restrict(dom_idx=interior)
    vals["f_m_right_dag_minus_S"] = _orth_residual(F, fmr, maps.S.restrict(dom_idx=interior))
    bounds["f_m_right_dag_minus_S"] = tol

    # M = m_l + m_l_dag - m_r - m_r_dag and M Omega = 0
    decomp = LinearMap(maps.m_left.mat + maps.m_left_dag.mat - maps.m_right.mat
                       - maps.m_right_dag.mat, maps.M.domain, maps.M.codomain)
    vals["M_decomposition"] = _orth_residual(F, maps.M, decomp)
    bounds["M_decomposition"] = tol
    vals["T_e_minus_A_half_e"] = maps.t_residual
    bounds["T_e_minus_A_half_e"] = tol
    vals["M_Omega"] = float(np.linalg.norm(maps.M.mat[:, 0].toarray()))
    bounds["M_Omega"] = 0.0

    # M^*M = sum_i X_i^* X_i; equals sum_i X_i^2 when every W(e_i) is self-adjoint
    MM = maps.M.adjoint() @ maps.M
    G, Ginv = F.G, F.G_inv
    star_sum = sum(Ginv @ X.conj().T @ G @ X for X in maps.X)
    sq_sum = sum(X @ X for X in maps.X)
    cols = below_top
    gF = Geometry.fock(F)
    mm = MM.restrict(dom_idx=cols)
    vals["MstarM_minus_sum_XstarX"] = _orth_residual(
        F, mm, LinearMap(sp.csr_matrix(star_sum[:, cols]), mm.domain, gF))
    bounds["MstarM_minus_sum_XstarX"] = tol
    sq_res = _orth_residual(F, mm, LinearMap(sp.csr_matrix(sq_sum[:, cols]), mm.domain, gF))
    info = {"MstarM_minus_sum_X2": sq_res}
    if maps.selfadjoint_letters:
        vals["MstarM_minus_sum_X2"] = sq_res
        bounds["MstarM_minus_sum_X2"] = tol

    # lower bound on |m_dag| and the triangle/parallelogram consequences
    m_dag_in = maps.m_dag.restrict(dom_idx=interior)
    m_in = maps.m.restrict(dom_idx=interior)
    M_in = maps.M.restrict(dom_idx=interior)
    s_dag = m_dag_in.min_singular()
    vals["sigma_min_m_dag"] = s_dag
    radicand = d * d / 2 - (C1 * C2) ** 2
    bounds["sigma_min_m_dag"] = math.sqrt(radicand) / (C2 * math.sqrt(d)) if radicand > 0 else 0.0
    vals["norm_m_dag"] = maps.m_dag.norm()
    bounds["norm_m_dag"] = maps.m_left_dag.norm() + maps.m_right_dag.norm()
    fmd = (maps.f @ maps.m_dag).restrict(dom_idx=interior)
    vals["sigma_min_f_m_dag"] = fmd.min_singular()
    bounds["sigma_min_f_m_dag"] = d - vals["norm_S"]
    gap = M_in.min_singular() ** 2
    vals["lambda_min_MstarM"] = gap
    bounds["lambda_min_MstarM"] = s_dag ** 2 / 2 - m_in.norm() ** 2

    lower_is_bound = {"sigma_min_m_dag", "sigma_min_f_m_dag", "lambda_min_MstarM"}
    passed = {}
    for k, v in vals.items():
        if k in lower_is_bound:
            passed[k] = v >= bounds[k] - tol
        else:
            passed[k] = v <= bounds[k] + tol
    return NormLemmaReport(C, C1, C2, d, vals, bounds, passed, tol, info)


def _swap(F: TruncatedFockSpace) -> sp.csr_matrix:
    """Permutation H (x) F -> F (x) H."""
    d, T = F.dim_H, F.total_dim
    a, w = np.divmod(np.arange(d * T), T)
    return sp.csr_matrix((np.ones(d * T), (w * d + a, np.arange(d * T))), shape=(d * T, d * T))


def fullness_inequality(d: int, C: float, C1: float, C2: float) -> dict:
    c12 = (C1 * C2) ** 2
    lhs = float(d * d)
    rhs = 2.0 * c12 * (8.0 * C * C * d + 1.0)
    proof_bound = (d * d / 2.0 - c12) / (2.0 * C2 * C2 * d) - (2.0 * C * C1) ** 2
    return {
        "lhs": lhs,
        "rhs": rhs,
        "margin": lhs - rhs,
        "inequality_holds": lhs > rhs,
        "proof_bound": proof_bound,
    }


@dataclass(frozen=True)
class FullnessConfig:
    rep: RepresentationSpec
    C: float
    d: int
    N: int
    constants: tuple | None = None  # (C1, C2) user-supplied, else estimated
    compute_gap: bool = True


@dataclass
class FullnessCertificate:
    q: float
    d: int
    C: float
    N: int
    C1_used: float
    C2_used: float
    constants_provenance: str
    lhs: float
    rhs: float
    inequality_holds: bool
    margin: float
    proof_bound: float
    spectral_gap: float | None
    gap_levels: tuple

    def to_dict(self) -> dict:
        return asdict(self)


def certify_fullness(cfg: FullnessConfig) -> FullnessCertificate:
    rep = build_representation(cfg.rep)
    if cfg.C < 1:
        raise PreconditionError("C must be >= 1")
    fam = build_eigenvector_family(rep, cfg.C, cfg.d)
    if cfg.N < 2:
        raise PreconditionError("fullness certification needs N >= 2")
    F = build_fock(rep.dim_H, rep.q, cfg.N)
    if cfg.constants is not None:
        C1, C2 = (float(c) for c in cfg.constants)
        if C1 <= 0 or C2 <= 0:
            raise PreconditionError("constants must be positive")
        provenance = "user-supplied"
    else:
        est = estimate_constants(F)
        C1, C2 = est.C1, est.C2
        provenance = f"estimated at truncation N={cfg.N} (lower estimate, not rigorous)"
    ineq = fullness_inequality(cfg.d, cfg.C, C1, C2)
    gap = None
    if cfg.compute_gap:
        gap = spectral_gap(fullness_operator(F, rep, fam), F)
    return FullnessCertificate(
        q=rep.q, d=cfg.d, C=float(cfg.C), N=cfg.N,
        C1_used=C1, C2_used=C2, constants_provenance=provenance,
        lhs=ineq["lhs"], rhs=ineq["rhs"], inequality_holds=ineq["inequality_holds"],
        margin=ineq["margin"], proof_bound=ineq["proof_bound"],
        spectral_gap=gap, gap_levels=(1, cfg.N - 1),
    )
