"""Numerical toolkit for q-deformed Fock spaces, free Araki-Woods type Wick
algebras, their modular theory, and a spectral-gap fullness certifier."""
from .errors import (
    CapExceeded,
    ContractViolation,
    GramSingularError,
    InsufficientSpectralMass,
    PreconditionError,
    QFockError,
    StabilityError,
)
from .representation import (
    EigenvectorFamily,
    Representation,
    RepresentationSpec,
    apply_A_power,
    apply_I,
    apply_T,
    apply_U,
    build_eigenvector_family,
    build_representation,
    j_map,
    spectral_subspace,
)
from .fock import (
    TruncatedFockSpace,
    build_fock,
    gram_fast,
    gram_naive,
    level_projection,
    q_inner,
    q_norm,
)
from .operators import (
    FockOperator,
    adjoint_q,
    annihilation_left,
    annihilation_right,
    creation_left,
    creation_right,
    identity,
    operator_norm_q,
    vacuum_state,
    wick,
    wick_right,
    wick_word,
)
from .modular import (
    Monomial,
    StablePolynomial,
    centralizer_residual,
    kms_residual,
    modular_conjugation,
    modular_data,
    modular_flow,
    realize_stable,
    stable_monomials,
    tomita_residual,
)
from .moments import crossing_polynomial, enumerate_pairings, moment_pairing_formula
from .fullness import (
    FullnessCertificate,
    FullnessConfig,
    build_m_maps,
    certify_fullness,
    check_norm_lemmas,
    estimate_constants,
    fullness_inequality,
    phi_embed,
    psi_embed,
    spectral_gap,
)

__version__ = "0.1.0"
