"""Modular forms, enhanced elliptic-curve moduli and the 2-monopole metric."""

from .series import FracSeries, LatticeError, TruncationError, eval_series, format_terms
from .modforms import (
    DegenerateCurveError,
    Tau,
    WeierstrassInvariants,
    discriminant_q,
    eisenstein,
    eisenstein_q,
    g_invariants_tau,
    j_and_I,
    one_minus_I,
    quasi_modularity_check,
    theta,
    theta_q,
)
from .moduli import (
    AuditReport,
    BasisChange,
    ConnectionMatrix,
    DomainError,
    THPoint,
    TRPoint,
    act_G,
    act_Gp,
    audit_disguise,
    compose,
    contract,
    gm_matrix_H,
    gm_matrix_R,
    halphen_field,
    halphen_solution_theta,
    morphism_f,
    ramanujan_field,
    ramanujan_solution,
    real_section_check,
)
from .monopole import (
    BianchiFrame,
    OmegaPoint,
    SpectralCurve2,
    SpectralCurveK,
    asymptotic_report,
    degenerate_curve,
    dimensions,
    I_from_r,
    metric_from_omega,
    omega_from_theta,
    r_params_from_tau,
    real_structure_check,
    selfdual_residual,
    tau_from_r,
    weierstrass_from_r,
)
from .flow import FlowResult, integrate, residual_scan

__version__ = "0.1.0"


def clear_caches() -> None:
    """Drop memoised series and fitted scales (for cold-start timing)."""
    from . import modforms as _mf, moduli as _md, monopole as _mp

    for fn in (_mf.eisenstein_q, _mf.theta_q, _mf.discriminant_q, _md.theta_scale,
               _mp.omega_scale):
        fn.cache_clear()
