"""Numerics lab for logarithmic double-phase Musielak-Orlicz spaces."""

__version__ = "0.1.0"

from .fields import (  # noqa: F401
    ExponentField,
    RegularityEstimate,
    SampleRegion,
    ScalarField,
    affine,
    bump,
    check_ball_oscillation_lemma,
    check_nekvinda,
    constant,
    estimate_holder,
    estimate_log_holder,
    estimate_loglog_holder,
    from_expression,
    infsup_over,
    radial,
    step,
)
from .phi import (  # noqa: F401
    PhiFunction,
    PsiFunction,
    check_inc_dec,
    check_inverse_relation,
    make_target_psi,
    phi_conjugate,
    phi_eval,
    phi_inverse,
    psi_eval,
    sobolev_conjugate,
)
from .norms import (  # noqa: F401
    NormResult,
    SampledFunction,
    check_holder_inequality,
    check_norm_modular_sandwich,
    check_pointwise_embedding_certificate,
    check_unit_ball,
    conjugate_norm,
    luxemburg_norm,
    modular,
    sobolev_modular,
    sobolev_norm,
)
from .geometry import (  # noqa: F401
    DiscretizedDomain,
    DensityScan,
    ball_intersection_measure,
    gallery_domain,
    halving_radius,
    john_witness,
    make_cutoff,
    scan_measure_density,
)
from .conditions import (  # noqa: F401
    ConditionReport,
    compute_claim_constants,
    verify_A0,
    verify_A1_equivalent,
    verify_A1_prime,
    verify_A2_prime,
)
from .embedding import (  # noqa: F401
    EmbeddingTrial,
    NecessityTrace,
    certify_sufficiency,
    check_indicator_norm_bounds,
    check_radius_gap_lemma,
    compute_r0_threshold,
    integral_test_bound,
    run_embedding_trials,
    run_necessity_trace,
)
from .expressions import parse_expression  # noqa: F401
from .scenarios import FIELD_GALLERY, Scenario, run_scenario, validate_config  # noqa: F401
