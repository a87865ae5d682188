//! Equilibrium tests, update-map Jacobians, rate constants and minibatch
//! size bounds.

pub mod classify;
pub mod jacobian;
pub mod rates;
pub mod sampling;

pub use classify::{
    classify_blocks, classify_minimax, classify_nash, classify_point, default_tau,
    ClassifyOptions, CriticalPointReport, EigenEvidence, Verdict,
};
pub use jacobian::{
    eg_polynomial, gda_matrix, jacobian_eg, jacobian_fr, jacobian_gdn, jacobian_hessianfr,
    jacobian_hessianfr_preconditioned, jacobian_ttsgda, PreconditionedReport, SpectralReport,
};
pub use rates::{match_gdn_rate, rate_bounds, ridge_radius, RateBounds, RateMatch};
pub use sampling::{
    empirical_concentration_check, lemma_bounds, lemma_epsilon, sample_size_bound,
    sample_size_terms, ConcentrationReport, LemmaKind, SampleSizeInputs,
};
