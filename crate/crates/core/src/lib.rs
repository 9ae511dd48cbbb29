//! Functional calculus for square matrices with real spectrum through the
//! Helffer–Sjöstrand formula, with a half-line variant built on Seeley
//! extensions.
//!
//! Functions enter as [`Jet`]s: exact evaluators of all derivatives up to
//! some order. [`hs_apply`] integrates the d-bar derivative of an
//! almost-analytic extension against the resolvent; [`gamma_apply`] first
//! extends a half-line function to the whole line.

pub mod aae;
pub mod error;
pub mod hs_engine;
pub mod jets;
pub mod linalg;
pub mod matrix_io;
pub mod norms;
pub mod numeric;
pub mod oracle;
pub mod quadrature;
pub mod seeley;

pub use aae::{sigma_field, AlmostAnalytic, CutoffShape};
pub use error::{Error, Result};
pub use hs_engine::{
    choose_taylor_order, gamma_apply, gamma_apply_with_cutoff, hs_apply, hs_apply_detailed, resolvent,
    GrowthEstimate, HsOutput, OperatorHandle, QuadratureConfig,
};
pub use jets::{japanese_bracket, jet_product, make_builtin, zero_jet, Builtin, Bump, Domain, Jet};
pub use linalg::CMatrix;
pub use matrix_io::{format_complex, format_matrix, format_real, parse_matrix};
pub use norms::{an_norm, Line, NormResult};
pub use oracle::{default_grid, estimate_growth, fit_growth, matrix_function_oracle, GrowthFit};
pub use seeley::{
    default_cutoff, extension_norm_bound, make_seeley_coefficients, multiply_by_cutoff, scale_jet,
    seeley_extend, SeeleyCoefficients,
};
