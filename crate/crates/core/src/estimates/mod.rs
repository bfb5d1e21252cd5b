//! One checker per estimate: each computes LHS and RHS fields, the signed
//! margin RHS − LHS, hypothesis flags, and a verdict under the
//! discretization-aware tolerance policy.

mod cd;
mod context;
mod hamilton;
mod harnack;
mod hessian;
mod li_yau;
mod report;

pub use cd::cd_condition;
pub use context::{
    k_mn_over, lambda_alpha_eps, lambda_sqrt_terms, lambda_sqrt_terms_over, ricci_mn_at_least,
    validate_alpha_eps, EstimateContext, LambdaTerms,
};
pub use hamilton::{default_ceiling, hamilton_bound, hamilton_xi, liouville_assess};
pub use harnack::{
    harnack_bound, harnack_random_pairs, HarnackParams, PathPolicy, SpaceTimePoint,
};
pub use hessian::{
    hamilton_hessian, hessian_constants, hessian_global, hessian_local, ly_hessian,
    reversed_constants, reversed_harnack, validate_reversed_window, HessianConstants,
    HessianParams, LocalCylinder, HESS_COEF, SQRT2,
};
pub use li_yau::{li_yau_compact, li_yau_global, li_yau_local, local_a_constant, LocalCutoffCheck};
pub use report::{ArgMin, CheckReport, HypothesisFlag, MarginScan, Tolerances, Verdict};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("parameter violation: {0}")]
    Param(String),
    #[error("solution ceiling violated: sup w = {sup_w} > A/e = {cap}")]
    CeilingViolated { sup_w: f64, cap: f64 },
    #[error("need t1 < t2, got t1 = {t1}, t2 = {t2}")]
    TimeOrdering { t1: f64, t2: f64 },
    #[error("snapshot cadence too coarse: gap {have} exceeds (t2-t1)/16 = {need}")]
    CadenceTooCoarse { have: f64, need: f64 },
    #[error("the checked window is empty")]
    EmptyWindow,
    #[error("checks need t > 0, got t = {0}")]
    NonPositiveTime(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
