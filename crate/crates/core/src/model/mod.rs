//! Equation specification: coefficient fields declared as expressions, the
//! nonlinearity catalog, and extraction of the scalar bound constants
//! (θ₁–θ₄, K₁–K₈) that the estimates consume.

pub mod bounds;
pub mod expr;
pub mod nonlinearity;

pub use bounds::{sample_bounds, BoundSet};
pub use expr::{Expr, ExprError};
pub use nonlinearity::{
    caffarelli_lin_lambda, catalog, l2_normalization_drift, CatalogEntry, CustomTable,
    Nonlinearity,
};

use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{Grid, GeometryError, ScalarField};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{case}: domain violation at w = {w}: {reason}")]
    Domain { case: &'static str, w: f64, reason: String },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("bad custom table: {0}")]
    BadTable(String),
    #[error("the nonlocal case has no pointwise evaluation; use the field-level operations")]
    Nonlocal,
    #[error("coefficient field is not finite everywhere (expression '{0}')")]
    NonFiniteField(String),
}

/// A coefficient of the equation given as an expression over (x, y, t).
/// Used for the weight f, the potential q, the nonlocal source A, and
/// initial data. Derivative fields are obtained by applying the discrete
/// geometry operators to the sampled field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    expr: Expr,
}

impl FieldSpec {
    pub fn parse(src: &str) -> Result<Self, ModelError> {
        Ok(FieldSpec { expr: Expr::parse(src)? })
    }

    pub fn zero() -> Self {
        FieldSpec { expr: Expr::parse("0").expect("literal zero parses") }
    }

    pub fn source(&self) -> &str {
        self.expr.source()
    }

    /// True when the expression does not reference `t`; static coefficients
    /// are sampled once and reused across time steps.
    pub fn is_static(&self) -> bool {
        !self.expr.uses_t()
    }

    pub fn uses_y(&self) -> bool {
        self.expr.uses_y()
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        self.expr.eval(x, y, t)
    }

    pub fn sample(&self, grid: &Arc<Grid>, t: f64) -> ScalarField {
        ScalarField::from_fn(grid, t, |x, y| self.expr.eval(x, y, t))
    }

    pub fn sample_checked(&self, grid: &Arc<Grid>, t: f64) -> Result<ScalarField, ModelError> {
        let f = self.sample(grid, t);
        if !f.all_finite() {
            return Err(ModelError::NonFiniteField(self.source().to_string()));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::nonlinearity::caffarelli_lin_lambda;
    use super::*;
    use crate::geometry::{gradient, weighted_laplacian};
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    #[test]
    fn catalog_point_values() {
        let fk = Nonlinearity::FisherKpp { c: 1.0 };
        assert_eq!(fk.g(0.5).unwrap(), 0.25);
        assert_eq!(fk.g_prime(0.5).unwrap(), 0.0);
        assert!((fk.g_tilde(0.5).unwrap() - 0.5).abs() < 1e-15);

        let z = Nonlinearity::Zero;
        assert_eq!(z.g(3.0).unwrap(), 0.0);
        assert_eq!(z.g_prime(3.0).unwrap(), 0.0);
        assert_eq!(z.g_tilde(3.0).unwrap(), 0.0);

        let ac = Nonlinearity::AllenCahn { c: 2.0 };
        assert!((ac.g(0.5).unwrap() - 0.75).abs() < 1e-15);

        let pp = Nonlinearity::PurePower { b: 3.0 };
        assert!((pp.g_tilde(2.0).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn domain_violations() {
        let fk = Nonlinearity::FisherKpp { c: 1.0 };
        assert!(fk.g(1.5).is_err());
        assert!(fk.g(-0.1).is_err());
        let lp = Nonlinearity::LogPower { a: 1.0, alpha: 0.5 };
        assert!(lp.g(1.0).is_err());
        assert!(lp.g(0.5).is_err()); // non-integer alpha needs w > 1
        assert!(lp.g(2.0).is_ok());
        let lp1 = Nonlinearity::LogPower { a: 1.0, alpha: 1.0 };
        assert!(lp1.g(0.5).is_ok()); // alpha = 1 is regular through w = 1
    }

    #[test]
    fn parameter_validation() {
        assert!(Nonlinearity::PowerDiff { a: 1.0, b: 1.0, p: 2.0, q: 1.5 }.validate().is_err());
        assert!(Nonlinearity::PowerDiff { a: 1.0, b: 1.0, p: 1.0, q: 2.0 }.validate().is_ok());
        assert!(Nonlinearity::PurePower { b: 1.0 }.validate().is_err());
        assert!(Nonlinearity::FisherKpp { c: 0.0 }.validate().is_err());
    }

    fn all_pointwise_cases() -> Vec<Nonlinearity> {
        // dense fisher-kpp table for the custom case
        let ws: Vec<f64> = (1..=200).map(|i| 0.005 * i as f64).collect();
        let g: Vec<f64> = ws.iter().map(|&w| w * (1.0 - w)).collect();
        let gp: Vec<f64> = ws.iter().map(|&w| 1.0 - 2.0 * w).collect();
        let gpp: Vec<f64> = ws.iter().map(|_| -2.0).collect();
        vec![
            Nonlinearity::Zero,
            Nonlinearity::PowerDiff { a: 1.0, b: 0.5, p: 1.0, q: 3.0 },
            Nonlinearity::PurePower { b: 3.0 },
            Nonlinearity::LogPower { a: 0.7, alpha: 2.0 },
            Nonlinearity::AllenCahn { c: 1.5 },
            Nonlinearity::FisherKpp { c: 1.0 },
            Nonlinearity::Custom(CustomTable::new(ws, g, gp, gpp).unwrap()),
        ]
    }

    #[test]
    fn g_prime_matches_finite_difference() {
        // 20 interior points per case, centered difference step 1e-5
        let dw = 1e-5;
        for nl in all_pointwise_cases() {
            for k in 1..=20 {
                let w = 0.05 + 0.04 * k as f64; // 0.09 .. 0.85, safe for all cases above
                let w = if matches!(nl, Nonlinearity::LogPower { .. }) { w + 1.2 } else { w };
                if nl.check_domain(w).is_err() {
                    continue;
                }
                let fd = (nl.g(w + dw).unwrap() - nl.g(w - dw).unwrap()) / (2.0 * dw);
                let exact = nl.g_prime(w).unwrap();
                let scale = 1.0 + exact.abs();
                assert!(
                    (fd - exact).abs() / scale < 1e-7,
                    "{}: w = {w}, fd = {fd}, exact = {exact}",
                    nl.name()
                );
            }
        }
    }

    #[test]
    fn chain_rule_fields_match_discrete_differentiation() {
        // ∇G̃ and L_f G̃ by chain rule agree with differencing the composed
        // field G̃(w(x)) to O(h²)
        let g = Grid::torus(1, &[TAU], &[256]).unwrap();
        let h = g.spacing(0);
        let w = ScalarField::from_fn(&g, 0.0, |x, _| 0.5 + 0.2 * x.sin());
        let f = ScalarField::from_fn(&g, 0.0, |x, _| 0.3 * x.cos());
        for nl in [
            Nonlinearity::FisherKpp { c: 1.0 },
            Nonlinearity::AllenCahn { c: 1.0 },
            Nonlinearity::PowerDiff { a: 1.0, b: 0.5, p: 1.0, q: 3.0 },
            Nonlinearity::PurePower { b: 2.5 },
        ] {
            let chain = nl.g_tilde_gradient_field(&w).unwrap();
            let composed = gradient(&nl.g_tilde_field(&w).unwrap());
            let mut worst = 0.0_f64;
            for i in 0..w.len() {
                worst = worst.max((chain.component(0)[i] - composed.component(0)[i]).abs());
            }
            assert!(worst < 10.0 * h * h, "{}: grad mismatch {worst}", nl.name());

            let chain_l = nl.g_tilde_weighted_laplacian_field(&w, &f).unwrap();
            let composed_l = weighted_laplacian(&nl.g_tilde_field(&w).unwrap(), &f).unwrap();
            let mut worst_l = 0.0_f64;
            for i in 0..w.len() {
                worst_l = worst_l.max((chain_l.data()[i] - composed_l.data()[i]).abs());
            }
            assert!(worst_l < 30.0 * h * h, "{}: L_f mismatch {worst_l}", nl.name());
        }
    }

    #[test]
    fn allen_cahn_gradient_display_is_chain_rule() {
        // ∇G̃ = −2cw∇w for G̃ = c(1−w²)
        let g = Grid::torus(1, &[TAU], &[128]).unwrap();
        let w = ScalarField::from_fn(&g, 0.0, |x, _| 0.5 + 0.1 * x.sin());
        let c = 1.3;
        let nl = Nonlinearity::AllenCahn { c };
        let chain = nl.g_tilde_gradient_field(&w).unwrap();
        let gw = gradient(&w);
        for i in 0..w.len() {
            let display = -2.0 * c * w.data()[i] * gw.component(0)[i];
            assert!((chain.component(0)[i] - display).abs() < 1e-13);
        }
    }

    #[test]
    fn fisher_kpp_gradient_is_minus_c_grad_w() {
        // chain rule on G̃ = c(1−w): ∇G̃ = −c∇w
        let g = Grid::torus(1, &[TAU], &[128]).unwrap();
        let w = ScalarField::from_fn(&g, 0.0, |x, _| 0.5 + 0.1 * x.sin());
        let c = 0.8;
        let nl = Nonlinearity::FisherKpp { c };
        let chain = nl.g_tilde_gradient_field(&w).unwrap();
        let gw = gradient(&w);
        for i in 0..w.len() {
            assert!((chain.component(0)[i] + c * gw.component(0)[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_solution_zeroes_all_field_derivatives() {
        let g = Grid::torus(1, &[TAU], &[64]).unwrap();
        let w = ScalarField::constant(&g, 0.0, 0.5);
        let f = ScalarField::constant(&g, 0.0, 0.0);
        let nl = Nonlinearity::AllenCahn { c: 1.0 };
        assert_eq!(nl.g_tilde_gradient_field(&w).unwrap().sup_norm(), 0.0);
        assert_eq!(nl.g_tilde_weighted_laplacian_field(&w, &f).unwrap().sup_abs(), 0.0);
    }

    #[test]
    fn caffarelli_lambda_quadrature() {
        let g = Grid::torus(1, &[TAU], &[256]).unwrap();
        // normalized constant: w = (2π)^{-1/2}
        let w = ScalarField::constant(&g, 0.0, TAU.powf(-0.5));
        let a0 = ScalarField::constant(&g, 0.0, 0.0);
        assert!(caffarelli_lin_lambda(&w, &a0).unwrap().abs() < 1e-14);
        let a1 = ScalarField::constant(&g, 0.0, 1.0);
        let lam = caffarelli_lin_lambda(&w, &a1).unwrap();
        assert!((lam + TAU.sqrt()).abs() < 1e-12, "lambda = {lam}");
        assert!(l2_normalization_drift(&w) < 1e-12);
    }

    #[test]
    fn caffarelli_field_derivatives_match_composition() {
        let g = Grid::torus(1, &[TAU], &[256]).unwrap();
        let h = g.spacing(0);
        let w = ScalarField::from_fn(&g, 0.0, |x, _| 0.5 + 0.2 * x.sin());
        let f = ScalarField::from_fn(&g, 0.0, |x, _| 0.1 * x.cos());
        let nl = Nonlinearity::CaffarelliLin { a_field: FieldSpec::parse("0.2*cos(x)").unwrap() };
        let chain = nl.g_tilde_gradient_field(&w).unwrap();
        let composed = gradient(&nl.g_tilde_field(&w).unwrap());
        let mut worst = 0.0_f64;
        for i in 0..w.len() {
            worst = worst.max((chain.component(0)[i] - composed.component(0)[i]).abs());
        }
        assert!(worst < 10.0 * h * h, "grad mismatch {worst}");
        let chain_l = nl.g_tilde_weighted_laplacian_field(&w, &f).unwrap();
        let composed_l = weighted_laplacian(&nl.g_tilde_field(&w).unwrap(), &f).unwrap();
        let mut worst_l = 0.0_f64;
        for i in 0..w.len() {
            worst_l = worst_l.max((chain_l.data()[i] - composed_l.data()[i]).abs());
        }
        assert!(worst_l < 40.0 * h * h, "L_f mismatch {worst_l}");
    }

    #[test]
    fn field_spec_static_detection() {
        assert!(FieldSpec::parse("0.3*cos(x)").unwrap().is_static());
        assert!(!FieldSpec::parse("cos(x)*exp(-t)").unwrap().is_static());
    }
}
