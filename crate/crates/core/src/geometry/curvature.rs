//! Bakry-Émery curvature of the weighted torus. Flat metric: `Ric ≡ 0` and
//! `Rm ≡ 0`, so all curvature comes from the weight: `Ric_f = Hess f` and
//! `Ric_f^{m−n} = Hess f − (∇f ⊗ ∇f)/(m − n)`.

use super::field::{ScalarField, SymTensorField};
use super::ops::{gradient, hessian};
use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BakryEmeryVariant {
    /// The (m−n)-tensor; requires m > n unless the weight is constant.
    Finite { m: f64 },
    Infinity,
}

#[derive(Debug, Clone)]
pub struct CurvatureData {
    /// `Ric_f = Hess f` (the ∞-variant tensor).
    pub ricci_f: SymTensorField,
    /// `Ric_f^{m−n}`; equals `ricci_f` for the ∞-variant.
    pub ricci_f_mn: SymTensorField,
    /// Lower-bound constant of the requested variant: `Ric ≥ −K g`, K ≥ 0.
    pub k: f64,
    /// `max(0, sup −λ_min(Ric_f))`; doubles as the |Rm| bound since Rm ≡ 0.
    pub k1: f64,
    /// |∇Rm| bound; identically zero on flat tori.
    pub k2: f64,
}

/// `K = max(0, sup over nodes of −λ_min(T))`, the tightest nonnegative
/// constant with `T ≥ −K g` on the grid.
pub fn tensor_lower_bound(t: &SymTensorField) -> f64 {
    let lmin = t.lambda_min();
    lmin.data().iter().fold(0.0_f64, |k, &v| k.max(-v))
}

pub fn bakry_emery(f: &ScalarField, variant: BakryEmeryVariant) -> Result<CurvatureData, GeometryError> {
    let n = f.grid().dim() as f64;
    let ricci_f = hessian(f);
    let ricci_f_mn = match variant {
        BakryEmeryVariant::Infinity => ricci_f.clone(),
        BakryEmeryVariant::Finite { m } => {
            let gf = gradient(f);
            if m > n {
                ricci_f.sub_outer_scaled(&gf, m - n)
            } else if m == n && gf.sup_norm() == 0.0 {
                // m = n happens exactly when f is constant; every correction
                // term degenerates to zero.
                ricci_f.clone()
            } else {
                return Err(GeometryError::BadDimensionParameter { m, n: f.grid().dim() });
            }
        }
    };
    let k = match variant {
        BakryEmeryVariant::Infinity => tensor_lower_bound(&ricci_f),
        BakryEmeryVariant::Finite { .. } => tensor_lower_bound(&ricci_f_mn),
    };
    let k1 = tensor_lower_bound(&ricci_f);
    Ok(CurvatureData { ricci_f, ricci_f_mn, k, k1, k2: 0.0 })
}
