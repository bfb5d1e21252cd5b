//! Shared context for the checkers: the checked space-time window, the bound
//! constants extracted from it, and the curvature constants of the weight.

use std::sync::Arc;

use crate::geometry::{bakry_emery, gradient, BakryEmeryVariant, Grid, ScalarField};
use crate::model::{sample_bounds, BoundSet, FieldSpec, Nonlinearity};
use crate::solver::Snapshot;

use super::report::Tolerances;
use super::EstimateError;

pub struct EstimateContext<'a> {
    pub weight: &'a FieldSpec,
    pub potential: &'a FieldSpec,
    pub nl: &'a Nonlinearity,
    /// Snapshots of the checked window, ascending in time.
    pub snapshots: &'a [Snapshot],
    pub bounds: BoundSet,
    /// `Ric_f ≥ −k_inf g` over the window (∞-Bakry-Émery constant).
    pub k_inf: f64,
    pub tol: Tolerances,
}

impl<'a> EstimateContext<'a> {
    pub fn build(
        weight: &'a FieldSpec,
        potential: &'a FieldSpec,
        nl: &'a Nonlinearity,
        snapshots: &'a [Snapshot],
        tol: Tolerances,
    ) -> Result<Self, EstimateError> {
        if snapshots.is_empty() {
            return Err(EstimateError::EmptyWindow);
        }
        let grid = snapshots[0].w.grid();
        let mut k_inf = 0.0_f64;
        let mut curv_last = None;
        for s in snapshots {
            let f = weight.sample(grid, s.t());
            let c = bakry_emery(&f, BakryEmeryVariant::Infinity)?;
            k_inf = k_inf.max(c.k);
            curv_last = Some(c);
        }
        let mut curv = curv_last.expect("nonempty window");
        curv.k1 = k_inf; // window supremum; |Rm| = 0 contributes nothing
        let ws: Vec<&ScalarField> = snapshots.iter().map(|s| &s.w).collect();
        let bounds = sample_bounds(&ws, potential, nl, &curv)?;
        Ok(EstimateContext { weight, potential, nl, snapshots, bounds, k_inf, tol })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.snapshots[0].w.grid()
    }

    pub fn t_start(&self) -> f64 {
        self.snapshots[0].t()
    }

    pub fn t_end(&self) -> f64 {
        self.snapshots[self.snapshots.len() - 1].t()
    }

    /// Window length T used by the parabolic-cylinder constants. A window
    /// with a single snapshot has no temporal extent; that is rejected by
    /// the checkers that need T > 0.
    pub fn t_len(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    /// `Ric_f^{m−n} ≥ −k g` over the window for the given m.
    pub fn k_mn(&self, m: f64) -> Result<f64, EstimateError> {
        k_mn_over(self.weight, self.snapshots, m)
    }

    /// Same, restricted to nodes within distance `radius` of `center`.
    pub fn k_mn_ball(&self, m: f64, center: &[f64], radius: f64) -> Result<f64, EstimateError> {
        let grid = self.grid();
        let mut k = 0.0_f64;
        for s in self.snapshots {
            let f = self.weight.sample(grid, s.t());
            let c = bakry_emery(&f, BakryEmeryVariant::Finite { m })?;
            let lmin = c.ricci_f_mn.lambda_min();
            for idx in 0..grid.node_count() {
                let p = grid.node_point(idx);
                if crate::geometry::geodesic_distance(&p, center, grid) <= radius {
                    k = k.max(-lmin.data()[idx]);
                }
            }
        }
        Ok(k.max(0.0))
    }

    /// u = log w and u_t = w_t/w for a snapshot.
    pub fn log_fields(&self, snap: &Snapshot) -> (ScalarField, ScalarField) {
        let u = snap.w.map(f64::ln);
        let u_t = snap.w_t.zip(&snap.w, |wt, w| wt / w).expect("snapshot fields share layout");
        (u, u_t)
    }

    /// Verify m against the manifold dimension the way the finite-variant
    /// tensor does (m > n, or m = n with constant weight).
    pub fn validate_m(&self, m: f64) -> Result<(), EstimateError> {
        let n = self.grid().dim() as f64;
        if m > n {
            return Ok(());
        }
        let f0 = self.weight.sample(self.grid(), self.t_start());
        if m == n && gradient(&f0).sup_norm() == 0.0 {
            return Ok(());
        }
        Err(EstimateError::Param(format!(
            "m > n required (m = {m}, n = {n}; m = n only with constant weight)"
        )))
    }
}

/// Terms under the square root of Λ_{α,ε}: the windowed supremum of
/// `mα³(L_f q + L_f G̃)/(2(1−ε)) + α²(α−1)m(|∇q|² + |∇G̃|²)/(1−ε)`,
/// with the negative part clamped to zero (flagged by `clamped`).
#[derive(Debug, Clone, Copy)]
pub struct LambdaTerms {
    pub sup_sqrt_arg: f64,
    pub clamped: bool,
}

/// Compute the windowed square-root argument, optionally restricted to a
/// geodesic ball.
pub fn lambda_sqrt_terms(
    ctx: &EstimateContext,
    m: f64,
    alpha: f64,
    eps: f64,
    ball: Option<(&[f64], f64)>,
) -> Result<LambdaTerms, EstimateError> {
    lambda_sqrt_terms_over(ctx.weight, ctx.potential, ctx.nl, ctx.snapshots, m, alpha, eps, ball)
}

/// `Ric_f^{m−n} ≥ −k g` supremum over an explicit snapshot slice.
pub fn k_mn_over(weight: &FieldSpec, snapshots: &[Snapshot], m: f64) -> Result<f64, EstimateError> {
    if snapshots.is_empty() {
        return Err(EstimateError::EmptyWindow);
    }
    let grid = snapshots[0].w.grid();
    let mut k = 0.0_f64;
    for s in snapshots {
        let f = weight.sample(grid, s.t());
        let c = bakry_emery(&f, BakryEmeryVariant::Finite { m })?;
        k = k.max(c.k);
    }
    Ok(k)
}

/// Windowed sqrt-argument supremum over an explicit snapshot slice.
#[allow(clippy::too_many_arguments)]
pub fn lambda_sqrt_terms_over(
    weight: &FieldSpec,
    potential: &FieldSpec,
    nl: &Nonlinearity,
    snapshots: &[Snapshot],
    m: f64,
    alpha: f64,
    eps: f64,
    ball: Option<(&[f64], f64)>,
) -> Result<LambdaTerms, EstimateError> {
    validate_alpha_eps(alpha, eps)?;
    if snapshots.is_empty() {
        return Err(EstimateError::EmptyWindow);
    }
    let grid = snapshots[0].w.grid();
    let mut sup = f64::NEG_INFINITY;
    for s in snapshots {
        let f = weight.sample(grid, s.t());
        let q = potential.sample(grid, s.t());
        let lf_q = crate::geometry::weighted_laplacian(&q, &f)?;
        let lf_gt = nl.g_tilde_weighted_laplacian_field(&s.w, &f)?;
        let gq2 = gradient(&q).norm_sq();
        let ggt2 = nl.g_tilde_gradient_field(&s.w)?.norm_sq();
        for idx in 0..grid.node_count() {
            if let Some((center, radius)) = ball {
                let p = grid.node_point(idx);
                if crate::geometry::geodesic_distance(&p, center, grid) > radius {
                    continue;
                }
            }
            let v = m * alpha.powi(3) * (lf_q.data()[idx] + lf_gt.data()[idx]) / (2.0 * (1.0 - eps))
                + alpha * alpha * (alpha - 1.0) * m * (gq2.data()[idx] + ggt2.data()[idx])
                    / (1.0 - eps);
            sup = sup.max(v);
        }
    }
    if !sup.is_finite() {
        return Err(EstimateError::EmptyWindow);
    }
    Ok(LambdaTerms { sup_sqrt_arg: sup.max(0.0), clamped: sup < 0.0 })
}

/// Λ_{α,ε} = √(sup sqrt-arg) + mα²K/((1−ε)(α−1)) + mα²/(2(1−ε)).
pub fn lambda_alpha_eps(
    m: f64,
    alpha: f64,
    eps: f64,
    k: f64,
    terms: &LambdaTerms,
) -> Result<f64, EstimateError> {
    validate_alpha_eps(alpha, eps)?;
    Ok(terms.sup_sqrt_arg.sqrt()
        + m * alpha * alpha * k / ((1.0 - eps) * (alpha - 1.0))
        + m * alpha * alpha / (2.0 * (1.0 - eps)))
}

pub fn validate_alpha_eps(alpha: f64, eps: f64) -> Result<(), EstimateError> {
    if !(alpha > 1.0) {
        return Err(EstimateError::Param(format!("alpha > 1 required, got alpha = {alpha}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(EstimateError::Param(format!("0 < epsilon < 1 required, got epsilon = {eps}")));
    }
    Ok(())
}

/// Check whether `Ric_f^{m−n} ≥ k g` holds on a field's grid within slack.
/// Returns the flag outcome together with the observed inf of λ_min.
pub fn ricci_mn_at_least(
    f: &ScalarField,
    m: f64,
    k: f64,
    slack: f64,
) -> Result<(bool, f64), EstimateError> {
    let c = bakry_emery(f, BakryEmeryVariant::Finite { m })?;
    let inf_lmin = c.ricci_f_mn.lambda_min().min();
    Ok((inf_lmin >= k - slack, inf_lmin))
}
