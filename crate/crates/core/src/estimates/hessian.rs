//! Hessian estimate checkers: the parabolic-cylinder bound on |∇²w|/w in
//! global and localized form, the Li-Yau-type and Hamilton-type Hessian
//! corollaries, and the time-reversed Harnack inequality they imply.

use std::collections::BTreeMap;

use crate::geometry::{geodesic_distance, gradient, hessian};
use crate::model::BoundSet;
use crate::solver::Snapshot;

use super::context::{lambda_alpha_eps, lambda_sqrt_terms, EstimateContext};
use super::report::{CheckReport, HypothesisFlag, MarginScan};
use super::EstimateError;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;
/// The structural constant 4√2 − 1 of the Hessian bounds.
pub const HESS_COEF: f64 = 4.0 * SQRT2 - 1.0;

#[derive(Debug, Clone, Copy)]
pub struct HessianParams {
    pub beta: f64,
    pub delta: f64,
    /// The free positive constant of the cylinder bounds (config input,
    /// default 1); `required_c` reports the smallest value that would close
    /// the margin.
    pub c: f64,
}

impl HessianParams {
    pub fn validate(&self) -> Result<(), EstimateError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(EstimateError::Param(format!(
                "0 < delta < 1 required, got delta = {}",
                self.delta
            )));
        }
        let beta_floor = (self.delta / (1.0 - self.delta)).sqrt();
        if !(self.beta >= beta_floor) {
            return Err(EstimateError::Param(format!(
                "beta >= sqrt(delta/(1-delta)) = {beta_floor} required, got beta = {}",
                self.beta
            )));
        }
        if !(self.c > 0.0) {
            return Err(EstimateError::Param(format!("C > 0 required, got C = {}", self.c)));
        }
        Ok(())
    }
}

/// Geometry of the local cylinder Q_{R,T}.
#[derive(Debug, Clone)]
pub struct LocalCylinder {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// The scalar constants of the cylinder bounds assembled from a BoundSet.
#[derive(Debug, Clone, Copy)]
pub struct HessianConstants {
    pub omega: f64,
    pub lambda_hess: f64,
    pub a_script: f64,
    pub b_script: f64,
}

/// Ω = 2K₃ + CK₂ + 2βK₃ and Λ = max(2K₆+CK₁+K₇, 2K₁+4K₆+4K₈), then
/// 𝒜 = Ω/(δβ²) + (K₄+K₅)/(δβ) + C/(δ²β²T²)  (plus the 1/R⁴ and K₁/R²
/// terms in the localized form) and ℬ = (Ω+Λ)/(δβ) + 2C²/(δβT²).
pub fn hessian_constants(
    b: &BoundSet,
    hp: &HessianParams,
    t_len: f64,
    local: Option<&LocalCylinder>,
) -> HessianConstants {
    let (beta, delta, c) = (hp.beta, hp.delta, hp.c);
    let omega = 2.0 * b.k3 + c * b.k2 + 2.0 * beta * b.k3;
    let lambda_hess =
        (2.0 * b.k6 + c * b.k1 + b.k7).max(2.0 * b.k1 + 4.0 * b.k6 + 4.0 * b.k8);
    let mut a_script = omega / (delta * beta * beta)
        + (b.k4 + b.k5) / (delta * beta)
        + c / (delta * delta * beta * beta * t_len * t_len);
    if let Some(cyl) = local {
        let r = cyl.radius;
        a_script += c / (delta.powi(4) * beta.powi(6) * r.powi(4))
            + c / (delta * delta * beta * beta) * (1.0 / r.powi(4) + b.k1 / (r * r));
    }
    let b_script = (omega + lambda_hess) / (delta * beta)
        + 2.0 * c * c / (delta * beta * t_len * t_len);
    HessianConstants { omega, lambda_hess, a_script, b_script }
}

fn require_window_length(ctx: &EstimateContext) -> Result<f64, EstimateError> {
    let t_len = ctx.t_len();
    if !(t_len > 0.0) {
        return Err(EstimateError::Param(
            "hessian checks need a window with positive temporal extent".into(),
        ));
    }
    Ok(t_len)
}

/// Smallest C ≥ 0 that closes the margin, given the C-independent part of
/// the minimum margin. Bisection to 1e−6.
fn required_c(
    b: &BoundSet,
    hp: &HessianParams,
    t_len: f64,
    local: Option<&LocalCylinder>,
    base_min: f64,
) -> f64 {
    let margin_at = |c: f64| -> f64 {
        let probe = HessianParams { c, ..*hp };
        let k = hessian_constants(b, &probe, t_len, local);
        base_min + SQRT2 * k.a_script.sqrt() + SQRT2 * k.b_script
    };
    if margin_at(0.0) >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while margin_at(hi) < 0.0 && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if margin_at(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

struct HessianScan {
    scan: MarginScan,
    base_min: f64,
}

/// Pointwise scan of `|Hess w|/w ≤ (4√2−1)β|∇w|²/w² + √2√𝒜 + √2ℬ`,
/// optionally restricted to a ball. Returns the scan plus the
/// C-independent part of the minimum margin (for `required_c`).
fn scan_cylinder_bound(
    snap: &Snapshot,
    beta: f64,
    consts: &HessianConstants,
    ball: Option<(&[f64], f64)>,
) -> HessianScan {
    let grid = snap.w.grid();
    let t = snap.t();
    let lhs_field = hessian(&snap.w).frobenius();
    let gw2 = gradient(&snap.w).norm_sq();
    let tail = SQRT2 * consts.a_script.sqrt() + SQRT2 * consts.b_script;
    let mut scan = MarginScan::new();
    let mut base_min = f64::INFINITY;
    for idx in 0..grid.node_count() {
        let p = grid.node_point(idx);
        if let Some((center, radius)) = ball {
            if geodesic_distance(&p, center, grid) > radius {
                continue;
            }
        }
        let w = snap.w.data()[idx];
        let lhs = lhs_field.data()[idx] / w;
        let grad_term = HESS_COEF * beta * gw2.data()[idx] / (w * w);
        scan.visit(lhs, grad_term + tail, &p, t);
        base_min = base_min.min(grad_term - lhs);
    }
    HessianScan { scan, base_min }
}

#[allow(clippy::too_many_arguments)]
fn hessian_report(
    ctx: &EstimateContext,
    name: &str,
    hs: HessianScan,
    hp: &HessianParams,
    consts: &HessianConstants,
    t_len: f64,
    local: Option<&LocalCylinder>,
    extra_params: BTreeMap<String, f64>,
) -> CheckReport {
    let req_c = required_c(&ctx.bounds, hp, t_len, local, hs.base_min);
    let mut params = extra_params;
    params.insert("beta".into(), hp.beta);
    params.insert("delta".into(), hp.delta);
    params.insert("c".into(), hp.c);
    params.insert("t_window".into(), t_len);
    let mut inter = BTreeMap::new();
    inter.insert("omega".into(), consts.omega);
    inter.insert("lambda_hess".into(), consts.lambda_hess);
    inter.insert("a_script".into(), consts.a_script);
    inter.insert("b_script".into(), consts.b_script);
    inter.insert("required_c".into(), req_c);
    let tolerance = hs.scan.tolerance(&ctx.tol, ctx.grid().max_spacing());
    hs.scan.finalize(name, params, vec![], vec![], inter, tolerance)
}

/// Global cylinder bound on |Hess w|/w over M × [t_end − T, t_end].
pub fn hessian_global(
    ctx: &EstimateContext,
    snap: &Snapshot,
    hp: &HessianParams,
) -> Result<CheckReport, EstimateError> {
    hp.validate()?;
    let t_len = require_window_length(ctx)?;
    let consts = hessian_constants(&ctx.bounds, hp, t_len, None);
    let hs = scan_cylinder_bound(snap, hp.beta, &consts, None);
    Ok(hessian_report(ctx, "hessian_global", hs, hp, &consts, t_len, None, BTreeMap::new()))
}

/// Localized cylinder bound: constants retain the 1/R⁴ and K₁/R² terms, and
/// the margin is evaluated on B(x₀, R/2). The caller restricts snapshots to
/// the second half of the window (the Q_{R/2, T/2} time range).
pub fn hessian_local(
    ctx: &EstimateContext,
    snap: &Snapshot,
    hp: &HessianParams,
    cyl: &LocalCylinder,
) -> Result<CheckReport, EstimateError> {
    hp.validate()?;
    let t_len = require_window_length(ctx)?;
    let grid = ctx.grid();
    if !(cyl.radius > 0.0) || cyl.radius >= grid.injectivity_radius() {
        return Err(EstimateError::Param(format!(
            "cylinder radius {} must sit inside the injectivity radius {}",
            cyl.radius,
            grid.injectivity_radius()
        )));
    }
    let consts = hessian_constants(&ctx.bounds, hp, t_len, Some(cyl));
    let hs =
        scan_cylinder_bound(snap, hp.beta, &consts, Some((&cyl.center, cyl.radius / 2.0)));
    let mut params = BTreeMap::new();
    params.insert("radius".into(), cyl.radius);
    Ok(hessian_report(ctx, "hessian_local", hs, hp, &consts, t_len, Some(cyl), params))
}

/// Li-Yau-type Hessian bound:
/// `|∇²w|/w ≤ (4√2−1)β(Λ_{α,ε} + mα²/(2t(1−ε)) + α(w_t/w + q + G̃))
///  + √2𝒜^{1/2} + √2ℬ`.
#[allow(clippy::too_many_arguments)]
pub fn ly_hessian(
    ctx: &EstimateContext,
    snap: &Snapshot,
    m: f64,
    alpha: f64,
    eps: f64,
    hp: &HessianParams,
) -> Result<CheckReport, EstimateError> {
    hp.validate()?;
    ctx.validate_m(m)?;
    let t = snap.t();
    if !(t > 0.0) {
        return Err(EstimateError::NonPositiveTime(t));
    }
    let t_len = require_window_length(ctx)?;
    let k = ctx.k_mn(m)?;
    let terms = lambda_sqrt_terms(ctx, m, alpha, eps, None)?;
    let lambda = lambda_alpha_eps(m, alpha, eps, k, &terms)?;
    let consts = hessian_constants(&ctx.bounds, hp, t_len, None);
    let tail = SQRT2 * consts.a_script.sqrt() + SQRT2 * consts.b_script;

    let grid = ctx.grid();
    let lhs_field = hessian(&snap.w).frobenius();
    let q = ctx.potential.sample(grid, t);
    let gt = ctx.nl.g_tilde_field(&snap.w)?;
    let singular = m * alpha * alpha / (2.0 * t * (1.0 - eps));
    let mut scan = MarginScan::new();
    for idx in 0..grid.node_count() {
        let w = snap.w.data()[idx];
        let lhs = lhs_field.data()[idx] / w;
        let wt_over_w = snap.w_t.data()[idx] / w;
        let rhs = HESS_COEF
            * hp.beta
            * (lambda + singular + alpha * (wt_over_w + q.data()[idx] + gt.data()[idx]))
            + tail;
        scan.visit(lhs, rhs, &grid.node_point(idx), t);
    }

    let flags = vec![HypothesisFlag {
        name: "sqrt_arg_clamped".into(),
        raised: terms.clamped,
        witness: format!("windowed sqrt argument clamped to 0 (sup = {})", terms.sup_sqrt_arg),
    }];
    let mut params = BTreeMap::new();
    params.insert("m".into(), m);
    params.insert("alpha".into(), alpha);
    params.insert("epsilon".into(), eps);
    params.insert("beta".into(), hp.beta);
    params.insert("delta".into(), hp.delta);
    params.insert("c".into(), hp.c);
    params.insert("t".into(), t);
    let mut inter = BTreeMap::new();
    inter.insert("lambda_alpha_eps".into(), lambda);
    inter.insert("omega".into(), consts.omega);
    inter.insert("lambda_hess".into(), consts.lambda_hess);
    inter.insert("a_script".into(), consts.a_script);
    inter.insert("b_script".into(), consts.b_script);
    inter.insert("k".into(), k);
    let tolerance = scan.tolerance(&ctx.tol, grid.max_spacing());
    Ok(scan.finalize("ly_hessian", params, flags, vec![], inter, tolerance))
}

/// Admissibility window of the time-reversed Harnack bound.
/// The α-dependent constraints are hard errors; the generic
/// `β ≥ √(δ/(1−δ))` floor is reported as a hypothesis flag instead so
/// near-window configurations remain checkable.
pub fn validate_reversed_window(
    alpha: f64,
    hp: &HessianParams,
) -> Result<Option<HypothesisFlag>, EstimateError> {
    let delta_cap = 1.0 / (1.0 + HESS_COEF * HESS_COEF * alpha * alpha);
    if !(hp.delta > 0.0 && hp.delta <= delta_cap) {
        return Err(EstimateError::Param(format!(
            "0 < delta <= 1/(1+(4sqrt2-1)^2 alpha^2) = {delta_cap} required, got delta = {}",
            hp.delta
        )));
    }
    let beta_cap = 1.0 / (HESS_COEF * alpha);
    if !(hp.beta > 0.0 && hp.beta <= beta_cap) {
        return Err(EstimateError::Param(format!(
            "0 < beta <= 1/((4sqrt2-1) alpha) = {beta_cap} required, got beta = {}",
            hp.beta
        )));
    }
    let beta_floor = (hp.delta / (1.0 - hp.delta)).sqrt();
    if hp.beta < beta_floor {
        return Ok(Some(HypothesisFlag {
            name: "beta_floor".into(),
            raised: true,
            witness: format!(
                "beta = {} below sqrt(delta/(1-delta)) = {beta_floor}",
                hp.beta
            ),
        }));
    }
    Ok(None)
}

/// N₁ and N₂ of the time-reversed Harnack bound.
pub fn reversed_constants(
    bounds: &BoundSet,
    lambda: f64,
    m: f64,
    alpha: f64,
    eps: f64,
    consts: &HessianConstants,
    hp: &HessianParams,
) -> (f64, f64) {
    let denom = 1.0 - HESS_COEF * hp.beta * alpha;
    let n1 = (bounds.k6
        + bounds.k7
        + HESS_COEF * hp.beta * lambda
        + SQRT2 * consts.a_script.sqrt()
        + SQRT2 * consts.b_script)
        / denom;
    let n2 = HESS_COEF * hp.beta * m * alpha * alpha / (2.0 * (1.0 - eps) * denom);
    (n1, n2)
}

/// Time-reversed Harnack at a fixed spatial point:
/// `log(w(x,t2)/w(x,t1)) ≤ N₁(t2−t1) + N₂ log(t2/t1)`, the integrated form
/// of `∂t log w ≤ N₁ + N₂/t` (noted in the report).
#[allow(clippy::too_many_arguments)]
pub fn reversed_harnack(
    ctx: &EstimateContext,
    x: &[f64],
    t1: f64,
    t2: f64,
    m: f64,
    alpha: f64,
    eps: f64,
    hp: &HessianParams,
) -> Result<CheckReport, EstimateError> {
    let floor_flag = validate_reversed_window(alpha, hp)?;
    ctx.validate_m(m)?;
    if !(t1 > 0.0) {
        return Err(EstimateError::NonPositiveTime(t1));
    }
    if !(t1 < t2) {
        return Err(EstimateError::TimeOrdering { t1, t2 });
    }
    let t_len = require_window_length(ctx)?;
    let k = ctx.k_mn(m)?;
    let terms = lambda_sqrt_terms(ctx, m, alpha, eps, None)?;
    let lambda = lambda_alpha_eps(m, alpha, eps, k, &terms)?;
    let consts = hessian_constants(&ctx.bounds, hp, t_len, None);
    let (n1, n2) = reversed_constants(&ctx.bounds, lambda, m, alpha, eps, &consts, hp);

    let grid = ctx.grid();
    let xs = grid.node_point(grid.nearest_node(x));
    let w1 = w_interp(ctx.snapshots, &xs, t1)?;
    let w2 = w_interp(ctx.snapshots, &xs, t2)?;
    let lhs = (w2 / w1).ln();
    let rhs = n1 * (t2 - t1) + n2 * (t2 / t1).ln();

    let mut scan = MarginScan::new();
    scan.visit(lhs, rhs, &xs, t2);
    let mut flags = vec![HypothesisFlag {
        name: "sqrt_arg_clamped".into(),
        raised: terms.clamped,
        witness: "windowed sqrt argument clamped to 0".into(),
    }];
    if let Some(f) = floor_flag {
        flags.push(f);
    }
    let mut params = BTreeMap::new();
    params.insert("m".into(), m);
    params.insert("alpha".into(), alpha);
    params.insert("epsilon".into(), eps);
    params.insert("beta".into(), hp.beta);
    params.insert("delta".into(), hp.delta);
    params.insert("c".into(), hp.c);
    params.insert("t1".into(), t1);
    params.insert("t2".into(), t2);
    let mut inter = BTreeMap::new();
    inter.insert("n1".into(), n1);
    inter.insert("n2".into(), n2);
    inter.insert("lambda_alpha_eps".into(), lambda);
    inter.insert("a_script".into(), consts.a_script);
    inter.insert("b_script".into(), consts.b_script);
    let notes = vec![
        "N1 multiplies (t2-t1) and N2 multiplies log(t2/t1), the integrated form of d/dt log w <= N1 + N2/t".into(),
    ];
    let tolerance = scan.tolerance(&ctx.tol, grid.max_spacing());
    Ok(scan.finalize("reversed_harnack", params, flags, notes, inter, tolerance))
}

/// Hamilton-type Hessian bound for ceiling-bounded solutions:
/// `|∇²w|/w ≤ (4√2−1)(βA/(e·w))(ln(A/w) + (ln(A/w)−1)(θ₁+θ₂) + K₃²/η)(1/t+η)
///  + √2𝒜^{1/2} + √2ℬ` with η = 2K₁+K₆+K₇+θ₃+1.
pub fn hamilton_hessian(
    ctx: &EstimateContext,
    snap: &Snapshot,
    hp: &HessianParams,
    a_ceiling: Option<f64>,
) -> Result<CheckReport, EstimateError> {
    hp.validate()?;
    let t = snap.t();
    if !(t > 0.0) {
        return Err(EstimateError::NonPositiveTime(t));
    }
    let t_len = require_window_length(ctx)?;
    let a = a_ceiling.unwrap_or_else(|| super::hamilton::default_ceiling(ctx));
    let cap = a / std::f64::consts::E;
    let sup_w = snap.w.max();
    if sup_w > cap {
        return Err(EstimateError::CeilingViolated { sup_w, cap });
    }
    let b = &ctx.bounds;
    let eta = 2.0 * b.k1 + b.k6 + b.k7 + b.theta3 + 1.0;
    let consts = hessian_constants(b, hp, t_len, None);
    let tail = SQRT2 * consts.a_script.sqrt() + SQRT2 * consts.b_script;

    let grid = ctx.grid();
    let lhs_field = hessian(&snap.w).frobenius();
    let mut scan = MarginScan::new();
    for idx in 0..grid.node_count() {
        let w = snap.w.data()[idx];
        let lhs = lhs_field.data()[idx] / w;
        let ln_aw = (a / w).ln();
        let rhs = HESS_COEF
            * (hp.beta * a / (std::f64::consts::E * w))
            * (ln_aw + (ln_aw - 1.0) * (b.theta1 + b.theta2) + b.k3 * b.k3 / eta)
            * (1.0 / t + eta)
            + tail;
        scan.visit(lhs, rhs, &grid.node_point(idx), t);
    }

    let mut params = BTreeMap::new();
    params.insert("beta".into(), hp.beta);
    params.insert("delta".into(), hp.delta);
    params.insert("c".into(), hp.c);
    params.insert("a_ceiling".into(), a);
    params.insert("t".into(), t);
    let mut inter = BTreeMap::new();
    inter.insert("eta".into(), eta);
    inter.insert("a_script".into(), consts.a_script);
    inter.insert("b_script".into(), consts.b_script);
    inter.insert("omega".into(), consts.omega);
    inter.insert("lambda_hess".into(), consts.lambda_hess);
    let tolerance = scan.tolerance(&ctx.tol, grid.max_spacing());
    Ok(scan.finalize("hamilton_hessian", params, vec![], vec![], inter, tolerance))
}

/// Time-interpolated solution value at a grid point.
fn w_interp(snapshots: &[Snapshot], x: &[f64], t: f64) -> Result<f64, EstimateError> {
    let times: Vec<f64> = snapshots.iter().map(|s| s.t()).collect();
    if t < times[0] - 1e-12 || t > times[times.len() - 1] + 1e-12 {
        return Err(EstimateError::Param(format!(
            "time {t} outside the checked window [{}, {}]",
            times[0],
            times[times.len() - 1]
        )));
    }
    let j = times.partition_point(|&s| s < t).min(times.len() - 1);
    if j == 0 || (times[j] - t).abs() == 0.0 {
        return Ok(snapshots[j].w.sample(x));
    }
    let i = j - 1;
    let s = (t - times[i]) / (times[j] - times[i]);
    Ok((1.0 - s) * snapshots[i].w.sample(x) + s * snapshots[j].w.sample(x))
}
