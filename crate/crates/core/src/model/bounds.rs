//! Scalar bound constants θ₁–θ₄ and K₁–K₈ extracted from a solution window.
//!
//! Each constant is the supremum over all supplied snapshots and nodes of its
//! defining quantity, except where a closed-form bound over the case's whole
//! domain exists (recorded in the provenance map as "analytic").

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{gradient, hessian, CurvatureData, ScalarField};

use super::{FieldSpec, ModelError, Nonlinearity};

/// |q| ≤ θ₁, |G| ≤ θ₂|w|, |G′| ≤ θ₃, |∇q| ≤ θ₄;
/// |Rm| ≤ K₁ (doubling as the Ric_f lower-bound constant), |∇Rm| ≤ K₂,
/// |∇q| ≤ K₃, |∇²q| ≤ K₄, |∇²G(w)| ≤ K₅|w|, |q| ≤ K₆, |G(w)| ≤ K₇|w|,
/// |∇G(w)| ≤ K₈|w|.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundSet {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub k6: f64,
    pub k7: f64,
    pub k8: f64,
    /// Time range of the sampling window.
    pub window: (f64, f64),
    /// Constant name → "analytic: …" or "sampled sup = …".
    pub provenance: BTreeMap<String, String>,
}

impl BoundSet {
    pub fn zero() -> Self {
        BoundSet {
            theta1: 0.0,
            theta2: 0.0,
            theta3: 0.0,
            theta4: 0.0,
            k1: 0.0,
            k2: 0.0,
            k3: 0.0,
            k4: 0.0,
            k5: 0.0,
            k6: 0.0,
            k7: 0.0,
            k8: 0.0,
            window: (0.0, 0.0),
            provenance: BTreeMap::new(),
        }
    }
}

/// Assemble the bound set over a window of solution snapshots.
/// `ws` must be nonempty and strictly positive; curvature carries K₁/K₂.
pub fn sample_bounds(
    ws: &[&ScalarField],
    potential: &FieldSpec,
    nl: &Nonlinearity,
    curvature: &CurvatureData,
) -> Result<BoundSet, ModelError> {
    assert!(!ws.is_empty(), "sample_bounds needs at least one snapshot");
    let mut b = BoundSet::zero();
    b.k1 = curvature.k1;
    b.k2 = curvature.k2;
    b.window = (
        ws.iter().map(|w| w.time()).fold(f64::INFINITY, f64::min),
        ws.iter().map(|w| w.time()).fold(f64::NEG_INFINITY, f64::max),
    );

    let mut sup_gtilde_abs = 0.0_f64; // |G|/|w| = |G̃|
    let mut sup_gprime = 0.0_f64;
    for w in ws {
        if w.min() <= 0.0 {
            return Err(ModelError::Domain {
                case: nl.name(),
                w: w.min(),
                reason: "solution values must be positive".into(),
            });
        }
        let grid = w.grid();
        let t = w.time();

        let q = potential.sample_checked(grid, t)?;
        b.theta1 = b.theta1.max(q.sup_abs());
        let gq = gradient(&q);
        b.theta4 = b.theta4.max(gq.sup_norm());
        b.k4 = b.k4.max(hessian(&q).frobenius().max());

        let gt = nl.g_tilde_field(w)?;
        sup_gtilde_abs = sup_gtilde_abs.max(gt.sup_abs());
        match nl {
            Nonlinearity::CaffarelliLin { .. } => {
                // G′ w.r.t. w is λ(t); bounded by the sampled |G̃| machinery below
                let a = match nl {
                    Nonlinearity::CaffarelliLin { a_field } => a_field.sample(grid, t),
                    _ => unreachable!(),
                };
                let lambda = super::nonlinearity::caffarelli_lin_lambda(w, &a)?;
                sup_gprime = sup_gprime.max(lambda.abs());
            }
            _ => {
                for &v in w.data() {
                    sup_gprime = sup_gprime.max(nl.g_prime(v)?.abs());
                }
            }
        }

        let hg = nl.g_hessian_field(w)?.frobenius();
        let mut k5 = 0.0_f64;
        for i in 0..w.len() {
            k5 = k5.max(hg.data()[i] / w.data()[i]);
        }
        b.k5 = b.k5.max(k5);

        let gg = nl.g_gradient_field(w)?;
        let mut k8 = 0.0_f64;
        for i in 0..w.len() {
            k8 = k8.max(gg.norm_sq_at(i).sqrt() / w.data()[i]);
        }
        b.k8 = b.k8.max(k8);
    }
    b.k3 = b.theta4;
    b.k6 = b.theta1;

    // θ₂/θ₃: closed-form domain bounds when the case provides them,
    // otherwise the window supremum.
    match nl.analytic_theta2() {
        Some(v) => {
            b.theta2 = v;
            b.provenance.insert("theta2".into(), format!("analytic: {v}"));
        }
        None => {
            b.theta2 = sup_gtilde_abs;
            b.provenance.insert("theta2".into(), format!("sampled sup = {sup_gtilde_abs}"));
        }
    }
    match nl.analytic_theta3() {
        Some(v) => {
            b.theta3 = v;
            b.provenance.insert("theta3".into(), format!("analytic: {v}"));
        }
        None => {
            b.theta3 = sup_gprime;
            b.provenance.insert("theta3".into(), format!("sampled sup = {sup_gprime}"));
        }
    }
    b.k7 = b.theta2;
    for (name, value) in [
        ("theta1", b.theta1),
        ("theta4", b.theta4),
        ("k1", b.k1),
        ("k2", b.k2),
        ("k3", b.k3),
        ("k4", b.k4),
        ("k5", b.k5),
        ("k6", b.k6),
        ("k7", b.k7),
        ("k8", b.k8),
    ] {
        b.provenance
            .entry(name.into())
            .or_insert_with(|| format!("sampled sup = {value}"));
    }
    b.provenance.insert("k2".into(), "analytic: 0 (flat torus)".into());
    Ok(b)
}
