//! Curvature-dimension field check: the inequality form of the weighted
//! Bochner formula under `Ric_f^{m−n} ≥ K g`.

use std::collections::BTreeMap;

use crate::geometry::{bochner_residual, BochnerVariant, ScalarField};

use super::context::ricci_mn_at_least;
use super::report::{CheckReport, HypothesisFlag, MarginScan, Tolerances};
use super::EstimateError;

/// Pointwise residual
/// `½L_f|∇u|² − ⟨∇u, ∇L_f u⟩ − (1/m)(L_f u)² − K|∇u|² ≥ −tol`.
/// K is a signed lower bound in the sense `Ric_f^{m−n} ≥ K g`; the
/// hypothesis is verified on the grid and flagged when violated.
pub fn cd_condition(
    u: &ScalarField,
    f: &ScalarField,
    m: f64,
    k: f64,
    tol: &Tolerances,
) -> Result<CheckReport, EstimateError> {
    let grid = u.grid();
    let h = grid.max_spacing();
    let residual = bochner_residual(u, f, BochnerVariant::Inequality { m, k })?;
    let (hypothesis_ok, inf_lmin) = ricci_mn_at_least(f, m, k, tol.tolerance(h, k.abs(), 0.0))?;

    // margin = residual; report the two sides of the inequality
    let gu2 = crate::geometry::gradient(u).norm_sq();
    let lfu = crate::geometry::weighted_laplacian(u, f)?;
    let mut scan = MarginScan::new();
    for idx in 0..grid.node_count() {
        let lower = lfu.data()[idx] * lfu.data()[idx] / m + k * gu2.data()[idx];
        let upper = lower + residual.data()[idx];
        scan.visit(lower, upper, &grid.node_point(idx), u.time());
    }

    let flags = vec![HypothesisFlag {
        name: "ricci_mn_lower_bound".into(),
        raised: !hypothesis_ok,
        witness: format!("inf lambda_min(Ric_f^(m-n)) = {inf_lmin}, required >= {k}"),
    }];
    let mut params = BTreeMap::new();
    params.insert("m".into(), m);
    params.insert("k".into(), k);
    let mut inter = BTreeMap::new();
    inter.insert("residual_min".into(), residual.min());
    inter.insert("inf_lambda_min".into(), inf_lmin);
    let tolerance = scan.tolerance(tol, h);
    Ok(scan.finalize("cd_condition", params, flags, vec![], inter, tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::report::Verdict;
    use crate::geometry::Grid;
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    #[test]
    fn constant_u_passes_exactly() {
        let g = Grid::torus(1, &[TAU], &[64]).unwrap();
        let u = ScalarField::constant(&g, 0.0, 2.0);
        let f = ScalarField::from_fn(&g, 0.0, |x, _| 0.2 * x.cos());
        let rep = cd_condition(&u, &f, 2.0, -0.5, &Tolerances::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_eq!(rep.min_margin, 0.0);
    }

    #[test]
    fn one_dimensional_equality_case() {
        // d = 1, f = 0, m = 1, K = 0: continuum residual ≡ 0, discrete ≥ −C h²
        let g = Grid::torus(1, &[TAU], &[256]).unwrap();
        let u = ScalarField::from_fn(&g, 0.0, |x, _| x.sin());
        let f = ScalarField::constant(&g, 0.0, 0.0);
        let rep = cd_condition(&u, &f, 1.0, 0.0, &Tolerances::default()).unwrap();
        let h = g.spacing(0);
        assert!(rep.min_margin >= -2.0 * h * h, "min margin {}", rep.min_margin);
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn lowering_k_raises_residual_pointwise() {
        let g = Grid::torus(1, &[TAU], &[128]).unwrap();
        let u = ScalarField::from_fn(&g, 0.0, |x, _| x.sin());
        let f = ScalarField::from_fn(&g, 0.0, |x, _| 0.3 * x.cos());
        let r0 = cd_condition(&u, &f, 3.0, 0.0, &Tolerances::default()).unwrap();
        let r1 = cd_condition(&u, &f, 3.0, -1.0, &Tolerances::default()).unwrap();
        // margin gains |∇u|² pointwise; at the min it gains at least min|∇u|² ≥ 0
        assert!(r1.min_margin >= r0.min_margin);
    }

    #[test]
    fn hypothesis_flag_when_k_too_large() {
        let g = Grid::torus(1, &[TAU], &[128]).unwrap();
        let u = ScalarField::from_fn(&g, 0.0, |x, _| x.sin());
        let f = ScalarField::from_fn(&g, 0.0, |x, _| 0.3 * x.cos());
        // Hess f = −0.3 cos x dips to −0.3; claiming Ric ≥ 0.2 g is false
        let rep = cd_condition(&u, &f, 3.0, 0.2, &Tolerances::default()).unwrap();
        assert!(rep.any_flag_raised());
    }
}
