//! Radial cutoff functions φ(x) = ψ(d(x,p)/R) used to localize estimates.
//!
//! The profile is the cubic blend ψ(r) = (1−s)³(1+3s) with s = r−1 on (1,2),
//! 1 on [0,1] and 0 beyond 2. It satisfies ψ(1)=1, ψ(2)=0, ψ′(1)=ψ′(2)=0 and
//! ψ′/√ψ → 0 at the outer edge, so the profile constant C1 is finite.

use std::sync::Arc;

use super::field::ScalarField;
use super::grid::{geodesic_distance, Grid};
use super::GeometryError;

const PROFILE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Cutoff {
    /// φ sampled on the grid; 1 on B_p(R), 0 outside B_p(2R).
    pub phi: ScalarField,
    pub center: Vec<f64>,
    pub radius: f64,
    /// sup_r |ψ′(r)| / √ψ(r).
    pub c1: f64,
    /// sup_r max(0, −ψ″(r)).
    pub c2: f64,
}

/// The radial profile ψ(r).
pub fn cutoff_profile(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let s = r - 1.0;
        let t = 1.0 - s;
        t * t * t * (1.0 + 3.0 * s)
    }
}

/// ψ′(r) (piecewise; zero outside (1,2)).
pub fn cutoff_profile_deriv(r: f64) -> f64 {
    if r <= 1.0 || r >= 2.0 {
        0.0
    } else {
        let s = r - 1.0;
        let t = 1.0 - s;
        -12.0 * s * t * t
    }
}

/// ψ″(r) on the open blend interval (1,2); zero elsewhere.
pub fn cutoff_profile_second(r: f64) -> f64 {
    if r <= 1.0 || r >= 2.0 {
        0.0
    } else {
        let s = r - 1.0;
        12.0 * (1.0 - s) * (3.0 * s - 1.0)
    }
}

/// Profile constants by dense sampling of [0, 2].
pub fn profile_constants() -> (f64, f64) {
    let mut c1 = 0.0_f64;
    let mut c2 = 0.0_f64;
    for k in 0..=PROFILE_SAMPLES {
        let r = 2.0 * k as f64 / PROFILE_SAMPLES as f64;
        let psi = cutoff_profile(r);
        if psi > 0.0 {
            c1 = c1.max(cutoff_profile_deriv(r).abs() / psi.sqrt());
        }
        c2 = c2.max(-cutoff_profile_second(r));
    }
    (c1, c2)
}

/// Build φ(x) = ψ(d(x,p)/R) on the grid. Requires the support B_p(2R) to
/// stay inside the injectivity radius of the torus.
pub fn build_cutoff(
    center: &[f64],
    radius: f64,
    grid: &Arc<Grid>,
    time: f64,
) -> Result<Cutoff, GeometryError> {
    if !(radius > 0.0) || 2.0 * radius >= grid.injectivity_radius() {
        return Err(GeometryError::BallTooLarge {
            outer: 2.0 * radius,
            inj: grid.injectivity_radius(),
        });
    }
    if center.len() != grid.dim() {
        return Err(GeometryError::AxisCountMismatch {
            dim: grid.dim(),
            lengths: center.len(),
            counts: center.len(),
        });
    }
    let (c1, c2) = profile_constants();
    let n = grid.node_count();
    let mut data = Vec::with_capacity(n);
    for idx in 0..n {
        let p = grid.node_point(idx);
        let d = geodesic_distance(&p, center, grid);
        data.push(cutoff_profile(d / radius));
    }
    Ok(Cutoff {
        phi: ScalarField::from_data(grid, time, data),
        center: center.to_vec(),
        radius,
        c1,
        c2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_values() {
        assert_eq!(cutoff_profile(0.0), 1.0);
        assert_eq!(cutoff_profile(1.0), 1.0);
        assert_eq!(cutoff_profile(2.0), 0.0);
        assert_eq!(cutoff_profile(3.0), 0.0);
        // blend at s = 0.5: (0.5)³ · 2.5 = 0.3125
        assert!((cutoff_profile(1.5) - 0.3125).abs() < 1e-15);
    }

    #[test]
    fn profile_ratio_bounded_and_one_signed() {
        let (c1, c2) = profile_constants();
        assert!(c1.is_finite() && c2.is_finite());
        assert!(c1 > 0.0 && c2 > 0.0);
        // −C1 ≤ ψ′/√ψ ≤ 0 at every sample point
        for k in 0..=PROFILE_SAMPLES {
            let r = 2.0 * k as f64 / PROFILE_SAMPLES as f64;
            let psi = cutoff_profile(r);
            if psi > 0.0 {
                let ratio = cutoff_profile_deriv(r) / psi.sqrt();
                assert!(ratio <= 0.0 && ratio >= -c1 - 1e-12, "r = {r}, ratio = {ratio}");
            }
        }
        // ψ″(1⁺) = −12 is the steepest concavity of the cubic blend
        assert!((c2 - 12.0).abs() < 1e-2, "C2 = {c2}");
    }

    #[test]
    fn cutoff_field_support() {
        let g = Grid::torus(1, &[2.0 * PI], &[256]).unwrap();
        let r = 0.6;
        let c = build_cutoff(&[PI], r, &g, 0.0).unwrap();
        for idx in 0..g.node_count() {
            let p = g.node_point(idx);
            let d = geodesic_distance(&p, &[PI], &g);
            let v = c.phi.data()[idx];
            assert!((0.0..=1.0).contains(&v));
            if d <= r {
                assert_eq!(v, 1.0, "inside inner ball at d = {d}");
            }
            if d >= 2.0 * r {
                assert_eq!(v, 0.0, "outside support at d = {d}");
            }
        }
    }

    #[test]
    fn cutoff_rejects_oversized_ball() {
        let g = Grid::torus(1, &[2.0 * PI], &[64]).unwrap();
        assert!(matches!(
            build_cutoff(&[0.0], 2.0, &g, 0.0),
            Err(GeometryError::BallTooLarge { .. })
        ));
    }
}
