//! Discrete differential operators: second-order central differences with
//! periodic wraparound. Exact on constants; truncation error O(h^2) on
//! smooth fields.

use std::sync::Arc;

use super::field::{ScalarField, SymTensorField, VectorField};
use super::grid::Grid;
use super::GeometryError;

#[inline]
fn wrap_up(i: usize, n: usize) -> usize {
    if i + 1 == n {
        0
    } else {
        i + 1
    }
}

#[inline]
fn wrap_down(i: usize, n: usize) -> usize {
    if i == 0 {
        n - 1
    } else {
        i - 1
    }
}

fn central_diff(u: &[f64], grid: &Grid, axis: usize) -> Vec<f64> {
    let (nx, ny) = (grid.count(0), grid.count(1));
    let inv2h = 1.0 / (2.0 * grid.spacing(axis));
    let mut out = vec![0.0; u.len()];
    for j in 0..ny {
        for i in 0..nx {
            let idx = grid.flat_index(i, j);
            let (up, dn) = if axis == 0 {
                (grid.flat_index(wrap_up(i, nx), j), grid.flat_index(wrap_down(i, nx), j))
            } else {
                (grid.flat_index(i, wrap_up(j, ny)), grid.flat_index(i, wrap_down(j, ny)))
            };
            out[idx] = (u[up] - u[dn]) * inv2h;
        }
    }
    out
}

fn second_diff(u: &[f64], grid: &Grid, axis: usize) -> Vec<f64> {
    let (nx, ny) = (grid.count(0), grid.count(1));
    let invh2 = 1.0 / (grid.spacing(axis) * grid.spacing(axis));
    let mut out = vec![0.0; u.len()];
    for j in 0..ny {
        for i in 0..nx {
            let idx = grid.flat_index(i, j);
            let (up, dn) = if axis == 0 {
                (grid.flat_index(wrap_up(i, nx), j), grid.flat_index(wrap_down(i, nx), j))
            } else {
                (grid.flat_index(i, wrap_up(j, ny)), grid.flat_index(i, wrap_down(j, ny)))
            };
            out[idx] = (u[up] - 2.0 * u[idx] + u[dn]) * invh2;
        }
    }
    out
}

/// ∇u by central differences per axis.
pub fn gradient(u: &ScalarField) -> VectorField {
    let grid = u.grid();
    let comps = (0..grid.dim()).map(|a| central_diff(u.data(), grid, a)).collect();
    VectorField::from_components(grid, u.time(), comps)
}

/// Hess u: diagonal entries by second differences, the off-diagonal by
/// nested central first differences. Symmetric by construction.
pub fn hessian(u: &ScalarField) -> SymTensorField {
    let grid = u.grid();
    let xx = second_diff(u.data(), grid, 0);
    if grid.dim() == 1 {
        SymTensorField::from_components(grid, u.time(), vec![xx])
    } else {
        let yy = second_diff(u.data(), grid, 1);
        let ux = central_diff(u.data(), grid, 0);
        let xy = central_diff(&ux, grid, 1);
        SymTensorField::from_components(grid, u.time(), vec![xx, yy, xy])
    }
}

/// Δu as the sum of one-dimensional second differences (equals the trace of
/// the discrete Hessian).
pub fn laplacian(u: &ScalarField) -> ScalarField {
    let grid = u.grid();
    let mut acc = second_diff(u.data(), grid, 0);
    if grid.dim() == 2 {
        let dyy = second_diff(u.data(), grid, 1);
        for (a, b) in acc.iter_mut().zip(&dyy) {
            *a += *b;
        }
    }
    ScalarField::from_data(grid, u.time(), acc)
}

/// Weighted (Witten) Laplacian `L_f u = Δu − ⟨∇f, ∇u⟩`, pointwise.
pub fn weighted_laplacian(u: &ScalarField, f: &ScalarField) -> Result<ScalarField, GeometryError> {
    u.same_layout(f)?;
    let lap = laplacian(u);
    let gu = gradient(u);
    let gf = gradient(f);
    let dot = gf.dot(&gu);
    lap.zip(&dot, |a, b| a - b)
}

/// ∇(L_f u) assembled with the flat-space product rule
/// `∇⟨∇f, ∇u⟩ = (Hess f)∇u + (Hess u)∇f`, i.e.
/// `∇L_f u = ∇Δu − (Hess f)∇u − (Hess u)∇f`.
/// Chain/product-rule assembly instead of differencing the composed
/// `L_f u` field keeps the truncation constant of the Bochner residual small.
pub fn grad_weighted_laplacian(u: &ScalarField, f: &ScalarField) -> Result<VectorField, GeometryError> {
    u.same_layout(f)?;
    let grid = u.grid();
    let glap = gradient(&laplacian(u));
    let hess_f_gu = hessian(f).apply(&gradient(u));
    let hess_u_gf = hessian(u).apply(&gradient(f));
    let comps = (0..grid.dim())
        .map(|a| {
            glap.component(a)
                .iter()
                .zip(hess_f_gu.component(a))
                .zip(hess_u_gf.component(a))
                .map(|((&g, &hf), &hu)| g - hf - hu)
                .collect::<Vec<f64>>()
        })
        .collect();
    Ok(VectorField::from_components(grid, u.time(), comps))
}

/// Which side of the weighted Bochner formula to residual-test.
#[derive(Debug, Clone, Copy)]
pub enum BochnerVariant {
    /// ½L_f|∇u|² − |Hess u|² − ⟨∇L_f u, ∇u⟩ − Ric_f(∇u,∇u); zero in the
    /// continuum, O(h²) discretely.
    Identity,
    /// ½L_f|∇u|² − ⟨∇u, ∇L_f u⟩ − (1/m)(L_f u)² − K|∇u|²; nonnegative in the
    /// continuum when Ric_f^{m−n} ≥ K g.
    Inequality { m: f64, k: f64 },
}

/// Pointwise Bochner residual for the given variant. On flat tori
/// `Ric_f = Hess f`.
pub fn bochner_residual(
    u: &ScalarField,
    f: &ScalarField,
    variant: BochnerVariant,
) -> Result<ScalarField, GeometryError> {
    u.same_layout(f)?;
    let grid: &Arc<Grid> = u.grid();
    let gu = gradient(u);
    let gf = gradient(f);
    let g2 = gu.norm_sq();
    let half_lf_g2 = {
        let lap = laplacian(&g2);
        let adv = gf.dot(&gradient(&g2));
        lap.zip(&adv, |a, b| 0.5 * (a - b))?
    };
    let glfu_dot_gu = grad_weighted_laplacian(u, f)?.dot(&gu);
    let n = grid.node_count();
    match variant {
        BochnerVariant::Identity => {
            let hu = hessian(u);
            let hess_sq: Vec<f64> = if grid.dim() == 1 {
                hu.xx().iter().map(|v| v * v).collect()
            } else {
                (0..n)
                    .map(|i| {
                        hu.xx()[i] * hu.xx()[i] + hu.yy()[i] * hu.yy()[i] + 2.0 * hu.xy()[i] * hu.xy()[i]
                    })
                    .collect()
            };
            let ric = hessian(f).quadratic_form(&gu);
            let data = (0..n)
                .map(|i| half_lf_g2.data()[i] - hess_sq[i] - glfu_dot_gu.data()[i] - ric.data()[i])
                .collect();
            Ok(ScalarField::from_data(grid, u.time(), data))
        }
        BochnerVariant::Inequality { m, k } => {
            if !(m > 0.0) {
                return Err(GeometryError::BadDimensionParameter { m, n: grid.dim() });
            }
            let lfu = weighted_laplacian(u, f)?;
            let data = (0..n)
                .map(|i| {
                    half_lf_g2.data()[i]
                        - glfu_dot_gu.data()[i]
                        - lfu.data()[i] * lfu.data()[i] / m
                        - k * g2.data()[i]
                })
                .collect();
            Ok(ScalarField::from_data(grid, u.time(), data))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    fn grid1(n: usize) -> Arc<Grid> {
        Grid::torus(1, &[TAU], &[n]).unwrap()
    }

    fn grid2(n: usize) -> Arc<Grid> {
        Grid::torus(2, &[TAU, TAU], &[n, n]).unwrap()
    }

    fn sup_err(a: &[f64], exact: impl Fn(usize) -> f64) -> f64 {
        a.iter().enumerate().fold(0.0_f64, |m, (i, v)| m.max((v - exact(i)).abs()))
    }

    #[test]
    fn gradient_of_sin_converges_order_two() {
        let mut sups = Vec::new();
        for &n in &[64usize, 128, 256] {
            let g = grid1(n);
            let u = ScalarField::from_fn(&g, 0.0, |x, _| x.sin());
            let gu = gradient(&u);
            let h = g.spacing(0);
            let e = sup_err(gu.component(0), |i| (i as f64 * h).cos());
            sups.push(e);
        }
        for w in sups.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn all_operators_converge_order_two() {
        // halving h shrinks the sup error of each operator by ≈ 4
        let errs = |n: usize| -> [f64; 4] {
            let g = grid1(n);
            let h = g.spacing(0);
            let u = ScalarField::from_fn(&g, 0.0, |x, _| (2.0 * x).sin());
            let f = ScalarField::from_fn(&g, 0.0, |x, _| 0.5 * x.cos());
            let grad = sup_err(gradient(&u).component(0), |i| 2.0 * (2.0 * i as f64 * h).cos());
            let hess = sup_err(hessian(&u).xx(), |i| -4.0 * (2.0 * i as f64 * h).sin());
            let lap = sup_err(laplacian(&u).data(), |i| -4.0 * (2.0 * i as f64 * h).sin());
            let wlap = sup_err(weighted_laplacian(&u, &f).unwrap().data(), |i| {
                // L_f u = u'' − f'u' with f' = −0.5 sin x and u' = 2 cos 2x
                let x = i as f64 * h;
                -4.0 * (2.0 * x).sin() + x.sin() * (2.0 * x).cos()
            });
            [grad, hess, lap, wlap]
        };
        let coarse = errs(128);
        let fine = errs(256);
        for (c, f) in coarse.iter().zip(&fine) {
            let ratio = c / f;
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn operators_exact_on_constants() {
        for g in [grid1(16), grid2(8)] {
            let u = ScalarField::constant(&g, 0.0, 3.7);
            assert_eq!(gradient(&u).sup_norm(), 0.0);
            assert_eq!(laplacian(&u).sup_abs(), 0.0);
            assert_eq!(hessian(&u).frobenius().sup_abs(), 0.0);
        }
    }

    #[test]
    fn gradient_2d_product_sines() {
        let g = grid2(64);
        let u = ScalarField::from_fn(&g, 0.0, |x, y| x.sin() * y.sin());
        let gu = gradient(&u);
        let h = g.spacing(0);
        let e0 = {
            let mut m = 0.0_f64;
            for idx in 0..g.node_count() {
                let p = g.node_point(idx);
                m = m.max((gu.component(0)[idx] - p[0].cos() * p[1].sin()).abs());
            }
            m
        };
        assert!(e0 < 2.0 * h * h, "sup err {e0}");
    }

    #[test]
    fn hessian_1d_and_mixed_partial() {
        let g = grid2(64);
        let u = ScalarField::from_fn(&g, 0.0, |x, y| x.sin() * y.sin());
        let hu = hessian(&u);
        let h = g.spacing(0);
        let mut worst = 0.0_f64;
        for idx in 0..g.node_count() {
            let p = g.node_point(idx);
            worst = worst.max((hu.xy()[idx] - p[0].cos() * p[1].cos()).abs());
        }
        assert!(worst < 2.0 * h * h, "mixed partial err {worst}");

        let g1 = grid1(256);
        let u1 = ScalarField::from_fn(&g1, 0.0, |x, _| x.sin());
        let h1 = hessian(&u1);
        let hh = g1.spacing(0);
        let e = sup_err(h1.xx(), |i| -(i as f64 * hh).sin());
        assert!(e < 2.0 * hh * hh);
    }

    #[test]
    fn hessian_symmetry_is_structural() {
        // one stored off-diagonal component: T_xy == T_yx bit-exactly by type
        let g = grid2(16);
        let u = ScalarField::from_fn(&g, 0.0, |x, y| (2.0 * x).sin() + (x + y).cos());
        let hu = hessian(&u);
        assert_eq!(hu.xy().len(), g.node_count());
    }

    #[test]
    fn weighted_laplacian_reduces_to_laplacian() {
        let g = grid1(256);
        let u = ScalarField::from_fn(&g, 0.0, |x, _| x.sin());
        let f = ScalarField::constant(&g, 0.0, 0.0);
        let lf = weighted_laplacian(&u, &f).unwrap();
        let h = g.spacing(0);
        let e = sup_err(lf.data(), |i| -(i as f64 * h).sin());
        assert!(e < 2.0 * h * h);
    }

    #[test]
    fn weighted_laplacian_with_cosine_weight() {
        // f = cos x, u = sin x: L_f u = -sin x + sin x cos x, which is -1 at x = π/2
        let g = grid1(256);
        let u = ScalarField::from_fn(&g, 0.0, |x, _| x.sin());
        let f = ScalarField::from_fn(&g, 0.0, |x, _| x.cos());
        let lf = weighted_laplacian(&u, &f).unwrap();
        let h = g.spacing(0);
        let e = sup_err(lf.data(), |i| {
            let x = i as f64 * h;
            -x.sin() + x.sin() * x.cos()
        });
        assert!(e < 3.0 * h * h);
        let at_quarter = lf.data()[64]; // x = π/2
        assert!((at_quarter - (-1.0)).abs() < 1e-3, "{at_quarter}");
    }

    #[test]
    fn weighted_laplacian_rejects_grid_mismatch() {
        let u = ScalarField::constant(&grid1(16), 0.0, 1.0);
        let f = ScalarField::constant(&grid1(32), 0.0, 1.0);
        assert!(matches!(weighted_laplacian(&u, &f), Err(GeometryError::GridMismatch)));
    }

    #[test]
    fn bochner_identity_sup_and_refinement() {
        // u = sin x, f = 0: continuum residual vanishes; discrete sup ≲ h²/2
        let mut sups = Vec::new();
        for &n in &[256usize, 512, 1024] {
            let g = grid1(n);
            let u = ScalarField::from_fn(&g, 0.0, |x, _| x.sin());
            let f = ScalarField::constant(&g, 0.0, 0.0);
            let r = bochner_residual(&u, &f, BochnerVariant::Identity).unwrap();
            sups.push(r.sup_abs());
        }
        let h = TAU / 256.0;
        assert!(sups[0] <= 0.6 * h * h, "sup {}", sups[0]);
        for w in sups.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn bochner_identity_2d_converges_order_two() {
        let mut sups = Vec::new();
        for &n in &[32usize, 64, 128] {
            let g = grid2(n);
            let u = ScalarField::from_fn(&g, 0.0, |x, y| x.sin() * y.sin());
            let f = ScalarField::from_fn(&g, 0.0, |x, y| 0.3 * x.cos() * y.cos());
            let r = bochner_residual(&u, &f, BochnerVariant::Identity).unwrap();
            sups.push(r.sup_abs());
        }
        for w in sups.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn bochner_identity_zero_on_constants() {
        let g = grid1(64);
        let u = ScalarField::constant(&g, 0.0, 2.0);
        let f = ScalarField::from_fn(&g, 0.0, |x, _| x.cos());
        let r = bochner_residual(&u, &f, BochnerVariant::Identity).unwrap();
        assert_eq!(r.sup_abs(), 0.0);
    }

    #[test]
    fn bochner_inequality_equality_case_1d() {
        // d = 1, f = 0, m = 1: |Hess u|² = (Δu)², continuum residual ≡ 0
        let g = grid1(256);
        let u = ScalarField::from_fn(&g, 0.0, |x, _| x.sin());
        let f = ScalarField::constant(&g, 0.0, 0.0);
        let r = bochner_residual(&u, &f, BochnerVariant::Inequality { m: 1.0, k: 0.0 }).unwrap();
        let h = g.spacing(0);
        assert!(r.min() >= -2.0 * h * h, "min {}", r.min());
        assert!(r.sup_abs() <= 2.0 * h * h);
    }
}
