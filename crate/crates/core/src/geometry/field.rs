//! Node-indexed scalar, vector, and symmetric-tensor fields.
//!
//! A field owns one value (or d values, or d(d+1)/2 values) per grid node,
//! a reference to its grid, and the time tag of the snapshot it belongs to.
//! Operations that combine fields require the same grid and the same tag.

use std::sync::Arc;

use super::grid::Grid;
use super::GeometryError;

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    time: f64,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(grid: &Arc<Grid>, time: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.node_count();
        let mut data = Vec::with_capacity(n);
        for idx in 0..n {
            let (i, j) = grid.unflatten(idx);
            let x = i as f64 * grid.spacing(0);
            let y = if grid.dim() == 2 { j as f64 * grid.spacing(1) } else { 0.0 };
            data.push(f(x, y));
        }
        ScalarField { grid: Arc::clone(grid), time, data }
    }

    pub fn constant(grid: &Arc<Grid>, time: f64, value: f64) -> Self {
        ScalarField { grid: Arc::clone(grid), time, data: vec![value; grid.node_count()] }
    }

    pub fn from_data(grid: &Arc<Grid>, time: f64, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.node_count(), "field data length must match grid");
        ScalarField { grid: Arc::clone(grid), time, data }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Index of the minimum value (first occurrence; deterministic).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.data.iter().enumerate() {
            if *v < self.data[best] {
                best = i;
            }
        }
        best
    }

    /// Riemann sum of the field against the unweighted volume element.
    pub fn integral(&self) -> f64 {
        let vol = self.grid.cell_volume();
        self.data.iter().sum::<f64>() * vol
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: Arc::clone(&self.grid),
            time: self.time,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn same_layout(&self, other: &ScalarField) -> Result<(), GeometryError> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && *self.grid != *other.grid {
            return Err(GeometryError::GridMismatch);
        }
        if self.time.to_bits() != other.time.to_bits() {
            return Err(GeometryError::TimeMismatch(self.time, other.time));
        }
        Ok(())
    }

    pub fn zip(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self, GeometryError> {
        self.same_layout(other)?;
        Ok(ScalarField {
            grid: Arc::clone(&self.grid),
            time: self.time,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Periodic multilinear interpolation at an arbitrary point.
    pub fn sample(&self, point: &[f64]) -> f64 {
        let g = &self.grid;
        match g.dim() {
            1 => {
                let (i0, i1, s) = axis_weights(point[0], g.period(0), g.spacing(0), g.count(0));
                (1.0 - s) * self.data[i0] + s * self.data[i1]
            }
            _ => {
                let (i0, i1, s) = axis_weights(point[0], g.period(0), g.spacing(0), g.count(0));
                let (j0, j1, r) = axis_weights(point[1], g.period(1), g.spacing(1), g.count(1));
                let v00 = self.data[g.flat_index(i0, j0)];
                let v10 = self.data[g.flat_index(i1, j0)];
                let v01 = self.data[g.flat_index(i0, j1)];
                let v11 = self.data[g.flat_index(i1, j1)];
                (1.0 - r) * ((1.0 - s) * v00 + s * v10) + r * ((1.0 - s) * v01 + s * v11)
            }
        }
    }
}

fn axis_weights(x: f64, period: f64, h: f64, n: usize) -> (usize, usize, f64) {
    let xw = x.rem_euclid(period);
    let u = xw / h;
    let i = (u.floor() as usize).min(n - 1);
    let s = u - i as f64;
    (i, (i + 1) % n, s)
}

#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<Grid>,
    time: f64,
    comps: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn from_components(grid: &Arc<Grid>, time: f64, comps: Vec<Vec<f64>>) -> Self {
        assert_eq!(comps.len(), grid.dim());
        for c in &comps {
            assert_eq!(c.len(), grid.node_count());
        }
        VectorField { grid: Arc::clone(grid), time, comps }
    }

    pub fn zero(grid: &Arc<Grid>, time: f64) -> Self {
        let comps = (0..grid.dim()).map(|_| vec![0.0; grid.node_count()]).collect();
        VectorField { grid: Arc::clone(grid), time, comps }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.comps[axis]
    }

    pub fn norm_sq_at(&self, idx: usize) -> f64 {
        self.comps.iter().map(|c| c[idx] * c[idx]).sum()
    }

    /// `|v|^2` as a scalar field.
    pub fn norm_sq(&self) -> ScalarField {
        let n = self.grid.node_count();
        let data = (0..n).map(|i| self.norm_sq_at(i)).collect();
        ScalarField { grid: Arc::clone(&self.grid), time: self.time, data }
    }

    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let n = self.grid.node_count();
        let data = (0..n)
            .map(|i| (0..self.comps.len()).map(|a| self.comps[a][i] * other.comps[a][i]).sum())
            .collect();
        ScalarField { grid: Arc::clone(&self.grid), time: self.time, data }
    }

    pub fn sup_norm(&self) -> f64 {
        let n = self.grid.node_count();
        (0..n).fold(0.0_f64, |m, i| m.max(self.norm_sq_at(i).sqrt()))
    }

    pub fn all_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }
}

/// Symmetric rank-2 tensor field: `[xx]` in 1-D, `[xx, yy, xy]` in 2-D.
/// Symmetry is structural — the off-diagonal entry is stored once.
#[derive(Debug, Clone)]
pub struct SymTensorField {
    grid: Arc<Grid>,
    time: f64,
    comps: Vec<Vec<f64>>,
}

impl SymTensorField {
    pub fn from_components(grid: &Arc<Grid>, time: f64, comps: Vec<Vec<f64>>) -> Self {
        let expected = if grid.dim() == 1 { 1 } else { 3 };
        assert_eq!(comps.len(), expected);
        for c in &comps {
            assert_eq!(c.len(), grid.node_count());
        }
        SymTensorField { grid: Arc::clone(grid), time, comps }
    }

    pub fn zero(grid: &Arc<Grid>, time: f64) -> Self {
        let k = if grid.dim() == 1 { 1 } else { 3 };
        let comps = (0..k).map(|_| vec![0.0; grid.node_count()]).collect();
        SymTensorField { grid: Arc::clone(grid), time, comps }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn xx(&self) -> &[f64] {
        &self.comps[0]
    }

    pub fn yy(&self) -> &[f64] {
        &self.comps[1]
    }

    pub fn xy(&self) -> &[f64] {
        &self.comps[2]
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Hilbert-Schmidt (Frobenius) norm per node; the off-diagonal counts twice.
    pub fn frobenius(&self) -> ScalarField {
        let n = self.grid.node_count();
        let data = (0..n)
            .map(|i| {
                if self.dim() == 1 {
                    self.comps[0][i].abs()
                } else {
                    let (a, b, c) = (self.comps[0][i], self.comps[1][i], self.comps[2][i]);
                    (a * a + b * b + 2.0 * c * c).sqrt()
                }
            })
            .collect();
        ScalarField { grid: Arc::clone(&self.grid), time: self.time, data }
    }

    /// T(v, v) per node.
    pub fn quadratic_form(&self, v: &VectorField) -> ScalarField {
        let n = self.grid.node_count();
        let data = (0..n)
            .map(|i| {
                if self.dim() == 1 {
                    self.comps[0][i] * v.component(0)[i] * v.component(0)[i]
                } else {
                    let (vx, vy) = (v.component(0)[i], v.component(1)[i]);
                    self.comps[0][i] * vx * vx
                        + self.comps[1][i] * vy * vy
                        + 2.0 * self.comps[2][i] * vx * vy
                }
            })
            .collect();
        ScalarField { grid: Arc::clone(&self.grid), time: self.time, data }
    }

    /// Matrix-vector product (T v) per node.
    pub fn apply(&self, v: &VectorField) -> VectorField {
        let n = self.grid.node_count();
        if self.dim() == 1 {
            let cx: Vec<f64> = (0..n).map(|i| self.comps[0][i] * v.component(0)[i]).collect();
            VectorField::from_components(&self.grid, self.time, vec![cx])
        } else {
            let mut cx = Vec::with_capacity(n);
            let mut cy = Vec::with_capacity(n);
            for i in 0..n {
                let (vx, vy) = (v.component(0)[i], v.component(1)[i]);
                cx.push(self.comps[0][i] * vx + self.comps[2][i] * vy);
                cy.push(self.comps[2][i] * vx + self.comps[1][i] * vy);
            }
            VectorField::from_components(&self.grid, self.time, vec![cx, cy])
        }
    }

    /// Smallest eigenvalue per node, closed form (d <= 2).
    pub fn lambda_min(&self) -> ScalarField {
        let n = self.grid.node_count();
        let data = (0..n)
            .map(|i| {
                if self.dim() == 1 {
                    self.comps[0][i]
                } else {
                    let (a, b, c) = (self.comps[0][i], self.comps[1][i], self.comps[2][i]);
                    let mean = 0.5 * (a + b);
                    let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
                    mean - rad
                }
            })
            .collect();
        ScalarField { grid: Arc::clone(&self.grid), time: self.time, data }
    }

    /// Pointwise trace.
    pub fn trace(&self) -> ScalarField {
        let n = self.grid.node_count();
        let data = (0..n)
            .map(|i| if self.dim() == 1 { self.comps[0][i] } else { self.comps[0][i] + self.comps[1][i] })
            .collect();
        ScalarField { grid: Arc::clone(&self.grid), time: self.time, data }
    }

    /// `self - (v ⊗ v) / s` with a scalar denominator, used for the
    /// finite-dimension curvature correction.
    pub fn sub_outer_scaled(&self, v: &VectorField, s: f64) -> SymTensorField {
        let n = self.grid.node_count();
        if self.dim() == 1 {
            let cx: Vec<f64> = (0..n)
                .map(|i| self.comps[0][i] - v.component(0)[i] * v.component(0)[i] / s)
                .collect();
            SymTensorField::from_components(&self.grid, self.time, vec![cx])
        } else {
            let mut xx = Vec::with_capacity(n);
            let mut yy = Vec::with_capacity(n);
            let mut xy = Vec::with_capacity(n);
            for i in 0..n {
                let (vx, vy) = (v.component(0)[i], v.component(1)[i]);
                xx.push(self.comps[0][i] - vx * vx / s);
                yy.push(self.comps[1][i] - vy * vy / s);
                xy.push(self.comps[2][i] - vx * vy / s);
            }
            SymTensorField::from_components(&self.grid, self.time, vec![xx, yy, xy])
        }
    }

    pub fn all_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interpolation_is_exact_at_nodes_and_linear_between() {
        let g = Grid::torus(1, &[2.0 * PI], &[16]).unwrap();
        let f = ScalarField::from_fn(&g, 0.0, |x, _| x.sin());
        let h = g.spacing(0);
        assert_eq!(f.sample(&[3.0 * h]), f.data()[3]);
        let mid = f.sample(&[3.5 * h]);
        assert!((mid - 0.5 * (f.data()[3] + f.data()[4])).abs() < 1e-15);
        // periodic wrap between last and first node
        let wrap = f.sample(&[2.0 * PI - 0.5 * h]);
        assert!((wrap - 0.5 * (f.data()[15] + f.data()[0])).abs() < 1e-15);
    }

    #[test]
    fn tensor_lambda_min_closed_form() {
        let g = Grid::torus(2, &[1.0, 1.0], &[8, 8]).unwrap();
        let n = g.node_count();
        let t = SymTensorField::from_components(
            &g,
            0.0,
            vec![vec![2.0; n], vec![-1.0; n], vec![1.0; n]],
        );
        // eigenvalues of [[2,1],[1,-1]]: (1 ± sqrt(9+4))/2... mean 0.5, rad sqrt(2.25+1)
        let expect = 0.5 - (2.25_f64 + 1.0).sqrt();
        assert!((t.lambda_min().data()[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn zip_rejects_time_mismatch() {
        let g = Grid::torus(1, &[1.0], &[8]).unwrap();
        let a = ScalarField::constant(&g, 0.0, 1.0);
        let b = ScalarField::constant(&g, 0.5, 1.0);
        assert!(matches!(a.zip(&b, |x, y| x + y), Err(GeometryError::TimeMismatch(_, _))));
    }
}
