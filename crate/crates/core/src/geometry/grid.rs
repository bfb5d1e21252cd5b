//! Periodic structured grids on flat tori T^d, d = 1, 2.

use std::sync::Arc;

use super::GeometryError;

/// Coarsest resolution we accept per axis; below this the second-order
/// stencils are meaningless.
pub const MIN_NODES: usize = 8;

/// A uniform periodic grid on a flat torus. Nodes sit at `x_j = j * h_i`
/// with wraparound; spacings are `h_i = L_i / n_i` (the node at `L_i`
/// is identified with the node at 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    lengths: [f64; 2],
    counts: [usize; 2],
    spacings: [f64; 2],
}

impl Grid {
    /// Build a torus grid. `lengths` and `counts` must have `dim` entries.
    pub fn torus(dim: usize, lengths: &[f64], counts: &[usize]) -> Result<Arc<Self>, GeometryError> {
        if dim != 1 && dim != 2 {
            return Err(GeometryError::BadDimension(dim));
        }
        if lengths.len() != dim || counts.len() != dim {
            return Err(GeometryError::AxisCountMismatch {
                dim,
                lengths: lengths.len(),
                counts: counts.len(),
            });
        }
        let mut l = [1.0_f64; 2];
        let mut n = [1_usize; 2];
        let mut h = [1.0_f64; 2];
        for axis in 0..dim {
            if !(lengths[axis] > 0.0 && lengths[axis].is_finite()) {
                return Err(GeometryError::BadLength { axis, got: lengths[axis] });
            }
            if counts[axis] < MIN_NODES {
                return Err(GeometryError::TooFewNodes { axis, got: counts[axis], min: MIN_NODES });
            }
            l[axis] = lengths[axis];
            n[axis] = counts[axis];
            h[axis] = lengths[axis] / counts[axis] as f64;
        }
        Ok(Arc::new(Grid { dim, lengths: l, counts: n, spacings: h }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    pub fn count(&self, axis: usize) -> usize {
        self.counts[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacings[axis]
    }

    pub fn node_count(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim).map(|a| self.spacings[a]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim).map(|a| self.spacings[a]).fold(0.0, f64::max)
    }

    /// Half the shortest period: the largest radius at which geodesic balls
    /// are still metric balls of the covering line/plane.
    pub fn injectivity_radius(&self) -> f64 {
        (0..self.dim).map(|a| self.lengths[a]).fold(f64::INFINITY, f64::min) / 2.0
    }

    /// Volume of one grid cell, `h_x * h_y` (unweighted volume element).
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacings[a]).product()
    }

    #[inline]
    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        j * self.counts[0] + i
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> (usize, usize) {
        (idx % self.counts[0], idx / self.counts[0])
    }

    /// Coordinates of node `idx` (length = dim).
    pub fn node_point(&self, idx: usize) -> Vec<f64> {
        let (i, j) = self.unflatten(idx);
        let mut p = vec![i as f64 * self.spacings[0]];
        if self.dim == 2 {
            p.push(j as f64 * self.spacings[1]);
        }
        p
    }

    /// Index of the grid node nearest to `point` (periodic).
    pub fn nearest_node(&self, point: &[f64]) -> usize {
        let mut ij = [0usize; 2];
        for axis in 0..self.dim {
            let l = self.lengths[axis];
            let x = point[axis].rem_euclid(l);
            let k = (x / self.spacings[axis]).round() as usize % self.counts[axis];
            ij[axis] = k;
        }
        self.flat_index(ij[0], ij[1])
    }
}

/// Geodesic distance between two points of the torus: per-axis shortest
/// wraparound separation combined Euclidean.
pub fn geodesic_distance(a: &[f64], b: &[f64], grid: &Grid) -> f64 {
    let mut sum = 0.0;
    for axis in 0..grid.dim() {
        let l = grid.period(axis);
        let r = (a[axis] - b[axis]).rem_euclid(l);
        let d = r.min(l - r);
        sum += d * d;
    }
    sum.sqrt()
}

/// Per-axis displacement from `a` to `b` along the shortest wraparound
/// direction (signed, in (-L/2, L/2]).
pub fn shortest_displacement(a: &[f64], b: &[f64], grid: &Grid) -> Vec<f64> {
    (0..grid.dim())
        .map(|axis| {
            let l = grid.period(axis);
            let mut d = (b[axis] - a[axis]).rem_euclid(l);
            if d > l / 2.0 {
                d -= l;
            }
            d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    #[test]
    fn torus_spacing_1d() {
        let g = Grid::torus(1, &[TAU], &[256]).unwrap();
        assert_eq!(g.spacing(0), TAU / 256.0);
        assert_eq!(g.node_count(), 256);
    }

    #[test]
    fn torus_node_count_2d() {
        let g = Grid::torus(2, &[TAU, TAU], &[64, 64]).unwrap();
        assert_eq!(g.node_count(), 4096);
    }

    #[test]
    fn torus_rejects_low_resolution() {
        assert!(matches!(
            Grid::torus(1, &[TAU], &[4]),
            Err(GeometryError::TooFewNodes { .. })
        ));
    }

    #[test]
    fn torus_rejects_bad_dim() {
        assert!(matches!(Grid::torus(3, &[1.0, 1.0, 1.0], &[8, 8, 8]), Err(GeometryError::BadDimension(3))));
        assert!(matches!(Grid::torus(0, &[], &[]), Err(GeometryError::BadDimension(0))));
    }

    #[test]
    fn distance_identity() {
        let g = Grid::torus(1, &[TAU], &[16]).unwrap();
        assert_eq!(geodesic_distance(&[0.3], &[0.3], &g), 0.0);
    }

    #[test]
    fn distance_wraparound_shorter() {
        let g = Grid::torus(1, &[TAU], &[16]).unwrap();
        let d = geodesic_distance(&[0.1], &[6.2], &g);
        assert!((d - (TAU - 6.1)).abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn distance_axis_antipodal() {
        let g = Grid::torus(2, &[TAU, TAU], &[16, 16]).unwrap();
        let d = geodesic_distance(&[0.0, 0.0], &[PI, 0.0], &g);
        assert!((d - PI).abs() < 1e-12);
    }

    proptest! {
        /// Symmetry, identity of indiscernibles (on nodes), and the triangle
        /// inequality on sampled triples.
        #[test]
        fn distance_is_a_metric(
            ax in 0.0..TAU, ay in 0.0..TAU,
            bx in 0.0..TAU, by in 0.0..TAU,
            cx in 0.0..TAU, cy in 0.0..TAU,
        ) {
            let g = Grid::torus(2, &[TAU, TAU], &[32, 32]).unwrap();
            let a = [ax, ay];
            let b = [bx, by];
            let c = [cx, cy];
            let dab = geodesic_distance(&a, &b, &g);
            let dba = geodesic_distance(&b, &a, &g);
            prop_assert!((dab - dba).abs() <= 1e-12);
            prop_assert!(geodesic_distance(&a, &a, &g) == 0.0);
            let dac = geodesic_distance(&a, &c, &g);
            let dcb = geodesic_distance(&c, &b, &g);
            prop_assert!(dab <= dac + dcb + 1e-12);
        }
    }

    #[test]
    fn nearest_node_snaps_periodically() {
        let g = Grid::torus(1, &[TAU], &[8]).unwrap();
        let h = g.spacing(0);
        assert_eq!(g.nearest_node(&[0.49 * h]), 0);
        assert_eq!(g.nearest_node(&[0.51 * h]), 1);
        assert_eq!(g.nearest_node(&[TAU - 0.2 * h]), 0);
    }
}
