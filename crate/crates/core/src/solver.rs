//! Explicit time integration of ∂t w = L_f w − q·w − G(w): classical RK4
//! with a conservative step clamp, positivity monitoring, and exact landing
//! on requested output times.

use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{gradient, laplacian, GeometryError, Grid, ScalarField};
use crate::model::{FieldSpec, ModelError, Nonlinearity};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("positivity lost at t = {t}, step {step}: w = {value} at {location:?}")]
    PositivityLoss { t: f64, step: u64, value: f64, location: Vec<f64> },
    #[error("non-finite solution value at t = {t}, step {step}")]
    NonFinite { t: f64, step: u64 },
    #[error("output times must be strictly increasing and >= the state time")]
    BadOutputTimes,
    #[error("dt = {dt} exceeds the stability clamp {max}")]
    DtTooLarge { dt: f64, max: f64 },
}

/// The equation's coefficient set: weight f, potential q, and nonlinearity G.
#[derive(Debug, Clone)]
pub struct Problem {
    pub weight: FieldSpec,
    pub potential: FieldSpec,
    pub nonlinearity: Nonlinearity,
}

impl Problem {
    pub fn pure_heat() -> Self {
        Problem {
            weight: FieldSpec::zero(),
            potential: FieldSpec::zero(),
            nonlinearity: Nonlinearity::Zero,
        }
    }

    /// Right-hand side L_f w − q·w − G(w) at the field's own time tag.
    /// For the nonlocal case the λ(t) factor is recomputed from `w` first.
    pub fn rhs(&self, w: &ScalarField) -> Result<ScalarField, SolverError> {
        let coeffs = CoeffCache::new(self, w.grid());
        self.rhs_cached(w, &coeffs)
    }

    fn rhs_cached(&self, w: &ScalarField, coeffs: &CoeffCache) -> Result<ScalarField, SolverError> {
        if w.min() <= 0.0 {
            let idx = w.argmin();
            return Err(SolverError::PositivityLoss {
                t: w.time(),
                step: 0,
                value: w.min(),
                location: w.grid().node_point(idx),
            });
        }
        let t = w.time();
        let lap = laplacian(w);
        let gw = gradient(w);
        let (gf, q) = coeffs.at(t);
        let g = self.nonlinearity.g_field(w)?;
        let n = w.len();
        let mut data = Vec::with_capacity(n);
        for i in 0..n {
            let adv: f64 = (0..w.grid().dim()).map(|a| gf[a][i] * gw.component(a)[i]).sum();
            data.push(lap.data()[i] - adv - q[i] * w.data()[i] - g.data()[i]);
        }
        Ok(ScalarField::from_data(w.grid(), t, data))
    }

    /// Conservative explicit step size:
    /// `safety · min(h²/(2d(1+sup|∇f|·h)), 1/(1+sup|q|+sup|G′|))`,
    /// with the coefficient suprema taken at the state's time and the
    /// reaction supremum over the state's value range.
    pub fn stable_dt(&self, w: &ScalarField, safety: f64) -> f64 {
        let grid = w.grid();
        let t = w.time();
        let h = grid.min_spacing();
        let d = grid.dim() as f64;
        let f = self.weight.sample(grid, t);
        let sup_gf = gradient(&f).sup_norm();
        let q = self.potential.sample(grid, t);
        let sup_q = q.sup_abs();
        let sup_gp = match &self.nonlinearity {
            Nonlinearity::CaffarelliLin { a_field } => {
                let a = a_field.sample(grid, t);
                crate::model::caffarelli_lin_lambda(w, &a).map(f64::abs).unwrap_or(0.0)
            }
            nl => w
                .data()
                .iter()
                .map(|&v| nl.g_prime(v).map(f64::abs).unwrap_or(f64::INFINITY))
                .fold(0.0_f64, f64::max),
        };
        let diffusion = h * h / (2.0 * d * (1.0 + sup_gf * h));
        let reaction = 1.0 / (1.0 + sup_q + sup_gp);
        safety * diffusion.min(reaction)
    }
}

/// Sampled coefficient fields; static expressions are sampled once.
struct CoeffCache {
    grid: Arc<Grid>,
    weight: FieldSpec,
    potential: FieldSpec,
    static_gf: Option<Vec<Vec<f64>>>,
    static_q: Option<Vec<f64>>,
}

impl CoeffCache {
    fn new(prob: &Problem, grid: &Arc<Grid>) -> Self {
        let static_gf = prob.weight.is_static().then(|| {
            let f = prob.weight.sample(grid, 0.0);
            let gf = gradient(&f);
            (0..grid.dim()).map(|a| gf.component(a).to_vec()).collect()
        });
        let static_q = prob.potential.is_static().then(|| prob.potential.sample(grid, 0.0).data().to_vec());
        CoeffCache {
            grid: Arc::clone(grid),
            weight: prob.weight.clone(),
            potential: prob.potential.clone(),
            static_gf,
            static_q,
        }
    }

    fn at(&self, t: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let gf = match &self.static_gf {
            Some(g) => g.clone(),
            None => {
                let f = self.weight.sample(&self.grid, t);
                let gf = gradient(&f);
                (0..self.grid.dim()).map(|a| gf.component(a).to_vec()).collect()
            }
        };
        let q = match &self.static_q {
            Some(q) => q.clone(),
            None => self.potential.sample(&self.grid, t).data().to_vec(),
        };
        (gf, q)
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub w: ScalarField,
    pub step: u64,
}

impl SolverState {
    pub fn new(w: ScalarField) -> Self {
        SolverState { w, step: 0 }
    }

    pub fn t(&self) -> f64 {
        self.w.time()
    }
}

/// One stored output: the solution and its PDE-side time derivative
/// (the right-hand side re-evaluated on the stored field, never a finite
/// time difference).
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub w: ScalarField,
    pub w_t: ScalarField,
}

impl Snapshot {
    pub fn t(&self) -> f64 {
        self.w.time()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// Total RK4 steps taken across all segments.
    pub steps: u64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t()).collect()
    }

    /// Snapshots with t >= t_min.
    pub fn window(&self, t_min: f64) -> &[Snapshot] {
        let start = self.snapshots.partition_point(|s| s.t() < t_min);
        &self.snapshots[start..]
    }

    pub fn min_w(&self) -> f64 {
        self.snapshots.iter().map(|s| s.w.min()).fold(f64::INFINITY, f64::min)
    }
}

fn check_state(w: &ScalarField, step: u64) -> Result<(), SolverError> {
    if !w.all_finite() {
        return Err(SolverError::NonFinite { t: w.time(), step });
    }
    let min = w.min();
    if min <= 0.0 {
        let idx = w.argmin();
        return Err(SolverError::PositivityLoss {
            t: w.time(),
            step,
            value: min,
            location: w.grid().node_point(idx),
        });
    }
    Ok(())
}

fn rk4_once(
    w: &ScalarField,
    dt: f64,
    prob: &Problem,
    coeffs: &CoeffCache,
) -> Result<ScalarField, SolverError> {
    let t = w.time();
    let k1 = prob.rhs_cached(w, coeffs)?;
    let stage = |base: &ScalarField, k: &ScalarField, c: f64, ts: f64| {
        let data = base
            .data()
            .iter()
            .zip(k.data())
            .map(|(&w0, &kv)| w0 + c * kv)
            .collect::<Vec<f64>>();
        ScalarField::from_data(base.grid(), ts, data)
    };
    let k2 = prob.rhs_cached(&stage(w, &k1, 0.5 * dt, t + 0.5 * dt), coeffs)?;
    let k3 = prob.rhs_cached(&stage(w, &k2, 0.5 * dt, t + 0.5 * dt), coeffs)?;
    let k4 = prob.rhs_cached(&stage(w, &k3, dt, t + dt), coeffs)?;
    let n = w.len();
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        data.push(
            w.data()[i]
                + dt / 6.0 * (k1.data()[i] + 2.0 * k2.data()[i] + 2.0 * k3.data()[i] + k4.data()[i]),
        );
    }
    Ok(ScalarField::from_data(w.grid(), t + dt, data))
}

/// One classical 4-stage explicit step. Positivity is checked, not enforced.
pub fn step_rk4(state: &SolverState, dt: f64, prob: &Problem) -> Result<SolverState, SolverError> {
    let coeffs = CoeffCache::new(prob, state.w.grid());
    let w = rk4_once(&state.w, dt, prob, &coeffs)?;
    check_state(&w, state.step + 1)?;
    Ok(SolverState { w, step: state.step + 1 })
}

/// Integrate to each requested output time exactly (the step inside each
/// segment is shortened uniformly so the segment lands on the target).
/// `dt_max` caps the step; pass `stable_dt(...)` or a validated override.
pub fn evolve(
    initial: SolverState,
    output_times: &[f64],
    prob: &Problem,
    dt_max: f64,
) -> Result<Trajectory, SolverError> {
    let t0 = initial.t();
    if output_times.is_empty()
        || output_times.windows(2).any(|p| p[1] <= p[0])
        || output_times[0] < t0
    {
        return Err(SolverError::BadOutputTimes);
    }
    if !(dt_max > 0.0) {
        return Err(SolverError::DtTooLarge { dt: dt_max, max: f64::INFINITY });
    }
    check_state(&initial.w, initial.step)?;
    let coeffs = CoeffCache::new(prob, initial.w.grid());
    let mut snapshots = Vec::with_capacity(output_times.len());
    let mut state = initial;
    for &target in output_times {
        if target > state.t() {
            let span = target - state.t();
            let nsteps = (span / dt_max).ceil().max(1.0) as u64;
            let dt = span / nsteps as f64;
            let seg_start = state.t();
            for k in 0..nsteps {
                let w = rk4_once(&state.w, dt, prob, &coeffs)?;
                state = SolverState { w, step: state.step + 1 };
                check_state(&state.w, state.step)?;
                // accumulate from the segment start; land exactly on target
                let t_next = if k + 1 == nsteps { target } else { seg_start + (k + 1) as f64 * dt };
                state.w = state.w.with_time(t_next);
            }
        }
        let w_t = prob.rhs_cached(&state.w, &coeffs)?;
        snapshots.push(Snapshot { w: state.w.clone(), w_t });
    }
    Ok(Trajectory { snapshots, steps: state.step })
}

/// Sup-norm of the right-hand side; a run is steady when this is below the
/// configured threshold.
pub fn steady_state_norm(state: &SolverState, prob: &Problem) -> Result<f64, SolverError> {
    Ok(prob.rhs(&state.w)?.sup_abs())
}
