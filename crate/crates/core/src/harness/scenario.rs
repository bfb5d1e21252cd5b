//! Scenario description: everything a run needs, with full validation that
//! collects every violation instead of stopping at the first.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::estimates::{validate_reversed_window, HessianParams};
use crate::geometry::{Grid, MIN_NODES};
use crate::model::{nonlinearity, FieldSpec, Nonlinearity};
use crate::solver::Problem;

pub const KNOWN_CHECKS: &[&str] = &[
    "li_yau_compact",
    "li_yau_global",
    "li_yau_local",
    "harnack_bound",
    "hamilton_bound",
    "liouville_assess",
    "hessian_global",
    "hessian_local",
    "ly_hessian",
    "reversed_harnack",
    "hamilton_hessian",
    "cd_condition",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldBlock {
    pub dim: usize,
    pub lengths: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityBlock {
    pub case: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialBlock {
    pub w0: String,
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverBlock {
    pub t_end: f64,
    pub safety: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Output times; empty means 17 evenly spaced points on [t_min, t_end].
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Checks run on snapshots past this time (1/t blow-up exclusion).
    pub t_min: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckBlock {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_policy: Option<String>,
}

impl CheckBlock {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.get(key).unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TolerancesBlock {
    pub tau_abs: f64,
    pub tau_disc: f64,
}

impl Default for TolerancesBlock {
    fn default() -> Self {
        TolerancesBlock { tau_abs: 1e-9, tau_disc: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineBlock {
    /// "spatial" doubles the grid per level (dt follows h²); "temporal"
    /// halves dt at fixed grid.
    pub mode: String,
    /// "self" (coarse-vs-fine solution difference), "bochner" (identity
    /// residual of log w at the final time), or an analytic reference
    /// expression over (x, y, t).
    pub reference: String,
}

impl Default for RefineBlock {
    fn default() -> Self {
        RefineBlock { mode: "spatial".into(), reference: "self".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub manifold: ManifoldBlock,
    pub weight: String,
    pub potential: String,
    pub nonlinearity: NonlinearityBlock,
    pub initial: InitialBlock,
    pub solver: SolverBlock,
    pub checks: Vec<CheckBlock>,
    #[serde(default)]
    pub tolerances: TolerancesBlock,
    #[serde(default)]
    pub refine: RefineBlock,
}

impl Scenario {
    /// Hash of the normalized parsed form (not the raw config text).
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("scenario serializes");
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        format!("{:x}", hasher.finalize())
    }

    /// Output times: configured list, or 17 points evenly spaced on
    /// [t_min, t_end].
    pub fn snapshot_times(&self) -> Vec<f64> {
        if !self.solver.snapshots.is_empty() {
            return self.solver.snapshots.clone();
        }
        let n = 17;
        let t0 = self.solver.t_min;
        (0..n)
            .map(|i| t0 + (self.solver.t_end - t0) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>, String> {
        Grid::torus(self.manifold.dim, &self.manifold.lengths, &self.manifold.counts)
            .map_err(|e| e.to_string())
    }

    pub fn build_nonlinearity(&self) -> Result<Nonlinearity, String> {
        nonlinearity::from_config(
            &self.nonlinearity.case,
            &self.nonlinearity.params,
            self.nonlinearity.a_expr.as_deref(),
            self.nonlinearity.table.as_deref(),
        )
        .map_err(|e| e.to_string())
    }

    pub fn build_problem(&self) -> Result<Problem, String> {
        Ok(Problem {
            weight: FieldSpec::parse(&self.weight).map_err(|e| format!("weight: {e}"))?,
            potential: FieldSpec::parse(&self.potential).map_err(|e| format!("potential: {e}"))?,
            nonlinearity: self.build_nonlinearity()?,
        })
    }

    /// Validate everything validatable before computation; returns every
    /// violation, each with the violated condition spelled out.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let dim = self.manifold.dim;
        if dim != 1 && dim != 2 {
            errs.push(format!("[manifold] dim must be 1 or 2, got {dim}"));
        }
        if self.manifold.lengths.len() != dim || self.manifold.counts.len() != dim {
            errs.push(format!(
                "[manifold] lengths/counts must each have {dim} entries, got {}/{}",
                self.manifold.lengths.len(),
                self.manifold.counts.len()
            ));
        }
        for (axis, &l) in self.manifold.lengths.iter().enumerate() {
            if !(l > 0.0) {
                errs.push(format!("[manifold] lengths[{axis}] > 0 required, got {l}"));
            }
        }
        for (axis, &n) in self.manifold.counts.iter().enumerate() {
            if n < MIN_NODES {
                errs.push(format!("[manifold] counts[{axis}] >= {MIN_NODES} required, got {n}"));
            }
        }

        let mut check_expr = |label: &str, src: &str| match FieldSpec::parse(src) {
            Ok(spec) => {
                if dim == 1 && spec.uses_y() {
                    errs.push(format!("[{label}] expression references y on a 1-d torus"));
                    None
                } else {
                    Some(spec)
                }
            }
            Err(e) => {
                errs.push(format!("[{label}] {e}"));
                None
            }
        };
        check_expr("weight", &self.weight);
        check_expr("potential", &self.potential);
        let w0_spec = check_expr("initial", &self.initial.w0);
        if let Some(ae) = &self.nonlinearity.a_expr {
            check_expr("nonlinearity", ae);
        }

        if let Err(e) = self.build_nonlinearity() {
            errs.push(format!("[nonlinearity] {e}"));
        }

        if !(self.initial.floor > 0.0) {
            errs.push(format!("[initial] floor > 0 required, got {}", self.initial.floor));
        }
        // strict positivity of the sampled initial data, against the floor
        if let (Some(w0), Ok(grid)) = (&w0_spec, self.build_grid()) {
            let field = w0.sample(&grid, 0.0);
            if !field.all_finite() {
                errs.push("[initial] w0 is not finite on the grid".into());
            } else if field.min() < self.initial.floor {
                errs.push(format!(
                    "[initial] min w0 = {} below the positivity floor {}",
                    field.min(),
                    self.initial.floor
                ));
            }
        }

        if !(self.solver.t_end > 0.0) {
            errs.push(format!("[solver] t_end > 0 required, got {}", self.solver.t_end));
        }
        if !(self.solver.safety > 0.0 && self.solver.safety <= 1.0) {
            errs.push(format!("[solver] 0 < safety <= 1 required, got {}", self.solver.safety));
        }
        if let Some(dt) = self.solver.dt {
            if !(dt > 0.0) {
                errs.push(format!("[solver] dt > 0 required, got {dt}"));
            }
        }
        if !(self.solver.t_min >= 0.0 && self.solver.t_min < self.solver.t_end) {
            errs.push(format!(
                "[solver] 0 <= t_min < t_end required, got t_min = {}, t_end = {}",
                self.solver.t_min, self.solver.t_end
            ));
        }
        let times = &self.solver.snapshots;
        if !times.is_empty() {
            if times.windows(2).any(|p| p[1] <= p[0]) {
                errs.push("[solver] snapshots must be strictly increasing".into());
            }
            if times[0] <= 0.0 || *times.last().unwrap() > self.solver.t_end + 1e-12 {
                errs.push(format!(
                    "[solver] snapshots must lie in (0, t_end = {}]",
                    self.solver.t_end
                ));
            }
        }
        if !(self.tolerances.tau_abs >= 0.0 && self.tolerances.tau_disc >= 0.0) {
            errs.push("[tolerances] tau_abs and tau_disc must be nonnegative".into());
        }
        match self.refine.mode.as_str() {
            "spatial" | "temporal" => {}
            other => errs.push(format!("[refine] mode must be spatial or temporal, got '{other}'")),
        }
        match self.refine.reference.as_str() {
            "self" | "bochner" => {}
            expr => {
                if let Err(e) = FieldSpec::parse(expr) {
                    errs.push(format!(
                        "[refine] reference must be self, bochner, or an expression: {e}"
                    ));
                }
            }
        }

        for c in &self.checks {
            self.validate_check(c, &mut errs);
        }
        errs
    }

    fn validate_check(&self, c: &CheckBlock, errs: &mut Vec<String>) {
        let dim = self.manifold.dim as f64;
        let sect = format!("[checks.{}]", c.name);
        if !KNOWN_CHECKS.contains(&c.name.as_str()) {
            errs.push(format!("{sect} unknown check name"));
            return;
        }
        let needs_alpha = matches!(
            c.name.as_str(),
            "li_yau_global" | "li_yau_local" | "harnack_bound" | "ly_hessian" | "reversed_harnack"
        );
        if needs_alpha {
            let alpha = c.get_or("alpha", 2.0);
            if !(alpha > 1.0) {
                errs.push(format!("{sect} alpha > 1 required, got alpha = {alpha}"));
            }
            let eps = c.get_or("epsilon", 0.5);
            if !(eps > 0.0 && eps < 1.0) {
                errs.push(format!("{sect} 0 < epsilon < 1 required, got epsilon = {eps}"));
            }
            let m = c.get_or("m", dim + 1.0);
            if m < dim {
                errs.push(format!("{sect} m >= n = {dim} required, got m = {m}"));
            }
        }
        if c.name == "li_yau_compact" || c.name == "cd_condition" {
            let m = c.get_or("m", dim);
            if m < dim {
                errs.push(format!("{sect} m >= n = {dim} required, got m = {m}"));
            }
        }
        let hessian_family = matches!(
            c.name.as_str(),
            "hessian_global" | "hessian_local" | "ly_hessian" | "hamilton_hessian"
        );
        if hessian_family {
            let hp = HessianParams {
                beta: c.get_or("beta", 1.0),
                delta: c.get_or("delta", 0.5),
                c: c.get_or("c", 1.0),
            };
            if let Err(e) = hp.validate() {
                errs.push(format!("{sect} {e}"));
            }
        }
        if c.name == "reversed_harnack" {
            let hp = HessianParams {
                beta: c.get_or("beta", 0.1),
                delta: c.get_or("delta", 0.01),
                c: c.get_or("c", 1.0),
            };
            let alpha = c.get_or("alpha", 2.0);
            if alpha > 1.0 {
                if let Err(e) = validate_reversed_window(alpha, &hp) {
                    errs.push(format!("{sect} {e}"));
                }
            }
            if !(hp.c > 0.0) {
                errs.push(format!("{sect} C > 0 required, got C = {}", hp.c));
            }
        }
        if c.name == "li_yau_local" || c.name == "hessian_local" {
            match c.get("radius") {
                None => errs.push(format!("{sect} radius is required")),
                Some(r) => {
                    let inj = self
                        .manifold
                        .lengths
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min)
                        / 2.0;
                    let cap = if c.name == "li_yau_local" { 2.0 * r } else { r };
                    if !(r > 0.0 && cap < inj) {
                        errs.push(format!(
                            "{sect} ball of radius {cap} must sit inside the injectivity radius {inj}"
                        ));
                    }
                }
            }
            if let Some(center) = &c.center {
                if center.len() != self.manifold.dim {
                    errs.push(format!(
                        "{sect} center needs {} coordinates, got {}",
                        self.manifold.dim,
                        center.len()
                    ));
                }
            }
        }
        if let Some(policy) = &c.path_policy {
            if policy != "straight" && policy != "sampled" {
                errs.push(format!("{sect} path_policy must be straight or sampled, got '{policy}'"));
            }
        }
        if c.name == "harnack_bound" || c.name == "reversed_harnack" {
            let pairs = c.get_or("pairs", if c.name == "harnack_bound" { 20.0 } else { 10.0 });
            if !(pairs >= 1.0) {
                errs.push(format!("{sect} pairs >= 1 required, got {pairs}"));
            }
        }
        if c.name == "liouville_assess" {
            let thr = c.get_or("threshold", 1e-8);
            if !(thr > 0.0) {
                errs.push(format!("{sect} threshold > 0 required, got {thr}"));
            }
        }
        if c.name == "hamilton_bound" || c.name == "hamilton_hessian" {
            if let Some(a) = c.get("a_ceiling") {
                if !(a > 0.0) {
                    errs.push(format!("{sect} a_ceiling > 0 required, got {a}"));
                }
            }
        }
    }
}
