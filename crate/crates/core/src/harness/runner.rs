//! Scenario execution: build, evolve, run every configured check on every
//! snapshot past t_min (trajectory-level checks once), and assemble a
//! deterministic report bundle. Also the refinement study.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::estimates::{
    self, CheckReport, EstimateContext, HarnackParams, HessianParams, LocalCylinder, MarginScan,
    PathPolicy, Tolerances, Verdict,
};
use crate::geometry::{bochner_residual, BochnerVariant, ScalarField};
use crate::model::FieldSpec;
use crate::solver::{evolve, SolverState, Trajectory};

use super::scenario::{CheckBlock, Scenario};
use super::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub dt_used: f64,
    pub steps: u64,
    /// Minimum solution value seen across stored snapshots.
    pub positivity_min: f64,
    /// Per-snapshot minima of w (positivity monitoring).
    pub min_w_per_snapshot: Vec<f64>,
    /// Per-snapshot sup|rhs|; a run is steady when this falls below a
    /// configured threshold.
    pub steady_norms: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    /// |∫w² dμ − 1| at the final snapshot, monitored for the nonlocal
    /// norm-preserving case (None for the other nonlinearities).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_drift: Option<f64>,
    pub thread_count: usize,
}

/// Wall-clock data, excluded from the determinism view and the scenario hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub wall_ms: u64,
    pub unix_time_s: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: u32,
    pub counts: Vec<usize>,
    pub dt: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub label: String,
    pub rows: Vec<ConvergenceRow>,
    /// Empirical orders log₂(e_k / e_{k+1}); None where a value sits at
    /// roundoff (or a margin is nonnegative) and the ratio is meaningless.
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub scenario_hash: String,
    pub scenario: Scenario,
    pub run: RunMetadata,
    pub checks: Vec<CheckReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<ConvergenceTable>,
    pub timing: Timing,
}

impl ReportBundle {
    /// The bundle as JSON with the timing block removed: two runs of the
    /// same scenario at the same thread count must agree byte-for-byte on
    /// this view.
    pub fn determinism_view(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("bundle serializes");
        v.as_object_mut().expect("bundle is an object").remove("timing");
        v
    }

    pub fn worst_verdict(&self) -> Verdict {
        let mut worst = Verdict::Pass;
        for c in &self.checks {
            match c.verdict {
                Verdict::Fail => return Verdict::Fail,
                Verdict::PassWithFlags => worst = Verdict::PassWithFlags,
                Verdict::Pass => {}
            }
        }
        worst
    }
}

/// Run a validated scenario end to end.
pub fn run_scenario(scn: &Scenario) -> Result<ReportBundle, HarnessError> {
    run_scenario_traj(scn).map(|(b, _)| b)
}

/// As `run_scenario`, additionally handing back the trajectory (the
/// refinement study reuses final-time fields instead of re-solving).
pub fn run_scenario_traj(scn: &Scenario) -> Result<(ReportBundle, Trajectory), HarnessError> {
    let wall = Instant::now();
    let errs = scn.validate();
    if !errs.is_empty() {
        return Err(HarnessError::Invalid(errs));
    }
    let grid = scn.build_grid().map_err(|e| HarnessError::Invalid(vec![e]))?;
    let problem = scn.build_problem().map_err(|e| HarnessError::Invalid(vec![e]))?;
    let w0 = FieldSpec::parse(&scn.initial.w0)
        .map_err(|e| HarnessError::Invalid(vec![e.to_string()]))?
        .sample_checked(&grid, 0.0)
        .map_err(|e| HarnessError::Invalid(vec![e.to_string()]))?;

    let stable = problem.stable_dt(&w0, scn.solver.safety);
    let dt_used = match scn.solver.dt {
        Some(dt) if dt > stable => {
            return Err(HarnessError::Invalid(vec![format!(
                "[solver] dt = {dt} exceeds the stability clamp {stable}"
            )]));
        }
        Some(dt) => dt,
        None => stable,
    };
    let times = scn.snapshot_times();
    let traj = evolve(SolverState::new(w0), &times, &problem, dt_used)?;
    let steady_norms: Vec<f64> = traj.snapshots.iter().map(|s| s.w_t.sup_abs()).collect();
    let min_w_per_snapshot: Vec<f64> = traj.snapshots.iter().map(|s| s.w.min()).collect();

    let window = traj.window(scn.solver.t_min);
    let tol = Tolerances { tau_abs: scn.tolerances.tau_abs, tau_disc: scn.tolerances.tau_disc };
    let mut checks = Vec::new();
    if !scn.checks.is_empty() {
        if window.is_empty() {
            return Err(HarnessError::Invalid(vec![format!(
                "no snapshots at or past t_min = {}; checks have nothing to examine",
                scn.solver.t_min
            )]));
        }
        let ctx =
            EstimateContext::build(&problem.weight, &problem.potential, &problem.nonlinearity, window, tol)?;
        for block in &scn.checks {
            run_check(&ctx, scn, block, &mut checks)?;
        }
    }

    let l2_drift = match &problem.nonlinearity {
        crate::model::Nonlinearity::CaffarelliLin { .. } => traj
            .snapshots
            .last()
            .map(|s| crate::model::l2_normalization_drift(&s.w)),
        _ => None,
    };
    let run = RunMetadata {
        dt_used,
        steps: traj.steps,
        positivity_min: traj.min_w(),
        min_w_per_snapshot,
        steady_norms,
        snapshot_times: traj.times(),
        l2_drift,
        thread_count: 1,
    };
    let bundle = ReportBundle {
        schema_version: SCHEMA_VERSION,
        scenario_hash: scn.hash(),
        scenario: scn.clone(),
        run,
        checks,
        convergence: vec![],
        timing: Timing {
            wall_ms: wall.elapsed().as_millis() as u64,
            unix_time_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        },
    };
    Ok((bundle, traj))
}

fn run_check(
    ctx: &EstimateContext,
    scn: &Scenario,
    block: &CheckBlock,
    out: &mut Vec<CheckReport>,
) -> Result<(), HarnessError> {
    let dim = scn.manifold.dim as f64;
    let default_center = vec![0.0; scn.manifold.dim];
    match block.name.as_str() {
        "li_yau_compact" => {
            let m = block.get_or("m", dim);
            let k = match block.get("k") {
                Some(k) => k,
                None => ctx.k_mn(m)?,
            };
            for snap in ctx.snapshots {
                out.push(estimates::li_yau_compact(ctx, snap, m, k)?);
            }
        }
        "li_yau_global" => {
            let (m, alpha, eps) =
                (block.get_or("m", dim + 1.0), block.get_or("alpha", 2.0), block.get_or("epsilon", 0.5));
            for snap in ctx.snapshots {
                out.push(estimates::li_yau_global(ctx, snap, m, alpha, eps)?);
            }
        }
        "li_yau_local" => {
            let (m, alpha, eps) =
                (block.get_or("m", dim + 1.0), block.get_or("alpha", 2.0), block.get_or("epsilon", 0.5));
            let radius = block.get("radius").expect("validated");
            let center = block.center.clone().unwrap_or(default_center);
            for snap in ctx.snapshots {
                out.push(estimates::li_yau_local(ctx, snap, m, alpha, eps, &center, radius)?);
            }
        }
        "harnack_bound" => {
            let params = HarnackParams {
                m: block.get_or("m", dim + 1.0),
                alpha: block.get_or("alpha", 2.0),
                epsilon: block.get_or("epsilon", 0.5),
                policy: match block.path_policy.as_deref() {
                    Some("sampled") => PathPolicy::Sampled {
                        paths: block.get_or("paths", 32.0) as usize,
                        seed: block.get_or("seed", scn.solver.seed as f64) as u64,
                    },
                    _ => PathPolicy::Straight,
                },
                subintervals: block.get_or("subintervals", 64.0) as usize,
            };
            let pairs = block.get_or("pairs", 20.0) as usize;
            let seed = block.get_or("seed", scn.solver.seed as f64) as u64;
            out.push(estimates::harnack_random_pairs(ctx, &params, pairs, seed)?);
        }
        "hamilton_bound" => {
            let ceil = block.get("a_ceiling");
            for snap in ctx.snapshots {
                out.push(estimates::hamilton_bound(ctx, snap, ceil)?);
            }
        }
        "liouville_assess" => {
            out.push(estimates::liouville_assess(ctx, block.get_or("threshold", 1e-8))?);
        }
        "hessian_global" => {
            let hp = hessian_params(block);
            for snap in ctx.snapshots {
                out.push(estimates::hessian_global(ctx, snap, &hp)?);
            }
        }
        "hessian_local" => {
            let hp = hessian_params(block);
            let cyl = LocalCylinder {
                center: block.center.clone().unwrap_or(default_center),
                radius: block.get("radius").expect("validated"),
            };
            // Q_{R/2, T/2}: evaluate on the second half of the window
            let t_half = ctx.t_end() - ctx.t_len() / 2.0;
            for snap in ctx.snapshots.iter().filter(|s| s.t() >= t_half - 1e-12) {
                out.push(estimates::hessian_local(ctx, snap, &hp, &cyl)?);
            }
        }
        "ly_hessian" => {
            let (m, alpha, eps) =
                (block.get_or("m", dim + 1.0), block.get_or("alpha", 2.0), block.get_or("epsilon", 0.5));
            let hp = hessian_params(block);
            for snap in ctx.snapshots {
                out.push(estimates::ly_hessian(ctx, snap, m, alpha, eps, &hp)?);
            }
        }
        "reversed_harnack" => {
            let (m, alpha, eps) =
                (block.get_or("m", dim + 1.0), block.get_or("alpha", 2.0), block.get_or("epsilon", 0.5));
            let hp = HessianParams {
                beta: block.get_or("beta", 0.1),
                delta: block.get_or("delta", 0.01),
                c: block.get_or("c", 1.0),
            };
            let pairs = block.get_or("pairs", 10.0) as usize;
            let seed = block.get_or("seed", scn.solver.seed as f64) as u64;
            out.push(reversed_random_pairs(ctx, m, alpha, eps, &hp, pairs, seed)?);
        }
        "hamilton_hessian" => {
            let hp = hessian_params(block);
            let ceil = block.get("a_ceiling");
            for snap in ctx.snapshots {
                out.push(estimates::hamilton_hessian(ctx, snap, &hp, ceil)?);
            }
        }
        "cd_condition" => {
            let m = block.get_or("m", dim);
            for snap in ctx.snapshots {
                let u = snap.w.map(f64::ln);
                let f = ctx.weight.sample(ctx.grid(), snap.t());
                let k = match block.get("k") {
                    Some(k) => k,
                    None => -ctx.k_mn(m)?,
                };
                out.push(estimates::cd_condition(&u, &f, m, k, &ctx.tol)?);
            }
        }
        other => {
            return Err(HarnessError::Invalid(vec![format!("unknown check '{other}'")]));
        }
    }
    Ok(())
}

fn hessian_params(block: &CheckBlock) -> HessianParams {
    HessianParams {
        beta: block.get_or("beta", 1.0),
        delta: block.get_or("delta", 0.5),
        c: block.get_or("c", 1.0),
    }
}

/// Time-reversed Harnack on seeded random (x, t1, t2) triples; one report
/// aggregating the worst margin.
fn reversed_random_pairs(
    ctx: &EstimateContext,
    m: f64,
    alpha: f64,
    eps: f64,
    hp: &HessianParams,
    pairs: usize,
    seed: u64,
) -> Result<CheckReport, HarnessError> {
    let nt = ctx.snapshots.len();
    if nt < 2 {
        return Err(HarnessError::Invalid(vec![
            "reversed_harnack needs at least two snapshots past t_min".into(),
        ]));
    }
    let grid = ctx.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scan = MarginScan::new();
    let mut worst: Option<CheckReport> = None;
    for _ in 0..pairs.max(1) {
        let i1 = rng.gen_range(0..nt - 1);
        let i2 = rng.gen_range(i1 + 1..nt);
        let x = grid.node_point(rng.gen_range(0..grid.node_count()));
        let rep = estimates::reversed_harnack(
            ctx,
            &x,
            ctx.snapshots[i1].t(),
            ctx.snapshots[i2].t(),
            m,
            alpha,
            eps,
            hp,
        )?;
        scan.visit(rep.lhs_max, rep.rhs_min, &rep.argmin.location, rep.argmin.time);
        let is_worst = worst.as_ref().map(|w| rep.min_margin < w.min_margin).unwrap_or(true);
        if is_worst {
            worst = Some(rep);
        }
    }
    let mut report = worst.expect("pairs >= 1");
    report.min_margin = scan.min_margin();
    report.params.insert("pairs".into(), pairs as f64);
    Ok(report)
}

/// Budget for refinement studies.
const MAX_COUNT_PER_AXIS: usize = 4096;
const MAX_TOTAL_NODES: usize = 1 << 22;

/// Re-run the scenario at `levels` refinement levels, collecting per-check
/// min-margin tables and a benchmark-error table with empirical orders.
pub fn refinement_study(scn: &Scenario, levels: u32) -> Result<ReportBundle, HarnessError> {
    if levels < 2 {
        return Err(HarnessError::Invalid(vec![format!(
            "refinement needs levels >= 2, got {levels}"
        )]));
    }
    let spatial = scn.refine.mode == "spatial";
    if !spatial && scn.solver.dt.is_none() {
        return Err(HarnessError::Invalid(vec![
            "[refine] temporal mode needs an explicit [solver] dt to halve".into(),
        ]));
    }
    let factor = 1usize << (levels - 1);
    if spatial {
        let mut total = 1usize;
        for &c in &scn.manifold.counts {
            let fine = c
                .checked_mul(factor)
                .ok_or_else(|| HarnessError::Budget("grid size overflows".into()))?;
            if fine > MAX_COUNT_PER_AXIS {
                return Err(HarnessError::Budget(format!(
                    "axis count {fine} at the finest level exceeds the budget {MAX_COUNT_PER_AXIS}"
                )));
            }
            total *= fine;
        }
        if total > MAX_TOTAL_NODES {
            return Err(HarnessError::Budget(format!(
                "{total} nodes at the finest level exceeds the budget {MAX_TOTAL_NODES}"
            )));
        }
    }

    let mut bundles = Vec::new();
    let mut level_scns = Vec::new();
    let mut finals = Vec::new();
    for level in 0..levels {
        let mut s = scn.clone();
        let scale = 1usize << level;
        if spatial {
            for c in &mut s.manifold.counts {
                *c *= scale;
            }
            if let Some(dt) = s.solver.dt {
                s.solver.dt = Some(dt / (scale * scale) as f64);
            }
        } else {
            let dt = s.solver.dt.expect("validated");
            s.solver.dt = Some(dt / scale as f64);
        }
        let (bundle, traj) = run_scenario_traj(&s)?;
        finals.push(traj.snapshots.last().expect("at least one snapshot").w.clone());
        bundles.push(bundle);
        level_scns.push(s);
    }

    let mut convergence = Vec::new();

    // per-check min-margin tables, keyed by check name
    let mut names: Vec<String> = Vec::new();
    for c in &bundles[0].checks {
        if !names.contains(&c.name) {
            names.push(c.name.clone());
        }
    }
    for name in names {
        let mut rows = Vec::new();
        for (level, b) in bundles.iter().enumerate() {
            let min_margin = b
                .checks
                .iter()
                .filter(|c| c.name == name)
                .map(|c| c.min_margin)
                .fold(f64::INFINITY, f64::min);
            rows.push(ConvergenceRow {
                level: level as u32,
                counts: level_scns[level].manifold.counts.clone(),
                dt: bundles[level].run.dt_used,
                value: min_margin,
            });
        }
        let orders = margin_orders(&rows);
        convergence.push(ConvergenceTable { label: format!("min_margin:{name}"), rows, orders });
    }

    // benchmark error table
    let errors = benchmark_errors(scn, &finals)?;
    if let Some((label, values)) = errors {
        let rows: Vec<ConvergenceRow> = values
            .iter()
            .enumerate()
            .map(|(level, &value)| ConvergenceRow {
                level: level as u32,
                counts: level_scns[level].manifold.counts.clone(),
                dt: bundles[level].run.dt_used,
                value,
            })
            .collect();
        let orders = error_orders(&values);
        convergence.push(ConvergenceTable { label, rows, orders });
    }

    let mut bundle = bundles.swap_remove(0);
    bundle.convergence = convergence;
    Ok(bundle)
}

fn margin_orders(rows: &[ConvergenceRow]) -> Vec<Option<f64>> {
    rows.windows(2)
        .map(|p| {
            let (a, b) = (p[0].value, p[1].value);
            if a < 0.0 && b < 0.0 {
                Some((a.abs() / b.abs()).log2())
            } else {
                None
            }
        })
        .collect()
}

fn error_orders(values: &[f64]) -> Vec<Option<f64>> {
    values
        .windows(2)
        .map(|p| {
            if p[0].abs() < 1e-13 || p[1].abs() < 1e-13 {
                None
            } else {
                Some((p[0] / p[1]).log2())
            }
        })
        .collect()
}

type Benchmark = Option<(String, Vec<f64>)>;

/// Benchmark error per level: analytic reference expression, the Bochner
/// identity residual of log w, or coarse-vs-fine self-convergence. `finals`
/// are the last stored snapshots of each level.
fn benchmark_errors(scn: &Scenario, finals: &[ScalarField]) -> Result<Benchmark, HarnessError> {
    match scn.refine.reference.as_str() {
        "self" => {
            let mut errs = Vec::new();
            for pair in finals.windows(2) {
                let (coarse, fine) = (&pair[0], &pair[1]);
                let coarse_grid = coarse.grid();
                let mut sup = 0.0_f64;
                for idx in 0..coarse_grid.node_count() {
                    let p = coarse_grid.node_point(idx);
                    sup = sup.max((coarse.data()[idx] - fine.sample(&p)).abs());
                }
                errs.push(sup);
            }
            Ok(Some(("error:self_convergence".into(), errs)))
        }
        "bochner" => {
            let mut errs = Vec::new();
            for w in finals {
                let u = w.map(f64::ln);
                let f = FieldSpec::parse(&scn.weight)
                    .map_err(|e| HarnessError::Invalid(vec![e.to_string()]))?
                    .sample(w.grid(), w.time());
                let r = bochner_residual(&u, &f, BochnerVariant::Identity)
                    .map_err(crate::estimates::EstimateError::from)?;
                errs.push(r.sup_abs());
            }
            Ok(Some(("error:bochner_identity".into(), errs)))
        }
        expr => {
            let reference =
                FieldSpec::parse(expr).map_err(|e| HarnessError::Invalid(vec![e.to_string()]))?;
            let mut errs = Vec::new();
            for w in finals {
                let exact = reference.sample(w.grid(), w.time());
                let mut sup = 0.0_f64;
                for idx in 0..w.grid().node_count() {
                    sup = sup.max((w.data()[idx] - exact.data()[idx]).abs());
                }
                errs.push(sup);
            }
            Ok(Some(("error:reference_expression".into(), errs)))
        }
    }
}
