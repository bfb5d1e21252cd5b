//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Expected values marked as derived below were computed from independent
//! closed forms (heat-kernel identities, the logistic solution, Fourier mode
//! decay) and frozen here; the tests check the implementation against them
//! at the stated tolerances.

use std::time::Instant;

use wparab::estimates::{
    self, cd_condition, harnack_bound, EstimateContext, HarnackParams, HessianParams,
    LocalCylinder, SpaceTimePoint, Tolerances, Verdict,
};
use wparab::geometry::{
    bakry_emery, bochner_residual, BakryEmeryVariant, BochnerVariant, Grid, ScalarField,
};
use wparab::harness::{parse_config_str, run_scenario, run_scenario_traj, Scenario};
use wparab::model::{FieldSpec, Nonlinearity};
use wparab::solver::{evolve, Problem, SolverState, Trajectory};

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn report(criterion: &str, pass: bool) {
    println!("criterion {criterion}: {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed");
}

fn pure_heat_trajectory(
    n: usize,
    w0: impl Fn(f64) -> f64,
    times: &[f64],
    safety: f64,
) -> Trajectory {
    let grid = Grid::torus(1, &[TAU], &[n]).unwrap();
    let prob = Problem::pure_heat();
    let w = ScalarField::from_fn(&grid, 0.0, |x, _| w0(x));
    let dt = prob.stable_dt(&w, safety);
    evolve(SolverState::new(w), times, &prob, dt).unwrap()
}

// ─── 1. discrete Bochner identity ───────────────────────────────────────

#[test]
fn criterion_1_bochner_identity() {
    let start = Instant::now();
    let mut sups = Vec::new();
    for level in 0..3 {
        let n = 256 << level;
        let grid = Grid::torus(1, &[TAU], &[n]).unwrap();
        let u = ScalarField::from_fn(&grid, 0.0, |x, _| x.sin());
        let f = ScalarField::from_fn(&grid, 0.0, |x, _| x.cos());
        let r = bochner_residual(&u, &f, BochnerVariant::Identity).unwrap();
        sups.push(r.sup_abs());
    }
    let orders: Vec<f64> = sups.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "  sup residual (n=256) = {:.3e}, orders = {:?}, elapsed = {elapsed:.3}s",
        sups[0], orders
    );
    let pass = sups[0] <= 5e-4
        && orders.iter().all(|o| (1.8..=2.2).contains(o))
        && elapsed < 1.0;
    report("1 (bochner identity)", pass);
}

// ─── 2. Li-Yau near-sharpness on the heat kernel ────────────────────────

/// Wrapped Gaussian density of width σ₀ = 0.05 centered at π, with a tiny
/// pedestal keeping the far field positive in double precision.
const GAUSSIAN_W0: &str =
    "1e-12 + 7.978845608028654*exp(-((x-3.141592653589793)^2)/0.005)";

#[test]
fn criterion_2_li_yau_near_sharpness() {
    let start = Instant::now();
    let config = format!(
        r#"
[manifold]
dim = 1
lengths = 6.283185307179586
counts = 512

[initial]
w0 = "{GAUSSIAN_W0}"
floor = 1e-13

[solver]
t_end = 0.1
safety = 0.5
snapshots = 0.1
t_min = 0.05
"#
    );
    let scn = parse_config_str(&config).unwrap();
    let (_, traj) = run_scenario_traj(&scn).unwrap();
    let window = traj.window(0.05);
    let prob = scn.build_problem().unwrap();
    let ctx = EstimateContext::build(
        &prob.weight,
        &prob.potential,
        &prob.nonlinearity,
        window,
        Tolerances::default(),
    )
    .unwrap();
    // m = 1 is admissible here (constant weight); K = 0 on the flat torus
    let rep = estimates::li_yau_compact(&ctx, &window[0], 1.0, 0.0).unwrap();
    let sup_lhs = rep.lhs_max;
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "  sup LHS = {sup_lhs:.6} (m/t = 10), margin = {:.3e}, tol = {:.3e}, elapsed = {elapsed:.2}s",
        rep.min_margin, rep.tolerance
    );
    let pass = (sup_lhs - 10.0).abs() / 10.0 <= 0.05
        && sup_lhs <= 10.0 + rep.tolerance
        && rep.verdict == Verdict::Pass
        && elapsed < 10.0;
    report("2 (li-yau near-sharpness)", pass);
}

// ─── 3. solver oracles ──────────────────────────────────────────────────

#[test]
fn criterion_3_solver_oracles() {
    // logistic: uniform w₀ = 0.5 under G = w(1−w) gives w(t) = 1/(1+e^t)
    let logistic_exact = 1.0 / (1.0 + std::f64::consts::E);
    let grid8 = Grid::torus(1, &[TAU], &[8]).unwrap();
    let prob_fk = Problem {
        weight: FieldSpec::zero(),
        potential: FieldSpec::zero(),
        nonlinearity: Nonlinearity::FisherKpp { c: 1.0 },
    };
    let logistic_err = |dt: f64| {
        let w0 = ScalarField::constant(&grid8, 0.0, 0.5);
        let traj = evolve(SolverState::new(w0), &[1.0], &prob_fk, dt).unwrap();
        (traj.snapshots[0].w.data()[0] - logistic_exact).abs()
    };
    let e_small = logistic_err(1e-3);
    let (e1, e2, e3) = (logistic_err(0.1), logistic_err(0.05), logistic_err(0.025));
    let dt_ratios = [e1 / e2, e2 / e3];

    // fourier decay: w₀ = 2 + sin x → w = 2 + e^{−t} sin x
    let fourier_err = |n: usize, t_end: f64| {
        let traj = {
            let grid = Grid::torus(1, &[TAU], &[n]).unwrap();
            let prob = Problem::pure_heat();
            let w0 = ScalarField::from_fn(&grid, 0.0, |x, _| 2.0 + x.sin());
            evolve(SolverState::new(w0), &[t_end], &prob, 5e-5).unwrap()
        };
        let w = &traj.snapshots[0].w;
        let grid = w.grid();
        let mut sup = 0.0_f64;
        for idx in 0..grid.node_count() {
            let x = grid.node_point(idx)[0];
            sup = sup.max((w.data()[idx] - (2.0 + (-t_end).exp() * x.sin())).abs());
        }
        sup
    };
    let quarter = Grid::torus(1, &[TAU], &[256]).unwrap();
    let rel_fourier = {
        let traj = {
            let prob = Problem::pure_heat();
            let w0 = ScalarField::from_fn(&quarter, 0.0, |x, _| 2.0 + x.sin());
            evolve(SolverState::new(w0), &[1.0], &prob, 5e-5).unwrap()
        };
        let got = traj.snapshots[0].w.data()[64]; // x = π/2
        let exact = 2.0 + (-1.0_f64).exp();
        (got - exact).abs() / exact
    };
    let (f64_, f128, f256) = (fourier_err(64, 0.5), fourier_err(128, 0.5), fourier_err(256, 0.5));
    let h_ratios = [f64_ / f128, f128 / f256];

    println!(
        "  logistic err(dt=1e-3) = {e_small:.2e}; dt ratios = {dt_ratios:?}; fourier rel err = {rel_fourier:.3e}; h ratios = {h_ratios:?}"
    );
    let pass = e_small <= 1e-6
        && rel_fourier <= 1e-5
        && dt_ratios.iter().all(|r| (12.0..=20.0).contains(r))
        && h_ratios.iter().all(|r| (3.5..=4.5).contains(r));
    report("3 (solver oracles)", pass);
}

// ─── 4. Hamilton estimate on the Fisher-KPP benchmark ───────────────────

fn fisher_scenario(n: usize) -> Scenario {
    parse_config_str(&format!(
        r#"
[manifold]
dim = 1
lengths = 6.283185307179586
counts = {n}

[weight]
f = "0.3*cos(x)"

[nonlinearity]
case = fisher_kpp
c = 1.0

[initial]
w0 = "0.5 + 0.2*sin(x)"

[solver]
t_end = 1.0
safety = 0.5
snapshots = 0.25:0.046875:1.0
t_min = 0.25
seed = 11

[checks.hamilton_bound]
"#
    ))
    .unwrap()
}

#[test]
fn criterion_4_hamilton_estimate() {
    let start = Instant::now();
    let coarse = run_scenario(&fisher_scenario(128)).unwrap();
    let worst = |b: &wparab::harness::ReportBundle| {
        b.checks
            .iter()
            .map(|c| (c.min_margin, c.tolerance))
            .fold((f64::INFINITY, 0.0_f64), |acc, v| if v.0 < acc.0 { v } else { acc })
    };
    let (margin_c, tol_c) = worst(&coarse);
    let mut pass = margin_c >= -tol_c;
    let mut shrink_note = String::from("no negative margins");
    if margin_c < 0.0 {
        let fine = run_scenario(&fisher_scenario(256)).unwrap();
        let (margin_f, _) = worst(&fine);
        shrink_note = format!("coarse {margin_c:.3e} -> fine {margin_f:.3e}");
        pass &= margin_f >= margin_c / 2.0;
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("  min margin = {margin_c:.4e} (tol {tol_c:.2e}); {shrink_note}; elapsed = {elapsed:.2}s");
    pass &= elapsed < 30.0;
    report("4 (hamilton estimate)", pass);
}

// ─── 5. Liouville flattening ────────────────────────────────────────────

#[test]
fn criterion_5_liouville() {
    let config = r#"
[manifold]
dim = 1
lengths = 6.283185307179586
counts = 64

[weight]
f = "0.7"

[initial]
w0 = "2 + sin(x)"

[solver]
t_end = 20.0
safety = 0.5
snapshots = 2:2:20
t_min = 2.0

[checks.liouville_assess]
threshold = 1e-8
"#;
    let bundle = run_scenario(&parse_config_str(config).unwrap()).unwrap();
    let rep = &bundle.checks[0];
    let grad = rep.intermediates["final_grad_measure"];
    let osc = rep.intermediates["final_oscillation"];
    println!(
        "  sup|∇w|²/w = {grad:.3e}, oscillation = {osc:.3e}, verdict = {:?}",
        rep.verdict
    );
    let pass = grad <= 1e-8
        && osc <= 1e-8
        && rep.verdict == Verdict::Pass
        && rep.min_margin >= -rep.tolerance;
    report("5 (liouville)", pass);
}

// ─── 6. Harnack bound ───────────────────────────────────────────────────

#[test]
fn criterion_6_harnack() {
    // hand case: constant solution, m = 2, α = 2, ε = ½, (t1,t2) = (0.1, 0.2):
    // Λ/α = 4, prefactor 2⁴, bound = 16·e^{0.4} ≈ 23.869
    let grid = Grid::torus(1, &[TAU], &[64]).unwrap();
    let prob = Problem::pure_heat();
    let w0 = ScalarField::constant(&grid, 0.0, 3.0);
    let times: Vec<f64> = (0..=16).map(|k| 0.1 + 0.1 * k as f64 / 16.0).collect();
    let dt = prob.stable_dt(&w0, 0.5);
    let traj = evolve(SolverState::new(w0), &times, &prob, dt).unwrap();
    let ctx = EstimateContext::build(
        &prob.weight,
        &prob.potential,
        &prob.nonlinearity,
        &traj.snapshots,
        Tolerances::default(),
    )
    .unwrap();
    let params = HarnackParams::new(2.0, 2.0, 0.5);
    let x = grid.node_point(5);
    let rep = harnack_bound(
        &ctx,
        &SpaceTimePoint { x: x.clone(), t: 0.1 },
        &SpaceTimePoint { x, t: 0.2 },
        &params,
    )
    .unwrap();
    let hand = 16.0 * (0.4_f64).exp();
    let rhs = rep.rhs_max;
    let hand_ok = (rhs - hand).abs() <= 1e-9 && rep.lhs_max == 1.0;
    println!("  constant-solution bound = {rhs:.9} (expected {hand:.9})");

    // 20 random pairs on the pure-heat Gaussian run, t ∈ [0.25, 1]
    let config = format!(
        r#"
[manifold]
dim = 1
lengths = 6.283185307179586
counts = 512

[initial]
w0 = "{GAUSSIAN_W0}"
floor = 1e-13

[solver]
t_end = 1.0
safety = 0.5
snapshots = 0.25:0.015625:1.0
t_min = 0.25
seed = 23

[checks.harnack_bound]
m = 2
alpha = 2
epsilon = 0.5
pairs = 20
"#
    );
    let bundle = run_scenario(&parse_config_str(&config).unwrap()).unwrap();
    let rep = &bundle.checks[0];
    println!(
        "  20 random pairs: min margin = {:.4e}, tol = {:.2e}, verdict = {:?}",
        rep.min_margin, rep.tolerance, rep.verdict
    );
    let pairs_ok = rep.min_margin >= -rep.tolerance && rep.verdict != Verdict::Fail;
    report("6 (harnack)", hand_ok && pairs_ok);
}

// ─── 7. Hessian estimates on the Allen-Cahn benchmark ───────────────────

fn allen_cahn_scenario(n: usize) -> Scenario {
    parse_config_str(&format!(
        r#"
[manifold]
dim = 1
lengths = 6.283185307179586
counts = {n}

[weight]
f = "0.2*cos(x)"

[nonlinearity]
case = allen_cahn
c = 1.0

[initial]
w0 = "0.5 + 0.2*sin(x)"

[solver]
t_end = 1.0
safety = 0.5
snapshots = 0.25:0.046875:1.0
t_min = 0.25
seed = 5

[checks.hessian_global]
beta = 1.0
delta = 0.5
c = 1.0
"#
    ))
    .unwrap()
}

#[test]
fn criterion_7_hessian_estimates() {
    let coarse = run_scenario(&allen_cahn_scenario(128)).unwrap();
    let fine = run_scenario(&allen_cahn_scenario(256)).unwrap();
    let stats = |b: &wparab::harness::ReportBundle| {
        let mm = b.checks.iter().map(|c| c.min_margin).fold(f64::INFINITY, f64::min);
        let tol = b.checks.iter().map(|c| c.tolerance).fold(0.0_f64, f64::max);
        let req = b
            .checks
            .iter()
            .map(|c| c.intermediates["required_c"])
            .fold(0.0_f64, f64::max);
        (mm, tol, req)
    };
    let (mm_c, tol_c, req_c) = stats(&coarse);
    let (_, _, req_f) = stats(&fine);
    let ratio = (req_c + 1e-12) / (req_f + 1e-12);
    let ratio = ratio.max(1.0 / ratio);
    println!(
        "  min margin = {mm_c:.4e} (tol {tol_c:.2e}); required_C coarse = {req_c:.4e}, fine = {req_f:.4e}, ratio = {ratio:.3}"
    );
    let pass = mm_c >= -tol_c && ratio <= 1.2;
    report("7 (hessian estimates)", pass);
}

// ─── 8. reversed Harnack window ─────────────────────────────────────────

#[test]
fn criterion_8_reversed_harnack() {
    let mut scn = fisher_scenario(128);
    scn.checks.clear();
    let mut params = std::collections::BTreeMap::new();
    params.insert("m".to_string(), 2.0);
    params.insert("alpha".to_string(), 2.0);
    params.insert("epsilon".to_string(), 0.5);
    params.insert("beta".to_string(), 0.1);
    params.insert("delta".to_string(), 0.01);
    params.insert("pairs".to_string(), 10.0);
    scn.checks.push(wparab::harness::CheckBlock {
        name: "reversed_harnack".into(),
        params,
        center: None,
        path_policy: None,
    });
    let bundle = run_scenario(&scn).unwrap();
    let rep = &bundle.checks[0];
    println!(
        "  10 pairs: min margin = {:.4e}, tol = {:.2e}, verdict = {:?}, N1 = {:.3e}, N2 = {:.3e}",
        rep.min_margin,
        rep.tolerance,
        rep.verdict,
        rep.intermediates["n1"],
        rep.intermediates["n2"]
    );
    // the parameter point sits just below the generic β floor: satisfied
    // margins with the floor flag raised is the expected outcome
    let pass = rep.min_margin >= -rep.tolerance && rep.verdict != Verdict::Fail;
    report("8 (reversed harnack)", pass);
}

// ─── 9. CD(K,m) field check ─────────────────────────────────────────────

#[test]
fn criterion_9_cd_condition() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut pass = true;
    for case in 0..5 {
        let (a1, a2, b1, b2): (f64, f64, f64, f64) = (
            rng.gen_range(0.2..1.0),
            rng.gen_range(0.1..0.5),
            rng.gen_range(0.1..0.4),
            rng.gen_range(0.1..0.3),
        );
        let mins: Vec<f64> = [256usize, 512]
            .iter()
            .map(|&n| {
                let grid = Grid::torus(1, &[TAU], &[n]).unwrap();
                let u = ScalarField::from_fn(&grid, 0.0, |x, _| {
                    a1 * x.sin() + a2 * (2.0 * x).cos()
                });
                let f = ScalarField::from_fn(&grid, 0.0, |x, _| {
                    b1 * x.cos() + b2 * (3.0 * x).sin()
                });
                let m = 3.0;
                let k = -bakry_emery(&f, BakryEmeryVariant::Finite { m }).unwrap().k;
                let rep = cd_condition(&u, &f, m, k, &Tolerances::default()).unwrap();
                assert_eq!(rep.verdict, Verdict::Pass, "case {case} n {n}");
                rep.min_margin
            })
            .collect();
        let h = TAU / 256.0;
        let coarse_ok = mins[0] >= -20.0 * h * h;
        // negative minima must shrink at least 2× under refinement
        let shrink_ok = mins[0] >= 0.0 || mins[1] >= mins[0] / 2.0;
        println!("  case {case}: min residual {:.3e} -> {:.3e}", mins[0], mins[1]);
        pass &= coarse_ok && shrink_ok;
    }

    // the 1-d equality configuration (m = 1, f = 0) sits at the continuum
    // equality case, so its discrete minimum is genuinely negative O(h²)
    // and must shrink under refinement
    let eq_mins: Vec<f64> = [256usize, 512]
        .iter()
        .map(|&n| {
            let grid = Grid::torus(1, &[TAU], &[n]).unwrap();
            let u = ScalarField::from_fn(&grid, 0.0, |x, _| x.sin() + 0.3 * (2.0 * x).cos());
            let f = ScalarField::constant(&grid, 0.0, 0.0);
            cd_condition(&u, &f, 1.0, 0.0, &Tolerances::default()).unwrap().min_margin
        })
        .collect();
    println!("  equality case: min residual {:.3e} -> {:.3e}", eq_mins[0], eq_mins[1]);
    let h = TAU / 256.0;
    pass &= eq_mins[0] < 0.0 && eq_mins[0] >= -20.0 * h * h && eq_mins[1] >= eq_mins[0] / 2.0;
    report("9 (cd condition)", pass);
}

// ─── 10. invariant suites ───────────────────────────────────────────────

fn constant_context_checks() -> bool {
    let grid = Grid::torus(1, &[TAU], &[64]).unwrap();
    let prob = Problem {
        weight: FieldSpec::parse("0.1").unwrap(),
        potential: FieldSpec::zero(),
        nonlinearity: Nonlinearity::Zero,
    };
    let w0 = ScalarField::constant(&grid, 0.0, 0.7);
    let times: Vec<f64> = (0..=16).map(|k| 0.1 + 0.1 * k as f64 / 16.0).collect();
    let dt = prob.stable_dt(&w0, 0.5);
    let traj = evolve(SolverState::new(w0), &times, &prob, dt).unwrap();
    let ctx = EstimateContext::build(
        &prob.weight,
        &prob.potential,
        &prob.nonlinearity,
        &traj.snapshots,
        Tolerances::default(),
    )
    .unwrap();
    let snap = &ctx.snapshots[8];
    let hp = HessianParams { beta: 1.0, delta: 0.5, c: 1.0 };
    let hp_rev = HessianParams { beta: 0.105, delta: 0.01, c: 1.0 };
    let center = vec![0.0];
    let mid = grid.node_point(10);

    let mut all = true;
    let mut check = |name: &str, rep: wparab::estimates::CheckReport, lhs_expected: f64| {
        let zero_lhs = (rep.lhs_max - lhs_expected).abs() < 1e-12;
        let margin_is_rhs = (rep.min_margin - (rep.rhs_min - lhs_expected)).abs()
            <= 1e-12 * (1.0 + rep.rhs_min.abs());
        let ok = rep.verdict == Verdict::Pass && zero_lhs && margin_is_rhs;
        if !ok {
            println!(
                "  constant pass-through violated by {name}: verdict {:?}, lhs_max {}, margin {} vs rhs {}",
                rep.verdict, rep.lhs_max, rep.min_margin, rep.rhs_min
            );
        }
        all &= ok;
    };

    check("li_yau_compact", estimates::li_yau_compact(&ctx, snap, 2.0, 0.0).unwrap(), 0.0);
    check("li_yau_global", estimates::li_yau_global(&ctx, snap, 2.0, 2.0, 0.5).unwrap(), 0.0);
    check(
        "li_yau_local",
        estimates::li_yau_local(&ctx, snap, 2.0, 2.0, 0.5, &center, 0.7).unwrap(),
        0.0,
    );
    check(
        "harnack_bound",
        harnack_bound(
            &ctx,
            &SpaceTimePoint { x: mid.clone(), t: 0.1 },
            &SpaceTimePoint { x: mid.clone(), t: 0.2 },
            &HarnackParams::new(2.0, 2.0, 0.5),
        )
        .unwrap(),
        1.0,
    );
    check("hamilton_bound", estimates::hamilton_bound(&ctx, snap, None).unwrap(), 0.0);
    check("liouville_assess", estimates::liouville_assess(&ctx, 1e-8).unwrap(), 0.0);
    check("hessian_global", estimates::hessian_global(&ctx, snap, &hp).unwrap(), 0.0);
    check(
        "hessian_local",
        estimates::hessian_local(
            &ctx,
            snap,
            &hp,
            &LocalCylinder { center: center.clone(), radius: 1.2 },
        )
        .unwrap(),
        0.0,
    );
    check("ly_hessian", estimates::ly_hessian(&ctx, snap, 2.0, 2.0, 0.5, &hp).unwrap(), 0.0);
    check(
        "reversed_harnack",
        estimates::reversed_harnack(&ctx, &mid, 0.1, 0.2, 2.0, 2.0, 0.5, &hp_rev).unwrap(),
        0.0,
    );
    check(
        "hamilton_hessian",
        estimates::hamilton_hessian(&ctx, snap, &hp, None).unwrap(),
        0.0,
    );
    let u = snap.w.map(f64::ln);
    let f = prob.weight.sample(&grid, snap.t());
    check("cd_condition", cd_condition(&u, &f, 2.0, 0.0, &Tolerances::default()).unwrap(), 0.0);
    all
}

fn scaling_invariance() -> bool {
    // replacing w by c·w with q = 0, G = 0 leaves every u = log w gradient
    // LHS unchanged up to roundoff
    let run = |scale: f64| {
        let traj = pure_heat_trajectory(128, move |x| scale * (2.0 + x.sin()), &[0.5], 0.5);
        let prob = Problem::pure_heat();
        let snaps = traj.snapshots;
        let ctx = EstimateContext::build(
            &prob.weight,
            &prob.potential,
            &prob.nonlinearity,
            &snaps,
            Tolerances::default(),
        )
        .unwrap();
        let compact = estimates::li_yau_compact(&ctx, &ctx.snapshots[0], 1.0, 0.0).unwrap();
        let global = estimates::li_yau_global(&ctx, &ctx.snapshots[0], 2.0, 2.0, 0.5).unwrap();
        (compact.lhs_min, compact.lhs_max, global.lhs_min, global.lhs_max)
    };
    let a = run(1.0);
    let b = run(7.5);
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-11 * (1.0 + x.abs());
    let ok = close(a.0, b.0) && close(a.1, b.1) && close(a.2, b.2) && close(a.3, b.3);
    if !ok {
        println!("  scaling invariance violated: {a:?} vs {b:?}");
    }
    ok
}

fn monotone_sweeps() -> bool {
    use rand::{Rng, SeedableRng};
    use wparab::estimates::{hamilton_xi, hessian_constants, reversed_constants, LambdaTerms};
    use wparab::model::BoundSet;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
    let mut ok = true;
    for _ in 0..200 {
        let mut b = BoundSet::zero();
        b.theta1 = rng.gen_range(0.0..1.0);
        b.theta2 = rng.gen_range(0.0..1.0);
        b.theta3 = rng.gen_range(0.0..1.0);
        b.theta4 = rng.gen_range(0.0..1.0);
        b.k1 = rng.gen_range(0.0..1.0);
        b.k2 = rng.gen_range(0.0..1.0);
        b.k3 = rng.gen_range(0.0..1.0);
        b.k4 = rng.gen_range(0.0..1.0);
        b.k5 = rng.gen_range(0.0..1.0);
        b.k6 = rng.gen_range(0.0..1.0);
        b.k7 = rng.gen_range(0.0..1.0);
        b.k8 = rng.gen_range(0.0..1.0);
        let k: f64 = rng.gen_range(0.0..1.0);
        let arg: f64 = rng.gen_range(0.0..2.0);
        let hp = HessianParams { beta: 0.1, delta: 0.01, c: 1.0 };
        let (m, alpha, eps) = (3.0, 2.0, 0.5);
        let t_len = 1.0;

        let lam = estimates::lambda_alpha_eps(
            m,
            alpha,
            eps,
            k,
            &LambdaTerms { sup_sqrt_arg: arg, clamped: false },
        )
        .unwrap();
        let xi = hamilton_xi(k, b.theta1, b.theta2, b.theta3);
        let consts = hessian_constants(&b, &hp, t_len, None);
        let (n1, n2) = reversed_constants(&b, lam, m, alpha, eps, &consts, &hp);
        let a_const = ((m - 1.0) * 2.7 * (1.0 + 0.5 * k.sqrt()) + 12.0 + 2.0 * 2.7 * 2.7) / 0.25;

        // bump one input upward; every derived constant must not decrease
        let mut b2 = b.clone();
        let bump = rng.gen_range(0.0..0.5);
        let which = rng.gen_range(0..13);
        let mut k2 = k;
        let mut arg2 = arg;
        match which {
            0 => b2.theta1 += bump,
            1 => b2.theta2 += bump,
            2 => b2.theta3 += bump,
            3 => b2.theta4 += bump,
            4 => b2.k1 += bump,
            5 => b2.k2 += bump,
            6 => b2.k3 += bump,
            7 => b2.k4 += bump,
            8 => b2.k5 += bump,
            9 => b2.k6 += bump,
            10 => b2.k7 += bump,
            11 => b2.k8 += bump,
            _ => {
                k2 += bump;
                arg2 += bump;
            }
        }
        let lam2 = estimates::lambda_alpha_eps(
            m,
            alpha,
            eps,
            k2,
            &LambdaTerms { sup_sqrt_arg: arg2, clamped: false },
        )
        .unwrap();
        let xi2 = hamilton_xi(k2, b2.theta1, b2.theta2, b2.theta3);
        let consts2 = hessian_constants(&b2, &hp, t_len, None);
        let (n1b, n2b) = reversed_constants(&b2, lam2, m, alpha, eps, &consts2, &hp);
        let a_const2 =
            ((m - 1.0) * 2.7 * (1.0 + 0.5 * k2.sqrt()) + 12.0 + 2.0 * 2.7 * 2.7) / 0.25;

        ok &= lam2 >= lam - 1e-12;
        ok &= xi2 >= xi - 1e-12;
        ok &= consts2.omega >= consts.omega - 1e-12;
        ok &= consts2.lambda_hess >= consts.lambda_hess - 1e-12;
        ok &= consts2.a_script >= consts.a_script - 1e-12;
        ok &= consts2.b_script >= consts.b_script - 1e-12;
        ok &= n1b >= n1 - 1e-9;
        ok &= n2b >= n2 - 1e-12;
        ok &= a_const2 >= a_const - 1e-12;
    }
    if !ok {
        println!("  monotonicity sweep found a decrease");
    }
    ok
}

fn determinism() -> bool {
    let scn = fisher_scenario(64);
    let a = run_scenario(&scn).unwrap();
    let b = run_scenario(&scn).unwrap();
    let ja = serde_json::to_string(&a.determinism_view()).unwrap();
    let jb = serde_json::to_string(&b.determinism_view()).unwrap();
    if ja != jb {
        println!("  determinism violated: reports differ outside the timing block");
    }
    ja == jb
}

#[test]
fn criterion_10_invariant_suites() {
    let constant_ok = constant_context_checks();
    let scaling_ok = scaling_invariance();
    let monotone_ok = monotone_sweeps();
    let determinism_ok = determinism();
    println!(
        "  constant pass-through: {constant_ok}; scaling invariance: {scaling_ok}; monotone sweeps: {monotone_ok}; determinism: {determinism_ok}"
    );
    report(
        "10 (invariant suites)",
        constant_ok && scaling_ok && monotone_ok && determinism_ok,
    );
}
