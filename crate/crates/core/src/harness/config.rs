//! INI-style scenario configuration.
//!
//! Sections: [manifold] [weight] [potential] [nonlinearity] [initial]
//! [solver] [checks.<name>] [tolerances] [refine]. Keys are lowercase snake
//! case; expressions are quoted strings; lists are comma-separated; the
//! snapshot list also accepts a start:step:end range. `#` and `;` start
//! comments. Parsing collects every error rather than stopping at the first.

use std::collections::BTreeMap;
use std::path::Path;

use super::scenario::{
    CheckBlock, InitialBlock, ManifoldBlock, NonlinearityBlock, RefineBlock, Scenario,
    SolverBlock, TolerancesBlock,
};
use super::HarnessError;

#[derive(Debug, Clone)]
struct RawEntry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
struct RawSection {
    name: String,
    line: usize,
    entries: Vec<RawEntry>,
}

fn split_sections(text: &str, errs: &mut Vec<String>) -> Vec<RawSection> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw_line).trim().to_string();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                errs.push(format!("line {line_no}: unterminated section header '{line}'"));
                continue;
            }
            let name = line[1..line.len() - 1].trim().to_string();
            if sections.iter().any(|s| s.name == name) {
                errs.push(format!("line {line_no}: duplicate section [{name}]"));
            }
            sections.push(RawSection { name, line: line_no, entries: vec![] });
            continue;
        }
        let Some(eq) = line.find('=') else {
            errs.push(format!("line {line_no}: expected 'key = value', got '{line}'"));
            continue;
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        match sections.last_mut() {
            Some(s) => s.entries.push(RawEntry { key, value, line: line_no }),
            None => errs.push(format!("line {line_no}: key before any [section]")),
        }
    }
    sections
}

fn strip_comment(line: &str) -> &str {
    // comments start at # or ; outside quotes
    let mut in_quote = false;
    for (idx, ch) in line.char_indices() {
        match ch {
            '"' => in_quote = !in_quote,
            '#' | ';' if !in_quote => return &line[..idx],
            _ => {}
        }
    }
    line
}

fn unquote(v: &str) -> String {
    let t = v.trim();
    if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') {
        t[1..t.len() - 1].to_string()
    } else {
        t.to_string()
    }
}

fn parse_f64(e: &RawEntry, errs: &mut Vec<String>) -> Option<f64> {
    match unquote(&e.value).parse::<f64>() {
        Ok(v) => Some(v),
        Err(_) => {
            errs.push(format!("line {}: '{}' is not a number for key '{}'", e.line, e.value, e.key));
            None
        }
    }
}

fn parse_usize(e: &RawEntry, errs: &mut Vec<String>) -> Option<usize> {
    match unquote(&e.value).parse::<usize>() {
        Ok(v) => Some(v),
        Err(_) => {
            errs.push(format!(
                "line {}: '{}' is not a nonnegative integer for key '{}'",
                e.line, e.value, e.key
            ));
            None
        }
    }
}

fn parse_u64(e: &RawEntry, errs: &mut Vec<String>) -> Option<u64> {
    match unquote(&e.value).parse::<u64>() {
        Ok(v) => Some(v),
        Err(_) => {
            errs.push(format!(
                "line {}: '{}' is not a nonnegative integer for key '{}'",
                e.line, e.value, e.key
            ));
            None
        }
    }
}

fn parse_f64_list(e: &RawEntry, errs: &mut Vec<String>) -> Vec<f64> {
    unquote(&e.value)
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .filter_map(|s| match s.trim().parse::<f64>() {
            Ok(v) => Some(v),
            Err(_) => {
                errs.push(format!("line {}: '{}' is not a number in list '{}'", e.line, s, e.key));
                None
            }
        })
        .collect()
}

fn parse_usize_list(e: &RawEntry, errs: &mut Vec<String>) -> Vec<usize> {
    unquote(&e.value)
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .filter_map(|s| match s.trim().parse::<usize>() {
            Ok(v) => Some(v),
            Err(_) => {
                errs.push(format!("line {}: '{}' is not an integer in list '{}'", e.line, s, e.key));
                None
            }
        })
        .collect()
}

/// Snapshot times: either a comma list or a `start:step:end` range
/// (end included within half-step tolerance).
fn parse_times(e: &RawEntry, errs: &mut Vec<String>) -> Vec<f64> {
    let v = unquote(&e.value);
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            errs.push(format!("line {}: range must be start:step:end, got '{}'", e.line, v));
            return vec![];
        }
        let nums: Vec<Option<f64>> = parts.iter().map(|p| p.trim().parse::<f64>().ok()).collect();
        if nums.iter().any(Option::is_none) {
            errs.push(format!("line {}: bad number in range '{}'", e.line, v));
            return vec![];
        }
        let (start, step, end) = (nums[0].unwrap(), nums[1].unwrap(), nums[2].unwrap());
        if !(step > 0.0) || end < start {
            errs.push(format!("line {}: range needs step > 0 and end >= start", e.line));
            return vec![];
        }
        let n = ((end - start) / step + 0.5).floor() as usize;
        return (0..=n).map(|k| start + k as f64 * step).collect();
    }
    parse_f64_list(e, errs)
}

/// Parse and fully validate a config file. On any error, returns the whole
/// list (`HarnessError::Invalid`), never just the first.
pub fn parse_config(path: &Path) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<Scenario, HarnessError> {
    let mut errs = Vec::new();
    let sections = split_sections(text, &mut errs);

    let mut manifold = None;
    let mut weight = "0".to_string();
    let mut potential = "0".to_string();
    let mut nonlinearity =
        NonlinearityBlock { case: "zero".into(), params: BTreeMap::new(), a_expr: None, table: None };
    let mut initial: Option<InitialBlock> = None;
    let mut solver: Option<SolverBlock> = None;
    let mut checks: Vec<CheckBlock> = Vec::new();
    let mut tolerances = TolerancesBlock::default();
    let mut refine = RefineBlock::default();

    for s in &sections {
        match s.name.as_str() {
            "manifold" => {
                let mut dim = None;
                let mut lengths = vec![];
                let mut counts = vec![];
                for e in &s.entries {
                    match e.key.as_str() {
                        "dim" => dim = parse_usize(e, &mut errs),
                        "lengths" => lengths = parse_f64_list(e, &mut errs),
                        "counts" => counts = parse_usize_list(e, &mut errs),
                        k => errs.push(format!("line {}: unknown key '{k}' in [manifold]", e.line)),
                    }
                }
                match dim {
                    Some(d) => manifold = Some(ManifoldBlock { dim: d, lengths, counts }),
                    None => errs.push(format!("line {}: [manifold] needs 'dim'", s.line)),
                }
            }
            "weight" => {
                for e in &s.entries {
                    match e.key.as_str() {
                        "f" => weight = unquote(&e.value),
                        k => errs.push(format!("line {}: unknown key '{k}' in [weight]", e.line)),
                    }
                }
            }
            "potential" => {
                for e in &s.entries {
                    match e.key.as_str() {
                        "q" => potential = unquote(&e.value),
                        k => errs.push(format!("line {}: unknown key '{k}' in [potential]", e.line)),
                    }
                }
            }
            "nonlinearity" => {
                for e in &s.entries {
                    match e.key.as_str() {
                        "case" => nonlinearity.case = unquote(&e.value),
                        "a_expr" => nonlinearity.a_expr = Some(unquote(&e.value)),
                        "table" => nonlinearity.table = Some(unquote(&e.value)),
                        _ => {
                            if let Some(v) = parse_f64(e, &mut errs) {
                                nonlinearity.params.insert(e.key.clone(), v);
                            }
                        }
                    }
                }
            }
            "initial" => {
                let mut w0 = None;
                let mut floor = 1e-8;
                for e in &s.entries {
                    match e.key.as_str() {
                        "w0" => w0 = Some(unquote(&e.value)),
                        "floor" => {
                            if let Some(v) = parse_f64(e, &mut errs) {
                                floor = v;
                            }
                        }
                        k => errs.push(format!("line {}: unknown key '{k}' in [initial]", e.line)),
                    }
                }
                match w0 {
                    Some(w0) => initial = Some(InitialBlock { w0, floor }),
                    None => errs.push(format!("line {}: [initial] needs 'w0'", s.line)),
                }
            }
            "solver" => {
                let mut t_end = None;
                let mut safety = 0.5;
                let mut dt = None;
                let mut snapshots = vec![];
                let mut t_min = None;
                let mut seed = 0u64;
                for e in &s.entries {
                    match e.key.as_str() {
                        "t_end" => t_end = parse_f64(e, &mut errs),
                        "safety" => {
                            if let Some(v) = parse_f64(e, &mut errs) {
                                safety = v;
                            }
                        }
                        "dt" => dt = parse_f64(e, &mut errs),
                        "snapshots" => snapshots = parse_times(e, &mut errs),
                        "t_min" => t_min = parse_f64(e, &mut errs),
                        "seed" => {
                            if let Some(v) = parse_u64(e, &mut errs) {
                                seed = v;
                            }
                        }
                        k => errs.push(format!("line {}: unknown key '{k}' in [solver]", e.line)),
                    }
                }
                match t_end {
                    Some(t_end) => {
                        solver = Some(SolverBlock {
                            t_end,
                            safety,
                            dt,
                            snapshots,
                            t_min: t_min.unwrap_or(0.05 * t_end),
                            seed,
                        })
                    }
                    None => errs.push(format!("line {}: [solver] needs 't_end'", s.line)),
                }
            }
            "tolerances" => {
                for e in &s.entries {
                    match e.key.as_str() {
                        "tau_abs" => {
                            if let Some(v) = parse_f64(e, &mut errs) {
                                tolerances.tau_abs = v;
                            }
                        }
                        "tau_disc" => {
                            if let Some(v) = parse_f64(e, &mut errs) {
                                tolerances.tau_disc = v;
                            }
                        }
                        k => errs.push(format!("line {}: unknown key '{k}' in [tolerances]", e.line)),
                    }
                }
            }
            "refine" => {
                for e in &s.entries {
                    match e.key.as_str() {
                        "mode" => refine.mode = unquote(&e.value),
                        "reference" => refine.reference = unquote(&e.value),
                        k => errs.push(format!("line {}: unknown key '{k}' in [refine]", e.line)),
                    }
                }
            }
            name if name.starts_with("checks.") => {
                let check_name = name.trim_start_matches("checks.").to_string();
                let mut block = CheckBlock {
                    name: check_name,
                    params: BTreeMap::new(),
                    center: None,
                    path_policy: None,
                };
                for e in &s.entries {
                    match e.key.as_str() {
                        "center" => block.center = Some(parse_f64_list(e, &mut errs)),
                        "path_policy" => block.path_policy = Some(unquote(&e.value)),
                        _ => {
                            if let Some(v) = parse_f64(e, &mut errs) {
                                block.params.insert(e.key.clone(), v);
                            }
                        }
                    }
                }
                checks.push(block);
            }
            other => errs.push(format!("line {}: unknown section [{other}]", s.line)),
        }
    }

    let manifold = match manifold {
        Some(m) => m,
        None => {
            errs.push("missing [manifold] section".into());
            ManifoldBlock { dim: 1, lengths: vec![1.0], counts: vec![8] }
        }
    };
    let initial = initial.unwrap_or_else(|| {
        errs.push("missing [initial] section with 'w0'".into());
        InitialBlock { w0: "1".into(), floor: 1e-8 }
    });
    let solver = solver.unwrap_or_else(|| {
        errs.push("missing [solver] section with 't_end'".into());
        SolverBlock { t_end: 1.0, safety: 0.5, dt: None, snapshots: vec![], t_min: 0.05, seed: 0 }
    });

    let scenario =
        Scenario { manifold, weight, potential, nonlinearity, initial, solver, checks, tolerances, refine };
    errs.extend(scenario.validate());
    if errs.is_empty() {
        Ok(scenario)
    } else {
        Err(HarnessError::Invalid(errs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
# minimal pure-heat scenario
[manifold]
dim = 1
lengths = 6.283185307179586
counts = 64

[initial]
w0 = "2 + sin(x)"

[solver]
t_end = 1.0
"#;

    #[test]
    fn minimal_pure_heat_parses() {
        let s = parse_config_str(MINIMAL).unwrap();
        assert_eq!(s.nonlinearity.case, "zero");
        assert_eq!(s.manifold.counts, vec![64]);
        assert_eq!(s.solver.t_min, 0.05);
        assert_eq!(s.snapshot_times().len(), 17);
    }

    #[test]
    fn alpha_one_is_rejected_with_message() {
        let text = format!("{MINIMAL}\n[checks.li_yau_global]\nalpha = 1.0\nm = 2\n");
        let err = parse_config_str(&text).unwrap_err();
        let HarnessError::Invalid(errs) = err else { panic!("expected Invalid") };
        assert!(errs.iter().any(|e| e.contains("alpha > 1 required")), "{errs:?}");
    }

    #[test]
    fn beta_delta_window_is_rejected_with_message() {
        let text = format!("{MINIMAL}\n[checks.hessian_global]\nbeta = 0.5\ndelta = 0.5\n");
        let err = parse_config_str(&text).unwrap_err();
        let HarnessError::Invalid(errs) = err else { panic!("expected Invalid") };
        assert!(
            errs.iter().any(|e| e.contains("beta >= sqrt(delta/(1-delta)) = 1")),
            "{errs:?}"
        );
    }

    #[test]
    fn unknown_keys_and_sections_carry_line_numbers() {
        let text = format!("{MINIMAL}\n[bogus]\nx = 1\n");
        let err = parse_config_str(&text).unwrap_err();
        let HarnessError::Invalid(errs) = err else { panic!("expected Invalid") };
        assert!(errs.iter().any(|e| e.contains("unknown section [bogus]")), "{errs:?}");

        let text = MINIMAL.replace("w0 = ", "w0_typo = ");
        let err = parse_config_str(&text).unwrap_err();
        let HarnessError::Invalid(errs) = err else { panic!("expected Invalid") };
        assert!(errs.iter().any(|e| e.contains("unknown key 'w0_typo'")), "{errs:?}");
    }

    #[test]
    fn range_snapshot_syntax() {
        let text = MINIMAL.replace("t_end = 1.0", "t_end = 1.0\nsnapshots = 0.25:0.25:1.0");
        let s = parse_config_str(&text).unwrap();
        assert_eq!(s.solver.snapshots, vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn all_errors_reported_together() {
        let text = r#"
[manifold]
dim = 3
lengths = 1.0
counts = 4

[initial]
w0 = "sin(x"

[solver]
t_end = -1.0
safety = 7
"#;
        let err = parse_config_str(text).unwrap_err();
        let HarnessError::Invalid(errs) = err else { panic!("expected Invalid") };
        assert!(errs.len() >= 4, "{errs:?}");
    }
}
