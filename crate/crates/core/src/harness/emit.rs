//! Report emission: full JSON bundle, per-(check, snapshot) CSV, and
//! per-check plot data columns.

use std::fmt::Write as _;
use std::path::Path;

use super::runner::ReportBundle;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Json,
    Csv,
    PlotData,
}

impl std::str::FromStr for EmitFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(EmitFormat::Json),
            "csv" => Ok(EmitFormat::Csv),
            "plotdata" => Ok(EmitFormat::PlotData),
            other => Err(format!("unknown format '{other}' (json|csv|plotdata)")),
        }
    }
}

fn verdict_str(v: crate::estimates::Verdict) -> &'static str {
    match v {
        crate::estimates::Verdict::Pass => "pass",
        crate::estimates::Verdict::PassWithFlags => "pass-with-flags",
        crate::estimates::Verdict::Fail => "fail",
    }
}

pub fn bundle_json(bundle: &ReportBundle) -> Result<String, HarnessError> {
    Ok(serde_json::to_string_pretty(bundle)?)
}

pub fn bundle_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from(
        "check,t,min_margin,tolerance,verdict,flags_raised,lhs_min,lhs_max,rhs_min,rhs_max\n",
    );
    for c in &bundle.checks {
        let raised = c.flags.iter().filter(|f| f.raised).count();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.name,
            c.argmin.time,
            c.min_margin,
            c.tolerance,
            verdict_str(c.verdict),
            raised,
            c.lhs_min,
            c.lhs_max,
            c.rhs_min,
            c.rhs_max
        );
    }
    out
}

/// One plot file per check name: columns t, min margin, LHS sup, RHS inf.
pub fn bundle_plotdata(bundle: &ReportBundle) -> Vec<(String, String)> {
    let mut names: Vec<&str> = Vec::new();
    for c in &bundle.checks {
        if !names.contains(&c.name.as_str()) {
            names.push(&c.name);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let mut body = String::from("# t\tmin_margin\tlhs_sup\trhs_inf\n");
            for c in bundle.checks.iter().filter(|c| c.name == name) {
                let _ = writeln!(
                    body,
                    "{}\t{}\t{}\t{}",
                    c.argmin.time, c.min_margin, c.lhs_max, c.rhs_min
                );
            }
            (format!("{name}.dat"), body)
        })
        .collect()
}

/// Write the bundle under `dir` in the requested format. JSON goes to
/// `report.json`, CSV to `report.csv`, plot data to one `<check>.dat` per
/// check.
pub fn emit(bundle: &ReportBundle, format: EmitFormat, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    match format {
        EmitFormat::Json => std::fs::write(dir.join("report.json"), bundle_json(bundle)?)?,
        EmitFormat::Csv => std::fs::write(dir.join("report.csv"), bundle_csv(bundle))?,
        EmitFormat::PlotData => {
            for (name, body) in bundle_plotdata(bundle) {
                std::fs::write(dir.join(name), body)?;
            }
        }
    }
    Ok(())
}
