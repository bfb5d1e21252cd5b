//! Command-line front end: run scenarios, refinement studies, validation,
//! and the nonlinearity catalog listing.
//!
//! Exit codes: 0 when every check passes (possibly with flags, summarized
//! on stderr), 1 when any check fails, 2 on configuration or runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wparab::estimates::Verdict;
use wparab::harness::{
    self, emit, parse_config, refinement_study, run_scenario, EmitFormat, ReportBundle,
};
use wparab::model;

#[derive(Parser)]
#[command(name = "wparab", version, about = "Nonlinear weighted parabolic equations on flat tori: solve and verify gradient/Hessian estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and emit its report bundle.
    Run {
        config: PathBuf,
        /// Output directory for the emitted report.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Report format: json, csv, or plotdata.
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Re-run a scenario at successively refined resolution.
    Refine {
        config: PathBuf,
        /// Number of refinement levels (>= 2).
        #[arg(long)]
        levels: u32,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Parse and validate a configuration, printing every violation.
    Validate { config: PathBuf },
    /// Print the nonlinearity catalog with parameter constraints.
    ListCases,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, harness::HarnessError> {
    match cli.command {
        Command::Run { config, out, format } => {
            let format: EmitFormat = format
                .parse()
                .map_err(|e: String| harness::HarnessError::Invalid(vec![e]))?;
            let scenario = parse_config(&config)?;
            let bundle = run_scenario(&scenario)?;
            emit(&bundle, format, &out)?;
            print_summary(&bundle);
            Ok(exit_for(&bundle))
        }
        Command::Refine { config, levels, out } => {
            let scenario = parse_config(&config)?;
            let bundle = refinement_study(&scenario, levels)?;
            emit(&bundle, EmitFormat::Json, &out)?;
            print_summary(&bundle);
            for table in &bundle.convergence {
                println!("{}", table.label);
                for (i, row) in table.rows.iter().enumerate() {
                    let order = if i == 0 {
                        "      ".to_string()
                    } else {
                        match table.orders.get(i - 1) {
                            Some(Some(o)) => format!("{o:6.3}"),
                            _ => "   n/a".to_string(),
                        }
                    };
                    println!(
                        "  level {} counts {:?} dt {:.3e}  value {:+.6e}  order {}",
                        row.level, row.counts, row.dt, row.value, order
                    );
                }
            }
            Ok(exit_for(&bundle))
        }
        Command::Validate { config } => match parse_config(&config) {
            Ok(s) => {
                println!("ok: scenario valid (hash {})", s.hash());
                Ok(ExitCode::SUCCESS)
            }
            Err(e) => Err(e),
        },
        Command::ListCases => {
            for entry in model::catalog() {
                println!("{}", entry.name);
                println!("  G:           {}", entry.g_form);
                println!("  G~ = G/w:    {}", entry.g_tilde_form);
                println!("  constraints: {}", entry.constraints);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_summary(bundle: &ReportBundle) {
    println!(
        "scenario {}  dt {:.3e}  steps {}  min w {:.3e}",
        &bundle.scenario_hash[..12],
        bundle.run.dt_used,
        bundle.run.steps,
        bundle.run.positivity_min
    );
    for c in &bundle.checks {
        println!(
            "  {:<18} t {:>8.4}  min margin {:+.6e}  tol {:.2e}  {}",
            c.name,
            c.argmin.time,
            c.min_margin,
            c.tolerance,
            verdict_word(c.verdict)
        );
    }
    let flagged: Vec<&wparab::estimates::CheckReport> =
        bundle.checks.iter().filter(|c| c.any_flag_raised()).collect();
    if !flagged.is_empty() {
        eprintln!("hypothesis flags raised:");
        for c in flagged {
            for f in c.flags.iter().filter(|f| f.raised) {
                eprintln!("  {}: {} ({})", c.name, f.name, f.witness);
            }
        }
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::PassWithFlags => "pass-with-flags",
        Verdict::Fail => "FAIL",
    }
}

fn exit_for(bundle: &ReportBundle) -> ExitCode {
    match bundle.worst_verdict() {
        Verdict::Fail => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}
