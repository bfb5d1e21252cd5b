//! Check reports: signed margins, hypothesis flags, and verdicts under a
//! discretization-aware tolerance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    PassWithFlags,
    Fail,
}

/// A recorded hypothesis: `raised = true` means the assumption was violated
/// on the checked window (the witness says where/how). Informational entries
/// keep `raised = false` and only carry the witness text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFlag {
    pub name: String,
    pub raised: bool,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgMin {
    pub location: Vec<f64>,
    pub time: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub min_margin: f64,
    pub argmin: ArgMin,
    pub lhs_min: f64,
    pub lhs_max: f64,
    pub rhs_min: f64,
    pub rhs_max: f64,
    pub flags: Vec<HypothesisFlag>,
    pub notes: Vec<String>,
    pub intermediates: BTreeMap<String, f64>,
    pub verdict: Verdict,
}

impl CheckReport {
    pub fn any_flag_raised(&self) -> bool {
        self.flags.iter().any(|f| f.raised)
    }
}

/// Tolerance policy: `tol = τ_abs + τ_disc · h² · (1 + sup|LHS| + sup|RHS|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tau_abs: f64,
    pub tau_disc: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tau_abs: 1e-9, tau_disc: 10.0 }
    }
}

impl Tolerances {
    pub fn tolerance(&self, h: f64, sup_abs_lhs: f64, sup_abs_rhs: f64) -> f64 {
        self.tau_abs + self.tau_disc * h * h * (1.0 + sup_abs_lhs + sup_abs_rhs)
    }
}

/// Running pointwise margin scan: tracks the minimum of RHS − LHS, where it
/// occurs, and the extrema of both sides.
#[derive(Debug, Clone)]
pub struct MarginScan {
    min_margin: f64,
    argmin: ArgMin,
    lhs_min: f64,
    lhs_max: f64,
    rhs_min: f64,
    rhs_max: f64,
    visited: bool,
}

impl Default for MarginScan {
    fn default() -> Self {
        Self::new()
    }
}

impl MarginScan {
    pub fn new() -> Self {
        MarginScan {
            min_margin: f64::INFINITY,
            argmin: ArgMin { location: vec![], time: f64::NAN },
            lhs_min: f64::INFINITY,
            lhs_max: f64::NEG_INFINITY,
            rhs_min: f64::INFINITY,
            rhs_max: f64::NEG_INFINITY,
            visited: false,
        }
    }

    pub fn visit(&mut self, lhs: f64, rhs: f64, location: &[f64], time: f64) {
        self.visited = true;
        let margin = rhs - lhs;
        if margin < self.min_margin {
            self.min_margin = margin;
            self.argmin = ArgMin { location: location.to_vec(), time };
        }
        self.lhs_min = self.lhs_min.min(lhs);
        self.lhs_max = self.lhs_max.max(lhs);
        self.rhs_min = self.rhs_min.min(rhs);
        self.rhs_max = self.rhs_max.max(rhs);
    }

    pub fn min_margin(&self) -> f64 {
        self.min_margin
    }

    pub fn sup_abs_lhs(&self) -> f64 {
        self.lhs_min.abs().max(self.lhs_max.abs())
    }

    pub fn sup_abs_rhs(&self) -> f64 {
        self.rhs_min.abs().max(self.rhs_max.abs())
    }

    pub fn tolerance(&self, tol: &Tolerances, h: f64) -> f64 {
        tol.tolerance(h, self.sup_abs_lhs(), self.sup_abs_rhs())
    }

    /// Assemble the report. Verdict: Fail iff min margin < −tolerance, else
    /// PassWithFlags if any hypothesis flag was raised, else Pass.
    #[allow(clippy::too_many_arguments)]
    pub fn finalize(
        self,
        name: &str,
        params: BTreeMap<String, f64>,
        flags: Vec<HypothesisFlag>,
        notes: Vec<String>,
        intermediates: BTreeMap<String, f64>,
        tolerance: f64,
    ) -> CheckReport {
        assert!(self.visited, "margin scan saw no points");
        let raised = flags.iter().any(|f| f.raised);
        let verdict = if self.min_margin < -tolerance {
            Verdict::Fail
        } else if raised {
            Verdict::PassWithFlags
        } else {
            Verdict::Pass
        };
        CheckReport {
            name: name.to_string(),
            params,
            tolerance,
            min_margin: self.min_margin,
            argmin: self.argmin,
            lhs_min: self.lhs_min,
            lhs_max: self.lhs_max,
            rhs_min: self.rhs_min,
            rhs_max: self.rhs_max,
            flags,
            notes,
            intermediates,
            verdict,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rule() {
        let mut scan = MarginScan::new();
        scan.visit(1.0, 2.0, &[0.0], 0.1);
        scan.visit(1.5, 1.2, &[0.5], 0.1); // margin −0.3
        assert!((scan.min_margin() - (-0.3)).abs() < 1e-15);
        let rep = scan.clone().finalize("t", BTreeMap::new(), vec![], vec![], BTreeMap::new(), 0.5);
        assert_eq!(rep.verdict, Verdict::Pass); // −0.3 ≥ −0.5
        let rep = scan.clone().finalize("t", BTreeMap::new(), vec![], vec![], BTreeMap::new(), 0.1);
        assert_eq!(rep.verdict, Verdict::Fail);
        let flags = vec![HypothesisFlag { name: "h".into(), raised: true, witness: "w".into() }];
        let rep = scan.finalize("t", BTreeMap::new(), flags, vec![], BTreeMap::new(), 0.5);
        assert_eq!(rep.verdict, Verdict::PassWithFlags);
    }

    #[test]
    fn tolerance_formula() {
        let tol = Tolerances::default();
        let h = 0.1_f64;
        let got = tol.tolerance(h, 2.0, 3.0);
        assert!((got - (1e-9 + 10.0 * 0.01 * 6.0)).abs() < 1e-15);
    }
}
