//! The nonlinearity catalog: the source term G(w) of the equation, its
//! derivatives, and the logarithmic-substitution quantities G̃ = G(w)/w.
//!
//! Field-level derivatives of G̃ are assembled by the exact chain rule
//! through the discrete operators (∇G̃ = G̃′(w)∇w and
//! L_f G̃ = G̃′(w) L_f w + G̃″(w)|∇w|²), never by transcribing per-case
//! display formulas. For G̃ = c(1−w) the chain rule gives ∇G̃ = −c∇w.

use std::sync::Arc;

use crate::geometry::{
    gradient, hessian, laplacian, weighted_laplacian, Grid, ScalarField, SymTensorField,
    VectorField,
};

use super::{FieldSpec, ModelError};

/// Tabulated nonlinearity: strictly increasing `w` knots with G, G′, G″
/// samples; cubic Hermite interpolation inside the table range.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomTable {
    w: Vec<f64>,
    g: Vec<f64>,
    gp: Vec<f64>,
    gpp: Vec<f64>,
}

impl CustomTable {
    pub fn new(
        w: Vec<f64>,
        g: Vec<f64>,
        gp: Vec<f64>,
        gpp: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if w.len() < 2 || g.len() != w.len() || gp.len() != w.len() || gpp.len() != w.len() {
            return Err(ModelError::BadTable("need >= 2 rows of equal length".into()));
        }
        if !w.windows(2).all(|p| p[1] > p[0]) {
            return Err(ModelError::BadTable("w knots must be strictly increasing".into()));
        }
        if w[0] <= 0.0 {
            return Err(ModelError::BadTable("w knots must be positive".into()));
        }
        Ok(CustomTable { w, g, gp, gpp })
    }

    fn bracket(&self, w: f64) -> Result<usize, ModelError> {
        if w < self.w[0] || w > *self.w.last().unwrap() {
            return Err(ModelError::Domain {
                case: "custom_table",
                w,
                reason: "outside the tabulated range".into(),
            });
        }
        let mut i = match self.w.binary_search_by(|x| x.partial_cmp(&w).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        if i + 1 == self.w.len() {
            i -= 1;
        }
        Ok(i)
    }

    fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
        let h = x1 - x0;
        let s = (x - x0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1
    }

    pub fn eval(&self, w: f64) -> Result<f64, ModelError> {
        let i = self.bracket(w)?;
        Ok(Self::hermite(self.w[i], self.w[i + 1], self.g[i], self.g[i + 1], self.gp[i], self.gp[i + 1], w))
    }

    pub fn eval_prime(&self, w: f64) -> Result<f64, ModelError> {
        let i = self.bracket(w)?;
        Ok(Self::hermite(self.w[i], self.w[i + 1], self.gp[i], self.gp[i + 1], self.gpp[i], self.gpp[i + 1], w))
    }

    pub fn eval_second(&self, w: f64) -> Result<f64, ModelError> {
        let i = self.bracket(w)?;
        let s = (w - self.w[i]) / (self.w[i + 1] - self.w[i]);
        Ok((1.0 - s) * self.gpp[i] + s * self.gpp[i + 1])
    }
}

#[derive(Debug, Clone)]
pub enum Nonlinearity {
    /// G ≡ 0 (plain weighted heat flow).
    Zero,
    /// G(w) = a·w^p − b·w^q with a, b > 0 and q > p ≥ 1.
    PowerDiff { a: f64, b: f64, p: f64, q: f64 },
    /// G(w) = λ(t)·w + A(x,t), the norm-preserving nonlocal flow with
    /// λ(t) = −∫(wΔw + wA)dμ under ∫w²dμ = 1.
    CaffarelliLin { a_field: FieldSpec },
    /// G(w) = w^b for w > 0, b > 1.
    PurePower { b: f64 },
    /// G(w) = a·w·(log w)^α.
    LogPower { a: f64, alpha: f64 },
    /// G(w) = c·w·(1 − w²), c > 0, on 0 < w < 1.
    AllenCahn { c: f64 },
    /// G(w) = c·w·(1 − w), c > 0, on 0 < w < 1.
    FisherKpp { c: f64 },
    /// Tabulated (w, G, G′, G″) samples.
    Custom(CustomTable),
}

impl Nonlinearity {
    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::Zero => "zero",
            Nonlinearity::PowerDiff { .. } => "power_diff",
            Nonlinearity::CaffarelliLin { .. } => "caffarelli_lin",
            Nonlinearity::PurePower { .. } => "pure_power",
            Nonlinearity::LogPower { .. } => "log_power",
            Nonlinearity::AllenCahn { .. } => "allen_cahn",
            Nonlinearity::FisherKpp { .. } => "fisher_kpp",
            Nonlinearity::Custom(_) => "custom_table",
        }
    }

    /// Parameter constraints, checked once at construction/validation time.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Nonlinearity::PowerDiff { a, b, p, q } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return Err(ModelError::BadParameter("power_diff needs a > 0 and b > 0".into()));
                }
                if !(*p >= 1.0 && *q > *p) {
                    return Err(ModelError::BadParameter("power_diff needs q > p >= 1".into()));
                }
            }
            Nonlinearity::PurePower { b } => {
                if !(*b > 1.0) {
                    return Err(ModelError::BadParameter("pure_power needs b > 1".into()));
                }
            }
            Nonlinearity::AllenCahn { c } | Nonlinearity::FisherKpp { c } => {
                if !(*c > 0.0) {
                    return Err(ModelError::BadParameter(format!("{} needs c > 0", self.name())));
                }
            }
            Nonlinearity::LogPower { a, alpha } if !a.is_finite() || !alpha.is_finite() => {
                return Err(ModelError::BadParameter("log_power needs finite a, alpha".into()));
            }
            _ => {}
        }
        Ok(())
    }

    /// Pointwise domain of the case at solution value `w`.
    pub fn check_domain(&self, w: f64) -> Result<(), ModelError> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(ModelError::Domain {
                case: self.name(),
                w,
                reason: "solution values must be positive".into(),
            });
        }
        match self {
            Nonlinearity::AllenCahn { .. } | Nonlinearity::FisherKpp { .. } => {
                if w >= 1.0 {
                    return Err(ModelError::Domain {
                        case: self.name(),
                        w,
                        reason: "requires 0 < w < 1".into(),
                    });
                }
            }
            Nonlinearity::LogPower { alpha, .. } => {
                let l = w.ln();
                let integral = alpha.fract() == 0.0 && *alpha >= 0.0;
                if !integral && l <= 0.0 {
                    return Err(ModelError::Domain {
                        case: self.name(),
                        w,
                        reason: "non-integer exponent needs w > 1 (log w > 0)".into(),
                    });
                }
                // (log w)^(α−2) blows up at w = 1 unless the factor α(α−1) kills it
                let singular_at_one = *alpha < 2.0 && *alpha != 0.0 && *alpha != 1.0;
                if singular_at_one && l.abs() < 1e-9 {
                    return Err(ModelError::Domain {
                        case: self.name(),
                        w,
                        reason: "w must stay away from 1 when alpha < 2".into(),
                    });
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// G(w) at a point. The nonlocal case has no pointwise value.
    pub fn g(&self, w: f64) -> Result<f64, ModelError> {
        self.check_domain(w)?;
        Ok(match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::PowerDiff { a, b, p, q } => a * w.powf(*p) - b * w.powf(*q),
            Nonlinearity::CaffarelliLin { .. } => return Err(ModelError::Nonlocal),
            Nonlinearity::PurePower { b } => w.powf(*b),
            Nonlinearity::LogPower { a, alpha } => a * w * powi_or_f(w.ln(), *alpha),
            Nonlinearity::AllenCahn { c } => c * w * (1.0 - w * w),
            Nonlinearity::FisherKpp { c } => c * w * (1.0 - w),
            Nonlinearity::Custom(t) => t.eval(w)?,
        })
    }

    /// Exact analytic G′(w).
    pub fn g_prime(&self, w: f64) -> Result<f64, ModelError> {
        self.check_domain(w)?;
        Ok(match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::PowerDiff { a, b, p, q } => {
                a * p * w.powf(p - 1.0) - b * q * w.powf(q - 1.0)
            }
            Nonlinearity::CaffarelliLin { .. } => return Err(ModelError::Nonlocal),
            Nonlinearity::PurePower { b } => b * w.powf(b - 1.0),
            Nonlinearity::LogPower { a, alpha } => {
                let l = w.ln();
                a * (powi_or_f(l, *alpha) + alpha * powi_or_f(l, alpha - 1.0))
            }
            Nonlinearity::AllenCahn { c } => c * (1.0 - 3.0 * w * w),
            Nonlinearity::FisherKpp { c } => c * (1.0 - 2.0 * w),
            Nonlinearity::Custom(t) => t.eval_prime(w)?,
        })
    }

    /// Exact analytic G″(w).
    pub fn g_second(&self, w: f64) -> Result<f64, ModelError> {
        self.check_domain(w)?;
        Ok(match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::PowerDiff { a, b, p, q } => {
                a * p * (p - 1.0) * w.powf(p - 2.0) - b * q * (q - 1.0) * w.powf(q - 2.0)
            }
            Nonlinearity::CaffarelliLin { .. } => return Err(ModelError::Nonlocal),
            Nonlinearity::PurePower { b } => b * (b - 1.0) * w.powf(b - 2.0),
            Nonlinearity::LogPower { a, alpha } => {
                let l = w.ln();
                a * alpha / w * (powi_or_f(l, alpha - 1.0) + (alpha - 1.0) * powi_or_f(l, alpha - 2.0))
            }
            Nonlinearity::AllenCahn { c } => -6.0 * c * w,
            Nonlinearity::FisherKpp { c } => -2.0 * c,
            Nonlinearity::Custom(t) => t.eval_second(w)?,
        })
    }

    /// G̃(w) = G(w)/w, the source term of the log-substituted equation.
    pub fn g_tilde(&self, w: f64) -> Result<f64, ModelError> {
        Ok(self.g(w)? / w)
    }

    /// dG̃/dw = G′/w − G/w².
    pub fn g_tilde_prime(&self, w: f64) -> Result<f64, ModelError> {
        Ok(self.g_prime(w)? / w - self.g(w)? / (w * w))
    }

    /// d²G̃/dw² = G″/w − 2G′/w² + 2G/w³.
    pub fn g_tilde_second(&self, w: f64) -> Result<f64, ModelError> {
        let (g, gp, gpp) = (self.g(w)?, self.g_prime(w)?, self.g_second(w)?);
        Ok(gpp / w - 2.0 * gp / (w * w) + 2.0 * g / (w * w * w))
    }

    fn a_field_at(&self, grid: &Arc<Grid>, time: f64) -> Option<ScalarField> {
        match self {
            Nonlinearity::CaffarelliLin { a_field } => Some(a_field.sample(grid, time)),
            _ => None,
        }
    }

    /// G(w) as a field. Handles the nonlocal case by recomputing λ(t) from
    /// the current solution before application.
    pub fn g_field(&self, w: &ScalarField) -> Result<ScalarField, ModelError> {
        match self {
            Nonlinearity::CaffarelliLin { .. } => {
                let a = self.a_field_at(w.grid(), w.time()).unwrap();
                let lambda = caffarelli_lin_lambda(w, &a)?;
                Ok(w.zip(&a, |wv, av| lambda * wv + av)?)
            }
            _ => {
                let mut data = Vec::with_capacity(w.len());
                for &v in w.data() {
                    data.push(self.g(v)?);
                }
                Ok(ScalarField::from_data(w.grid(), w.time(), data))
            }
        }
    }

    /// G̃ = G(w)/w as a field.
    pub fn g_tilde_field(&self, w: &ScalarField) -> Result<ScalarField, ModelError> {
        let g = self.g_field(w)?;
        Ok(g.zip(w, |gv, wv| gv / wv)?)
    }

    /// ∇G̃ by the chain rule: (dG̃/dw)·∇w, plus the explicit ∇A/w − (A/w²)∇w
    /// terms in the nonlocal case.
    pub fn g_tilde_gradient_field(&self, w: &ScalarField) -> Result<VectorField, ModelError> {
        let grid = w.grid();
        let gw = gradient(w);
        match self {
            Nonlinearity::CaffarelliLin { .. } => {
                let a = self.a_field_at(grid, w.time()).unwrap();
                let ga = gradient(&a);
                let comps = (0..grid.dim())
                    .map(|ax| {
                        (0..w.len())
                            .map(|i| {
                                let wv = w.data()[i];
                                ga.component(ax)[i] / wv
                                    - a.data()[i] / (wv * wv) * gw.component(ax)[i]
                            })
                            .collect::<Vec<f64>>()
                    })
                    .collect();
                Ok(VectorField::from_components(grid, w.time(), comps))
            }
            _ => {
                let mut coef = Vec::with_capacity(w.len());
                for &v in w.data() {
                    coef.push(self.g_tilde_prime(v)?);
                }
                let comps = (0..grid.dim())
                    .map(|ax| {
                        coef.iter()
                            .zip(gw.component(ax))
                            .map(|(c, g)| c * g)
                            .collect::<Vec<f64>>()
                    })
                    .collect();
                Ok(VectorField::from_components(grid, w.time(), comps))
            }
        }
    }

    /// L_f G̃ by the chain rule: G̃′(w)·L_f w + G̃″(w)·|∇w|², with the
    /// explicit-A product-rule terms in the nonlocal case.
    pub fn g_tilde_weighted_laplacian_field(
        &self,
        w: &ScalarField,
        f: &ScalarField,
    ) -> Result<ScalarField, ModelError> {
        let lfw = weighted_laplacian(w, f)?;
        let gw = gradient(w);
        let g2 = gw.norm_sq();
        match self {
            Nonlinearity::CaffarelliLin { .. } => {
                let a = self.a_field_at(w.grid(), w.time()).unwrap();
                let lfa = weighted_laplacian(&a, f)?;
                let ga_dot_gw = gradient(&a).dot(&gw);
                let data = (0..w.len())
                    .map(|i| {
                        let wv = w.data()[i];
                        let av = a.data()[i];
                        lfa.data()[i] / wv - av / (wv * wv) * lfw.data()[i]
                            + 2.0 * av / (wv * wv * wv) * g2.data()[i]
                            - 2.0 / (wv * wv) * ga_dot_gw.data()[i]
                    })
                    .collect();
                Ok(ScalarField::from_data(w.grid(), w.time(), data))
            }
            _ => {
                let mut data = Vec::with_capacity(w.len());
                for i in 0..w.len() {
                    let wv = w.data()[i];
                    data.push(
                        self.g_tilde_prime(wv)? * lfw.data()[i]
                            + self.g_tilde_second(wv)? * g2.data()[i],
                    );
                }
                Ok(ScalarField::from_data(w.grid(), w.time(), data))
            }
        }
    }

    /// ∇G(w) = G′(w)∇w (plus ∇A in the nonlocal case); feeds the K₈ bound.
    pub fn g_gradient_field(&self, w: &ScalarField) -> Result<VectorField, ModelError> {
        let grid = w.grid();
        let gw = gradient(w);
        match self {
            Nonlinearity::CaffarelliLin { .. } => {
                let a = self.a_field_at(grid, w.time()).unwrap();
                let lambda = caffarelli_lin_lambda(w, &a)?;
                let ga = gradient(&a);
                let comps = (0..grid.dim())
                    .map(|ax| {
                        (0..w.len())
                            .map(|i| lambda * gw.component(ax)[i] + ga.component(ax)[i])
                            .collect::<Vec<f64>>()
                    })
                    .collect();
                Ok(VectorField::from_components(grid, w.time(), comps))
            }
            _ => {
                let mut coef = Vec::with_capacity(w.len());
                for &v in w.data() {
                    coef.push(self.g_prime(v)?);
                }
                let comps = (0..grid.dim())
                    .map(|ax| {
                        coef.iter()
                            .zip(gw.component(ax))
                            .map(|(c, g)| c * g)
                            .collect::<Vec<f64>>()
                    })
                    .collect();
                Ok(VectorField::from_components(grid, w.time(), comps))
            }
        }
    }

    /// Hess G(w) = G″ ∇w⊗∇w + G′ Hess w (plus Hess A); feeds the K₅ bound.
    pub fn g_hessian_field(&self, w: &ScalarField) -> Result<SymTensorField, ModelError> {
        let grid = w.grid();
        let gw = gradient(w);
        let hw = hessian(w);
        let build = |c1: &dyn Fn(usize) -> f64, c2: &dyn Fn(usize) -> f64, extra: Option<&SymTensorField>| {
            let n = w.len();
            let comp = |k: usize| -> Vec<f64> {
                (0..n)
                    .map(|i| {
                        let outer = match (grid.dim(), k) {
                            (1, _) => gw.component(0)[i] * gw.component(0)[i],
                            (_, 0) => gw.component(0)[i] * gw.component(0)[i],
                            (_, 1) => gw.component(1)[i] * gw.component(1)[i],
                            _ => gw.component(0)[i] * gw.component(1)[i],
                        };
                        let hess = match (grid.dim(), k) {
                            (1, _) => hw.xx()[i],
                            (_, 0) => hw.xx()[i],
                            (_, 1) => hw.yy()[i],
                            _ => hw.xy()[i],
                        };
                        let e = extra
                            .map(|t| match (grid.dim(), k) {
                                (1, _) => t.xx()[i],
                                (_, 0) => t.xx()[i],
                                (_, 1) => t.yy()[i],
                                _ => t.xy()[i],
                            })
                            .unwrap_or(0.0);
                        c2(i) * outer + c1(i) * hess + e
                    })
                    .collect()
            };
            let comps = if grid.dim() == 1 { vec![comp(0)] } else { vec![comp(0), comp(1), comp(2)] };
            SymTensorField::from_components(grid, w.time(), comps)
        };
        match self {
            Nonlinearity::CaffarelliLin { .. } => {
                let a = self.a_field_at(grid, w.time()).unwrap();
                let lambda = caffarelli_lin_lambda(w, &a)?;
                let ha = hessian(&a);
                Ok(build(&|_| lambda, &|_| 0.0, Some(&ha)))
            }
            _ => {
                let mut gp = Vec::with_capacity(w.len());
                let mut gpp = Vec::with_capacity(w.len());
                for &v in w.data() {
                    gp.push(self.g_prime(v)?);
                    gpp.push(self.g_second(v)?);
                }
                Ok(build(&|i| gp[i], &|i| gpp[i], None))
            }
        }
    }

    /// Closed-form |G(w)| ≤ θ₂·w bound valid on the case's whole domain,
    /// when one exists.
    pub fn analytic_theta2(&self) -> Option<f64> {
        match self {
            Nonlinearity::Zero => Some(0.0),
            Nonlinearity::FisherKpp { c } => Some(*c), // sup |1 − w| < 1 on (0,1)
            Nonlinearity::AllenCahn { c } => Some(*c), // sup |1 − w²| < 1 on (0,1)
            _ => None,
        }
    }

    /// Closed-form |G′(w)| ≤ θ₃ bound on the case's whole domain.
    pub fn analytic_theta3(&self) -> Option<f64> {
        match self {
            Nonlinearity::Zero => Some(0.0),
            Nonlinearity::FisherKpp { c } => Some(*c),       // |1 − 2w| < 1 on (0,1)
            Nonlinearity::AllenCahn { c } => Some(2.0 * *c), // |1 − 3w²| ≤ 2 on (0,1)
            _ => None,
        }
    }
}

/// λ(t) = −∫_M (wΔw + wA) dμ by the uniform-grid Riemann sum with the
/// unweighted volume element.
pub fn caffarelli_lin_lambda(w: &ScalarField, a: &ScalarField) -> Result<f64, ModelError> {
    if w.min() <= 0.0 {
        return Err(ModelError::Domain {
            case: "caffarelli_lin",
            w: w.min(),
            reason: "solution values must be positive".into(),
        });
    }
    let lap = laplacian(w);
    let integrand = w.zip(&lap, |wv, lv| wv * lv)?.zip(&w.zip(a, |wv, av| wv * av)?, |x, y| x + y)?;
    Ok(-integrand.integral())
}

/// Normalization drift |∫w²dμ − 1| monitored for the nonlocal flow.
pub fn l2_normalization_drift(w: &ScalarField) -> f64 {
    (w.map(|v| v * v).integral() - 1.0).abs()
}

fn powi_or_f(base: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e.fract() == 0.0 && e.abs() <= 64.0 {
        base.powi(e as i32)
    } else {
        base.powf(e)
    }
}

/// One catalog row for the CLI listing.
pub struct CatalogEntry {
    pub name: &'static str,
    pub g_form: &'static str,
    pub g_tilde_form: &'static str,
    pub constraints: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "zero",
            g_form: "G(w) = 0",
            g_tilde_form: "G~ = 0",
            constraints: "none",
        },
        CatalogEntry {
            name: "power_diff",
            g_form: "G(w) = a*w^p - b*w^q",
            g_tilde_form: "G~ = a*w^(p-1) - b*w^(q-1)",
            constraints: "a > 0, b > 0, q > p >= 1",
        },
        CatalogEntry {
            name: "caffarelli_lin",
            g_form: "G(w) = lambda(t)*w + A(x,t),  lambda = -int(w*lap(w) + w*A)",
            g_tilde_form: "G~ = lambda + A/w",
            constraints: "a_expr required; int(w^2) = 1 monitored",
        },
        CatalogEntry {
            name: "pure_power",
            g_form: "G(w) = w^b",
            g_tilde_form: "G~ = w^(b-1)",
            constraints: "b > 1",
        },
        CatalogEntry {
            name: "log_power",
            g_form: "G(w) = a*w*(log w)^alpha",
            g_tilde_form: "G~ = a*(log w)^alpha",
            constraints: "w away from 1 when alpha < 2; w > 1 for non-integer alpha",
        },
        CatalogEntry {
            name: "allen_cahn",
            g_form: "G(w) = c*w*(1 - w^2)",
            g_tilde_form: "G~ = c*(1 - w^2)",
            constraints: "c > 0, 0 < w < 1",
        },
        CatalogEntry {
            name: "fisher_kpp",
            g_form: "G(w) = c*w*(1 - w)",
            g_tilde_form: "G~ = c*(1 - w)",
            constraints: "c > 0, 0 < w < 1",
        },
        CatalogEntry {
            name: "custom_table",
            g_form: "tabulated (w, G, G', G'') with cubic interpolation",
            g_tilde_form: "G~ = G(w)/w",
            constraints: "strictly increasing positive w knots",
        },
    ]
}

/// Parse a nonlinearity from its config surface: case tag plus parameters.
pub fn from_config(
    case: &str,
    params: &std::collections::BTreeMap<String, f64>,
    a_expr: Option<&str>,
    table: Option<&str>,
) -> Result<Nonlinearity, ModelError> {
    let need = |k: &str| -> Result<f64, ModelError> {
        params
            .get(k)
            .copied()
            .ok_or_else(|| ModelError::BadParameter(format!("{case}: missing parameter '{k}'")))
    };
    let nl = match case {
        "zero" => Nonlinearity::Zero,
        "power_diff" => Nonlinearity::PowerDiff { a: need("a")?, b: need("b")?, p: need("p")?, q: need("q")? },
        "caffarelli_lin" => {
            let src = a_expr.ok_or_else(|| {
                ModelError::BadParameter("caffarelli_lin: missing 'a_expr' expression".into())
            })?;
            Nonlinearity::CaffarelliLin { a_field: FieldSpec::parse(src)? }
        }
        "pure_power" => Nonlinearity::PurePower { b: need("b")? },
        "log_power" => Nonlinearity::LogPower { a: need("a")?, alpha: need("alpha")? },
        "allen_cahn" => Nonlinearity::AllenCahn { c: need("c")? },
        "fisher_kpp" => Nonlinearity::FisherKpp { c: need("c")? },
        "custom_table" => {
            let src = table.ok_or_else(|| {
                ModelError::BadParameter("custom_table: missing 'table' rows".into())
            })?;
            let mut cols: [Vec<f64>; 4] = [vec![], vec![], vec![], vec![]];
            for row in src.split(',') {
                let vals: Vec<&str> = row.trim().split(':').collect();
                if vals.len() != 4 {
                    return Err(ModelError::BadTable(format!("row '{row}' is not w:g:gp:gpp")));
                }
                for (k, v) in vals.iter().enumerate() {
                    cols[k].push(v.trim().parse::<f64>().map_err(|_| {
                        ModelError::BadTable(format!("bad number '{v}' in table row"))
                    })?);
                }
            }
            let [w, g, gp, gpp] = cols;
            Nonlinearity::Custom(CustomTable::new(w, g, gp, gpp)?)
        }
        other => return Err(ModelError::BadParameter(format!("unknown nonlinearity case '{other}'"))),
    };
    nl.validate()?;
    Ok(nl)
}
