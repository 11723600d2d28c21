//! Limit-regime classification for normalized partial sums.
//!
//! For a functional of Hermite rank kappa over a Hurst-H sequence with tail
//! index alpha in (1, 2), the competition is decided by comparing the
//! Hermite exponent `H_ss = 1 - kappa(1-H)` against `1/alpha`: the larger
//! normalization wins, and at equality both components survive with weight
//! `lambda = lim L1_eff(n)^kappa / L3(n)`.

use crate::chaos::FunctionalSpec;
use crate::error::{LrdError, Result};
use crate::lrd_source::SlowlyVaryingSpec;
use crate::quad;
use crate::tails::{self, TailModel};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Euler-Mascheroni constant (reference literal, used only as one of the
/// three independent psi evaluations).
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const BOUNDARY_TOL: f64 = 1e-12;

/// Stable law S_alpha(sigma, beta, mu).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub sigma: f64,
    pub beta: f64,
    pub mu: f64,
}

impl StableParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(LrdError::InvalidParameter(format!("alpha {} outside (0,2)", self.alpha)));
        }
        if self.sigma <= 0.0 || self.beta.abs() > 1.0 {
            return Err(LrdError::InvalidParameter("need sigma > 0, |beta| <= 1".into()));
        }
        Ok(())
    }
}

/// How the alpha = 1 sums are centered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenteringMode {
    None,
    /// Per-term truncated mean E[f 1{|f| <= a_n}] plus a linear-in-t path
    /// shift involving the psi constant.
    TruncatedMeanPlusPsi,
}

/// Outcome of the classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum LimitRegime {
    HermiteLimit {
        kappa: usize,
        h: f64,
        /// Self-similarity exponent 1 - kappa(1-H).
        h_ss: f64,
        /// Chaos coefficient multiplying the Hermite process; filled in by
        /// the normalization plan, absent from a bare classification.
        f_kappa: Option<f64>,
    },
    StableLimit {
        params: StableParams,
        centering: CenteringMode,
    },
    MixedLimit {
        lambda: f64,
        kappa: usize,
        h: f64,
        h_ss: f64,
        f_kappa: Option<f64>,
        params: StableParams,
    },
    FiniteVarianceOutOfScope,
    ShortMemoryStable {
        params: StableParams,
    },
}

/// Scale of the stable limit: sigma = (Gamma(2-alpha) cos(pi alpha/2) /
/// (1-alpha))^{1/alpha} for alpha != 1, pi/2 at alpha = 1.
pub fn stable_sigma(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(LrdError::InvalidParameter(format!("alpha {alpha} outside (0,2)")));
    }
    if alpha == 1.0 {
        return Ok(PI / 2.0);
    }
    let g = statrs::function::gamma::gamma(2.0 - alpha);
    let val = g * (PI * alpha / 2.0).cos() / (1.0 - alpha);
    Ok(val.powf(1.0 / alpha))
}

/// psi = ln(pi) + int_0^inf u^{-2} (sin u - u 1{u <= 1}) du, via two
/// independent quadrature routes cross-checked against the analytic
/// reduction ln(pi) + 1 - gamma_Euler; `tol` bounds their disagreement.
pub fn psi_constant(tol: f64) -> Result<f64> {
    if tol < 1e-12 {
        return Err(LrdError::InvalidParameter("psi tolerance below 1e-12".into()));
    }
    let head = |u: f64| {
        if u < 1e-4 {
            // (sin u - u)/u^2 = -u/6 + u^3/120 - ...
            -u / 6.0 + u.powi(3) / 120.0
        } else {
            (u.sin() - u) / (u * u)
        }
    };
    let head_int = quad::integrate(&head, 0.0, 1.0, 16);

    // Route 1: integrate sin(u)/u^2 on [1, U] in half-period panels, then
    // close with the integration-by-parts asymptotic tail
    // cos U/U^2 - 2 sin U/U^3 - 6 cos U/U^4 + 24 sin U/U^5 + O(U^-5).
    let k_panels = 2000usize;
    let u_end = 1.0 + k_panels as f64 * PI;
    let mut osc = 0.0;
    for i in 0..k_panels {
        let a = 1.0 + i as f64 * PI;
        osc += quad::integrate(&|u: f64| u.sin() / (u * u), a, a + PI, 2);
    }
    let u2 = u_end * u_end;
    let tail = u_end.cos() / u2 - 2.0 * u_end.sin() / (u2 * u_end) - 6.0 * u_end.cos() / (u2 * u2)
        + 24.0 * u_end.sin() / (u2 * u2 * u_end);
    let route1 = PI.ln() + head_int + osc + tail;

    // Route 2: integrate by parts twice before quadrature:
    // int_1^inf sin u/u^2 du = cos 1 + 2 sin 1 - 6 int_1^inf u^-4 sin u du.
    let k4 = 4000usize;
    let mut osc4 = 0.0;
    for i in 0..k4 {
        let a = 1.0 + i as f64 * PI;
        osc4 += quad::integrate(&|u: f64| u.sin() / u.powi(4), a, a + PI, 2);
    }
    // |tail| <= int_U^inf u^-4 du = U^-3 / 3, below 2e-13 here
    let route2 = PI.ln() + head_int + 1f64.cos() + 2.0 * 1f64.sin() - 6.0 * osc4;

    // Route 3: analytic reduction.
    let route3 = PI.ln() + 1.0 - EULER_GAMMA;

    let spread = (route1 - route2).abs().max((route1 - route3).abs()).max((route2 - route3).abs());
    if spread > tol {
        return Err(LrdError::InvalidParameter(format!(
            "psi evaluations disagree by {spread:.2e} (tol {tol:.2e})"
        )));
    }
    Ok(route1)
}

/// Weight of the Hermite component at the exponent boundary:
/// `lim L1_eff(n)^kappa / L3(n)` with `L3(n) -> L2^{1/alpha}` from the
/// norming sequence. Log-power factors push the limit to 0 or infinity.
pub fn boundary_lambda(l1_eff: &SlowlyVaryingSpec, kappa: usize, tail: &TailModel) -> f64 {
    let p_num = l1_eff.log_exponent() * kappa as f64;
    if p_num > 0.0 {
        return f64::INFINITY;
    }
    if p_num < 0.0 {
        return 0.0;
    }
    l1_eff.scale().powi(kappa as i32) / tail.l2.powf(1.0 / tail.alpha)
}

/// The Hermite / stable / mixed trichotomy. `kappa = None` marks an undefined
/// Hermite rank (alpha <= 1 territory); `lambda` is only consulted on the
/// exponent boundary.
pub fn classify(kappa: Option<usize>, h: f64, alpha: f64, lambda: f64) -> Result<LimitRegime> {
    if !(h > 0.0 && h < 1.0) {
        return Err(LrdError::InvalidParameter(format!("H {h} outside (0,1)")));
    }
    if !(alpha > 0.0) || lambda < 0.0 || lambda.is_nan() {
        return Err(LrdError::InvalidParameter("need alpha > 0 and lambda >= 0".into()));
    }
    if alpha >= 2.0 {
        return Ok(LimitRegime::FiniteVarianceOutOfScope);
    }
    let stable = |centering| -> Result<LimitRegime> {
        Ok(LimitRegime::StableLimit {
            params: StableParams { alpha, sigma: stable_sigma(alpha)?, beta: 0.0, mu: 0.0 },
            centering,
        })
    };
    if alpha <= 1.0 {
        let centering =
            if alpha == 1.0 { CenteringMode::TruncatedMeanPlusPsi } else { CenteringMode::None };
        return stable(centering);
    }
    if h <= 0.5 {
        let LimitRegime::StableLimit { params, .. } = stable(CenteringMode::None)? else {
            unreachable!()
        };
        return Ok(LimitRegime::ShortMemoryStable { params });
    }
    let kappa = kappa.ok_or_else(|| {
        LrdError::InvalidParameter("Hermite rank required for 1 < alpha < 2, H > 1/2".into())
    })?;
    if kappa == 0 {
        return Err(LrdError::InvalidParameter("Hermite rank must be >= 1".into()));
    }
    let h_ss = 1.0 - kappa as f64 * (1.0 - h);
    let gap = h_ss - 1.0 / alpha;
    let hermite = LimitRegime::HermiteLimit { kappa, h, h_ss, f_kappa: None };
    if gap > BOUNDARY_TOL {
        return Ok(hermite);
    }
    if gap < -BOUNDARY_TOL {
        return stable(CenteringMode::None);
    }
    if lambda == 0.0 {
        return stable(CenteringMode::None);
    }
    if lambda.is_infinite() {
        return Ok(hermite);
    }
    Ok(LimitRegime::MixedLimit {
        lambda,
        kappa,
        h,
        h_ss,
        f_kappa: None,
        params: StableParams { alpha, sigma: stable_sigma(alpha)?, beta: 0.0, mu: 0.0 },
    })
}

/// How the partial sum is scaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ScaleRule {
    /// scale(n) = L1_eff(n)^{-kappa} n^{-h_ss}.
    HermitePower {
        kappa: usize,
        h_ss: f64,
        l1_eff: SlowlyVaryingSpec,
    },
    /// scale(n) = 1 / a_n.
    StableNorming,
}

/// Concrete normalization and centering recipe for a pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizationPlan {
    pub regime: LimitRegime,
    pub functional: FunctionalSpec,
    pub scale: ScaleRule,
    pub centering_mode: CenteringMode,
    /// Skewness of the fitted tail, used by the alpha = 1 path shift.
    pub tail_beta: f64,
    /// psi constant cached when the centering needs it.
    pub psi: Option<f64>,
    pub description: String,
}

impl NormalizationPlan {
    /// Multiplier applied to the partial sum at horizon n.
    pub fn scale(&self, n: u64) -> Result<f64> {
        match &self.scale {
            ScaleRule::HermitePower { kappa, h_ss, l1_eff } => {
                let nf = n as f64;
                Ok(l1_eff.eval(nf).powi(-(*kappa as i32)) * nf.powf(-h_ss))
            }
            ScaleRule::StableNorming => Ok(1.0 / tails::norming_constant(&self.functional, n)?),
        }
    }

    /// Amount subtracted from the scaled sum at time fraction t. The alpha
    /// = 1 rule removes the per-term truncated mean and a deterministic
    /// linear drift beta (psi - ln pi) t so the limit is S_1(sigma, beta, 0).
    pub fn centering(&self, n: u64, t: f64) -> Result<f64> {
        match self.centering_mode {
            CenteringMode::None => Ok(0.0),
            CenteringMode::TruncatedMeanPlusPsi => {
                let a_n = tails::norming_constant(&self.functional, n)?;
                let tm = tails::truncated_mean(&self.functional, a_n)?;
                let psi = self.psi.ok_or_else(|| {
                    LrdError::RegimeMismatch("centering requires a psi constant".into())
                })?;
                let terms = (n as f64 * t).floor();
                Ok(terms * tm / a_n + self.tail_beta * (psi - PI.ln()) * t)
            }
        }
    }
}

/// Builds the normalization plan for a classified regime, cross-checking
/// the regime against the functional's fitted tail.
pub fn normalization_plan(
    regime: &LimitRegime,
    f: &FunctionalSpec,
    l1_eff: &SlowlyVaryingSpec,
    tail: &TailModel,
    f_kappa: Option<f64>,
) -> Result<NormalizationPlan> {
    let check_alpha = |params: &StableParams| -> Result<()> {
        if (params.alpha - tail.alpha).abs() > 1e-9 {
            return Err(LrdError::RegimeMismatch(format!(
                "regime alpha {} vs fitted tail alpha {}",
                params.alpha, tail.alpha
            )));
        }
        Ok(())
    };
    let plan = match regime {
        LimitRegime::HermiteLimit { kappa, h, h_ss, .. } => NormalizationPlan {
            regime: LimitRegime::HermiteLimit { kappa: *kappa, h: *h, h_ss: *h_ss, f_kappa },
            functional: f.clone(),
            scale: ScaleRule::HermitePower { kappa: *kappa, h_ss: *h_ss, l1_eff: *l1_eff },
            centering_mode: CenteringMode::None,
            tail_beta: tail.beta,
            psi: None,
            description: format!(
                "hermite limit: f_k R_({kappa},{h})(t), self-similarity exponent {h_ss}"
            ),
        },
        LimitRegime::StableLimit { .. } | LimitRegime::ShortMemoryStable { .. } => {
            let (params, centering) = match regime {
                LimitRegime::StableLimit { params, centering } => (params, *centering),
                LimitRegime::ShortMemoryStable { params } => (params, CenteringMode::None),
                _ => unreachable!(),
            };
            check_alpha(params)?;
            let psi = if centering == CenteringMode::TruncatedMeanPlusPsi {
                Some(psi_constant(1e-8)?)
            } else {
                None
            };
            let params = StableParams { beta: tail.beta, ..*params };
            let regime = if matches!(regime, LimitRegime::ShortMemoryStable { .. }) {
                LimitRegime::ShortMemoryStable { params }
            } else {
                LimitRegime::StableLimit { params, centering }
            };
            NormalizationPlan {
                regime,
                functional: f.clone(),
                scale: ScaleRule::StableNorming,
                centering_mode: centering,
                tail_beta: tail.beta,
                psi,
                description: format!(
                    "stable limit: S_{}({}, {}, 0) Levy motion at scale 1/a_n",
                    params.alpha, params.sigma, tail.beta
                ),
            }
        }
        LimitRegime::MixedLimit { lambda, kappa, h, h_ss, params, .. } => {
            check_alpha(params)?;
            NormalizationPlan {
                regime: LimitRegime::MixedLimit {
                    lambda: *lambda,
                    kappa: *kappa,
                    h: *h,
                    h_ss: *h_ss,
                    f_kappa,
                    params: StableParams { beta: tail.beta, ..*params },
                },
                functional: f.clone(),
                scale: ScaleRule::StableNorming,
                centering_mode: CenteringMode::None,
                tail_beta: tail.beta,
                psi: None,
                description: format!(
                    "mixed limit: {lambda} f_k R_({kappa},{h})(t) + stable Levy motion"
                ),
            }
        }
        LimitRegime::FiniteVarianceOutOfScope => {
            return Err(LrdError::RegimeMismatch(
                "finite-variance functionals are out of scope".into(),
            ))
        }
    };
    Ok(plan)
}
