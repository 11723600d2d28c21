//! Tail behaviour of the marginal f(X), X standard normal.
//!
//! Exact tail probabilities come from monotone inversion of the functional
//! on each half line. The fitted power-tail model uses the convention
//! `P(f(X) > x) ~ ((1+beta)/2) L2(x) x^{-alpha}` and
//! `P(f(X) < -x) ~ ((1-beta)/2) L2(x) x^{-alpha}`.

use crate::chaos::FunctionalSpec;
use crate::error::{LrdError, Result};
use crate::quad;
use serde::{Deserialize, Serialize};

/// Exact `P(f(X) > x)`.
pub fn tail_upper(f: &FunctionalSpec, x: f64) -> Result<f64> {
    match f {
        FunctionalSpec::PowerAbs { r, centered } => {
            let m = if *centered { quad::abs_normal_moment(*r) } else { 0.0 };
            let y = x + m;
            if y <= 0.0 {
                return Ok(1.0);
            }
            let t = y.powf(1.0 / r);
            Ok(if *r < 0.0 {
                quad::normal_central(t)
            } else {
                2.0 * quad::normal_tail(t)
            })
        }
        FunctionalSpec::SignedPower { r } => {
            if x < 0.0 {
                return Ok(1.0 - tail_upper(f, -x)?);
            }
            if x == 0.0 {
                return Ok(0.5);
            }
            let t = x.powf(1.0 / r);
            Ok(if *r < 0.0 {
                0.5 * quad::normal_central(t)
            } else {
                quad::normal_tail(t)
            })
        }
        FunctionalSpec::HermiteFn { k: 1 } => Ok(quad::normal_tail(x)),
        FunctionalSpec::HermiteFn { k: 2 } => {
            if x < -1.0 {
                Ok(1.0)
            } else {
                Ok(2.0 * quad::normal_tail((x + 1.0).sqrt()))
            }
        }
        FunctionalSpec::HermiteFn { k } => Err(LrdError::UnsupportedFunctional(format!(
            "no closed-form tail for hermite order {k}"
        ))),
        FunctionalSpec::AffineOf { inner, a, b } => {
            let y = (x - b) / a;
            if *a > 0.0 {
                tail_upper(inner, y)
            } else {
                Ok(1.0 - tail_upper(inner, y)?)
            }
        }
    }
}

/// Exact `P(f(X) < -x)`, computed structurally so deep tails keep full
/// relative precision (1 - upper(-x) would cancel catastrophically).
pub fn tail_lower(f: &FunctionalSpec, x: f64) -> Result<f64> {
    match f {
        FunctionalSpec::PowerAbs { r, centered } => {
            let m = if *centered { quad::abs_normal_moment(*r) } else { 0.0 };
            let y = m - x;
            if y <= 0.0 {
                return Ok(0.0);
            }
            let t = y.powf(1.0 / r);
            Ok(if *r < 0.0 {
                2.0 * quad::normal_tail(t)
            } else {
                quad::normal_central(t)
            })
        }
        FunctionalSpec::SignedPower { .. } => tail_upper(f, x),
        FunctionalSpec::HermiteFn { k: 1 } => Ok(quad::normal_tail(x)),
        FunctionalSpec::HermiteFn { k: 2 } => {
            if x >= 1.0 {
                Ok(0.0)
            } else {
                Ok(quad::normal_central((1.0 - x).sqrt()))
            }
        }
        FunctionalSpec::HermiteFn { k } => Err(LrdError::UnsupportedFunctional(format!(
            "no closed-form tail for hermite order {k}"
        ))),
        FunctionalSpec::AffineOf { inner, a, b } => {
            if *a > 0.0 {
                tail_lower(inner, (x + b) / a)
            } else {
                tail_upper(inner, (-x - b) / a)
            }
        }
    }
}

/// Exact `P(|f(X)| > x)` for x >= 0.
pub fn tail_abs(f: &FunctionalSpec, x: f64) -> Result<f64> {
    Ok(tail_upper(f, x)? + tail_lower(f, x)?)
}

/// Exact upper and lower tails at a point.
pub fn tail_probabilities(f: &FunctionalSpec, x: f64) -> Result<(f64, f64)> {
    Ok((tail_upper(f, x)?, tail_lower(f, x)?))
}

/// A fitted regularly varying tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub alpha: f64,
    /// Skewness in [-1, 1]: (upper - lower)/(upper + lower) in the limit.
    pub beta: f64,
    /// Limit constant of the slowly varying factor L2.
    pub l2: f64,
}

/// Analytic tail model for the supported heavy-tailed functionals.
pub fn fit_tail_model(f: &FunctionalSpec) -> Result<TailModel> {
    f.validate()?;
    match f {
        FunctionalSpec::PowerAbs { r, .. } if *r < 0.0 => Ok(TailModel {
            alpha: -1.0 / r,
            beta: 1.0,
            l2: (2.0 / std::f64::consts::PI).sqrt(),
        }),
        FunctionalSpec::SignedPower { r } if *r < 0.0 => Ok(TailModel {
            alpha: -1.0 / r,
            beta: 0.0,
            l2: (2.0 / std::f64::consts::PI).sqrt(),
        }),
        FunctionalSpec::AffineOf { inner, a, .. } => {
            let m = fit_tail_model(inner)?;
            Ok(TailModel {
                alpha: m.alpha,
                beta: if *a > 0.0 { m.beta } else { -m.beta },
                l2: m.l2 * a.abs().powf(m.alpha),
            })
        }
        other => Err(LrdError::NoPowerTail(format!("{other:?}"))),
    }
}

/// Numeric tail fit by log-log regression of `P(|f| > x)` over the decades
/// `[x_lo, x_hi]`. Rejects tails whose local slope drifts (no power law).
pub fn fit_tail_model_numeric(f: &FunctionalSpec, x_lo: f64, x_hi: f64) -> Result<TailModel> {
    let npts = 60;
    let mut xs = Vec::with_capacity(npts);
    let mut ys = Vec::with_capacity(npts);
    for i in 0..npts {
        let lx = x_lo.ln() + (x_hi.ln() - x_lo.ln()) * i as f64 / (npts - 1) as f64;
        let p = tail_abs(f, lx.exp())?;
        if p <= 0.0 {
            return Err(LrdError::NoPowerTail("tail vanishes on grid".into()));
        }
        xs.push(lx);
        ys.push(p.ln());
    }
    let half = npts / 2;
    let s1 = quad::ols_slope(&xs[..half], &ys[..half]);
    let s2 = quad::ols_slope(&xs[half..], &ys[half..]);
    if (s1 - s2).abs() > 0.05 {
        return Err(LrdError::NoPowerTail(format!(
            "log-log slope drifts from {s1:.3} to {s2:.3}"
        )));
    }
    let alpha = -quad::ols_slope(&xs, &ys);
    let up = tail_upper(f, x_hi)?;
    let lo = tail_lower(f, x_hi)?;
    let beta = (up - lo) / (up + lo);
    let l2 = (up + lo) * x_hi.powf(alpha);
    Ok(TailModel { alpha, beta, l2 })
}

/// Norming constant `a_n` solving `P(|f(X)| > a_n) = 1/n` exactly, by
/// bisection in log space to relative residual 1e-12.
pub fn norming_constant(f: &FunctionalSpec, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(LrdError::NTooSmall(n as usize));
    }
    let target = 1.0 / n as f64;
    let mut lo = -40.0f64;
    let mut hi = 1.0f64;
    while tail_abs(f, hi.exp())? > target {
        lo = hi;
        hi += 1.0;
        if hi > 700.0 {
            return Err(LrdError::NoPowerTail("norming bracket exhausted".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail_abs(f, mid.exp())? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

fn layer_cake<G: Fn(f64) -> f64>(g: G, a: f64) -> f64 {
    // int_0^a g(t) dt with a log split at 1 to keep panels balanced.
    let inner = quad::integrate(&g, 0.0, a.min(1.0), 32);
    if a <= 1.0 {
        return inner;
    }
    inner + quad::integrate(&|u: f64| u.exp() * g(u.exp()), 0.0, a.ln(), 48)
}

/// `E[f(X)^2 1{|f(X)| <= a}]` via the layer-cake identity.
pub fn truncated_second_moment(f: &FunctionalSpec, a: f64) -> Result<f64> {
    // tail support is structural, so probe once and unwrap inside the panels
    let pa = tail_abs(f, a)?;
    let integral = layer_cake(|t| 2.0 * t * tail_abs(f, t).unwrap(), a);
    Ok(integral - a * a * pa)
}

/// `E[f(X) 1{|f(X)| <= a}]`, the centering sequence for alpha <= 1.
pub fn truncated_mean(f: &FunctionalSpec, a: f64) -> Result<f64> {
    let pa = tail_upper(f, a)? - tail_lower(f, a)?;
    let diff = |t: f64| tail_upper(f, t).unwrap() - tail_lower(f, t).unwrap();
    let integral = layer_cake(diff, a);
    Ok(integral - a * pa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_abs_diff_eq;

    fn f_ref() -> FunctionalSpec {
        FunctionalSpec::power_abs(-0.7)
    }

    #[test]
    fn tails_match_monte_carlo() {
        let f = f_ref();
        let n = 2_000_000usize;
        let mut r = rng::stream(5, 0);
        let xs = rng::standard_normal_vec(&mut r, n);
        for &x in &[0.5, 2.0, 10.0] {
            let emp = xs.iter().filter(|&&v| f.eval(v) > x).count() as f64 / n as f64;
            let exact = tail_upper(&f, x).unwrap();
            let se = (exact * (1.0 - exact) / n as f64).sqrt();
            assert!((emp - exact).abs() < 5.0 * se, "x={x}: {emp} vs {exact}");
        }
        // lower tail dies at the centering constant
        let m = quad::abs_normal_moment(-0.7);
        assert_abs_diff_eq!(tail_lower(&f, m + 0.01).unwrap(), 0.0, epsilon = 1e-15);
        assert!(tail_lower(&f, m - 1.0).unwrap() > 0.0);
    }

    #[test]
    fn analytic_model_matches_numeric_fit() {
        let f = f_ref();
        let a = fit_tail_model(&f).unwrap();
        let n = fit_tail_model_numeric(&f, 1e4, 1e8).unwrap();
        assert_abs_diff_eq!(a.alpha, 10.0 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n.alpha, a.alpha, epsilon = 2e-3);
        assert_abs_diff_eq!(n.beta, 1.0, epsilon = 1e-12);
        assert!((n.l2 / a.l2 - 1.0).abs() < 0.01, "{} vs {}", n.l2, a.l2);
    }

    #[test]
    fn symmetric_functional_has_zero_skew() {
        let f = FunctionalSpec::SignedPower { r: -0.5 };
        let m = fit_tail_model(&f).unwrap();
        assert_eq!(m.alpha, 2.0);
        assert_eq!(m.beta, 0.0);
        let n = fit_tail_model_numeric(&f, 1e4, 1e8).unwrap();
        assert!(n.beta.abs() < 1e-10);
    }

    #[test]
    fn affine_rescaling_of_tail() {
        let f = f_ref();
        let g = f.clone().scaled(3.0);
        let mf = fit_tail_model(&f).unwrap();
        let mg = fit_tail_model(&g).unwrap();
        assert_eq!(mg.alpha, mf.alpha);
        assert_abs_diff_eq!(mg.l2, mf.l2 * 3f64.powf(mf.alpha), epsilon = 1e-12);
        let neg = FunctionalSpec::AffineOf { inner: Box::new(f), a: -1.0, b: 0.0 };
        assert_eq!(fit_tail_model(&neg).unwrap().beta, -1.0);
    }

    #[test]
    fn light_tails_rejected() {
        assert!(matches!(
            fit_tail_model(&FunctionalSpec::HermiteFn { k: 2 }),
            Err(LrdError::NoPowerTail(_))
        ));
        // exp(-x/2) tail drifts on a log-log plot
        assert!(matches!(
            fit_tail_model_numeric(&FunctionalSpec::HermiteFn { k: 2 }, 5.0, 100.0),
            Err(LrdError::NoPowerTail(_))
        ));
    }

    #[test]
    fn norming_constant_residual_and_growth() {
        let f = f_ref();
        for &n in &[1u64 << 10, 1 << 14, 1 << 20] {
            let a = norming_constant(&f, n).unwrap();
            let resid = (n as f64 * tail_abs(&f, a).unwrap() - 1.0).abs();
            assert!(resid < 1e-9, "n={n} residual {resid}");
        }
        // a_n ~ const * n^{1/alpha}; closed form through the central cdf:
        // P(|f| > x) = erf((x+m)^{1/r} / sqrt 2), so
        // a_n = (sqrt 2 * erfinv(1/n))^r - m.
        let n = 1u64 << 16;
        let a = norming_constant(&f, n).unwrap();
        // invert erf by bisection, independently of the sampler path
        let target = 1.0 / n as f64;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if quad::normal_central(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let oracle = t.powf(-0.7) - quad::abs_normal_moment(-0.7);
        assert!((a / oracle - 1.0).abs() < 1e-9, "{a} vs {oracle}");
    }

    #[test]
    fn truncated_second_moment_recovers_full_variance() {
        // r = -0.3: finite variance m_{2r} - m_r^2.
        let f = FunctionalSpec::power_abs(-0.3);
        let var = quad::abs_normal_moment(-0.6) - quad::abs_normal_moment(-0.3).powi(2);
        let trunc = truncated_second_moment(&f, 1e8).unwrap();
        assert!((trunc / var - 1.0).abs() < 1e-5, "{trunc} vs {var}");
    }

    #[test]
    fn truncated_second_moment_karamata_ratio() {
        // For tail index alpha < 2 the truncated second moment satisfies
        // E[f^2 1{|f|<=a}] / (a^2 P(|f|>a)) -> alpha/(2-alpha).
        let f = f_ref();
        let alpha = 10.0 / 7.0;
        let target = alpha / (2.0 - alpha);
        let mut prev_err = f64::INFINITY;
        for &a in &[1e4, 1e6, 1e8] {
            let ratio = truncated_second_moment(&f, a).unwrap()
                / (a * a * tail_abs(&f, a).unwrap());
            let err = (ratio / target - 1.0).abs();
            assert!(err < prev_err, "ratio not converging at a={a}");
            prev_err = err;
        }
        assert!(prev_err < 0.02, "final relative error {prev_err}");
    }

    #[test]
    fn truncated_mean_sign_and_symmetry() {
        // symmetric functional: zero truncated mean
        let s = FunctionalSpec::SignedPower { r: -0.8 };
        assert!(truncated_mean(&s, 1e5).unwrap().abs() < 1e-10);
        // centered functional: full mean is zero, so the truncated mean
        // balances the discarded upper tail mass: E[f 1{|f|<=a}] =
        // -E[f 1{f>a}] < 0 and ~ -(alpha/(alpha-1) - 1) a P(f > a)... for
        // alpha > 1 it tends to 0 like a^{1-alpha}.
        let f = f_ref();
        let tm = truncated_mean(&f, 1e6).unwrap();
        assert!(tm < 0.0);
        // Karamata: E[f 1{f>a}] ~ (alpha/(alpha-1)) a P(f>a)... the excess
        // over a is a P /(alpha-1), total a P alpha/(alpha-1).
        let a = 1e6;
        let alpha = 10.0 / 7.0;
        let pred = -(alpha / (alpha - 1.0)) * a * tail_upper(&f, a).unwrap();
        assert!((tm / pred - 1.0).abs() < 0.01, "{tm} vs {pred}");
    }
}
