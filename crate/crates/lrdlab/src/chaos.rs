//! Hermite chaos expansions of functionals of a standard Gaussian.
//!
//! Uses probabilists' Hermite polynomials `h_k` with `E[h_j(X) h_k(X)] =
//! k! delta_{jk}`. The chaos coefficients are `f_k = E[f(X) h_k(X)] / k!`
//! and the Hermite rank is the smallest k >= 1 with `f_k != 0`.

use crate::error::{LrdError, Result};
use crate::quad;
use serde::{Deserialize, Serialize};

/// Factorial overflow guard for downstream norms f_k^2 k!.
pub const MAX_HERMITE_ORDER: usize = 170;

/// Default quadrature panel budget for the smooth part of the integrand.
pub const DEFAULT_NODES: usize = 96;

const RANK_REL_TOL: f64 = 1e-7;

/// Functionals applied pointwise to the Gaussian sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalSpec {
    /// `|x|^r - m_r` when centered, `|x|^r` otherwise. Requires r > -1 for
    /// integrability; r < 0 produces the heavy upper tail.
    PowerAbs { r: f64, centered: bool },
    /// `sign(x) |x|^r`, odd, mean zero by symmetry.
    SignedPower { r: f64 },
    /// The Hermite polynomial `h_k` itself.
    HermiteFn { k: usize },
    /// `a * inner(x) + b`.
    AffineOf {
        inner: Box<FunctionalSpec>,
        a: f64,
        b: f64,
    },
}

impl FunctionalSpec {
    pub fn power_abs(r: f64) -> Self {
        FunctionalSpec::PowerAbs { r, centered: true }
    }

    pub fn scaled(self, a: f64) -> Self {
        FunctionalSpec::AffineOf {
            inner: Box::new(self),
            a,
            b: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionalSpec::PowerAbs { r, .. } | FunctionalSpec::SignedPower { r } => {
                if *r == 0.0 {
                    Err(LrdError::InvalidParameter("power exponent r must be nonzero".into()))
                } else {
                    Ok(())
                }
            }
            FunctionalSpec::HermiteFn { k } => {
                if *k == 0 || *k > MAX_HERMITE_ORDER {
                    Err(LrdError::OrderTooLarge(*k))
                } else {
                    Ok(())
                }
            }
            FunctionalSpec::AffineOf { inner, a, .. } => {
                if *a == 0.0 {
                    Err(LrdError::InvalidParameter("affine scale a must be nonzero".into()))
                } else {
                    inner.validate()
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionalSpec::PowerAbs { r, centered } => {
                let v = x.abs().powf(*r);
                if *centered {
                    v - quad::abs_normal_moment(*r)
                } else {
                    v
                }
            }
            FunctionalSpec::SignedPower { r } => x.signum() * x.abs().powf(*r),
            FunctionalSpec::HermiteFn { k } => hermite_eval_unchecked(*k, x),
            FunctionalSpec::AffineOf { inner, a, b } => a * inner.eval(x) + b,
        }
    }

    /// Evenness/oddness of the functional, if known by construction.
    pub(crate) fn parity(&self) -> Option<Parity> {
        match self {
            FunctionalSpec::PowerAbs { .. } => Some(Parity::Even),
            FunctionalSpec::SignedPower { .. } => Some(Parity::Odd),
            FunctionalSpec::HermiteFn { k } => Some(if k % 2 == 0 { Parity::Even } else { Parity::Odd }),
            FunctionalSpec::AffineOf { inner, b, .. } => match (inner.parity(), *b) {
                (p, 0.0) => p,
                (Some(Parity::Even), _) => Some(Parity::Even),
                _ => None,
            },
        }
    }

    /// Power-law exponent r of the `|x|^r` singularity at the origin, if any.
    pub(crate) fn origin_exponent(&self) -> Option<f64> {
        match self {
            FunctionalSpec::PowerAbs { r, .. } | FunctionalSpec::SignedPower { r } if *r < 0.0 => Some(*r),
            FunctionalSpec::AffineOf { inner, .. } => inner.origin_exponent(),
            _ => None,
        }
    }

    /// Chaos coefficients are defined only when E|f(X)| < infinity.
    pub fn integrable(&self) -> bool {
        match self.origin_exponent() {
            Some(r) => r > -1.0,
            None => true,
        }
    }

    /// True when Var f(X) = infinity (origin singularity at or past -1/2).
    pub fn infinite_variance(&self) -> bool {
        matches!(self.origin_exponent(), Some(r) if r <= -0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Parity {
    Even,
    Odd,
}

fn hermite_eval_unchecked(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Probabilists' Hermite polynomial `h_k(x)` by the three-term recurrence.
pub fn hermite_eval(k: usize, x: f64) -> Result<f64> {
    if k > MAX_HERMITE_ORDER {
        return Err(LrdError::OrderTooLarge(k));
    }
    Ok(hermite_eval_unchecked(k, x))
}

/// First `kmax + 1` values `h_0(x) .. h_kmax(x)`.
pub fn hermite_eval_all(kmax: usize, x: f64) -> Vec<f64> {
    assert!(kmax <= MAX_HERMITE_ORDER);
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax == 0 {
        return out;
    }
    out.push(x);
    for j in 1..kmax {
        let next = x * out[j] - j as f64 * out[j - 1];
        out.push(next);
    }
    out
}

/// A truncated chaos expansion of a functional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChaosDecomposition {
    pub functional: FunctionalSpec,
    /// f_0 .. f_K.
    pub coeffs: Vec<f64>,
    /// Hermite rank, None if every order up to K is below tolerance.
    pub rank: Option<usize>,
    /// Quadrature panel budget used.
    pub nodes: usize,
    /// Relative rank threshold on |f_k| sqrt(k!).
    pub tolerance: f64,
}

/// Chaos coefficients `f_0 .. f_kmax` of the functional. Known parities give
/// exact zeros; functionals with a negative-power singularity at the origin
/// are integrated with a singularity-absorbing substitution near zero.
pub fn chaos_coefficients(f: &FunctionalSpec, kmax: usize, nodes: usize) -> Result<ChaosDecomposition> {
    f.validate()?;
    if kmax > MAX_HERMITE_ORDER {
        return Err(LrdError::OrderTooLarge(kmax));
    }
    if !f.integrable() {
        return Err(LrdError::NonIntegrable(f.origin_exponent().unwrap_or(f64::NAN)));
    }
    let parity = f.parity();
    let sing = f.origin_exponent();
    let mut fk = vec![0.0; kmax + 1];
    let mut fact = 1.0;
    for (k, item) in fk.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        let skip = match parity {
            Some(Parity::Even) => k % 2 == 1,
            Some(Parity::Odd) => k % 2 == 0,
            None => false,
        };
        if skip {
            continue;
        }
        let integrand = |x: f64| f.eval(x) * hermite_eval_unchecked(k, x) * quad::normal_pdf(x);
        let upper = 40.0;
        let val = match sing {
            Some(r) => {
                // split at 1; the singular piece on (0, 1] absorbs |x|^r
                let core =
                    |x: f64| f.eval(x) * hermite_eval_unchecked(k, x) * quad::normal_pdf(x) * x.abs().powf(-r);
                let pos = quad::integrate_singular_power(&|x| core(x), r, 1.0, nodes / 4)
                    + quad::integrate(&integrand, 1.0, upper, nodes);
                let neg = quad::integrate_singular_power(&|x| core(-x), r, 1.0, nodes / 4)
                    + quad::integrate(&|x| integrand(-x), 1.0, upper, nodes);
                pos + neg
            }
            None => quad::integrate(&integrand, -upper, upper, 2 * nodes),
        };
        *item = val / fact;
    }
    // Exact coefficients where the expansion is finite.
    if let FunctionalSpec::HermiteFn { k } = f {
        for (i, item) in fk.iter_mut().enumerate() {
            *item = if i == *k { 1.0 } else { 0.0 };
        }
    }
    let rank = rank_of(&fk);
    Ok(ChaosDecomposition {
        functional: f.clone(),
        coeffs: fk,
        rank,
        nodes,
        tolerance: RANK_REL_TOL,
    })
}

fn rank_of(fk: &[f64]) -> Option<usize> {
    let mut weighted = vec![0.0; fk.len()];
    let mut fact = 1.0;
    for (k, w) in weighted.iter_mut().enumerate().skip(1) {
        fact *= k as f64;
        *w = fk[k].abs() * fact.sqrt();
    }
    let max = weighted.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    weighted.iter().enumerate().skip(1).find(|(_, w)| **w > RANK_REL_TOL * max).map(|(k, _)| k)
}

/// Hermite rank of a decomposition.
pub fn hermite_rank(dec: &ChaosDecomposition) -> Result<usize> {
    dec.rank.ok_or(LrdError::RankUndefined(dec.coeffs.len() - 1))
}

impl ChaosDecomposition {
    /// Chaos terms t_k = f_k^2 k! for k >= 1.
    fn terms(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| {
                fact *= k as f64;
                c * c * fact
            })
            .collect()
    }

    /// `Var f(X) = sum_{k>=1} f_k^2 k!`, with a power-law extrapolation of
    /// the truncated tail (the terms of non-smooth functionals decay only
    /// polynomially). Returns (variance, tail estimate added).
    pub fn marginal_variance(&self) -> Result<(f64, f64)> {
        if self.functional.infinite_variance() {
            return Err(LrdError::InfiniteVariance);
        }
        let terms = self.terms();
        let sum: f64 = terms.iter().sum();
        let kmax = terms.len();
        // fit t_k ~ c k^{-s} on the top quarter of nonzero terms
        let pts: Vec<(f64, f64)> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (i + 1, t))
            .filter(|(k, t)| *k > 3 * kmax / 4 && **t > 0.0)
            .map(|(k, t)| ((k as f64).ln(), t.ln()))
            .collect();
        if pts.len() < 3 {
            return Ok((sum, 0.0));
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let s = -quad::ols_slope(&xs, &ys);
        if !(s > 1.0) {
            return Err(LrdError::InfiniteVariance);
        }
        let spacing = if self.functional.parity().is_some() { 2.0 } else { 1.0 };
        let t_last = ys.last().unwrap().exp();
        let tail = t_last * kmax as f64 / (spacing * (s - 1.0));
        Ok((sum + tail, tail))
    }
}

/// Exact variance of the partial sum `Var(sum_{i<=n} f(X_i))` given the
/// autocovariances rho(0..n-1) of the Gaussian sequence:
/// `sum_k f_k^2 k! [n + 2 sum_{l<n} (n-l) rho(l)^k]`.
pub fn chaos_variance_oracle(dec: &ChaosDecomposition, rho: &[f64], n: usize) -> Result<f64> {
    if dec.functional.infinite_variance() {
        return Err(LrdError::InfiniteVariance);
    }
    if rho.len() < n {
        return Err(LrdError::LagOutOfRange { lag: n - 1, max: rho.len() });
    }
    let terms = dec.terms();
    let mut var = 0.0;
    for (i, t) in terms.iter().enumerate() {
        if *t == 0.0 {
            continue;
        }
        let k = (i + 1) as i32;
        let mut lag_sum = n as f64;
        for (l, r) in rho.iter().enumerate().take(n).skip(1) {
            lag_sum += 2.0 * (n - l) as f64 * r.powi(k);
        }
        var += t * lag_sum;
    }
    Ok(var)
}
