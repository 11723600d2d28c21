//! Test statistics used by the Monte Carlo harness.

use crate::error::{LrdError, Result};
use serde::{Deserialize, Serialize};

/// Survival function of the Kolmogorov distribution,
/// Q(lam) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lam^2).
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_eff: f64,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value at
/// effective size m n / (m + n).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(LrdError::InvalidParameter("ks needs at least 2 points per sample".into()));
    }
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(|u, v| u.total_cmp(v));
    ys.sort_by(|u, v| u.total_cmp(v));
    let (m, n) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < m && j < n {
        let t = xs[i].min(ys[j]);
        while i < m && xs[i] <= t {
            i += 1;
        }
        while j < n && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    let n_eff = (m * n) as f64 / (m + n) as f64;
    let p = kolmogorov_survival(n_eff.sqrt() * d);
    Ok(KsResult { statistic: d, p_value: p, n_eff })
}

/// One-sample KS against a cdf given as a closure.
pub fn ks_one_sample(a: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if a.len() < 2 {
        return Err(LrdError::InvalidParameter("ks needs at least 2 points".into()));
    }
    let mut xs: Vec<f64> = a.to_vec();
    xs.sort_by(|u, v| u.total_cmp(v));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    let p = kolmogorov_survival(n.sqrt() * d);
    Ok(KsResult { statistic: d, p_value: p, n_eff: n })
}

/// Sup over a theta grid of |empirical cf - target cf| where the target is
/// given as (re, im) at each theta.
pub fn ecf_sup_distance(sample: &[f64], thetas: &[f64], target: impl Fn(f64) -> (f64, f64)) -> f64 {
    let n = sample.len() as f64;
    let mut sup: f64 = 0.0;
    for &th in thetas {
        let (mut re, mut im) = (0.0, 0.0);
        for &x in sample {
            let (s, c) = (th * x).sin_cos();
            re += c;
            im += s;
        }
        re /= n;
        im /= n;
        let (tr, ti) = target(th);
        sup = sup.max(((re - tr).powi(2) + (im - ti).powi(2)).sqrt());
    }
    sup
}

/// Anderson-Darling statistic for normality with mean and variance
/// estimated from the sample, including the small-sample correction
/// (1 + 4/n - 25/n^2). The 1% critical value for this case is 1.035.
pub fn anderson_darling_normal(sample: &[f64]) -> Result<f64> {
    let n = sample.len();
    if n < 8 {
        return Err(LrdError::InvalidParameter("anderson-darling needs n >= 8".into()));
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if var <= 0.0 {
        return Err(LrdError::InvalidParameter("degenerate sample".into()));
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = sample.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(|u, v| u.total_cmp(v));
    let mut a2 = 0.0;
    for (i, &zi) in z.iter().enumerate() {
        let phi = crate::quad::normal_cdf(zi).clamp(1e-300, 1.0 - 1e-16);
        let phis = crate::quad::normal_cdf(z[n - 1 - i]).clamp(1e-300, 1.0 - 1e-16);
        a2 += (2.0 * i as f64 + 1.0) * (phi.ln() + (1.0 - phis).ln());
    }
    let a2 = -nf - a2 / nf;
    Ok(a2 * (1.0 + 4.0 / nf - 25.0 / (nf * nf)))
}

/// Spearman rank correlation.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(LrdError::InvalidParameter("spearman needs equal-length samples, n >= 3".into()));
    }
    let ra = midranks(a);
    let rb = midranks(b);
    pearson(&ra, &rb)
}

fn midranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(LrdError::InvalidParameter("constant sample in correlation".into()));
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Variance-to-mean ratio of count data.
pub fn dispersion_index(counts: &[u64]) -> Result<f64> {
    if counts.len() < 2 {
        return Err(LrdError::InvalidParameter("dispersion needs at least 2 counts".into()));
    }
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    if mean == 0.0 {
        return Err(LrdError::InvalidParameter("all counts zero".into()));
    }
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var / mean)
}
