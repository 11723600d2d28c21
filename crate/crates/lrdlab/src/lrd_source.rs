//! Long-range dependent Gaussian sources.
//!
//! The primary model is the moving average `X_i = sum_j b_j xi_{i-j}` with
//! `b_j ~ j^{H-3/2} L1(j)` normalized to unit variance. Three generators are
//! provided:
//!
//! * [`sample_ma_path`] - direct convolution of the truncated coefficients,
//! * [`sample_ma_exact_circulant`] - exact sampling of the *untruncated*
//!   moving average via circulant embedding of its autocovariance,
//! * [`sample_fgn_circulant`] - exact fractional Gaussian noise, an
//!   independent cross-check sharing the same covariance asymptotics.

use crate::error::{LrdError, Result};
use crate::quad;
use crate::rng;
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;

/// The parametric slowly varying family `L(x) = c * ln(e + x)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SlowlyVaryingSpec {
    Constant { c: f64 },
    LogPower { c: f64, p: f64 },
}

impl SlowlyVaryingSpec {
    pub fn constant(c: f64) -> Self {
        SlowlyVaryingSpec::Constant { c }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SlowlyVaryingSpec::Constant { c } => c,
            SlowlyVaryingSpec::LogPower { c, p } => c * (std::f64::consts::E + x).ln().powf(p),
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            SlowlyVaryingSpec::Constant { c } | SlowlyVaryingSpec::LogPower { c, .. } => c,
        }
    }

    /// Exponent of the log factor (0 for the constant family).
    pub fn log_exponent(&self) -> f64 {
        match *self {
            SlowlyVaryingSpec::Constant { .. } => 0.0,
            SlowlyVaryingSpec::LogPower { p, .. } => p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale() <= 0.0 {
            return Err(LrdError::InvalidParameter(
                "slowly varying scale c must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Configuration of the long-range dependent source.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LrdConfig {
    /// Hurst index. Long memory needs (1/2, 1); values in (0, 1/2] are
    /// accepted as the short-memory branch.
    pub h: f64,
    pub l1: SlowlyVaryingSpec,
    /// Coefficient truncation length for the direct convolution generator.
    pub m: usize,
}

impl LrdConfig {
    pub fn new(h: f64, l1: SlowlyVaryingSpec, m: usize) -> Result<Self> {
        let cfg = LrdConfig { h, l1, m };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(LrdError::InvalidHurst(self.h));
        }
        if self.m < 2 {
            return Err(LrdError::TruncationTooShort(self.m));
        }
        self.l1.validate()
    }

    pub fn short_memory_branch(&self) -> bool {
        self.h <= 0.5
    }
}

/// Normalized moving-average coefficients.
#[derive(Debug, Clone)]
pub struct CoefficientSeq {
    pub b: Vec<f64>,
    pub h: f64,
    pub l1: SlowlyVaryingSpec,
    /// Constant `s` with `b_j = s * L1(j+1) * (j+1)^{H-3/2}`; the effective
    /// slowly varying function after normalization is `s * L1`.
    pub scale_const: f64,
    /// Bound on the discarded mass `sum_{j>=M} b_j^2`.
    pub truncation_bias: f64,
}

/// Builds the truncated, unit-variance coefficient sequence. The raw
/// `b_j = j^{H-3/2} L1(j)` is undefined at j = 0; the (j+1) shift preserves
/// the regular variation.
pub fn build_coefficients(cfg: &LrdConfig) -> Result<CoefficientSeq> {
    cfg.validate()?;
    let e = cfg.h - 1.5;
    let mut b: Vec<f64> = (0..cfg.m)
        .map(|j| {
            let x = (j + 1) as f64;
            cfg.l1.eval(x) * x.powf(e)
        })
        .collect();
    let sumsq: f64 = b.iter().map(|v| v * v).sum();
    let s = 1.0 / sumsq.sqrt();
    for v in &mut b {
        *v *= s;
    }
    // sum_{j>=M} b_j^2 <= int_M^inf (s L1(x) x^{H-3/2})^2 dx, evaluated with
    // the effective constant at M.
    let m = cfg.m as f64;
    let tail = (s * cfg.l1.eval(m)).powi(2) * m.powf(2.0 * cfg.h - 2.0) / (2.0 - 2.0 * cfg.h);
    Ok(CoefficientSeq {
        b,
        h: cfg.h,
        l1: cfg.l1,
        scale_const: s,
        truncation_bias: tail,
    })
}

impl CoefficientSeq {
    /// Effective slowly varying value at `x`, normalization included.
    pub fn effective_l1(&self, x: f64) -> f64 {
        self.scale_const * self.l1.eval(x)
    }
}

/// Truncated autocovariance `rho(k) = sum_j b_j b_{j+k}`.
pub fn autocovariance(coeffs: &CoefficientSeq, k: usize) -> Result<f64> {
    if k >= coeffs.b.len() {
        return Err(LrdError::LagOutOfRange {
            lag: k,
            max: coeffs.b.len(),
        });
    }
    Ok(coeffs.b[..coeffs.b.len() - k]
        .iter()
        .zip(&coeffs.b[k..])
        .map(|(a, b)| a * b)
        .sum())
}

fn fft_autocorrelation(c: &[f64], kmax: usize) -> Vec<f64> {
    let len = (c.len() + kmax).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    let mut buf: Vec<Complex<f64>> = c.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    fft.process(&mut buf);
    for v in buf.iter_mut() {
        *v = *v * v.conj();
    }
    ifft.process(&mut buf);
    buf[..=kmax].iter().map(|v| v.re / len as f64).collect()
}

/// All truncated autocovariances `rho(0..=kmax)` in one FFT pass.
pub fn autocovariance_all(coeffs: &CoefficientSeq, kmax: usize) -> Result<Vec<f64>> {
    if kmax >= coeffs.b.len() {
        return Err(LrdError::LagOutOfRange {
            lag: kmax,
            max: coeffs.b.len(),
        });
    }
    Ok(fft_autocorrelation(&coeffs.b, kmax))
}

/// Autocovariance of the *untruncated* moving average, `rho(0..=kmax)`,
/// normalized to rho(0) = 1. The head `j < J` is summed exactly by FFT; the
/// tail `j >= J` is an Euler-Maclaurin-corrected integral. Also returns the
/// effective L1 constant multiplier `1/sqrt(S0)` of the infinite sum.
pub fn exact_ma_autocovariance(
    h: f64,
    l1: SlowlyVaryingSpec,
    kmax: usize,
) -> Result<(Vec<f64>, f64)> {
    if !(h > 0.0 && h < 1.0) {
        return Err(LrdError::InvalidHurst(h));
    }
    let e = h - 1.5;
    let head_len: usize = (1 << 20).max(4 * (kmax + 1));
    let c: Vec<f64> = (0..head_len)
        .map(|j| {
            let x = (j + 1) as f64;
            l1.eval(x) * x.powf(e)
        })
        .collect();
    let mut s = fft_autocorrelation(&c, kmax);

    // g(x) = L1(x+1) L1(x+l+1) ((x+1)(x+l+1))^{H-3/2}, tail over [J, inf).
    let jf = head_len as f64;
    let g = |x: f64, l: f64| l1.eval(x + 1.0) * l1.eval(x + l + 1.0) * ((x + 1.0) * (x + l + 1.0)).powf(e);
    // Substitution x = J t^{-k} regularizes the power-law decay.
    let k_sub = (2.0 / (2.0 - 2.0 * h)).ceil();
    for (l, sv) in s.iter_mut().enumerate() {
        let lf = l as f64;
        let integrand = |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let x = jf * t.powf(-k_sub);
            g(x, lf) * k_sub * jf * t.powf(-k_sub - 1.0)
        };
        let tail_int = quad::integrate(&integrand, 0.0, 1.0, 8);
        let dg = (g(jf + 0.5, lf) - g(jf - 0.5, lf)) / 1.0;
        *sv += tail_int + 0.5 * g(jf, lf) - dg / 12.0;
    }
    let s0 = s[0];
    for v in s.iter_mut() {
        *v /= s0;
    }
    Ok((s, 1.0 / s0.sqrt()))
}

/// Exact fGn autocovariance `0.5 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})`.
pub fn fgn_autocovariance(h: f64, k: usize) -> f64 {
    let k = k as f64;
    let p = 2.0 * h;
    0.5 * ((k + 1.0).powf(p) - 2.0 * k.powf(p) + (k - 1.0).abs().powf(p))
}

/// A sampled Gaussian sequence with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianSample {
    pub values: Vec<f64>,
    pub seed: u64,
    pub config_hash: String,
    pub h: f64,
    pub m: usize,
}

/// Short hex digest of any serializable config.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn convolve_ma(b: &[f64], innovations: &[f64], n: usize) -> Vec<f64> {
    let m = b.len();
    let len = (n + 2 * m).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fb.resize(len, Complex::new(0.0, 0.0));
    let mut fx: Vec<Complex<f64>> = innovations.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fx.resize(len, Complex::new(0.0, 0.0));
    fft.process(&mut fb);
    fft.process(&mut fx);
    for (a, b) in fx.iter_mut().zip(&fb) {
        *a = *a * b;
    }
    ifft.process(&mut fx);
    fx[m - 1..m - 1 + n].iter().map(|v| v.re / len as f64).collect()
}

/// Stationary sample of the truncated moving average, via FFT convolution of
/// `n + M` innovations from substream (`seed`, `stream`).
pub fn sample_ma_path_stream(
    coeffs: &CoefficientSeq,
    n: usize,
    seed: u64,
    stream_id: u64,
) -> GaussianSample {
    let m = coeffs.b.len();
    let mut r = rng::stream(seed, stream_id);
    let innovations = rng::standard_normal_vec(&mut r, n + m);
    let values = convolve_ma(&coeffs.b, &innovations, n);
    GaussianSample {
        values,
        seed,
        config_hash: config_hash(&(coeffs.h, coeffs.b.len() as u64, "ma")),
        h: coeffs.h,
        m,
    }
}

pub fn sample_ma_path(coeffs: &CoefficientSeq, n: usize, seed: u64) -> GaussianSample {
    sample_ma_path_stream(coeffs, n, seed, 0)
}

/// Eigenvalues of the circulant embedding of `cov[0..=n]` (size 2n).
fn circulant_eigenvalues(cov: &[f64]) -> Vec<f64> {
    let n = cov.len() - 1;
    let size = 2 * n;
    let mut c = vec![Complex::new(0.0, 0.0); size];
    for (k, item) in c.iter_mut().enumerate() {
        let lag = if k <= n { k } else { size - k };
        *item = Complex::new(cov[lag], 0.0);
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut c);
    c.iter().map(|v| v.re).collect()
}

/// Davies-Harte sampling given circulant eigenvalues.
fn circulant_sample(eigs: &[f64], n: usize, rng_: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let size = eigs.len();
    let half = size / 2;
    if let Some(min) = eigs.iter().cloned().reduce(f64::min) {
        if min < -1e-9 {
            return Err(LrdError::EmbeddingNotPsd(min));
        }
    }
    let z = rng::standard_normal_vec(rng_, size);
    let mut spec = vec![Complex::new(0.0, 0.0); size];
    let scale = |lam: f64| (lam.max(0.0) / size as f64).sqrt();
    spec[0] = Complex::new(z[0] * scale(eigs[0]) * std::f64::consts::SQRT_2, 0.0);
    spec[half] = Complex::new(z[half] * scale(eigs[half]) * std::f64::consts::SQRT_2, 0.0);
    for k in 1..half {
        let s = scale(eigs[k]);
        spec[k] = Complex::new(z[k] * s, z[half + k] * s);
        spec[size - k] = spec[k].conj();
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut spec);
    Ok(spec[..n].iter().map(|v| v.re / std::f64::consts::SQRT_2).collect())
}

/// Exact fractional Gaussian noise via circulant embedding.
pub fn sample_fgn_circulant(h: f64, n: usize, seed: u64) -> Result<GaussianSample> {
    sample_fgn_circulant_stream(h, n, seed, 0)
}

pub fn sample_fgn_circulant_stream(
    h: f64,
    n: usize,
    seed: u64,
    stream_id: u64,
) -> Result<GaussianSample> {
    if !(h > 0.0 && h < 1.0) {
        return Err(LrdError::InvalidHurst(h));
    }
    let cov: Vec<f64> = (0..=n).map(|k| fgn_autocovariance(h, k)).collect();
    let eigs = circulant_eigenvalues(&cov);
    let mut r = rng::stream(seed, stream_id);
    let values = circulant_sample(&eigs, n, &mut r)?;
    Ok(GaussianSample {
        values,
        seed,
        config_hash: config_hash(&(h, n as u64, "fgn")),
        h,
        m: n,
    })
}

/// Precomputed circulant embedding of the untruncated moving average; reuse
/// it across replicas of an ensemble.
#[derive(Debug, Clone)]
pub struct ExactMaEmbedding {
    pub h: f64,
    pub n: usize,
    eigs: Vec<f64>,
    /// Effective L1 constant multiplier of the infinite coefficient sum.
    pub scale_const: f64,
    pub l1: SlowlyVaryingSpec,
}

impl ExactMaEmbedding {
    pub fn new(h: f64, l1: SlowlyVaryingSpec, n: usize) -> Result<Self> {
        let (cov, scale_const) = exact_ma_autocovariance(h, l1, n)?;
        let eigs = circulant_eigenvalues(&cov);
        if let Some(min) = eigs.iter().cloned().reduce(f64::min) {
            if min < -1e-9 {
                return Err(LrdError::EmbeddingNotPsd(min));
            }
        }
        Ok(ExactMaEmbedding {
            h,
            n,
            eigs,
            scale_const,
            l1,
        })
    }

    pub fn effective_l1(&self, x: f64) -> f64 {
        self.scale_const * self.l1.eval(x)
    }

    pub fn sample(&self, seed: u64, stream_id: u64) -> Result<GaussianSample> {
        let mut r = rng::stream(seed, stream_id);
        let values = circulant_sample(&self.eigs, self.n, &mut r)?;
        Ok(GaussianSample {
            values,
            seed,
            config_hash: config_hash(&(self.h, self.n as u64, "ma_exact")),
            h: self.h,
            m: self.n,
        })
    }
}

/// Exact single path of the untruncated moving average.
pub fn sample_ma_exact_circulant(
    h: f64,
    l1: SlowlyVaryingSpec,
    n: usize,
    seed: u64,
) -> Result<GaussianSample> {
    ExactMaEmbedding::new(h, l1, n)?.sample(seed, 0)
}

const RAW_MAGIC: &[u8; 8] = b"LRDLAB01";

impl GaussianSample {
    /// CSV: a metadata comment, a `value` header, one value per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# lrdlab gaussian sample H={} M={} seed={} hash={}",
            self.h, self.m, self.seed, self.config_hash
        )?;
        writeln!(w, "value")?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    /// Raw stream: 32-byte header (8-byte magic, u64 LE JSON length, 16
    /// reserved bytes), JSON metadata, then little-endian f64 values.
    pub fn write_raw<W: Write>(&self, mut w: W) -> Result<()> {
        let meta = serde_json::to_vec(&serde_json::json!({
            "h": self.h, "m": self.m, "seed": self.seed, "hash": self.config_hash,
            "len": self.values.len(),
        }))?;
        let mut header = [0u8; 32];
        header[..8].copy_from_slice(RAW_MAGIC);
        header[8..16].copy_from_slice(&(meta.len() as u64).to_le_bytes());
        w.write_all(&header)?;
        w.write_all(&meta)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}
