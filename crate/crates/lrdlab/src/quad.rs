//! Quadrature and stable normal-law primitives shared by the chaos and tail
//! modules.

use once_cell::sync::Lazy;
use std::f64::consts::{PI, SQRT_2};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Newton iteration from the Chebyshev-angle initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let w = 2.0 / ((1.0 - x * x) * dp * dp);
                nodes[i] = -x;
                nodes[n - 1 - i] = x;
                weights[i] = w;
                weights[n - 1 - i] = w;
                break;
            }
        }
    }
    (nodes, weights)
}

static GL32: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(32));

/// Integrates `f` over [a, b] with a fixed 32-point Gauss-Legendre rule.
pub fn integrate_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = &*GL32;
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Integrates `f` over [a, b] split into `panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| integrate_panel(f, a + i as f64 * h, a + (i + 1) as f64 * h))
        .sum()
}

/// Integrates `x^r * g(x)` over (0, b] for r in (-1, 0). The substitution
/// `u = x^{1+r}` absorbs the singularity: the transformed integrand is
/// `g(u^{1/(1+r)}) / (1+r)`, bounded on (0, b^{1+r}].
pub fn integrate_singular_power<G: Fn(f64) -> f64>(g: &G, r: f64, b: f64, panels: usize) -> f64 {
    assert!(r > -1.0 && r < 0.0);
    let q = 1.0 + r;
    let upper = b.powf(q);
    integrate(&|u: f64| if u <= 0.0 { g(0.0) } else { g(u.powf(1.0 / q)) }, 0.0, upper, panels) / q
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Upper tail P(Z > x), stable for large x via erfc.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / SQRT_2)
}

/// Lower tail P(Z <= x), stable in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    normal_tail(-x)
}

/// P(|Z| <= x) = erf(x / sqrt(2)), stable for small x (series below 1e-4
/// where the library erf loses relative precision and can underflow).
pub fn normal_central(x: f64) -> f64 {
    let y = x / SQRT_2;
    if y.abs() < 1e-4 {
        let c = 2.0 / PI.sqrt();
        return c * y * (1.0 - y * y / 3.0 + y.powi(4) / 10.0);
    }
    statrs::function::erf::erf(y)
}

/// E|Z|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi), for p > -1.
pub fn abs_normal_moment(p: f64) -> f64 {
    2f64.powf(p / 2.0) * statrs::function::gamma::gamma((p + 1.0) / 2.0) / PI.sqrt()
}

/// Ordinary least-squares slope of y against x.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
