//! Batch front-end: parse a JSON experiment config, run one module
//! pipeline, and write CSV/JSON artifacts and optional SVG plots.

use clap::{Parser, Subcommand, ValueEnum};
use lrdlab::chaos::{self, FunctionalSpec};
use lrdlab::error::LrdError;
use lrdlab::experiments::{self, ExperimentConfig, Thresholds};
use lrdlab::limit_processes::{self, HermiteDiscretization};
use lrdlab::lrd_source::{self, LrdConfig};
use lrdlab::regimes::{self, LimitRegime};
use lrdlab::svg;
use lrdlab::tails;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const DEFAULT_SEED: u64 = 12345;

#[derive(Parser)]
#[command(name = "lrdlab", version, about = "partial-sum limit experiments for heavy-tailed functionals of long-memory Gaussian sequences")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON config with sections {functional, lrd, tail_overrides, experiment, thresholds}.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed; overrides the config (default 12345).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; env LRDLAB_THREADS is the fallback.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit 3 when a verification check fails.
    #[arg(long, global = true)]
    strict: bool,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Stamp SVG artifacts with a generation-time comment.
    #[arg(long, global = true)]
    timestamps: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Moving-average coefficients of the configured source.
    Coeffs,
    /// One Gaussian path from the exact-covariance generator.
    Sample,
    /// Hermite chaos coefficients of the configured functional.
    Chaos,
    /// Power-tail model and norming constants of the functional.
    Tail,
    /// Limit regime for (kappa, H, alpha, lambda).
    Classify {
        #[arg(long)]
        kappa: Option<usize>,
        #[arg(long)]
        hurst: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// One path of the predicted limit process.
    Limit,
    /// Ensemble tests of the pipeline against the predicted limit.
    Verify,
    /// Regime sweep over power functionals |x|^r.
    Sweep {
        #[arg(long)]
        hurst: f64,
        /// Comma-separated exponents in (-1, 0) or -1.
        #[arg(long, value_delimiter = ',', default_values_t = vec![-0.3, -0.5, -0.7, -0.9])]
        r_grid: Vec<f64>,
    },
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    functional: Option<FunctionalSpec>,
    lrd: Option<LrdConfig>,
    tail_overrides: Option<TailOverrides>,
    experiment: Option<ExperimentSection>,
    thresholds: Option<Thresholds>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailOverrides {
    alpha: Option<f64>,
    beta: Option<f64>,
    l2: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    n: usize,
    time_grid: Vec<f64>,
    replicas: usize,
    seed: Option<u64>,
    regime_override: Option<LimitRegime>,
}

/// Artifacts are buffered and persisted only after the whole run
/// succeeds, so failures leave no partial outputs.
struct Artifacts {
    out_dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn push(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn persist(self) -> Result<Vec<PathBuf>, LrdError> {
        std::fs::create_dir_all(&self.out_dir)?;
        let mut written = Vec::new();
        for (name, bytes) in self.files {
            let path = self.out_dir.join(name);
            std::fs::write(&path, bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    });
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig, LrdError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| LrdError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| {
                LrdError::Config(format!("{} line {} column {}: {e}", p.display(), e.line(), e.column()))
            })
        }
    }
}

fn need<T>(section: Option<T>, name: &str) -> Result<T, LrdError> {
    section.ok_or_else(|| LrdError::Config(format!("config section '{name}' required")))
}

fn thresholds_or_default(cfg: &RunConfig) -> Result<Thresholds, LrdError> {
    if let Some(t) = &cfg.thresholds {
        return Ok(t.clone());
    }
    let fallback = Path::new("config/thresholds.json");
    if fallback.exists() {
        return Thresholds::load(fallback);
    }
    Err(LrdError::Config("thresholds: add a 'thresholds' section or config/thresholds.json".into()))
}

fn timestamp(enabled: bool) -> Option<String> {
    enabled.then(|| {
        let secs =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).unwrap().as_secs();
        format!("unix {secs}")
    })
}

fn regime_label(r: &LimitRegime) -> &'static str {
    match r {
        LimitRegime::HermiteLimit { .. } => "Hermite",
        LimitRegime::StableLimit { .. } => "Stable",
        LimitRegime::MixedLimit { .. } => "Mixed",
        LimitRegime::ShortMemoryStable { .. } => "ShortMemoryStable",
        LimitRegime::FiniteVarianceOutOfScope => "FiniteVarianceOutOfScope",
    }
}

fn regime_exponent(r: &LimitRegime) -> Option<f64> {
    match r {
        LimitRegime::HermiteLimit { h_ss, .. } | LimitRegime::MixedLimit { h_ss, .. } => Some(*h_ss),
        LimitRegime::StableLimit { params, .. } | LimitRegime::ShortMemoryStable { params } => {
            Some(1.0 / params.alpha)
        }
        LimitRegime::FiniteVarianceOutOfScope => None,
    }
}

fn build_experiment(
    cfg: &RunConfig,
    seed_flag: Option<u64>,
) -> Result<ExperimentConfig, LrdError> {
    let functional = need(cfg.functional.clone(), "functional")?;
    let lrd = need(cfg.lrd.clone(), "lrd")?;
    let exp = need(cfg.experiment.as_ref(), "experiment")?;
    Ok(ExperimentConfig {
        functional,
        lrd,
        n: exp.n,
        time_grid: exp.time_grid.clone(),
        replicas: exp.replicas,
        seed: seed_flag.or(exp.seed).unwrap_or(DEFAULT_SEED),
        regime_override: exp.regime_override.clone(),
    })
}

fn run(cli: Cli) -> Result<i32, LrdError> {
    let threads = cli
        .threads
        .or_else(|| std::env::var("LRDLAB_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().ok();
    }
    let cfg = load_config(&cli.config)?;
    let seed = cli.seed.or(cfg.experiment.as_ref().and_then(|e| e.seed)).unwrap_or(DEFAULT_SEED);
    let stamp = timestamp(cli.timestamps);
    let mut artifacts = Artifacts { out_dir: cli.out.clone(), files: Vec::new() };
    let mut failed_checks = 0usize;

    match &cli.cmd {
        Cmd::Coeffs => {
            let lrd = need(cfg.lrd.clone(), "lrd")?;
            let coeffs = lrd_source::build_coefficients(&lrd)?;
            let hash = lrd_source::config_hash(&lrd);
            match cli.format {
                Format::Json => {
                    let doc = serde_json::json!({
                        "config_hash": hash, "seed": seed,
                        "h": coeffs.h, "truncation_bias": coeffs.truncation_bias,
                        "b": coeffs.b,
                    });
                    artifacts.push("coeffs.json", serde_json::to_vec_pretty(&doc)?);
                }
                Format::Csv => {
                    let mut buf = format!("# config_hash={hash} seed={seed}\nj,b\n");
                    for (j, b) in coeffs.b.iter().enumerate() {
                        buf.push_str(&format!("{j},{b}\n"));
                    }
                    artifacts.push("coeffs.csv", buf.into_bytes());
                }
                Format::Svg => {
                    let pts: Vec<(f64, f64)> = coeffs
                        .b
                        .iter()
                        .enumerate()
                        .skip(1)
                        .step_by((coeffs.b.len() / 256).max(1))
                        .map(|(j, &b)| (j as f64, b))
                        .collect();
                    let plot = svg::log_log_plot(
                        &pts,
                        Some(coeffs.h - 1.5),
                        "moving-average coefficients",
                        stamp.as_deref(),
                    );
                    artifacts.push("coeffs.svg", plot.into_bytes());
                }
            }
        }
        Cmd::Sample => {
            let lrd = need(cfg.lrd.clone(), "lrd")?;
            let exp = need(cfg.experiment.as_ref(), "experiment")?;
            if exp.n < 1 << 10 {
                return Err(LrdError::Config(format!("experiment.n = {} below floor 1024", exp.n)));
            }
            let sample = lrd_source::sample_ma_exact_circulant(lrd.h, lrd.l1, exp.n, seed)?;
            match cli.format {
                Format::Json => {
                    artifacts.push("sample.json", serde_json::to_vec_pretty(&sample)?);
                }
                _ => {
                    let mut buf = Vec::new();
                    sample.write_csv(&mut buf)?;
                    artifacts.push("sample.csv", buf);
                }
            }
        }
        Cmd::Chaos => {
            let f = need(cfg.functional.clone(), "functional")?;
            let dec = chaos::chaos_coefficients(&f, 32, 96)?;
            let hash = lrd_source::config_hash(&f);
            match cli.format {
                Format::Json => {
                    let mut doc = serde_json::to_value(&dec)?;
                    doc["config_hash"] = serde_json::json!(hash);
                    doc["seed"] = serde_json::json!(seed);
                    artifacts.push("chaos.json", serde_json::to_vec_pretty(&doc)?);
                }
                _ => {
                    let mut buf = format!("# config_hash={hash} seed={seed}\nk,f_k\n");
                    for (k, c) in dec.coeffs.iter().enumerate() {
                        buf.push_str(&format!("{k},{c}\n"));
                    }
                    artifacts.push("chaos.csv", buf.into_bytes());
                }
            }
        }
        Cmd::Tail => {
            let f = need(cfg.functional.clone(), "functional")?;
            let mut tail = tails::fit_tail_model(&f)?;
            if let Some(o) = &cfg.tail_overrides {
                if let Some(a) = o.alpha {
                    tail.alpha = a;
                }
                if let Some(b) = o.beta {
                    tail.beta = b;
                }
                if let Some(l) = o.l2 {
                    tail.l2 = l;
                }
            }
            let hash = lrd_source::config_hash(&f);
            let norming: Vec<(u64, f64)> = (10..=20)
                .map(|p| {
                    let n = 1u64 << p;
                    tails::norming_constant(&f, n).map(|a| (n, a))
                })
                .collect::<Result<_, _>>()?;
            match cli.format {
                Format::Json => {
                    let doc = serde_json::json!({
                        "config_hash": hash, "seed": seed,
                        "tail": tail, "norming": norming,
                    });
                    artifacts.push("tail.json", serde_json::to_vec_pretty(&doc)?);
                }
                _ => {
                    let mut buf = format!(
                        "# config_hash={hash} seed={seed} alpha={} beta={} l2={}\nn,a_n\n",
                        tail.alpha, tail.beta, tail.l2
                    );
                    for (n, a) in norming {
                        buf.push_str(&format!("{n},{a}\n"));
                    }
                    artifacts.push("tail.csv", buf.into_bytes());
                }
            }
        }
        Cmd::Classify { kappa, hurst, alpha, lambda } => {
            let regime = regimes::classify(*kappa, *hurst, *alpha, *lambda)?;
            let doc = serde_json::json!({
                "regime": regime_label(&regime),
                "exponent": regime_exponent(&regime),
                "detail": regime,
            });
            println!("{}", serde_json::to_string(&doc)?);
            artifacts.push("classify.json", serde_json::to_vec_pretty(&doc)?);
        }
        Cmd::Limit => {
            let exp_cfg = build_experiment(&cfg, cli.seed)?;
            let ctx = experiments::PipelineContext::build(exp_cfg.clone())?;
            let grid: Vec<f64> =
                exp_cfg.time_grid.iter().copied().filter(|&t| t > 0.0).collect();
            let path = match &ctx.plan.regime {
                LimitRegime::StableLimit { params, .. }
                | LimitRegime::ShortMemoryStable { params } => {
                    limit_processes::stable_levy_path(params, &grid, exp_cfg.seed, 0)?
                }
                LimitRegime::HermiteLimit { kappa, h, .. }
                | LimitRegime::MixedLimit { kappa, h, .. } => limit_processes::hermite_process_sample(
                    *kappa,
                    *h,
                    HermiteDiscretization::default_grid(grid),
                    exp_cfg.seed,
                )?,
                LimitRegime::FiniteVarianceOutOfScope => {
                    return Err(LrdError::RegimeMismatch("out-of-scope regime".into()))
                }
            };
            let mut path = path;
            path.meta["config_hash"] = serde_json::json!(ctx.config_hash);
            match cli.format {
                Format::Json => artifacts.push("limit.json", serde_json::to_vec_pretty(&path)?),
                _ => {
                    let mut buf = Vec::new();
                    path.write_csv(&mut buf)?;
                    artifacts.push("limit.csv", buf);
                }
            }
        }
        Cmd::Verify => {
            let thresholds = thresholds_or_default(&cfg)?;
            let exp_cfg = build_experiment(&cfg, cli.seed)?;
            let e = experiments::partial_sum_ensemble(&exp_cfg)?;
            let t_last = *exp_cfg.time_grid.last().unwrap();
            let mut reports = experiments::verify_marginal(
                &e,
                &e.plan.regime.clone(),
                t_last,
                exp_cfg.replicas,
                exp_cfg.seed ^ 0x5eed,
                &thresholds,
            )?;
            match experiments::self_similarity_test(&e, &thresholds) {
                Ok(rep) => reports.push(rep),
                Err(LrdError::GridUnsuitable(_)) => {}
                Err(err) => return Err(err),
            }
            failed_checks = reports.iter().filter(|r| !r.pass).count();
            match cli.format {
                Format::Json => {
                    let doc = serde_json::json!({
                        "config_hash": e.config_hash, "seed": exp_cfg.seed,
                        "regime": regime_label(&e.plan.regime),
                        "reports": reports,
                    });
                    artifacts.push("verify.json", serde_json::to_vec_pretty(&doc)?);
                }
                Format::Csv => {
                    let mut buf = format!(
                        "# config_hash={} seed={}\n{}\n",
                        e.config_hash,
                        exp_cfg.seed,
                        experiments::VerificationReport::csv_header()
                    );
                    for r in &reports {
                        buf.push_str(&r.csv_row());
                        buf.push('\n');
                    }
                    artifacts.push("verify.csv", buf.into_bytes());
                }
                Format::Svg => {
                    let col = exp_cfg.time_grid.len() - 1;
                    let sample: Vec<f64> = e.matrix.iter().map(|row| row[col]).collect();
                    let limit = experiments::limit_marginal_sample(
                        &e.plan.regime,
                        t_last,
                        exp_cfg.replicas,
                        exp_cfg.seed ^ 0x5eed,
                    )?;
                    let plot = svg::histogram_overlay(
                        &sample,
                        &limit,
                        40,
                        "ensemble vs limit marginal",
                        stamp.as_deref(),
                    );
                    artifacts.push("verify.svg", plot.into_bytes());
                }
            }
        }
        Cmd::Sweep { hurst, r_grid } => {
            let thresholds = thresholds_or_default(&cfg)?;
            let (n, replicas) = match &cfg.experiment {
                Some(e) => (e.n, e.replicas),
                None => (1 << 12, 200),
            };
            let rows =
                experiments::power_example_sweep(*hurst, r_grid, n, replicas, seed, &thresholds)?;
            match cli.format {
                Format::Json => artifacts.push("sweep.json", serde_json::to_vec_pretty(&rows)?),
                Format::Csv => {
                    let mut buf = Vec::new();
                    experiments::write_sweep_csv(&rows, *hurst, &mut buf)?;
                    artifacts.push("sweep.csv", buf);
                }
                Format::Svg => {
                    let plot = svg::regime_map(2, 48, "limit regimes over (H, alpha)", stamp.as_deref());
                    artifacts.push("sweep.svg", plot.into_bytes());
                }
            }
        }
    }

    let written = artifacts.persist()?;
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    if cli.strict && failed_checks > 0 {
        eprintln!("{failed_checks} verification check(s) failed");
        return Ok(3);
    }
    Ok(0)
}
