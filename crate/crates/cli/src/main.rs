use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use relu_peak::bench::{run_bench, BenchSpec};
use relu_peak::evt::{beta_fit_gamma, collect_max_samples, default_k, moment_estimator, required_samples, EvtEstimate};
use relu_peak::formulation::compute_bounds;
use relu_peak::network::xavier_init;
use relu_peak::samplers::{OptimizeResult, ReluProblem, SamplerConfig, DEFAULT_GAP};
use relu_peak::{Polytope, ReluNetwork};

#[derive(Parser)]
#[command(name = "relu-peak", version, about = "Maximize a ReLU network over a polytope")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Alg {
    Sampling,
    Enhanced,
    Mip,
}

#[derive(Subcommand)]
enum Command {
    /// Write a Xavier-initialized network.
    Gen {
        /// Layer widths including input and output, e.g. 2,4,1.
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Maximize a network and write the result as JSON.
    Optimize {
        #[arg(long)]
        net: PathBuf,
        /// Defaults to the unit box.
        #[arg(long)]
        polytope: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "enhanced")]
        alg: Alg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        gap: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// A previous result file whose point seeds the MIP.
        #[arg(long)]
        warm_start: Option<PathBuf>,
        /// Re-solve LPs for repeated activation patterns.
        #[arg(long)]
        no_dedupe: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark spec and write a CSV table.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the extreme value index of region optima and the sample bound.
    Evt {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        polytope: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write pre-activation bounds as JSON.
    Bounds {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        polytope: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("RELU_PEAK_THREADS") {
        let n: usize = raw.trim().parse().with_context(|| format!("RELU_PEAK_THREADS={raw:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() -> Result<()> {
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen { widths, seed, out } => {
            let net = xavier_init(&widths, seed)?;
            write(&out, &net.to_json())
        }
        Command::Optimize { net, polytope, alg, samples, gap, seed, time_limit, warm_start, no_dedupe, out } => {
            let net = ReluNetwork::load(&net)?;
            let p = load_polytope(polytope.as_deref(), &net)?;
            let limit = time_limit.map(seconds).transpose()?;
            if gap.is_some() && alg != Alg::Enhanced {
                eprintln!("warning: --gap only applies to --alg enhanced; ignored");
            }
            if warm_start.is_some() && alg != Alg::Mip {
                eprintln!("warning: --warm-start only applies to --alg mip; ignored");
            }
            let problem = ReluProblem::new(&net, &p)?;
            let cfg = SamplerConfig {
                n_samples: samples,
                gap: gap.unwrap_or(DEFAULT_GAP),
                seed,
                time_budget: limit,
                dedupe: !no_dedupe,
                ..SamplerConfig::default()
            };
            let result = match alg {
                Alg::Sampling => problem.sampling(&cfg)?,
                Alg::Enhanced => problem.enhanced(&cfg)?,
                Alg::Mip => {
                    let warm = warm_start.as_deref().map(load_result).transpose()?;
                    let r = problem.full_mip(warm.as_ref(), limit)?;
                    for note in &r.notes {
                        eprintln!("warning: {note}");
                    }
                    r
                }
            };
            write(&out, &result.to_json())
        }
        Command::Bench { spec, out } => {
            let spec = BenchSpec::load(&spec)?;
            let table = run_bench(&spec, relu_peak::par::parallel_available())?;
            write(&out, &table.to_csv())
        }
        Command::Evt { net, polytope, n, seed, eps, delta, out } => {
            let net = ReluNetwork::load(&net)?;
            let p = load_polytope(polytope.as_deref(), &net)?;
            let samples = collect_max_samples(&net, &p, n, seed)?;
            let moment = moment_estimator(&samples, default_k(samples.len()))
                .context("moment estimator on the collected region optima");
            let beta = beta_fit_gamma(&samples).context("beta fit on the collected region optima");
            if let (Err(m), Err(_)) = (&moment, &beta) {
                bail!("{m:#}");
            }
            let mut distinct = samples.values().to_vec();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            let mut notes = Vec::new();
            if distinct.len() < 10 {
                notes.push(format!("only {} distinct region optima; tail estimates are unreliable", distinct.len()));
            }
            let mut report_estimate = |name: &str, est: &Result<EvtEstimate>| -> serde_json::Value {
                match est {
                    Ok(e) => {
                        let bound = match required_samples(e.gamma, eps, delta) {
                            Ok(n) => json!(n),
                            Err(err) => {
                                notes.push(format!("{name}: bound inapplicable ({err})"));
                                serde_json::Value::Null
                            }
                        };
                        json!({ "estimate": e, "required_samples": bound })
                    }
                    Err(err) => {
                        notes.push(format!("{name}: {err:#}"));
                        json!({ "error": format!("{err:#}") })
                    }
                }
            };
            let report = json!({
                "net": net.fingerprint(),
                "seed": seed,
                "n": n,
                "eps": eps,
                "delta": delta,
                "max_value": samples.max(),
                "min_value": samples.min(),
                "distinct_values": distinct.len(),
                "moment": report_estimate("moment", &moment),
                "beta_mom": report_estimate("beta_mom", &beta),
                "notes": notes,
            });
            write(&out, &serde_json::to_string_pretty(&report)?)
        }
        Command::Bounds { net, polytope, out } => {
            let net = ReluNetwork::load(&net)?;
            let p = load_polytope(polytope.as_deref(), &net)?;
            let bounds = compute_bounds(&net, &p)?;
            write(&out, &serde_json::to_string_pretty(&bounds)?)
        }
    }
}

fn seconds(t: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(t).with_context(|| format!("--time-limit {t} is not a valid duration"))
}

fn load_polytope(path: Option<&Path>, net: &ReluNetwork) -> Result<Polytope> {
    let p = match path {
        Some(path) => Polytope::load(path)?,
        None => Polytope::unit_box(net.input_dim())?,
    };
    if p.dim() != net.input_dim() {
        bail!("polytope has dimension {} but the network takes {} inputs", p.dim(), net.input_dim());
    }
    Ok(p)
}

fn load_result(path: &Path) -> Result<OptimizeResult> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing result file {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
