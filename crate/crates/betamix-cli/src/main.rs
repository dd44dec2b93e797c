//! `betamix` command line: approximation-rate sweeps, mixing-density
//! discretization, posterior fits, posterior-rate sweeps and prior sanity
//! checks. Exit code 0 on pass verdicts, 2 on fail verdicts, 1 on errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use betamix::approx::{
    discretize_with_info, floor_weights, support_grid, DEFAULT_FLOOR_A, DEFAULT_M,
    DEFAULT_NODES_PER_CELL, DEFAULT_T0,
};
use betamix::harness::{
    adaptive_prior_from_kv, dp_prior_from_kv, emit_report, experiment_from_kv, run_approx_experiment,
    run_posterior_experiment, run_prior_sanity, KvConfig, Verdict,
};
use betamix::sampler::{chain_to_text, diagnostics, dp_fit, posterior_mean_density, rjmcmc_fit};

#[derive(Parser)]
#[command(name = "betamix", version, about = "Beta-mixture density estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// master random seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// output directory for reports
    #[arg(long, default_value = "betamix-out")]
    out: PathBuf,
    /// worker threads for sweep cells and replications
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// wall-clock budget; exceeding it flags the report incomplete
    #[arg(long)]
    budget_seconds: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Approximation-rate sweep (continuous or discrete, per config)
    Approx(CommonArgs),
    /// Discretize a mixing density and write the mixture text format
    Discretize(CommonArgs),
    /// Fit the posterior sampler to a dataset
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// observations, one decimal in (0,1) per line
        #[arg(long)]
        data: PathBuf,
    },
    /// Posterior contraction-rate sweep over n
    Rates(CommonArgs),
    /// Prior sampler-versus-density agreement and zero-data recovery
    Priorcheck(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_kv(common: &CommonArgs) -> Result<KvConfig, betamix::Error> {
    match &common.config {
        None => Ok(KvConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| betamix::Error::Io {
                path: path.display().to_string(),
                detail: e.to_string(),
            })?;
            KvConfig::parse(&text)
        }
    }
}

fn verdict_exit(v: Verdict) -> ExitCode {
    match v {
        Verdict::Pass => ExitCode::from(0),
        Verdict::Fail | Verdict::Incomplete | Verdict::InsufficientData => ExitCode::from(2),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), betamix::Error> {
    std::fs::create_dir_all(dir).map_err(|e| betamix::Error::Io {
        path: dir.display().to_string(),
        detail: e.to_string(),
    })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| betamix::Error::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn run(cli: Cli) -> Result<ExitCode, betamix::Error> {
    match cli.command {
        Command::Approx(common) => {
            let kv = load_kv(&common)?;
            let cfg = experiment_from_kv(&kv, common.seed, common.threads, common.budget_seconds)?;
            let report = run_approx_experiment(&cfg)?;
            emit_report(&report, &common.out)?;
            println!("{}", report.to_text());
            Ok(verdict_exit(report.verdict))
        }
        Command::Rates(common) => {
            let kv = load_kv(&common)?;
            let mut cfg = experiment_from_kv(&kv, common.seed, common.threads, common.budget_seconds)?;
            cfg.kind = betamix::harness::ExperimentKind::PosteriorRate;
            let report = run_posterior_experiment(&cfg)?;
            emit_report(&report, &common.out)?;
            println!("{}", report.to_text());
            Ok(verdict_exit(report.verdict))
        }
        Command::Discretize(common) => {
            let kv = load_kv(&common)?;
            let alpha = kv.take_f64("alpha", 400.0)?;
            let t0 = kv.take_f64("t0", DEFAULT_T0)?;
            let m_const = kv.take_f64("M", DEFAULT_M)?;
            let nodes = kv.take_usize("nodes_per_cell", DEFAULT_NODES_PER_CELL)?;
            let floor_a = kv.take_f64("floor_A", DEFAULT_FLOOR_A)?;
            let density_id = kv.get("density").unwrap_or("uniform").to_string();
            let beta = kv.take_f64("density.beta", 0.5)?;
            let params: Vec<(&str, f64)> = vec![("beta", beta)];
            let f = betamix::harness::density_corpus(&density_id, &params)?;
            let grid = support_grid(alpha, t0, m_const)?;
            let (mixture, info) = discretize_with_info(alpha, |e| f.pdf(e), &grid, nodes)?;
            let mixture = floor_weights(&mixture, floor_a)?;
            write_file(&common.out, "mixture.txt", &mixture.to_text())?;
            println!(
                "discretized {density_id} at alpha = {alpha}: {} atoms over {} cells (skipped {}, degenerate {}), raw mass {:.12}",
                mixture.len(),
                grid.cell_count(),
                info.skipped_cells,
                info.degenerate_cells,
                info.raw_total,
            );
            println!("budget 3*sqrt(alpha)*log(alpha)^1.5 = {:.1}", betamix::approx::atom_budget(alpha, 3.0));
            Ok(ExitCode::from(0))
        }
        Command::Fit { common, data } => {
            let kv = load_kv(&common)?;
            let text = std::fs::read_to_string(&data).map_err(|e| betamix::Error::Io {
                path: data.display().to_string(),
                detail: e.to_string(),
            })?;
            let mut xs = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let t = line.trim();
                if t.is_empty() {
                    continue;
                }
                xs.push(t.parse::<f64>().map_err(|e| betamix::Error::Parse {
                    what: format!("data file line {}", i + 1),
                    detail: e.to_string(),
                })?);
            }
            let iters = kv.take_usize("mcmc_iters", 6000)?;
            let sampler = kv.get("sampler").unwrap_or("adaptive").to_string();
            let records = if sampler == "dirichlet" || sampler == "dp" {
                let dp = dp_prior_from_kv(&kv, xs.len())?;
                dp_fit(&xs, &dp, iters, common.seed, 200)?
            } else {
                let prior = adaptive_prior_from_kv(&kv)?;
                rjmcmc_fit(&xs, &prior, iters, common.seed)?
            };
            let burnin = records.len() / 3;
            let grid: Vec<f64> = (0..=512).map(|i| (i as f64 + 0.5) / 513.5).collect();
            let post = posterior_mean_density(&records, burnin, &grid)?;
            let diag = diagnostics(&records)?;

            write_file(&common.out, "chain.txt", &chain_to_text(&records))?;
            let mut mean_csv = String::from("x,posterior_mean\n");
            for (&x, &v) in grid.iter().zip(&post) {
                mean_csv.push_str(&format!("{x:.12e},{v:.12e}\n"));
            }
            write_file(&common.out, "posterior_mean.csv", &mean_csv)?;
            let mut diag_csv = String::from("metric,value\n");
            for (label, rate) in &diag.acceptance {
                diag_csv.push_str(&format!("accept_{label},{rate:.6}\n"));
            }
            diag_csv.push_str(&format!("ess_loglik,{:.3}\n", diag.ess_loglik));
            for (k, c) in &diag.k_histogram {
                diag_csv.push_str(&format!("k_{k},{c}\n"));
            }
            write_file(&common.out, "diagnostics.csv", &diag_csv)?;
            println!(
                "fit: {} observations, {} sweeps, final k = {}, ESS(loglik) = {:.1}",
                xs.len(),
                records.len(),
                records.last().map(|r| r.model).unwrap_or(0),
                diag.ess_loglik
            );
            Ok(ExitCode::from(0))
        }
        Command::Priorcheck(common) => {
            let kv = load_kv(&common)?;
            let prior = adaptive_prior_from_kv(&kv)?;
            let draws = kv.take_usize("draws", 100_000)?;
            let sweeps = kv.take_usize("sweeps", 100_000)?;
            let report = run_prior_sanity(&prior, draws, sweeps, common.seed)?;
            write_file(&common.out, "priorcheck.txt", &report.to_text())?;
            print!("{}", report.to_text());
            Ok(ExitCode::from(if report.pass { 0 } else { 2 }))
        }
    }
}
