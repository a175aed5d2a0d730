use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use tikhonov_bench::config::{ExperimentConfig, ProblemSpec};
use tikhonov_bench::run::{read_records, run_to_dir, RECORDS_FILE};
use tikhonov_bench::summary::{summarize, write_all};
use tikhonov_bench::Result;
use tikhonov_picard::gsvd::{compute_gsvd, condition_number, verify_factors};
use tikhonov_picard::operators::{ProblemKind, Regularizer};
use tikhonov_picard::selectors::Method;

#[derive(Parser)]
#[command(name = "bench", version, about = "Tikhonov parameter-selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write records, summaries and boxplots.
    Run {
        /// JSON experiment file; the desk-scale defaults are used without it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of noise realizations per cell.
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        base_seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated method labels, e.g. SS_P3,DF,GCV.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        /// Directory for cached decompositions.
        #[arg(long)]
        gsvd_cache: Option<PathBuf>,
        #[arg(long)]
        no_svg: bool,
    },
    /// Recompute summaries from an existing run directory.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        no_svg: bool,
    },
    /// Write a test problem as JSON.
    Problem {
        #[arg(long)]
        name: ProblemKind,
        /// Size (`n`, or the image side for blur).
        #[arg(long)]
        n: usize,
        #[arg(long)]
        regularizer: Option<Regularizer>,
        #[arg(long)]
        dump: PathBuf,
    },
    /// Decompose a test problem and report the GSVD residuals.
    GsvdCheck {
        #[arg(long)]
        name: ProblemKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        regularizer: Option<Regularizer>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Print the default experiment configuration.
    DefaultConfig,
}

fn spec(name: ProblemKind, n: usize, regularizer: Option<Regularizer>) -> ProblemSpec {
    ProblemSpec { name, size: n, regularizer, label: None }
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run { config, seeds, base_seed, out, workers, methods, gsvd_cache, no_svg } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(n) = seeds {
                cfg.seeds.count = n;
            }
            if let Some(b) = base_seed {
                cfg.seeds.base = b;
            }
            if let Some(dir) = out {
                cfg.output.dir = dir;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            if let Some(m) = methods {
                cfg.methods = m;
            }
            if gsvd_cache.is_some() {
                cfg.output.gsvd_cache = gsvd_cache;
            }
            if no_svg {
                cfg.output.svg = false;
            }
            let start = Instant::now();
            let done = run_to_dir(&cfg)?;
            println!(
                "{} records, {} failed selections in {:.1} s -> {}",
                done.outcome.records.len(),
                done.outcome.failures.len(),
                start.elapsed().as_secs_f64(),
                done.dir.display()
            );
            Ok(true)
        }
        Command::Summarize { input, no_svg } => {
            let records = read_records(&input.join(RECORDS_FILE))?;
            let table = summarize(&records);
            write_all(&table, &input, !no_svg)?;
            println!("{} records, {} cells -> {}", records.len(), table.cells.len(), input.display());
            Ok(true)
        }
        Command::Problem { name, n, regularizer, dump } => {
            let p = spec(name, n, regularizer).instance()?;
            std::fs::write(&dump, p.to_json().map_err(tikhonov_bench::BenchError::from)?)?;
            println!("{} ({}x{}, L {}x{}) -> {}", p.name, p.m(), p.n(), p.l.nrows(), p.l.ncols(), dump.display());
            Ok(true)
        }
        Command::GsvdCheck { name, n, regularizer, tol } => {
            let s = spec(name, n, regularizer);
            let p = s.instance()?;
            let start = Instant::now();
            let f = compute_gsvd(&p.a, &p.l).map_err(tikhonov_bench::BenchError::from)?;
            let elapsed = start.elapsed().as_secs_f64();
            let rep = verify_factors(&f, &p.a, &p.l).map_err(tikhonov_bench::BenchError::from)?;
            println!("problem        {} n={} L={}", name, n, s.regularizer());
            println!("time           {elapsed:.2} s");
            println!("r, q           {}, {}", f.r(), f.q());
            println!("rank A, rank L {}, {}", rep.rank_a, rep.rank_l);
            println!("cond A         {:.3e}", condition_number(&p.a));
            println!("recon A, L     {:.2e}, {:.2e}", rep.recon_a, rep.recon_l);
            println!("orth U, V      {:.2e}, {:.2e}", rep.orth_u, rep.orth_v);
            println!("Y Y^-1 - I     {:.2e}", rep.y_inverse);
            println!("sigma^2+mu^2   {:.2e}", rep.pair_norm);
            println!("ordering       {} violations", rep.ordering_violations);
            let ok = rep.passes(tol, 1e-12);
            println!("{}", if ok { "PASS" } else { "FAIL" });
            Ok(ok)
        }
        Command::DefaultConfig => {
            println!("{}", ExperimentConfig::default().to_json()?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
