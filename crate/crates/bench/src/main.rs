use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rqlp::Family;
use rqlp_bench::experiment::{bounds_csv, gen_csv, gen_problem, write_file};
use rqlp_bench::{run_table, run_tracking, verify_bounds, BenchError, ExperimentConfig, Result, Settings};

/// Accuracy and timing experiments for pivoted and randomized QLP.
#[derive(Parser)]
#[command(name = "rqlp-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time each algorithm and report err = max_j |σ_j − L_jj| per seed, plus medians.
    Table(ExperimentArgs),
    /// Per-j singular values next to CPQR R-values and QLP/RQLP/ERQLP L-values.
    Track(ExperimentArgs),
    /// Monte-Carlo check of the expected Frobenius error bound; exits 3 on violation.
    VerifyBounds(ExperimentArgs),
    /// Write a test matrix as CSV, e.g. `gen pds 8 t=2 s=1`.
    Gen(GenArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Matrix family: pds, eds, heat or phillips [default: pds]
    #[arg(long)]
    family: Option<Family>,
    /// Matrix size(s), comma separated [default: 400]
    #[arg(long)]
    n: Option<String>,
    /// Target rank [default: 60]
    #[arg(long)]
    k: Option<usize>,
    /// Oversampling [default: 5]
    #[arg(long)]
    p: Option<usize>,
    /// Inner QR iterations for erqlp, comma separated [default: 2,4]
    #[arg(long)]
    d: Option<String>,
    /// Block size; adds brqlp to the algorithm list
    #[arg(long)]
    b: Option<usize>,
    /// Number of trials, seeds 1..=trials [default: 20]
    #[arg(long)]
    trials: Option<u64>,
    /// Explicit comma-separated seeds; overrides --trials
    #[arg(long)]
    seed_list: Option<String>,
    /// Output directory; without it CSV goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value file using these flag names; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Timing repetitions; the median is reported [default: 5]
    #[arg(long)]
    reps: Option<usize>,
    /// Plateau length for pds/eds [default: 30]
    #[arg(long)]
    t: Option<usize>,
    /// Decay rate for pds/eds [default: 2 for pds, 0.05 for eds]
    #[arg(long)]
    s: Option<f64>,
    /// Fix the pds/eds matrix across trials instead of drawing one per seed
    #[arg(long)]
    matrix_seed: Option<u64>,
    /// Heat conductivity [default: 1]
    #[arg(long)]
    kappa: Option<f64>,
    /// Subset of qlp,rqlp,erqlp,brqlp [default: qlp,rqlp,erqlp plus brqlp when --b is set]
    #[arg(long)]
    algorithms: Option<String>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut settings = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let mut cli = Settings::default();
        let mut put = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                cli.set(key, v);
            }
        };
        put("family", self.family.map(|f| f.to_string()));
        put("n", self.n.clone());
        put("k", self.k.map(|v| v.to_string()));
        put("p", self.p.map(|v| v.to_string()));
        put("d", self.d.clone());
        put("b", self.b.map(|v| v.to_string()));
        put("trials", self.trials.map(|v| v.to_string()));
        put("seed-list", self.seed_list.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("reps", self.reps.map(|v| v.to_string()));
        put("t", self.t.map(|v| v.to_string()));
        put("s", self.s.map(|v| v.to_string()));
        put("matrix-seed", self.matrix_seed.map(|v| v.to_string()));
        put("kappa", self.kappa.map(|v| v.to_string()));
        put("algorithms", self.algorithms.clone());
        settings.overlay(&cli);
        ExperimentConfig::from_settings(&settings)
    }
}

#[derive(Args)]
struct GenArgs {
    family: Family,
    n: usize,
    /// Generator parameters: t=, s=, seed= (pds/eds), kappa= (heat)
    params: Vec<String>,
    /// Output directory; without it the matrix goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes `contents` to `dir/name`, or to stdout when no directory was given.
fn emit(dir: Option<&PathBuf>, name: &str, contents: &str) -> Result<()> {
    match dir {
        Some(dir) => {
            let path = write_file(dir, name, contents)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes()).map_err(|e| BenchError::io("<stdout>", e))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Table(args) => {
            let cfg = args.resolve()?;
            let table = run_table(&cfg)?;
            emit(cfg.out.as_ref(), &format!("table_{}.csv", cfg.family), &table.to_csv(true))?;
            Ok(true)
        }
        Command::Track(args) => {
            let cfg = args.resolve()?;
            let runs = run_tracking(&cfg)?;
            let mut summary = Vec::new();
            for t in &runs {
                emit(cfg.out.as_ref(), &format!("{}.csv", t.file_stem()), &t.report.to_csv())?;
                summary.push(serde_json::json!({ "n": t.n, "seed": t.seed, "err": t.report.summary_json()["err"] }));
            }
            if let Some(dir) = &cfg.out {
                let json = serde_json::to_string_pretty(&summary)? + "\n";
                emit(Some(dir), &format!("track_{}_summary.json", cfg.family), &json)?;
            }
            Ok(true)
        }
        Command::VerifyBounds(args) => {
            let cfg = args.resolve()?;
            let checks = verify_bounds(&cfg)?;
            emit(cfg.out.as_ref(), &format!("bounds_{}.csv", cfg.family), &bounds_csv(&checks))?;
            if let Some(dir) = &cfg.out {
                let json = serde_json::to_string_pretty(&checks)? + "\n";
                emit(Some(dir), &format!("bounds_{}.json", cfg.family), &json)?;
            }
            for c in &checks {
                if !c.passed() {
                    eprintln!(
                        "bound violated for {} n={}: mean {:.4e}, max {:.4e}, bound {:.4e}",
                        c.family, c.n, c.mean_residual, c.max_residual, c.frobenius_bound
                    );
                }
            }
            Ok(checks.iter().all(|c| c.passed()))
        }
        Command::Gen(args) => {
            let problem = gen_problem(args.family, args.n, &args.params)?;
            emit(args.out.as_ref(), &format!("{}_{}.csv", args.family, args.n), &gen_csv(&problem)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
