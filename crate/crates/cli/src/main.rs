use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indclust::{Error, RunConfig};

mod commands;
mod report;

#[derive(Debug, Parser)]
#[command(name = "indclust", version, about = "Cluster time series into mutually independent groups")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true, env = "INDCLUST_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Known finite joint distribution, exact queries.
    Oracle,
    /// I.i.d. samples: thresholded comparisons and a surrogate test.
    Iid,
    /// Stationary ergodic samples with a known number of clusters.
    Stationary,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Oracle => "oracle",
            Mode::Iid => "iid",
            Mode::Stationary => "stationary",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Largest block length used by the sum-information.
    #[arg(long, env = "INDCLUST_M_MAX", default_value_t = 16)]
    m_max: usize,
    /// Largest quantization level.
    #[arg(long, env = "INDCLUST_L_MAX", default_value_t = 16)]
    l_max: usize,
    /// Level of the surrogate independence test.
    #[arg(long, env = "INDCLUST_ALPHA", default_value_t = 0.05)]
    alpha: f64,
    /// Constant c of the comparison threshold c * n^(-1/3).
    #[arg(long, env = "INDCLUST_THRESHOLD_C", default_value_t = 1.0)]
    threshold_c: f64,
    /// Surrogates drawn by the independence test.
    #[arg(long, env = "INDCLUST_PERMUTATIONS", default_value_t = 200)]
    permutations: usize,
    /// Seed for every random choice.
    #[arg(long, env = "INDCLUST_SEED")]
    seed: Option<u64>,
}

impl RunArgs {
    pub fn config(&self) -> Result<RunConfig, Error> {
        let cfg = RunConfig {
            m_max: self.m_max,
            l_max: self.l_max,
            seed: self.seed.unwrap_or(0),
            alpha: self.alpha,
            threshold_c: self.threshold_c,
            permutation_count: self.permutations,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a sample from a process spec (JSON) and write CSV plus ground truth.
    Generate {
        /// Process spec JSON file.
        #[arg(long, env = "INDCLUST_INPUT")]
        input: PathBuf,
        /// CSV file to write.
        #[arg(long, env = "INDCLUST_OUTPUT")]
        output: PathBuf,
        /// Ground-truth JSON file (default: <output>.truth.json).
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Overrides the sample length of the spec.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Cluster a CSV sample (iid, stationary) or a finite joint table (oracle).
    Cluster {
        #[arg(long, value_enum, env = "INDCLUST_MODE")]
        mode: Mode,
        /// Number of clusters (stationary mode).
        #[arg(long, env = "INDCLUST_K")]
        k: Option<usize>,
        #[arg(long, env = "INDCLUST_INPUT")]
        input: PathBuf,
        /// Result JSON file (default: standard output).
        #[arg(long, env = "INDCLUST_OUTPUT")]
        output: Option<PathBuf>,
        /// Also report a compression estimate with this backend (deflate, lzma).
        #[arg(long, env = "INDCLUST_COMPRESSOR")]
        compressor: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decide (12)|3 versus 1|(23) for a CSV with exactly three series.
    ThreeSample {
        #[arg(long, env = "INDCLUST_INPUT")]
        input: PathBuf,
        #[arg(long, env = "INDCLUST_OUTPUT")]
        output: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the exact-oracle clustering against brute force on a finite joint table.
    OracleDemo {
        /// Finite joint table; omit to use --parity.
        #[arg(long, env = "INDCLUST_INPUT")]
        input: Option<PathBuf>,
        /// Group sizes of a parity construction, e.g. 3,3.
        #[arg(long, value_delimiter = ',')]
        parity: Option<Vec<usize>>,
        #[arg(long, env = "INDCLUST_OUTPUT")]
        output: Option<PathBuf>,
    },
    /// Recovery fractions over a grid of sample lengths and seeds.
    Bench {
        #[arg(long, value_enum, env = "INDCLUST_MODE")]
        mode: Mode,
        #[arg(long, env = "INDCLUST_K")]
        k: Option<usize>,
        /// Process spec JSON file; its n and seed are replaced per run.
        #[arg(long, env = "INDCLUST_INPUT")]
        input: PathBuf,
        /// Sample lengths, e.g. 1000,10000,100000.
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        /// Seeds per sample length.
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        /// CSV table to write (default: standard output).
        #[arg(long, env = "INDCLUST_OUTPUT")]
        output: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

/// Maps library errors onto the documented exit codes.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) => 2,
        Error::Parse { .. } | Error::Io(_) => 3,
        Error::Capacity(_) => 4,
        Error::Integrity(_) | Error::InconsistentOracle { .. } | Error::Compressor(_) => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Generate {
            input,
            output,
            truth,
            n,
            run,
        } => commands::generate(&input, &output, truth.as_deref(), n, &run),
        Command::Cluster {
            mode,
            k,
            input,
            output,
            compressor,
            run,
        } => commands::cluster(mode, k, &input, output.as_deref(), compressor.as_deref(), &run),
        Command::ThreeSample { input, output, run } => {
            commands::three_sample(&input, output.as_deref(), &run)
        }
        Command::OracleDemo {
            input,
            parity,
            output,
        } => commands::oracle_demo(input.as_deref(), parity.as_deref(), output.as_deref()),
        Command::Bench {
            mode,
            k,
            input,
            ns,
            seeds,
            output,
            run,
        } => commands::bench(mode, k, &input, &ns, seeds, output.as_deref(), &run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
