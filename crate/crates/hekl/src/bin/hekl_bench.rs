//! Benchmark harness CLI. Thin argument layer over `hekl::bench`; exits 0
//! only when every correctness gate passed.

use std::fs::File;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hekl::bench::{
    run_density, run_he_bench, run_matmul, run_ntt_bench, BenchConfig, BenchReport, MatmulSpec,
    OutputFormat,
};
use hekl::perf::MachineParams;

#[derive(Parser)]
#[command(
    name = "hekl-bench",
    about = "Kernel and evaluation benchmarks for the hekl library",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Transform degree / polynomial degree (0 = command default).
    #[arg(long, default_value_t = 0)]
    n: usize,
    /// RNS size L.
    #[arg(long)]
    rns: Option<usize>,
    /// Batched instance count.
    #[arg(long, default_value_t = 1)]
    instances: usize,
    /// Kernel variant (repeatable): naive, staged2, radix4, radix8, radix16.
    #[arg(long)]
    variant: Vec<String>,
    /// Worker threads (default: HEKL_THREADS, then available parallelism).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// log2 of the encoding scale.
    #[arg(long, default_value_t = 40)]
    delta_bits: u32,
    /// Timed repetitions per configuration.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Untimed warmup runs per configuration.
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    /// Route buffers through the memory cache (default).
    #[arg(long, overrides_with = "no_pool")]
    pool: bool,
    /// Disable the memory cache; every request allocates.
    #[arg(long)]
    no_pool: bool,
    /// Include memory-cache statistics in the report.
    #[arg(long)]
    pool_stats: bool,
    /// Output format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// RNG seed for inputs and keys.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Peak 64-bit integer throughput in Gops/s (density, roofline).
    #[arg(long)]
    peak_gops: Option<f64>,
    /// Main-memory bandwidth in GB/s (density, roofline).
    #[arg(long)]
    bandwidth_gbs: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<String>,
}

impl CommonArgs {
    fn config(&self, default_rns: usize) -> BenchConfig {
        BenchConfig {
            n: self.n,
            rns: self.rns.unwrap_or(default_rns),
            instances: self.instances,
            variants: self.variant.clone(),
            threads: self.threads,
            delta_bits: self.delta_bits,
            reps: self.reps,
            warmup: self.warmup,
            pool: !self.no_pool,
            pool_stats: self.pool_stats,
            seed: self.seed,
            machine: match (self.peak_gops, self.bandwidth_gbs) {
                (Some(gops), Some(gbs)) => Some(MachineParams {
                    peak_int64_ops_per_s: gops * 1e9,
                    mem_bandwidth_bytes_per_s: gbs * 1e9,
                }),
                _ => None,
            },
        }
    }

    fn format(&self) -> OutputFormat {
        if self.format == "json" {
            OutputFormat::Json
        } else {
            OutputFormat::Csv
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sweep NTT kernel variants over batched transforms.
    NttBench {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Benchmark the five evaluation routines.
    HeBench {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Encrypted element-wise polynomial matrix multiplication C += A*B.
    Matmul {
        #[command(flatten)]
        common: CommonArgs,
        /// Matrix shape as MxNxK, e.g. 10x9x8.
        #[arg(long, default_value = "10x9x8")]
        dims: String,
    },
    /// Emit the operational-density model table.
    Density {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn parse_dims(dims: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = dims.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("expected MxNxK, got '{dims}'"));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| format!("bad dimension '{s}': {e}"))
    };
    Ok((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
}

fn emit(report: &BenchReport, common: &CommonArgs) -> std::io::Result<()> {
    match &common.out {
        Some(path) => {
            let mut file = File::create(path)?;
            report.write(common.format(), &mut file)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report.write(common.format(), &mut lock)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::NttBench { common } => run_ntt_bench(&common.config(8)).map(|r| (r, common)),
        Command::HeBench { common } => run_he_bench(&common.config(8)).map(|r| (r, common)),
        Command::Matmul { common, dims } => match parse_dims(dims) {
            Ok((m, n, k)) => {
                let poly_degree = if common.n > 0 { common.n } else { 8192 };
                let spec = MatmulSpec {
                    m,
                    n,
                    k,
                    poly_degree,
                };
                run_matmul(&common.config(2), spec).map(|r| (r, common))
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
        },
        Command::Density { common } => run_density(&common.config(8)).map(|r| (r, common)),
    };

    match outcome {
        Ok((report, common)) => {
            if let Err(e) = emit(&report, common) {
                eprintln!("error writing report: {e}");
                return ExitCode::FAILURE;
            }
            for note in &report.notes {
                eprintln!("{note}");
            }
            if report.all_checks_pass() {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more correctness gates failed");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
