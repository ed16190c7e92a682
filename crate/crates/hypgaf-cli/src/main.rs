use clap::{Args, Parser, Subcommand};
use hypgaf::ModelParams;
use hypgaf_cli::app::{
    self, exit_code, parse_r_geom, resolve_threads, EvalOptions, FormatArg, MethodArg,
};
use hypgaf_cli::record::{self, RunRecord};
use std::path::PathBuf;

/// Variance of the zero count of the hyperbolic Gaussian analytic function,
/// by exact quadrature, closed forms, asymptotic laws, and Monte Carlo.
#[derive(Parser)]
#[command(name = "hypgaf", version, propagate_version = true)]
struct Cli {
    /// Worker thread count (overrides the HYPGAF_THREADS environment variable).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the zero-count variance at one parameter point.
    Variance(VarianceArgs),
    /// Tabulate the variance over a parameter grid into a CSV or JSON file.
    Sweep(SweepArgs),
    /// Estimate the zero-count moments by Monte Carlo and print a JSON summary.
    Simulate(SimulateArgs),
    /// Run the cross-method oracle battery and report pass/fail per check.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct VarianceArgs {
    /// Intensity L > 0.
    #[arg(long = "L", value_name = "L")]
    l: f64,
    /// Disc radius in (0, 1).
    #[arg(long)]
    r: f64,
    /// Evaluation route.
    #[arg(long, value_enum, default_value_t = MethodArg::Quad)]
    method: MethodArg,
    /// Relative tolerance for quadrature-backed methods.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Maximum adaptive bisection depth for quadrature.
    #[arg(long)]
    max_depth: Option<u32>,
    /// Sample count for method = mc.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Base seed for method = mc.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Series truncation tolerance for method = mc.
    #[arg(long)]
    trunc_eps: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated intensities.
    #[arg(long = "L", value_name = "L1,L2,...", value_delimiter = ',', required = true)]
    l: Vec<f64>,
    /// Comma-separated radii.
    #[arg(
        long,
        value_name = "R1,R2,...",
        value_delimiter = ',',
        required_unless_present = "r_geom",
        conflicts_with = "r_geom"
    )]
    r: Vec<f64>,
    /// Geometric radius grid: "A..B" yields r = 1 - 10^-k for k = A..=B.
    #[arg(long, value_name = "A..B")]
    r_geom: Option<String>,
    /// Comma-separated methods.
    #[arg(long = "method", value_delimiter = ',', value_enum, required = true)]
    method: Vec<MethodArg>,
    /// Output file path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Relative tolerance for quadrature-backed methods.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Maximum adaptive bisection depth for quadrature.
    #[arg(long)]
    max_depth: Option<u32>,
    /// Sample count for mc cells.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Base seed for mc cells.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Series truncation tolerance for mc cells.
    #[arg(long)]
    trunc_eps: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Intensity L > 0.
    #[arg(long = "L", value_name = "L")]
    l: f64,
    /// Disc radius in (0, 1).
    #[arg(long)]
    r: f64,
    /// Number of independent samples.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Base seed; sample i uses RNG stream i + 1.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Series truncation tolerance.
    #[arg(long)]
    trunc_eps: Option<f64>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Shrink the Monte Carlo checks for a quick smoke run.
    #[arg(long)]
    fast: bool,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let threads = match resolve_threads(cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    match threads {
        Some(n) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: could not build a {n}-thread pool: {e}");
                    return 2;
                }
            };
            pool.install(|| dispatch(cli.command))
        }
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> i32 {
    match command {
        Command::Variance(args) => cmd_variance(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Selftest(args) => cmd_selftest(args),
    }
}

fn fail(e: &hypgaf::Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

fn cmd_variance(args: VarianceArgs) -> i32 {
    let p = match ModelParams::new(args.l, args.r) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let opts = EvalOptions {
        rel_tol: args.rel_tol,
        max_depth: args.max_depth,
        samples: args.samples,
        seed: args.seed,
        trunc_eps: args.trunc_eps,
    };
    match app::run_one(&p, args.method, &opts) {
        Ok(record) => {
            match record::to_json_string(&record) {
                Ok(text) => {
                    println!("{text}");
                    0
                }
                Err(e) => {
                    eprintln!("error: could not serialize the record: {e}");
                    3
                }
            }
        }
        Err(e) => fail(&e),
    }
}

fn cmd_sweep(args: SweepArgs) -> i32 {
    let radii = if let Some(spec) = &args.r_geom {
        match parse_r_geom(spec) {
            Ok(grid) => grid,
            Err(msg) => {
                eprintln!("error: {msg}");
                return 2;
            }
        }
    } else {
        args.r.clone()
    };
    let opts = EvalOptions {
        rel_tol: args.rel_tol,
        max_depth: args.max_depth,
        samples: args.samples,
        seed: args.seed,
        trunc_eps: args.trunc_eps,
    };

    // All records are built in memory before anything is written, so a
    // failed cell leaves no partial output behind.
    let mut records: Vec<RunRecord> = Vec::with_capacity(
        args.l.len() * radii.len() * args.method.len(),
    );
    for &l in &args.l {
        for &r in &radii {
            for &method in &args.method {
                let p = match ModelParams::new(l, r) {
                    Ok(p) => p,
                    Err(e) => return fail(&e),
                };
                match app::run_one(&p, method, &opts) {
                    Ok(rec) => records.push(rec),
                    Err(e) => return fail(&e),
                }
            }
        }
    }

    let text = match args.format {
        FormatArg::Csv => record::to_csv(&records),
        FormatArg::Json => match record::to_json_string(&records) {
            Ok(mut t) => {
                t.push('\n');
                t
            }
            Err(e) => {
                eprintln!("error: could not serialize the table: {e}");
                return 3;
            }
        },
    };
    if let Err(e) = std::fs::write(&args.out, text) {
        let _ = std::fs::remove_file(&args.out);
        eprintln!("error: could not write {}: {e}", args.out.display());
        return 2;
    }
    eprintln!(
        "wrote {} records to {}",
        records.len(),
        args.out.display()
    );
    0
}

fn cmd_simulate(args: SimulateArgs) -> i32 {
    let p = match ModelParams::new(args.l, args.r) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let mut cfg = hypgaf::McConfig {
        samples: args.samples,
        seed: args.seed,
        ..hypgaf::McConfig::default()
    };
    if let Some(eps) = args.trunc_eps {
        cfg.trunc_eps = eps;
    }
    match hypgaf::mc::mc_estimate(&p, &cfg) {
        Ok(summary) => match record::to_json_string(&summary) {
            Ok(text) => {
                println!("{text}");
                0
            }
            Err(e) => {
                eprintln!("error: could not serialize the summary: {e}");
                3
            }
        },
        Err(e) => fail(&e),
    }
}

fn cmd_selftest(args: SelftestArgs) -> i32 {
    let outcomes = hypgaf::selftest::run_battery(args.fast);
    let total = outcomes.len();
    let mut failures = 0;
    for (i, o) in outcomes.iter().enumerate() {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("[{:>2}/{total}] {status}  {}  ({} ms)", i + 1, o.name, o.wall_ms);
        println!("         {}", o.detail);
        if !o.passed {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("all {total} checks passed");
        0
    } else {
        println!("{failures} of {total} checks FAILED");
        1
    }
}
