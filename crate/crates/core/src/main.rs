use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mmfcast::baselines::{random_sampling_oracle, OracleConfig};
use mmfcast::bench::{self, svg, BenchError, EmitFormat, SweepConfig};
use mmfcast::channel::{generate_iid, load_channels, save_channels, ChannelError, ChannelFile, ChannelSet, ChannelSource};
use mmfcast::solver::{kkt_residuals, solve, AuxVars, DualSolution, Precoder, SolveReport};
use mmfcast::{ActiveSetPolicy, InitStrategy, SolverConfig};

#[derive(Parser)]
#[command(name = "mmfcast", version, about = "Max-min fair multicast beamforming solver and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single instance.
    Solve(SolveArgs),
    /// Run a power sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Per-user SNRs of every method on one realization.
    Snapshot(SnapshotArgs),
    /// Compare the solver against the random-sampling oracle.
    Oracle(OracleArgs),
    /// Recompute KKT residuals of a saved solution.
    Verify(VerifyArgs),
    /// Write i.i.d. Rayleigh channels to a file.
    GenChannels(GenArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Channel file (JSON with M, K and columns).
    #[arg(long, conflicts_with_all = ["seed", "m", "k"])]
    channels: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    variance: f64,
    /// Transmit power in dB (unit noise).
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pt_db: f64,
}

impl InstanceArgs {
    fn load(&self) -> Result<ChannelSet> {
        if let Some(path) = &self.channels {
            return Ok(load_channels(path)?);
        }
        match (self.seed, self.m, self.k) {
            (Some(seed), Some(m), Some(k)) => Ok(generate_iid(seed, m, k, self.variance)?),
            _ => bail!("either --channels or all of --seed, --m, --k are required"),
        }
    }

    fn pt(&self) -> f64 {
        bench::db_to_linear(self.pt_db)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    DualFeasible,
    AllActive,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Sum,
    Eig,
    Weakest,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = PolicyArg::DualFeasible)]
    policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = InitArg::Sum)]
    init: InitArg,
    /// Run only the primary start.
    #[arg(long)]
    single_start: bool,
    #[arg(long, default_value_t = 1e-8)]
    outer_tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let cfg = SolverConfig {
            policy: match self.policy {
                PolicyArg::DualFeasible => ActiveSetPolicy::DualFeasible,
                PolicyArg::AllActive => ActiveSetPolicy::AllActive,
            },
            init_strategy: match self.init {
                InitArg::Sum => InitStrategy::SumOfChannels,
                InitArg::Eig => InitStrategy::PrincipalEigenvector,
                InitArg::Weakest => InitStrategy::MatchedWeakest,
            },
            outer_tol: self.outer_tol,
            max_outer_iters: self.max_iters,
            ..SolverConfig::default()
        };
        if self.single_start {
            cfg.single_start()
        } else {
            cfg
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the solution (channels, precoder, duals, report) as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the full report as JSON instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the worker count from the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SnapshotArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pt_db: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Plot the bar chart in dB.
    #[arg(long)]
    db: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    oracle_seed: u64,
    #[arg(long)]
    no_refine: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Solution written by `solve --out`.
    solution: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    variance: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    channels: ChannelFile,
    pt: f64,
    precoder: Vec<[f64; 2]>,
    beta: Vec<[f64; 2]>,
    dual: DualSolution,
    report: SolveReport,
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), BenchError> {
    std::fs::write(path, text).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn print_report(r: &SolveReport) {
    println!("min SNR      {:.9}", r.min_snr);
    for (k, s) in r.per_user_snr.iter().enumerate() {
        println!("  user {k:<3}   {s:.9}");
    }
    println!("spread       {:.3e} (balanced: {})", r.spread, r.balanced);
    println!("rank case    {} ({:?})", r.rank.case.label(), r.rank.outlook);
    println!("iterations   {} (converged: {})", r.iters, r.converged);
    println!("certified    {} (KKT max {:.3e})", r.certified, r.kkt.max());
    if !r.dropped_users.is_empty() {
        println!("dropped      {:?}", r.dropped_users);
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<u8> {
    let h = a.instance.load()?;
    let pt = a.instance.pt();
    let sol = solve(&h, pt, &a.solver.config())?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&sol.report)?);
    } else {
        print_report(&sol.report);
    }
    if let Some(path) = &a.out {
        let file = SolutionFile {
            channels: h.to_file(),
            pt,
            precoder: sol.precoder.to_pairs(),
            beta: sol.beta.to_pairs(),
            dual: sol.dual,
            report: sol.report,
        };
        write_file(path, &serde_json::to_string_pretty(&file)?)?;
    }
    Ok(0)
}

fn cmd_sweep(a: &SweepArgs) -> Result<u8> {
    let mut cfg = SweepConfig::from_file(&a.config)?;
    if a.workers.is_some() {
        cfg.workers = a.workers;
    }
    let result = bench::run_sweep(&cfg)?;
    let out = &cfg.outputs;
    if let Some(p) = &out.csv {
        bench::emit(&result, EmitFormat::Csv, p)?;
    }
    if let Some(p) = &out.json {
        bench::emit(&result, EmitFormat::Json, p)?;
    }
    if let Some(p) = &out.svg {
        bench::emit(&result, EmitFormat::Svg { db: out.svg_db }, p)?;
    }
    println!("{:<12} {:>8} {:>16} {:>6} {:>8}", "method", "pt_db", "mean_min_snr", "ok", "failed");
    for ag in &result.aggregates {
        let mean = ag.mean_min_snr.map_or("-".to_string(), |v| format!("{v:.6}"));
        println!(
            "{:<12} {:>8} {:>16} {:>6} {:>8}",
            ag.method.name(),
            ag.pt_db,
            mean,
            ag.n_ok,
            ag.n_failed
        );
    }
    let failed = result.n_failed();
    if failed > 0 {
        eprintln!("{failed} record(s) failed");
        return Ok(3);
    }
    Ok(0)
}

fn cmd_snapshot(a: &SnapshotArgs) -> Result<u8> {
    let cfg = SweepConfig::new(a.m, a.k, vec![a.pt_db], 1, a.seed);
    let snap = bench::snapshot_users(&cfg)?;
    for row in &snap.rows {
        match &row.error {
            Some(e) => println!("{:<12} failed: {e}", row.method.name()),
            None => {
                let vals: Vec<String> = row.per_user_snr.iter().map(|v| format!("{v:.6}")).collect();
                println!("{:<12} {}", row.method.name(), vals.join(" "));
            }
        }
    }
    if let Some(p) = &a.csv {
        bench::write_snapshot_csv(&snap, p)?;
    }
    if let Some(p) = &a.svg {
        write_file(p, &svg::bar_chart(&snap, a.db))?;
    }
    Ok(if snap.rows.iter().any(|r| r.error.is_some()) { 3 } else { 0 })
}

fn cmd_oracle(a: &OracleArgs) -> Result<u8> {
    let h = a.instance.load()?;
    let pt = a.instance.pt();
    let cfg = OracleConfig {
        samples: a.samples,
        seed: a.oracle_seed,
        refine: !a.no_refine,
        ..OracleConfig::default()
    };
    let oracle = random_sampling_oracle(&h, pt, &cfg)?;
    let sol = solve(&h, pt, &SolverConfig::default())?;
    let gap = (sol.report.min_snr - oracle.min_snr) / oracle.min_snr;
    println!("oracle sampled {:.9} (sample {})", oracle.sampled_min_snr, oracle.best_sample);
    println!("oracle refined {:.9}", oracle.min_snr);
    println!("solver         {:.9}", sol.report.min_snr);
    println!("relative gap   {gap:+.3e}");
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&a.solution).map_err(|source| ChannelError::Io {
        path: a.solution.clone(),
        source,
    })?;
    let file: SolutionFile = serde_json::from_str(&text).map_err(|source| ChannelError::Parse {
        path: a.solution.clone(),
        source,
    })?;
    let h = ChannelSet::from_file(&file.channels, ChannelSource::File { path: a.solution.clone() })?;
    let w = Precoder::from_pairs(&file.precoder, file.pt)?;
    let beta = AuxVars::from_pairs(&file.beta);
    let r = kkt_residuals(&w, &file.dual, &beta, &h)?;
    println!("simplex              {:.3e}", r.simplex);
    println!("stationarity         {:.3e}", r.stationarity);
    println!("slackness (max)      {:.3e}", r.max_slackness);
    println!("power slackness      {:.3e}", r.power_slackness);
    println!("primal infeasibility {:.3e}", r.primal_infeasibility);
    println!("dual infeasibility   {:.3e}", r.dual_infeasibility);
    println!("power gap            {:.3e}", r.power_gap);
    println!("max                  {:.3e}", r.max());
    Ok(0)
}

fn cmd_gen(a: &GenArgs) -> Result<u8> {
    let h = generate_iid(a.seed, a.m, a.k, a.variance)?;
    save_channels(&h, &a.out)?;
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Snapshot(a) => cmd_snapshot(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Verify(a) => cmd_verify(a),
        Command::GenChannels(a) => cmd_gen(a),
    }
}

/// 2 for unreadable or malformed input files, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ChannelError>() {
            if matches!(e, ChannelError::Io { .. } | ChannelError::Parse { .. }) {
                return 2;
            }
        }
        if let Some(e) = cause.downcast_ref::<BenchError>() {
            if matches!(e, BenchError::Io { .. } | BenchError::Json { .. } | BenchError::InvalidConfig(_)) {
                return 2;
            }
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
