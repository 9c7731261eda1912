mod commands;
mod config;
mod error;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use itd_core::weyl::SigmaSource;

use commands::Run;
use config::{Emit, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "itd",
    version,
    about = "Signed counting of interior transmission eigenvalues"
)]
struct Cli {
    /// Worker threads (falls back to ITD_THREADS, then all cores).
    #[arg(long, global = true, env = "ITD_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    emit: Option<Vec<Emit>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Trajectory,
    Flow,
    Signature,
}

impl From<Source> for SigmaSource {
    fn from(s: Source) -> Self {
        match s {
            Source::Trajectory => SigmaSource::Trajectory,
            Source::Flow => SigmaSource::Flow,
            Source::Signature => SigmaSource::Signature,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Locate ITEs and assign their three signs.
    IteScan(Common),
    /// Trace z_l(k) and classify its passages through 1.
    DualityTrace(Common),
    /// Spectral flow ledger of the negative count.
    FlowSweep(Common),
    /// Signed counting function against its Weyl prediction.
    WeylReport {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "flow")]
        source: Source,
    },
    /// Signature integrals and per-record sign agreement.
    SignatureCheck(Common),
    /// Run the built-in cross-module suites.
    Selftest {
        #[arg(long)]
        list: bool,
    },
}

fn load(c: &Common) -> Result<Run, CliError> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    if let Some(l) = c.lambda_max {
        cfg.lambda_max = l;
    }
    if let Some(t) = c.t {
        cfg.medium.t = t;
    }
    if let Some(e) = &c.emit {
        cfg.emit = e.clone();
    }
    // flags pass through the same checks as file values
    let cfg = RunConfig::parse(&cfg.to_json())?;
    Run::new(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    type Handler = fn(&mut Run) -> Result<(), CliError>;
    let (common, handler): (Common, Handler) = match cli.command {
        Command::Selftest { list: true } => {
            selftest::list();
            return Ok(());
        }
        Command::Selftest { list: false } => return selftest::run(),
        Command::WeylReport { common, source } => {
            let mut run = load(&common)?;
            let r = commands::weyl_report(&mut run, source.into());
            report_written(&run);
            return r;
        }
        Command::IteScan(c) => (c, commands::ite_scan),
        Command::DualityTrace(c) => (c, commands::duality_trace),
        Command::FlowSweep(c) => (c, commands::flow_sweep),
        Command::SignatureCheck(c) => (c, commands::signature_check),
    };
    let mut run = load(&common)?;
    let r = handler(&mut run);
    report_written(&run);
    r
}

fn report_written(run: &Run) {
    for p in run.out.written() {
        println!("wrote {}", p.display());
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
