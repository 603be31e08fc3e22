use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frame_hebb::config::{ModeSpec, RuleSpec};
use frame_hebb::error::exit;
use frame_hebb::{Overrides, OutputOptions, RunConfig};

/// Verification harness for the Oja and EGHR Hebbian PCA rules.
///
/// Exit codes: 0 all checks passed, 1 a check failed, 2 bad configuration
/// or input, 3 training diverged.
#[derive(Parser)]
#[command(name = "frame-hebb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Oja/EGHR equivalence checks.
    Equivalence(RunArgs),
    /// Frame operator, bound and frame-expansion checks.
    FrameCheck(RunArgs),
    /// Train one rule and record its trajectory.
    Train(RunArgs),
    /// Summarise the record files in a directory.
    Report {
        /// Directory to read (defaults to the configured output directory).
        dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nu: Option<usize>,
    /// Monte-Carlo sample size (largest size of the rate ladders).
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of checks to run.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    #[arg(long, value_parser = parse_rule)]
    rule: Option<RuleSpec>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ModeSpec>,
    /// Learning rate.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Add a wall_time_ms column (output is then no longer reproducible).
    #[arg(long)]
    timings: bool,
}

fn parse_rule(s: &str) -> Result<RuleSpec, String> {
    match s {
        "oja" => Ok(RuleSpec::Oja),
        "eghr" => Ok(RuleSpec::Eghr),
        _ => Err(format!("unknown rule '{s}' (expected oja or eghr)")),
    }
}

fn parse_mode(s: &str) -> Result<ModeSpec, String> {
    match s {
        "closed" => Ok(ModeSpec::Closed),
        "empirical" => Ok(ModeSpec::Empirical),
        _ => Err(format!("unknown mode '{s}' (expected closed or empirical)")),
    }
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, frame_hebb::CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(&Overrides {
            seed: self.seed,
            nx: self.nx,
            nu: self.nu,
            samples: self.samples,
            out: self.out.clone(),
            checks: self.checks.clone(),
            rule: self.rule,
            mode: self.mode,
            learning_rate: self.eta,
            steps: self.steps,
        });
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT_ERROR as u8 } else { exit::OK as u8 });
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Report { dir, out } => {
            let dir = dir.clone().or_else(|| out.clone()).unwrap_or_else(|| RunConfig::default().output_dir);
            frame_hebb::cmd_report(&dir, &mut stdout)
        }
        Command::Equivalence(a) | Command::FrameCheck(a) | Command::Train(a) => {
            let opts = OutputOptions { timings: a.timings };
            a.resolve().and_then(|cfg| match &cli.command {
                Command::Equivalence(_) => frame_hebb::cmd_equivalence(&cfg, opts, &mut stdout),
                Command::FrameCheck(_) => frame_hebb::cmd_frame_check(&cfg, opts, &mut stdout),
                _ => frame_hebb::cmd_train(&cfg, opts, &mut stdout),
            })
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
