use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use wfbeam_cli::{run, Invocation, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    SuAudit,
    PairAudit,
    BeamResidual,
    PhaseAudit,
    WfScan,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::SuAudit => Subcommand::SuAudit,
            Command::PairAudit => Subcommand::PairAudit,
            Command::BeamResidual => Subcommand::BeamResidual,
            Command::PhaseAudit => Subcommand::PhaseAudit,
            Command::WfScan => Subcommand::WfScan,
        }
    }
}

/// Gaussian-beam probes and wave front detection on 2D Riemannian disks.
#[derive(Debug, Parser)]
#[command(name = "wfbeam", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Scenario config (JSON, see docs/config.schema.json).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `output.dir` of the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (fallback: WFBEAM_THREADS, then TOOL_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let inv = Invocation { config: args.config, out: args.out, threads: args.threads, seed: args.seed };
    match run(args.command.into(), &inv) {
        Ok(r) => {
            println!("{}: wrote {} to {}", r.manifest.subcommand, r.manifest.artifacts.join(", "), r.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wfbeam: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
