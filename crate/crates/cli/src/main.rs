use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use phasekit_cli::{configure_threads, run, CliError, CommandName, RunConfig};
use serde_json::json;

/// Phase-space tools for oscillators, SU(N) spins and their products.
#[derive(Parser)]
#[command(name = "phasekit", version)]
struct Cli {
    /// Command; may instead be given by the config file.
    #[arg(value_enum)]
    command: Option<CommandName>,

    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write the merged configuration to this file before running.
    #[arg(long)]
    save_config: Option<PathBuf>,

    #[command(flatten)]
    run: RunConfig,
}

fn fail(kind: &str, message: String, cfg: Option<&RunConfig>) -> ExitCode {
    let body = json!({
        "error": message,
        "context": {
            "kind": kind,
            "command": cfg.and_then(|c| c.command),
            "system": cfg.and_then(|c| c.system.clone()),
        },
    });
    let _ = writeln!(std::io::stderr(), "{body}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim().to_string(), None),
    };
    let base = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => return fail(e.kind(), e.to_string(), None),
        },
        None => RunConfig::default(),
    };
    let flags = RunConfig {
        command: cli.command,
        ..cli.run
    };
    let cfg = base.overlay(flags);
    if let Some(p) = &cli.save_config {
        if let Err(e) = cfg.save(p) {
            return fail(e.kind(), e.to_string(), Some(&cfg));
        }
    }
    configure_threads(cfg.threads);
    let stdout = std::io::stdout();
    let result: Result<(), CliError> = run(&cfg, &mut stdout.lock());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.to_string(), Some(&cfg)),
    }
}
