mod args;
mod commands;
mod config;
mod manifest;

use std::env;
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::error::ErrorKind;
use clap::Parser;
use idla_core::acceptance::{AcceptanceConfig, DEFAULT_ACCEPTANCE_SEED};

use args::{Cli, THREADS_ENV};
use commands::{CliError, Report};
use manifest::{OutputDigest, RunManifest};

const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn thread_count(cli: &Cli) -> Result<usize, CliError> {
    let requested = match cli.threads {
        Some(t) => Some(t),
        None => match env::var(THREADS_ENV) {
            Ok(text) if !text.trim().is_empty() => Some(
                text.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{text}`")))?,
            ),
            _ => None,
        },
    };
    match requested {
        Some(0) => Err(CliError::Usage("thread count must be at least 1".to_string())),
        Some(t) => Ok(t),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn main() -> ExitCode {
    let argv = match config::merge(env::args_os().collect()) {
        Ok(argv) => argv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    ExitCode::from(run(&cli))
}

fn run(cli: &Cli) -> u8 {
    let started_at = now();
    let threads = match thread_count(cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: cannot start the thread pool: {e}");
        return 2;
    }

    let result = commands::execute(&cli.command);
    let (mut report, mut error, mut code) = match result {
        Ok(report) => (report, None, 0),
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            (Report::default(), Some(e.to_string()), code)
        }
    };

    if code == 0 && cli.check && report.checks.is_empty() {
        let cfg = AcceptanceConfig {
            master_seed: commands::master_seed(&cli.command).unwrap_or(DEFAULT_ACCEPTANCE_SEED),
            ..AcceptanceConfig::default()
        };
        report.checks = commands::run_checks(&commands::related_criteria(&cli.command), &cfg);
    }
    if code == 0 && report.checks.iter().any(|c| !c.passed) {
        code = 3;
        error = Some("acceptance check failed".to_string());
    }

    if let Some(dir) = commands::out_dir(&cli.command) {
        let mut outputs = Vec::new();
        for path in &report.outputs {
            match OutputDigest::of(path) {
                Ok(d) => outputs.push(d),
                Err(e) => {
                    eprintln!("error: cannot digest {}: {e}", path.display());
                    if code == 0 {
                        code = 2;
                        error = Some(e.to_string());
                    }
                }
            }
        }
        let manifest = RunManifest {
            artifact_version: ARTIFACT_VERSION.to_string(),
            subcommand: cli.command.name().to_string(),
            config: serde_json::to_value(cli).unwrap_or(serde_json::Value::Null),
            master_seed: commands::master_seed(&cli.command),
            threads,
            started_at,
            finished_at: now(),
            outputs,
            status: match code {
                0 => "ok",
                3 => "check-failed",
                _ => "error",
            }
            .to_string(),
            exit_code: code,
            error,
            checks: report.checks,
        };
        match manifest.write(dir) {
            Ok(path) => println!("manifest: {}", path.display()),
            Err(e) => {
                eprintln!("error: cannot write manifest: {e}");
                if code == 0 {
                    code = 2;
                }
            }
        }
    }
    code
}
