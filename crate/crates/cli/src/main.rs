mod args;
mod commands;

use std::process::ExitCode;

use bicons_core::{GeoError, ParseError};
use clap::Parser;

use crate::args::Cli;
use crate::commands::{ConfigError, Session};

/// Exit statuses.
const EXIT_GATE_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_IO: u8 = 4;

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    if err.downcast_ref::<ParseError>().is_some() || err.downcast_ref::<ConfigError>().is_some() {
        return ("config", EXIT_CONFIG);
    }
    if let Some(e) = err.downcast_ref::<GeoError>() {
        return match e {
            GeoError::InvalidParameter(_) | GeoError::InvalidStep { .. } => ("config", EXIT_CONFIG),
            _ => ("domain", EXIT_DOMAIN),
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return ("io", EXIT_IO);
    }
    ("internal", EXIT_IO)
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("BICONS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| ConfigError(format!("BICONS_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("bicons: error[usage]: {}", one_line(first.trim_start_matches("error: ")));
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = configure_threads().and_then(|_| {
        let mut session = Session::start();
        let outcome = commands::run(cli.command, &mut session);
        session.finish(outcome.as_ref().ok())?;
        outcome
    });
    match result {
        Ok(gates) => {
            let mut failed = false;
            for g in &gates {
                let status = if g.passed { "pass" } else { "FAIL" };
                eprintln!("bicons: gate[{}]: {status} value={:e} limit={:e}", g.name, g.value, g.limit);
                failed |= !g.passed;
            }
            if failed {
                ExitCode::from(EXIT_GATE_FAILED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            let (kind, code) = classify(&err);
            eprintln!("bicons: error[{kind}]: {}", one_line(&format!("{err:#}")));
            ExitCode::from(code)
        }
    }
}
