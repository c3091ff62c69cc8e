//! `radon`: detect, simulate, check and path runs that write JSON and CSV.
//!
//! Exit status: 0 on success (including greedy-certified results, which add
//! a warning record), 1 on runtime errors, 2 on usage errors, 3 when outputs
//! were written but a solve stopped short of optimality. Errors and warnings
//! go to stderr as one JSON object per line.

// `!(x >= 0.0)` style checks are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod input;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use config::{Cli, Command, RunConfig, UsageError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (name, flags) = match &cli.command {
        Command::Detect(f) => ("detect", f),
        Command::Simulate(f) => ("simulate", f),
        Command::Check(f) => ("check", f),
        Command::Path(f) => ("path", f),
    };
    let result = RunConfig::validate(name, flags).and_then(|cfg| match cli.command {
        Command::Detect(_) => commands::detect(&cfg),
        Command::Simulate(_) => commands::simulate(&cfg),
        Command::Check(_) => commands::check(&cfg),
        Command::Path(_) => commands::path(&cfg),
    });
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("{}", json!({ "warning": w, "command": name }));
            }
            if outcome.optimal {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}", json!({ "error": "not-optimal", "command": name, "message": "a solve stopped before optimality; outputs were written" }));
                ExitCode::from(3)
            }
        }
        Err(e) => {
            let (kind, code) = classify(&e);
            eprintln!("{}", json!({ "error": kind, "command": name, "message": format!("{e:#}") }));
            ExitCode::from(code)
        }
    }
}

fn classify(e: &anyhow::Error) -> (&'static str, u8) {
    if e.downcast_ref::<UsageError>().is_some() {
        return ("usage", 2);
    }
    match e.downcast_ref::<radon_core::Error>() {
        Some(radon_core::Error::Precondition(_)) => ("usage", 2),
        Some(radon_core::Error::Parse { .. }) | Some(radon_core::Error::InvalidKSet(_)) => ("input", 1),
        Some(radon_core::Error::EnumerationCap { .. }) | Some(radon_core::Error::LpTooLarge { .. }) => ("too-large", 1),
        Some(_) => ("solver", 1),
        None if e.downcast_ref::<std::io::Error>().is_some() => ("io", 1),
        None => ("error", 1),
    }
}
