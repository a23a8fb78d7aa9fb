//! `aca`: synthetic dataset bundles, the detector/attack game, and replay
//! of recorded games.
//!
//! Exit codes: 0 success, 2 usage, 3 missing or malformed data, 4 runtime
//! failure (including replay mismatches).

mod args;
mod bundle;
mod commands;
mod data;
mod failure;
mod manifest;
mod output;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(failure::Kind::Usage.code());
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(failure::Kind::Runtime.code());
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.kind.code())
        }
    }
}
