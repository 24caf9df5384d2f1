// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use hlseval::cli::{self, Cli};

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_INPUT } else { cli::EXIT_OK } as u8);
        }
    };
    let level = match parsed.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let code = cli::run(parsed, &mut std::io::stdout().lock());
    ExitCode::from(code as u8)
}
