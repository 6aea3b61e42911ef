//! `brusselator` command-line tool.
//!
//! Every run writes its output file plus a `<out>.meta` sidecar of
//! `key=value` lines; `brusselator rerun <out>.meta` repeats it bit for bit.
//! Exit codes: 0 success, 1 I/O failure, 2 invalid usage or parameters,
//! 3 numerical failure (blow-up, absorbed jump process, event cap).

mod args;
mod commands;
mod error;
mod meta;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
