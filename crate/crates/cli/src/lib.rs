//! Command-line front end: argument parsing, input files, the subcommands and
//! their reports.

pub mod args;
pub mod commands;
pub mod input;
pub mod report;

use std::io::IsTerminal;
use std::time::Instant;

use anyhow::Result;

use args::{Cli, Command, Format};
use report::RunReport;

/// Runs the parsed command line and returns its report.
pub fn execute(cli: &Cli) -> Result<RunReport> {
    let start = Instant::now();
    let g = &cli.global;
    let mut report = match &cli.command {
        Command::Table(a) => commands::table::run(a, g.seed)?,
        Command::Round(a) => commands::round::run(a, g.seed, &g.tol)?,
        Command::Verify(a) => commands::verify::run(a, g.seed, &g.tol)?,
        Command::Estimate(a) => commands::estimate::run(a, g.seed, &g.tol)?,
    };
    if !g.no_meta {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}

/// The requested format, else `pretty` on a terminal and `json` otherwise.
pub fn output_format(cli: &Cli) -> Format {
    cli.global.format.unwrap_or_else(|| {
        if std::io::stdout().is_terminal() {
            Format::Pretty
        } else {
            Format::Json
        }
    })
}
