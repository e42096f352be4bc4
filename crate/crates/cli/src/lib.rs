//! Command-line front end for `implicit-core`.
//!
//! Data goes to stdout (or `--out`), diagnostics and timings to stderr.
//! Exit codes: 0 success, 1 some solve failed, 2 invalid input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::Parser;
use implicit_core::builtins::{builtin, NAMES};

pub mod args;
pub mod audit;
pub mod config;
pub mod demo;
pub mod error;
pub mod invert;
pub mod output;
pub mod parallel;
pub mod problem;
pub mod solve;

use args::{Cli, Command, Format};
use config::FileConfig;
use error::CliError;

pub(crate) fn format_of(flag: Option<Format>, file: &FileConfig, default: Format) -> Result<Format, CliError> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match file.format.as_deref() {
        None => Ok(default),
        Some("csv") => Ok(Format::Csv),
        Some("jsonl") => Ok(Format::Jsonl),
        Some(other) => Err(CliError::invalid("format", format!("'{other}' is not one of csv, jsonl"))),
    }
}

pub(crate) fn out_path(flag: Option<&Path>, file: &FileConfig) -> Option<PathBuf> {
    flag.map(Path::to_path_buf).or_else(|| file.out.as_ref().map(PathBuf::from))
}

fn list(stdout: &mut dyn Write) -> Result<i32, CliError> {
    for name in NAMES {
        let b = builtin(name).expect("registered name");
        writeln!(stdout, "{name}\tn={}\tm={}\t{}", b.map.n(), b.map.m(), b.description)?;
    }
    Ok(0)
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    2
                }
            };
            return code;
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match &cli.command {
        Command::Solve(a) => solve::run(a, &echo, stdout, stderr),
        Command::Invert(a) => invert::run(a, &echo, stdout, stderr),
        Command::Audit(a) => audit::run(a, &echo, stdout, stderr),
        Command::Demo(a) => demo::run(a, stdout, stderr),
        Command::List => list(stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
