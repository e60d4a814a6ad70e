use std::process::ExitCode;

use clap::Parser;

mod cli;
mod commands;
mod config;
mod output;

/// Exit status for bad input.
const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn is_validation(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause
            .downcast_ref::<wikistream::Error>()
            .is_some_and(wikistream::Error::is_validation)
    })
}

fn main() -> ExitCode {
    let argv = match config::merge_config_file(std::env::args_os().collect()) {
        Ok(argv) => argv,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let args = match cli::Cli::try_parse_from(argv) {
        Ok(args) => args,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_validation(&err) {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            })
        }
    }
}
