use std::process::ExitCode;

use clap::Parser;

mod config;
mod run;

use config::{parse_config, Cli};
use run::{init_threads, run, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = parse_config(&cli).and_then(|cfg| {
        init_threads(cfg.threads)?;
        run(&cfg)
    });
    match status {
        Ok(s) => ExitCode::from(s as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::Error as u8)
        }
    }
}
