//! `holopush`: batch front-end for the proper-map pipeline.

mod artifacts;
mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "holopush", version, about = "Proper holomorphic maps into strongly pseudoconvex domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline on a config and write all artifacts.
    Run {
        /// Run config (JSON, or TOML by extension).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Dotted-path override, e.g. `grid.k=128`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Re-run verification on a stored map.
    Verify {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Regenerate the SVG figures of a run directory.
    Figures {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn configure_threads() {
    let Ok(raw) = std::env::var("HOLOPUSH_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            #[cfg(feature = "parallel")]
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: HOLOPUSH_THREADS ignored: {e}");
            }
        }
        _ => eprintln!("warning: HOLOPUSH_THREADS={raw} is not a positive integer; ignored"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let code = match cli.command {
        Command::Run { config, out, set } => commands::cmd_run(&config, &out, &set),
        Command::Verify { map, config } => commands::cmd_verify(&map, &config),
        Command::Figures { dir } => commands::cmd_figures(&dir),
    };
    ExitCode::from(code)
}
