//! Command-line interface. Every invocation resolves to a `RunConfig`
//! (flags or a TOML file via `run --config`), executes deterministically,
//! and prints one report. Exit codes: 0 success, 1 violation found,
//! 2 precision exhausted, 3 invalid request.

use clap::Parser;

mod config;
mod exec;
mod report;
mod spec;

use config::{Command, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(name = "veronese", version, about = "Diophantine exponents of lacunary numbers: certified scans, estimates, and exact formulas")]
struct Cli {
    /// Worker threads for partitioned scans (VERONESE_WORKERS sets the
    /// default; reports are byte-identical for every worker count).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Report format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Decimal places for approximate values (default 9).
    #[arg(long, global = true)]
    float_decimals: Option<u8>,
    /// Cap the truncation depth of the number's enclosures; exceeding it
    /// ends the run with exit code 2 instead of silently refining.
    #[arg(long, global = true)]
    depth_cap: Option<u32>,
    /// Reporting tolerance override for estimates, strictly inside (0, 1).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Print the effective configuration as TOML and exit without running.
    #[arg(long, global = true)]
    emit_config: bool,
    #[command(subcommand)]
    command: Command,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return code;
        }
    };

    let env_workers = match std::env::var("VERONESE_WORKERS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) => Some(n),
            Err(_) => {
                eprintln!("error: VERONESE_WORKERS is not a worker count: {s:?}");
                return 3;
            }
        },
        Err(_) => None,
    };

    let cfg = match cli.command {
        // The file is the whole configuration; other flags on the run
        // subcommand are ignored so the report matches the file exactly.
        Command::Run(args) => {
            let text = match std::fs::read_to_string(&args.config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", args.config);
                    return 3;
                }
            };
            match toml::from_str::<RunConfig>(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: invalid config file: {e}");
                    return 3;
                }
            }
        }
        command => RunConfig {
            workers: cli.workers.or(env_workers).unwrap_or(1),
            format: cli.format.unwrap_or(OutputFormat::Json),
            out: cli.out.clone(),
            float_decimals: cli.float_decimals.unwrap_or(9),
            depth_cap: cli.depth_cap,
            tolerance: cli.tolerance,
            command,
        },
    };

    if let Err(msg) = cfg.validate() {
        eprintln!("error: {msg}");
        return 3;
    }

    if cli.emit_config {
        return match toml::to_string_pretty(&cfg) {
            Ok(s) => {
                print!("{s}");
                0
            }
            Err(e) => {
                eprintln!("error: this invocation has no config-file form: {e}");
                3
            }
        };
    }

    match exec::execute(&cfg) {
        Ok(rep) => {
            let text = rep.render(cfg.format, cfg.float_decimals);
            if let Some(path) = &cfg.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {path}: {e}");
                    return 2;
                }
            } else {
                print!("{text}");
            }
            match rep.outcome {
                report::Outcome::Ok => 0,
                report::Outcome::Violation => 1,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exec::error_exit_code(&e)
        }
    }
}
