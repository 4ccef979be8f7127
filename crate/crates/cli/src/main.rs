use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use kahler_cli::{
    audit, catalog_listing, catalog_text, report_json, report_text, resolve, DEFAULT_POINTS,
    DEFAULT_TOLERANCE,
};
use kahler_core::geometry::DEFAULT_SEED;

#[derive(Parser)]
#[command(
    name = "kahler-audit",
    version,
    about = "Numerical audits of curvature identities on 4-dimensional metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit a builtin metric (e.g. `de_sitter`, `sphere4(2)`) or a metric file.
    Audit {
        metric: String,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        /// Write the JSON report here (`-` for standard output).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Inspect the builtin catalog.
    Catalog {
        #[command(subcommand)]
        command: CatalogCommand,
    },
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// One line per builtin with its expected properties.
    List {
        /// Write the listing as JSON here (`-` for standard output).
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn write_output(path: &PathBuf, text: &str) -> anyhow::Result<()> {
    if path.as_os_str() == "-" {
        std::io::stdout().write_all(text.as_bytes())?;
    } else {
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn run_audit(
    metric: &str,
    points: usize,
    seed: u64,
    tol: f64,
    json: Option<&PathBuf>,
) -> anyhow::Result<bool> {
    let entry = resolve(metric)?;
    let report = audit(&entry, points, seed, tol)?;
    let to_stdout = json.is_some_and(|p| p.as_os_str() == "-");
    if !to_stdout {
        print!("{}", report_text(&report));
    }
    if let Some(path) = json {
        write_output(path, &report_json(&report))?;
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Audit {
            metric,
            points,
            seed,
            tol,
            json,
        } => match run_audit(&metric, points, seed, tol, json.as_ref()) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
        Command::Catalog {
            command: CatalogCommand::List { json },
        } => {
            let listing = catalog_listing();
            let result = match json {
                Some(path) => {
                    let mut text =
                        serde_json::to_string_pretty(&listing).expect("listing serializes");
                    text.push('\n');
                    if path.as_os_str() != "-" {
                        print!("{}", catalog_text(&listing));
                    }
                    write_output(&path, &text)
                }
                None => {
                    print!("{}", catalog_text(&listing));
                    Ok(())
                }
            };
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
