//! Manifest-driven front end.
//!
//! Exit codes: 0 all checks passed, 1 usage or manifest parse error,
//! 2 a theorem hypothesis failed (structured outcome), 3 numerical or
//! I/O failure while running analyses.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use geoball_cli::manifest::{Manifest, ManifoldSpec};
use geoball_cli::runner::{self, RunStatus};

/// Evaluates curvature invariants, geodesic-ball volumes, Euler
/// characteristics, and space-form hypotheses for an analytic metric
/// described by a run manifest.
#[derive(Parser)]
#[command(name = "geoball", version)]
struct Cli {
    /// Path to a run manifest (line-oriented `key = value`; see the guide).
    manifest: Option<PathBuf>,

    /// Override the manifest's output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Parse and validate the manifest without running anything.
    #[arg(long)]
    check: bool,

    /// List the metric catalog and its manifest parameters.
    #[arg(long)]
    list_manifolds: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    if cli.list_manifolds {
        for (token, params) in ManifoldSpec::catalog() {
            println!("{token}: {params}");
        }
        return ExitCode::SUCCESS;
    }

    // Worker-count control. Reports are byte-identical for any setting;
    // this only trades wall time.
    if let Ok(raw) = std::env::var("GEOBALL_WORKERS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: GEOBALL_WORKERS must be a positive integer, got `{raw}`");
                return ExitCode::from(1);
            }
        }
    }

    let Some(path) = cli.manifest else {
        eprintln!("error: a manifest path is required (or use --list-manifolds)");
        return ExitCode::from(1);
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(1);
        }
    };
    let manifest = match Manifest::parse(&text) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if cli.check {
        println!("manifest OK: {}", path.display());
        return ExitCode::SUCCESS;
    }

    match runner::execute(&manifest, cli.out.as_deref()) {
        Ok(outcome) => {
            for file in &outcome.written {
                println!("wrote {}", file.display());
            }
            match outcome.status {
                RunStatus::Passed => {
                    println!("all checks passed");
                    ExitCode::SUCCESS
                }
                RunStatus::HypothesisFailed(names) => {
                    eprintln!("hypothesis failed: {}", names.join("; "));
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
