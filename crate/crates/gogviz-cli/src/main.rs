//! Command-line front end for the chart compiler.
//!
//! `gogviz compile --spec chart.json --out chart.svg` writes SVG;
//! `gogviz validate --spec chart.json` runs the full pipeline without
//! writing output. Diagnostics go to stderr as JSON lines
//! `{severity, phase, path, message}`; `--debug` adds one JSON line per
//! compiler phase. Exit codes: 0 success, 1 any error diagnostic, 2 usage.

use clap::{Parser, Subcommand};
use gogviz::compiler::{compile, CompileOutput, FsResolver};
use gogviz::svg::emit_svg;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gogviz", version, about = "Compile declarative JSON chart specs to SVG")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a spec to SVG.
    Compile {
        /// Path to the JSON specification.
        #[arg(long)]
        spec: PathBuf,
        /// Output SVG path, or `-` for stdout.
        #[arg(long)]
        out: PathBuf,
        /// Base directory for relative `values` paths (default: the spec
        /// file's directory).
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Print a JSON summary per compiler phase to stderr.
        #[arg(long)]
        debug: bool,
    },
    /// Run the full pipeline and report diagnostics without writing output.
    Validate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        debug: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Compile { spec, out, data_dir, debug } => run(&spec, Some(&out), data_dir, debug),
        Command::Validate { spec, data_dir, debug } => run(&spec, None, data_dir, debug),
    }
}

fn run(spec: &PathBuf, out: Option<&PathBuf>, data_dir: Option<PathBuf>, debug: bool) -> ExitCode {
    let spec_text = match std::fs::read_to_string(spec) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read spec {}: {e}", spec.display());
            return ExitCode::from(2);
        }
    };
    let base = data_dir
        .or_else(|| spec.parent().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let output = compile(&spec_text, &FsResolver { base });
    report(&output, debug);
    if output.has_errors() {
        return ExitCode::from(1);
    }
    if let (Some(out), Some(scene)) = (out, &output.scene) {
        let bytes = match emit_svg(scene) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        };
        if out.as_os_str() == "-" {
            if std::io::stdout().write_all(&bytes).is_err() {
                return ExitCode::from(1);
            }
        } else if let Err(e) = std::fs::write(out, &bytes) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}

fn report(output: &CompileOutput, debug: bool) {
    if debug {
        for phase in &output.phases {
            let line = serde_json::json!({
                "phase": phase.phase,
                "summary": phase.detail,
            });
            eprintln!("{line}");
        }
    }
    for diag in &output.diagnostics {
        eprintln!("{}", serde_json::to_string(diag).expect("diagnostics serialize"));
    }
}
