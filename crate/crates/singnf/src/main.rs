//! Command-line front end: parse a germ, run the pipeline, render the result.

use clap::{Parser, ValueEnum};
use singnf::moduli::{run, RunOptions};
use singnf::poly;
use singnf::report::{render_json, render_text};
use std::process::ExitCode;

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum CheckLevel {
    Fast,
    /// Re-verify Milnor invariance after every applied equivalence.
    Paranoid,
}

/// Computes the normal form family of a bivariate germ with non-degenerate
/// Newton boundary and the moduli parameter values of its normal form
/// equation.
#[derive(Parser, Debug)]
#[command(name = "singnf", version, about)]
struct Cli {
    /// Polynomial germ in x and y, e.g. "y^28+x*y^7+x^2*y^3+11*x^2*y^4+x^22".
    #[arg(conflicts_with = "file", required_unless_present = "file")]
    input: Option<String>,

    /// Read the germ from a file instead.
    #[arg(long, conflicts_with = "input")]
    file: Option<std::path::PathBuf>,

    /// Emit the result as JSON.
    #[arg(long)]
    json: bool,

    /// Include a step-by-step trace of the elimination in the output.
    #[arg(long)]
    trace: bool,

    /// Override the inner cancellation iteration cap.
    #[arg(long, value_name = "N")]
    max_inner: Option<usize>,

    /// Consistency checking level.
    #[arg(long, value_enum, default_value_t = CheckLevel::Fast)]
    check: CheckLevel,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match (&cli.input, &cli.file) {
        (Some(s), None) => s.clone(),
        (None, Some(path)) => match std::fs::read_to_string(path) {
            Ok(s) => s.trim().to_string(),
            Err(e) => {
                eprintln!("singnf: cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        _ => unreachable!("clap enforces exactly one input source"),
    };
    let f = match poly::parse(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("singnf: {e}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        max_inner: cli.max_inner,
        paranoid: cli.check == CheckLevel::Paranoid,
    };
    match run(&f, &opts) {
        Ok(result) => {
            if cli.json {
                println!("{}", render_json(&result));
            } else {
                print!("{}", render_text(&result, cli.trace));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("singnf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
