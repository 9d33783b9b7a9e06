use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gca_cli::render::Format;
use gca_cli::{run, CliError, Command, Options, Problem};
use gca_core::language::Budget;

#[derive(Parser)]
#[command(name = "gca", version, about = "Group shifts and group cellular automata")]
struct Cli {
    /// Problem file (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Largest torus period tried by membership searches.
    #[arg(long, global = true)]
    budget_period: Option<usize>,
    /// Largest box radius tried by refutation searches.
    #[arg(long, global = true)]
    budget_box: Option<usize>,
    /// Step limit for each search.
    #[arg(long, global = true)]
    budget_steps: Option<u64>,
    /// Run the independent routes and the torus oracle as well.
    #[arg(long, global = true)]
    cross_check: bool,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Pgm,
}

#[derive(Subcommand)]
enum Sub {
    /// Is the named pattern in the language of the shift?
    Member { shift: String, pattern: String },
    /// Containment both ways.
    Compare { first: String, second: String },
    /// Shift of width-n slices along the first axis.
    Project { shift: String, width: usize },
    /// Image of a map, on its domain or on a named subshift of it.
    Image { map: String, shift: Option<String> },
    /// Configurations sent to the identity.
    Kernel { map: String },
    /// Shift of all orbits; time is the last axis.
    Spacetime { map: String },
    /// Trace on the box of the given side at the origin.
    Trace {
        map: String,
        #[arg(default_value_t = 1)]
        side: usize,
    },
    /// Intersection of all forward images.
    Limitset { map: String },
    /// All decision procedures on one automaton.
    Analyze {
        map: String,
        /// Largest trace box searched for a non-transitivity witness.
        #[arg(long, default_value_t = 3)]
        max_side: usize,
    },
    /// Topological entropy of a one-dimensional shift.
    Entropy { shift: String },
    /// Space-time diagram from a named configuration.
    Orbit {
        map: String,
        /// Named configuration at time zero
        #[arg(long)]
        config: String,
        /// Number of rows, the configuration itself first
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        /// Write the diagram here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write(path: &PathBuf, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn main_inner(cli: Cli) -> Result<i32, CliError> {
    let input = cli.input.ok_or_else(|| CliError::validation("--input FILE is required"))?;
    let problem = Problem::load(&input)?;
    let d = problem.budget;
    let budget = Budget::new(
        cli.budget_period.unwrap_or(d.max_period),
        cli.budget_box.unwrap_or(d.max_box),
        cli.budget_steps.unwrap_or(d.max_steps),
    )?;
    let mut out = None;
    let command = match cli.command {
        Sub::Member { shift, pattern } => Command::Member { shift, pattern },
        Sub::Compare { first, second } => Command::Compare { first, second },
        Sub::Project { shift, width } => Command::Project { shift, width },
        Sub::Image { map, shift } => Command::Image { map, shift },
        Sub::Kernel { map } => Command::Kernel { map },
        Sub::Spacetime { map } => Command::Spacetime { map },
        Sub::Trace { map, side } => Command::Trace { map, side },
        Sub::Limitset { map } => Command::Limitset { map },
        Sub::Analyze { map, max_side } => Command::Analyze { map, max_side },
        Sub::Entropy { shift } => Command::Entropy { shift },
        Sub::Orbit { map, config, steps, format, out: o } => {
            out = Some(o);
            let format = match format {
                FormatArg::Text => Format::Text,
                FormatArg::Pgm => Format::Pgm,
            };
            Command::Orbit { map, config, steps, format }
        }
    };
    let outcome = run(&command, &problem, &Options { budget, cross_check: cli.cross_check })?;
    let json = outcome.report.to_json() + "\n";
    match (&cli.report, outcome.artifact) {
        (Some(path), art) => {
            write(path, json.as_bytes())?;
            if let Some(a) = art {
                match out.flatten() {
                    Some(p) => write(&p, &a)?,
                    None => print!("{}", String::from_utf8_lossy(&a)),
                }
            }
        }
        (None, Some(a)) => match out.flatten() {
            Some(p) => {
                write(&p, &a)?;
                print!("{json}");
            }
            None => print!("{}", String::from_utf8_lossy(&a)),
        },
        (None, None) => print!("{json}"),
    }
    let undecided = outcome.report.verdicts.iter().any(|v| v.verdict == "budget-exceeded");
    Ok(if undecided { 2 } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("gca: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
