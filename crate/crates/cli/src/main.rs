mod args;
mod commands;
mod report;
mod table;

use std::process::ExitCode;

use clap::Parser;
use pml_core::{Mode, Rational};

use args::{Cli, Command, Format};
use report::{Envelope, SCHEMA_VERSION};

#[derive(Debug)]
pub enum CliError {
    Core(pml_core::Error),
    /// Bad flags or unreadable files.
    Input(String),
}

impl From<pml_core::Error> for CliError {
    fn from(e: pml_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_computational() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(m) => f.write_str(m),
        }
    }
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Pml(_) => "pml",
        Command::Eml(_) => "eml",
        Command::Guarantee(_) => "guarantee",
        Command::Reduce(_) => "reduce",
        Command::Compose(_) => "compose",
        Command::Compare(_) => "compare",
        Command::Audit(_) => "audit",
    }
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let args = match &cli.command {
        Command::Pml(a)
        | Command::Eml(a)
        | Command::Guarantee(a)
        | Command::Reduce(a)
        | Command::Compose(a)
        | Command::Compare(a)
        | Command::Audit(a) => a,
    };
    let (model, mode) = commands::resolve_model(args)?;
    let body = match mode {
        Mode::Rational => commands::run::<Rational>(&cli.command, args, model)?,
        Mode::Float => commands::run::<f64>(&cli.command, args, model)?,
    };
    Ok(match args.format {
        Format::Table => table::render(&body),
        Format::Json => {
            let env = Envelope {
                schema_version: SCHEMA_VERSION,
                command: name(&cli.command).to_string(),
                mode: mode.as_str().to_string(),
                result: body,
            };
            serde_json::to_string_pretty(&env).expect("reports serialize") + "\n"
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
