use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pml_core::Mode;

#[derive(Debug, Parser)]
#[command(name = "pml", version, about = "Audit finite channels with pointwise and event maximal leakage")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Leakage of every output.
    Pml(Common),
    /// κ(δ), the per-input values h_x(δ) and the least private event.
    Eml(Common),
    /// Check an (ε, δ) guarantee in every flavor.
    Guarantee(Common),
    /// Merge similar outputs and drop zero-mass ones.
    Reduce(Common),
    /// Compose the model with a second stage and compare the composed guarantees.
    Compose(Common),
    /// Other privacy measures and the bounds PML gives on them.
    Compare(Common),
    /// Everything at once, as one report.
    Audit(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Rational,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Rational => Mode::Rational,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Model file; without it, --seed draws a random model.
    #[arg(short = 'i', long = "input")]
    pub input: Option<PathBuf>,

    /// δ values, comma separated ("1/6", "0.1").
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta: Vec<String>,

    /// ε values as ratios ("6/5") or natural logs ("log:0.18"), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub epsilon: Vec<String>,

    /// Second-stage file for `compose`.
    #[arg(long)]
    pub second: Option<PathBuf>,

    /// Gain function file; adds g-leakage to `pml`.
    #[arg(long)]
    pub gain: Option<PathBuf>,

    /// Measures for `compare` and `audit`: ldp, approx_ldp, lip, ldi, mi, tv,
    /// maxinfo, fdiv:kl, fdiv:tv, fdiv:chi2.
    #[arg(long, value_delimiter = ',')]
    pub against: Vec<String>,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Arithmetic; defaults to the model file's mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// Seed for a random model when no input is given.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Shape of the random model, as INPUTSxOUTPUTS.
    #[arg(long, default_value = "3x3")]
    pub shape: String,

    /// Include wall-clock time in `audit`.
    #[arg(long)]
    pub timing: bool,
}
