use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use resurgamma::verify::Suite;
use resurgamma::{Complex, Error, Float, Rational};

#[derive(Debug, Parser)]
#[command(name = "resurgamma", version, about = "Large-parameter asymptotics of Γ(-a, λa) with certified remainder bounds")]
pub struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = "RESURGAMMA_DEFAULT_PRECISION", default_value_t = 128, value_parser = clap::value_parser!(u32).range(64..=1_000_000))]
    pub precision: u32,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to a file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truncated expansion with the best applicable remainder bound.
    Expand(ExpandArgs),
    /// All four remainder bounds at one N or over N = 2..n-max.
    Bound(BoundArgs),
    /// Exact coefficient polynomials, or their values at a given λ.
    Coeffs(CoeffsArgs),
    /// The n = 100 late-coefficient reference table.
    Table1,
    /// One terminant value T̂_p(w), w = |w|·e^{i·arg}.
    Terminant(TerminantArgs),
    /// Terminant against its error-function smoothing across arg w = π.
    StokesSweep(StokesArgs),
    /// Terminant re-expansion of the remainder with its bound.
    Hyper(HyperArgs),
    /// Reference value of Γ(-a, λa) by quadrature.
    Oracle(OracleArgs),
    /// Run a soundness suite; exit status 2 on any violation.
    Verify(VerifyArgs),
}

impl Command {
    pub fn default_format(&self) -> Format {
        match self {
            Command::Coeffs(_) | Command::Hyper(_) | Command::Terminant(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// A positive rational given as `p/q`, an integer, or a plain decimal.
#[derive(Debug, Clone)]
pub struct Lambda {
    pub value: Rational,
}

impl FromStr for Lambda {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let value = parse_rational(s)?;
        if value <= 0 {
            return Err("λ must be positive".into());
        }
        Ok(Lambda { value })
    }
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("cannot parse '{s}' as a decimal"));
        }
        let num = rug::Integer::from_str(&digits).map_err(|e| e.to_string())?;
        let den = rug::Integer::from(rug::Integer::u_pow_u(10, frac.len() as u32));
        let q = Rational::from((num, den));
        return Ok(if neg { -q } else { q });
    }
    Rational::from_str(s).map_err(|e| format!("cannot parse '{s}': {e}"))
}

pub fn parse_float(s: &str, bits: u32) -> Result<Float, Error> {
    Float::parse(s.trim()).map(|p| Float::with_val(bits, p)).map_err(|e| Error::Domain(format!("cannot parse '{s}': {e}")))
}

#[derive(Debug, Args)]
pub struct ComplexArg {
    /// Real part of a.
    #[arg(long = "a-re", allow_hyphen_values = true)]
    pub re: String,
    /// Imaginary part of a.
    #[arg(long = "a-im", default_value = "0", allow_hyphen_values = true)]
    pub im: String,
}

impl ComplexArg {
    pub fn complex(&self, bits: u32) -> Result<Complex, Error> {
        Ok(Complex::with_val(bits, (parse_float(&self.re, bits)?, parse_float(&self.im, bits)?)))
    }
}

#[derive(Debug, Args)]
pub struct LambdaArg {
    /// λ as p/q, integer, or decimal.
    #[arg(long = "lambda", value_name = "LAMBDA")]
    pub value_raw: Lambda,
}

impl std::ops::Deref for LambdaArg {
    type Target = Lambda;
    fn deref(&self) -> &Lambda {
        &self.value_raw
    }
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub a: ComplexArg,
    #[command(flatten)]
    pub lambda: LambdaArg,
    /// Truncation index; defaults to the optimal one.
    #[arg(long)]
    pub n: Option<u32>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub a: ComplexArg,
    #[command(flatten)]
    pub lambda: LambdaArg,
    #[arg(long)]
    pub n: Option<u32>,
    /// Sweep N = 2..=n-max.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Also compute |R_N| from the quadrature oracle.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    /// Coefficient index.
    #[arg(long, required_unless_present = "n_max", conflicts_with = "n_max")]
    pub n: Option<usize>,
    /// All indices 0..=n-max.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Evaluate at this λ instead of printing polynomials.
    #[arg(long)]
    pub lambda: Option<Lambda>,
}

#[derive(Debug, Args)]
pub struct TerminantArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub w_abs: String,
    /// arg w in radians, |arg w| < 3π.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub w_arg: String,
}

#[derive(Debug, Args)]
pub struct StokesArgs {
    #[arg(long)]
    pub w_abs: String,
    /// Terminant order; defaults to |w| + 1/2.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    /// Sweep arg w over π ± half-width.
    #[arg(long, default_value_t = 0.5)]
    pub half_width: f64,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    #[command(flatten)]
    pub a: ComplexArg,
    #[command(flatten)]
    pub lambda: LambdaArg,
    #[arg(long)]
    pub n: Option<u32>,
    /// Number K of terminant terms per singulant.
    #[arg(long, default_value_t = 2)]
    pub k_terms: u32,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub a: ComplexArg,
    #[command(flatten)]
    pub lambda: LambdaArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    pub suite: Suite,
    /// Use the reduced grids.
    #[arg(long)]
    pub quick: bool,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}
