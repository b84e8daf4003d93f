use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

/// Random k-gonal groups, block regrouping, and spectral Property (T) certificates.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "rglab", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Sample a presentation from M_k(n, d) or M⁺_k(n, d).
    Sample(SampleArgs),
    /// Run the regrouping chain on a presentation and emit a certificate.
    Certify(CertifyArgs),
    /// Fold a subgroup of F_n and report its index.
    Fold(FoldArgs),
    /// Exhaustively check the transversal rewriting for ⟨W⁺_j⟩.
    LemmaAudit(LemmaAuditArgs),
    /// Link-graph spectrum of a triangular presentation.
    Spectrum(SpectrumArgs),
    /// Seeded certification sweep over a grid of (n, d), written as CSV.
    Experiment(ExperimentArgs),
}

/// A density in (0, 1), written as a decimal or a fraction `p/q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density {
    pub value: f64,
    text_repr: Option<(u64, u64)>,
}

impl Density {
    pub fn new(value: f64) -> Self {
        Density { value, text_repr: None }
    }
}

impl FromStr for Density {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let q: u64 = q.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            if q == 0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            return Ok(Density { value: p as f64 / q as f64, text_repr: Some((p, q)) });
        }
        let value: f64 = s.parse().map_err(|_| format!("bad density `{s}`"))?;
        if !value.is_finite() {
            return Err(format!("bad density `{s}`"));
        }
        Ok(Density::new(value))
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.text_repr {
            Some((p, q)) => write!(f, "{p}/{q}"),
            None => write!(f, "{}", self.value),
        }
    }
}

/// How many positive relators the chain keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DPrime {
    /// `mid` when the input carries its density, `full` otherwise.
    Auto,
    Mid,
    Full,
    Value(Density),
}

impl FromStr for DPrime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "auto" => Ok(DPrime::Auto),
            "mid" => Ok(DPrime::Mid),
            "full" => Ok(DPrime::Full),
            other => other.parse().map(DPrime::Value),
        }
    }
}

impl fmt::Display for DPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DPrime::Auto => f.write_str("auto"),
            DPrime::Mid => f.write_str("mid"),
            DPrime::Full => f.write_str("full"),
            DPrime::Value(d) => write!(f, "{d}"),
        }
    }
}

/// `pos<k>` for M⁺_k or `std<k>` for M_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub k: usize,
    pub positive: bool,
}

impl FromStr for ModelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (positive, rest) = if let Some(rest) = s.strip_prefix("pos") {
            (true, rest)
        } else if let Some(rest) = s.strip_prefix("std") {
            (false, rest)
        } else {
            return Err(format!("model `{s}` must look like pos3 or std6"));
        };
        let k: usize = rest.parse().map_err(|_| format!("bad relator length in `{s}`"))?;
        if k == 0 {
            return Err("relator length must be positive".into());
        }
        Ok(ModelSpec { k, positive })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.positive { "pos" } else { "std" }, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SampleArgs {
    /// Number of generators.
    #[arg(long)]
    pub n: u32,
    /// Relator length.
    #[arg(long)]
    pub k: usize,
    /// Density in (0, 1); decimals or fractions such as 1/3.
    #[arg(long)]
    pub d: Density,
    /// Sample positive relators only.
    #[arg(long)]
    pub positive: bool,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use this many relators instead of ⌊(2n-1)^(kd)⌋.
    #[arg(long)]
    pub count_override: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CertifyArgs {
    /// Presentation file.
    #[arg(long)]
    pub input: PathBuf,
    /// Block length.
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    /// Density d' of the kept positive part: auto, mid, full, or a value.
    #[arg(long, default_value_t = DPrime::Auto)]
    pub dprime: DPrime,
    /// Density above which the base positive model is assumed certified.
    #[arg(long, default_value = "1/3")]
    pub d0: Density,
    /// Relator length of the base positive model.
    #[arg(long, default_value_t = 3)]
    pub base_k: usize,
    /// Certificate file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct FoldArgs {
    /// Fold the positive words of length j.
    #[arg(long, requires = "j", conflicts_with = "generators")]
    pub wjplus: bool,
    /// Rank of the free group.
    #[arg(long)]
    pub n: u32,
    /// Block length for --wjplus.
    #[arg(long)]
    pub j: Option<usize>,
    /// File with one generator word per line.
    #[arg(long, required_unless_present = "wjplus")]
    pub generators: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct LemmaAuditArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub j: usize,
    /// Longest word checked.
    #[arg(long)]
    pub max_len: usize,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SpectrumArgs {
    /// Presentation file with relators of length 3.
    #[arg(long)]
    pub input: PathBuf,
    /// Spectral threshold on λ₁.
    #[arg(long, default_value = "1/2")]
    pub threshold: Density,
    /// Write `index,eigenvalue` rows here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ExperimentArgs {
    /// pos<k> or std<k>.
    #[arg(long, default_value = "pos6")]
    pub model: ModelSpec,
    /// Ranks, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u32>,
    /// Densities, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<Density>,
    /// Trials per (n, d) cell.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Master seed (required).
    #[arg(long)]
    pub seed: u64,
    /// Block length (default: model k / base k).
    #[arg(long)]
    pub j: Option<usize>,
    /// Density d' of the kept positive part: mid, full, or a value.
    #[arg(long, default_value_t = DPrime::Mid)]
    pub dprime: DPrime,
    #[arg(long, default_value = "1/3")]
    pub d0: Density,
    #[arg(long, default_value_t = 3)]
    pub base_k: usize,
    /// Fill the ms column with wall time (output is then not reproducible).
    #[arg(long)]
    pub timing: bool,
    /// CSV file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn push_opt<T: fmt::Display>(args: &mut Vec<String>, flag: &str, value: &Option<T>) {
    if let Some(v) = value {
        args.push(flag.into());
        args.push(v.to_string());
    }
}

fn push(args: &mut Vec<String>, flag: &str, value: impl fmt::Display) {
    args.push(flag.into());
    args.push(value.to_string());
}

fn join<T: fmt::Display>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl Cli {
    /// Command line that parses back to `self` (without the program name).
    pub fn to_args(&self) -> Vec<String> {
        let mut a = Vec::new();
        match &self.command {
            Command::Sample(s) => {
                a.push("sample".into());
                push(&mut a, "--n", s.n);
                push(&mut a, "--k", s.k);
                push(&mut a, "--d", s.d);
                if s.positive {
                    a.push("--positive".into());
                }
                push(&mut a, "--seed", s.seed);
                push_opt(&mut a, "--count-override", &s.count_override);
                push_opt(&mut a, "--out", &s.out.as_ref().map(|p| p.display()));
            }
            Command::Certify(c) => {
                a.push("certify".into());
                push(&mut a, "--input", c.input.display());
                push(&mut a, "--j", c.j);
                push(&mut a, "--dprime", c.dprime);
                push(&mut a, "--d0", c.d0);
                push(&mut a, "--base-k", c.base_k);
                push_opt(&mut a, "--out", &c.out.as_ref().map(|p| p.display()));
            }
            Command::Fold(f) => {
                a.push("fold".into());
                if f.wjplus {
                    a.push("--wjplus".into());
                }
                push(&mut a, "--n", f.n);
                push_opt(&mut a, "--j", &f.j);
                push_opt(&mut a, "--generators", &f.generators.as_ref().map(|p| p.display()));
            }
            Command::LemmaAudit(l) => {
                a.push("lemma-audit".into());
                push(&mut a, "--n", l.n);
                push(&mut a, "--j", l.j);
                push(&mut a, "--max-len", l.max_len);
            }
            Command::Spectrum(s) => {
                a.push("spectrum".into());
                push(&mut a, "--input", s.input.display());
                push(&mut a, "--threshold", s.threshold);
                push_opt(&mut a, "--csv", &s.csv.as_ref().map(|p| p.display()));
            }
            Command::Experiment(e) => {
                a.push("experiment".into());
                push(&mut a, "--model", e.model);
                push(&mut a, "--n", join(&e.n));
                push(&mut a, "--d", join(&e.d));
                push(&mut a, "--trials", e.trials);
                push(&mut a, "--seed", e.seed);
                push_opt(&mut a, "--j", &e.j);
                push(&mut a, "--dprime", e.dprime);
                push(&mut a, "--d0", e.d0);
                push(&mut a, "--base-k", e.base_k);
                if e.timing {
                    a.push("--timing".into());
                }
                push_opt(&mut a, "--out", &e.out.as_ref().map(|p| p.display()));
            }
        }
        a
    }
}
