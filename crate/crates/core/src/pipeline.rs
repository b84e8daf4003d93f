//! From a sampled `jk`-gonal group `G` to a Property (T) verdict.
//!
//! The chain is `Γ ↠ φ(Γ) ≤ G⁺ ↠ G`: `G⁺` keeps a set of positive relators
//! of `G`, `Γ` reads them in blocks of `j` letters, and `φ(Γ)` has finite
//! index in `G⁺`. Property (T) passes from `Γ` to its image, from a finite
//! index subgroup to the whole group, and to quotients, so a spectral
//! certificate for the triangular presentation `Γ` certifies `G`.

use std::fmt::{self, Write as _};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::freegroup::{Letter, Word};
use crate::models::{floor_power, sample_seeded, derive_seed, ModelError, ModelParams, Presentation, DEFAULT_RELATOR_CAP};
use crate::regroup::{build_gamma, downsample, effective_density, positive_part, RegroupError, RegroupedPresentation};
use crate::spectral::{zuk_certify, SpectralError, ZukOutcome, ZukVerdict, ZUK_THRESHOLD};
use crate::subgroup::{index, stallings_fold, Index};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("relator length {found} is not j * k = {expected}")]
    WrongRelatorLength { expected: usize, found: usize },
    #[error("only {available} positive relators, {target} required")]
    InsufficientPositiveRelators { available: usize, target: usize },
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("block length must be at least 1")]
    ZeroBlockLength,
    #[error(transparent)]
    Regroup(RegroupError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<RegroupError> for PipelineError {
    fn from(e: RegroupError) -> Self {
        match e {
            RegroupError::InsufficientPositiveRelators { available, target } => {
                PipelineError::InsufficientPositiveRelators { available, target }
            }
            other => PipelineError::Regroup(other),
        }
    }
}

/// "Random groups in `M⁺_base_k(n, d)` have Property (T) w.o.p. for `d > d0`."
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdHypothesis {
    pub d0: f64,
    pub base_k: usize,
}

impl Default for ThresholdHypothesis {
    fn default() -> Self {
        ThresholdHypothesis { d0: 1.0 / 3.0, base_k: 3 }
    }
}

impl ThresholdHypothesis {
    pub fn new(d0: f64, base_k: usize) -> Result<Self, PipelineError> {
        if !(d0 > 0.0 && d0 < 1.0) {
            return Err(PipelineError::InvalidDensity(format!("d0 = {d0} not in (0, 1)")));
        }
        if base_k < 3 {
            return Err(PipelineError::InvalidDensity(format!("base k = {base_k} below 3")));
        }
        Ok(ThresholdHypothesis { d0, base_k })
    }
}

/// How many positive relators to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityChoice {
    /// Midpoint of `(d0, d)`; needs the input density.
    Midpoint,
    Fixed(f64),
    /// Keep every positive relator.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PropertyT,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::PropertyT => "property_t",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One boolean per link of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainAudit {
    /// Γ relators decode one-to-one onto the relators of `G⁺`.
    pub gamma_decodes: bool,
    /// Every relator of `G⁺` is a relator of `G`.
    pub positive_in_input: bool,
    /// The recorded generators of `φ(Γ)` have finite index in `F_n`.
    pub finite_index: bool,
    /// `|R⁺_k| = |φ(R⁺_k)| = |R⁺|` after downsampling.
    pub counts_match: bool,
}

impl ChainAudit {
    pub fn all(&self) -> bool {
        self.gamma_decodes && self.positive_in_input && self.finite_index && self.counts_match
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputSummary {
    pub n: u32,
    pub relator_length: Option<usize>,
    pub params: Option<ModelParams>,
    pub relators: usize,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stages {
    pub positive_relators: usize,
    /// `⌊(2n-1)^(jk d')⌋`, absent when every positive relator is kept.
    pub target: Option<usize>,
    pub kept: usize,
    pub input_density_eff: Option<f64>,
    pub positive_density_eff: Option<f64>,
    pub gamma_rank: u32,
    pub gamma_relators: usize,
    pub gamma_density_eff: Option<f64>,
    pub gamma_digest: String,
    pub index: Index,
}

/// Record of one run of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub input: InputSummary,
    pub j: usize,
    pub hypothesis: ThresholdHypothesis,
    pub dprime: Option<f64>,
    pub stages: Stages,
    /// `Γ`, its block alphabet, and the kept positive presentation `G⁺`.
    pub regrouped: RegroupedPresentation,
    /// Generators of `φ(Γ)` inside `F_n` used for the finite-index check.
    pub subgroup_generators: Vec<Word>,
    pub spectral: Option<ZukOutcome>,
    pub audit: ChainAudit,
    pub verdict: Verdict,
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn density_of(count: usize, k: usize, rank: u32) -> Option<f64> {
    (count >= 1 && k >= 1).then(|| effective_density(count as u64, k, rank))
}

/// Runs the chain for `g`, keeping positive relators according to
/// `choice`.
pub fn certify(
    g: &Presentation,
    j: usize,
    choice: DensityChoice,
    hypothesis: ThresholdHypothesis,
) -> Result<Certificate, PipelineError> {
    if j == 0 {
        return Err(PipelineError::ZeroBlockLength);
    }
    let n = g.rank();
    let expected_len = j * hypothesis.base_k;
    let relator_length = g.relator_length();
    match relator_length {
        Some(found) if found != expected_len => {
            return Err(PipelineError::WrongRelatorLength { expected: expected_len, found });
        }
        None if !g.is_empty() => {
            let found = g.relators().iter().map(Word::len).find(|&l| l != expected_len).unwrap_or(expected_len);
            return Err(PipelineError::WrongRelatorLength { expected: expected_len, found });
        }
        _ => {}
    }

    let d = g.params().map(|p| p.d);
    let dprime = match choice {
        DensityChoice::Full => None,
        DensityChoice::Fixed(v) => Some(v),
        DensityChoice::Midpoint => match d {
            Some(d) => Some((hypothesis.d0 + d) / 2.0),
            None => return Err(PipelineError::InvalidDensity("midpoint needs the input density".into())),
        },
    };
    if let Some(dp) = dprime {
        let upper = d.unwrap_or(1.0);
        if !(dp > hypothesis.d0 && dp < upper) {
            return Err(PipelineError::InvalidDensity(format!(
                "d' = {dp} not in ({}, {upper})",
                hypothesis.d0
            )));
        }
    }

    // G⁺: positive relators, thinned to the target count
    let positive = positive_part(g);
    let target = match dprime {
        Some(dp) => {
            let count = floor_power(2 * n as u64 - 1, expected_len as f64 * dp, DEFAULT_RELATOR_CAP)
                .ok_or(ModelError::Overflow { cap: DEFAULT_RELATOR_CAP })?;
            Some(count as usize)
        }
        None => None,
    };
    let kept = match target {
        Some(t) => downsample(&positive, t)?,
        None => positive.without_params(),
    };

    // Γ over W⁺_j
    let regrouped = build_gamma(&kept, j)?;
    let gamma = &regrouped.gamma;
    let subgroup_generators = regrouped.alphabet.block_words();
    let graph = stallings_fold(&subgroup_generators, n);

    let spectral = if hypothesis.base_k == 3 { Some(zuk_certify(gamma, ZUK_THRESHOLD)?) } else { None };

    let stages = Stages {
        positive_relators: positive.len(),
        target,
        kept: kept.len(),
        input_density_eff: density_of(g.len(), expected_len, n),
        positive_density_eff: density_of(kept.len(), expected_len, n),
        gamma_rank: gamma.rank(),
        gamma_relators: gamma.len(),
        gamma_density_eff: density_of(gamma.len(), hypothesis.base_k, gamma.rank()),
        gamma_digest: digest(&gamma.to_text()),
        index: index(&graph),
    };
    let input = InputSummary {
        n,
        relator_length,
        params: g.params().copied(),
        relators: g.len(),
        digest: digest(&g.to_text()),
    };
    let mut cert = Certificate {
        input,
        j,
        hypothesis,
        dprime,
        stages,
        regrouped,
        subgroup_generators,
        spectral,
        audit: ChainAudit { gamma_decodes: false, positive_in_input: false, finite_index: false, counts_match: false },
        verdict: Verdict::Inconclusive,
    };
    cert.audit = chain_audit(&cert, g);
    cert.verdict = decide(&cert);
    Ok(cert)
}

/// The only place a Property (T) verdict is produced.
fn decide(cert: &Certificate) -> Verdict {
    let certified = cert.spectral.as_ref().is_some_and(|s| s.verdict == ZukVerdict::Certified);
    if certified && cert.audit.all() {
        Verdict::PropertyT
    } else {
        Verdict::Inconclusive
    }
}

/// Re-checks each link of the chain from the data held in `cert`.
pub fn chain_audit(cert: &Certificate, g: &Presentation) -> ChainAudit {
    let regrouped = &cert.regrouped;
    let kept = &regrouped.source;
    let gamma_decodes = regrouped.is_faithful();
    let positive_in_input = kept.rank() == g.rank() && kept.relators().iter().all(|r| r.is_positive() && g.contains(r));
    let finite_index = cert.subgroup_generators.iter().all(|w| w.rank() == g.rank())
        && index(&stallings_fold(&cert.subgroup_generators, g.rank())).is_finite();
    let counts_match = regrouped.gamma.len() == kept.len()
        && kept.len() == cert.stages.kept
        && cert.stages.target.is_none_or(|t| t == kept.len());
    ChainAudit { gamma_decodes, positive_in_input, finite_index, counts_match }
}

fn opt<T: fmt::Display>(value: Option<T>) -> String {
    value.map_or_else(|| "na".to_string(), |v| v.to_string())
}

impl Certificate {
    /// Text document with sections INPUT, STAGES, SPECTRUM, AUDIT, VERDICT.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let i = &self.input;
        let s = &self.stages;
        let _ = writeln!(out, "INPUT");
        let _ = writeln!(out, "n={}", i.n);
        let _ = writeln!(out, "relator_length={}", opt(i.relator_length));
        let _ = writeln!(out, "relators={}", i.relators);
        let _ = writeln!(out, "d={}", opt(i.params.map(|p| p.d)));
        let _ = writeln!(out, "positive_model={}", opt(i.params.map(|p| p.positive)));
        let _ = writeln!(out, "seed={}", opt(i.params.map(|p| p.seed)));
        let _ = writeln!(out, "digest={}", i.digest);
        let _ = writeln!(out, "STAGES");
        let _ = writeln!(out, "j={}", self.j);
        let _ = writeln!(out, "k={}", self.hypothesis.base_k);
        let _ = writeln!(out, "d0={}", self.hypothesis.d0);
        let _ = writeln!(out, "dprime={}", opt(self.dprime));
        let _ = writeln!(out, "positive_relators={}", s.positive_relators);
        let _ = writeln!(out, "target={}", opt(s.target));
        let _ = writeln!(out, "kept={}", s.kept);
        let _ = writeln!(out, "input_density_eff={}", opt(s.input_density_eff));
        let _ = writeln!(out, "positive_density_eff={}", opt(s.positive_density_eff));
        let _ = writeln!(out, "subgroup_index={}", s.index);
        let _ = writeln!(out, "gamma_rank={}", s.gamma_rank);
        let _ = writeln!(out, "gamma_relators={}", s.gamma_relators);
        let _ = writeln!(out, "gamma_density_nominal={}", opt(self.dprime));
        let _ = writeln!(out, "gamma_density_eff={}", opt(s.gamma_density_eff));
        let _ = writeln!(out, "gamma_digest={}", s.gamma_digest);
        for r in self.regrouped.gamma.relators() {
            let _ = writeln!(out, "gamma_rel {r}");
        }
        let _ = writeln!(out, "SPECTRUM");
        match &self.spectral {
            None => {
                let _ = writeln!(out, "criterion=none");
            }
            Some(z) => {
                let _ = writeln!(out, "threshold={}", z.threshold);
                let _ = writeln!(out, "zuk={}", z.verdict);
                match &z.spectrum {
                    None => {
                        let _ = writeln!(out, "lambda1=na");
                    }
                    Some(sp) => {
                        let _ = writeln!(out, "lambda1={}", sp.lambda1);
                        let _ = writeln!(out, "lambda_max={}", sp.max_eigenvalue());
                        let _ = writeln!(out, "connected={}", sp.connected);
                        let _ = writeln!(out, "vertices={}", sp.vertices);
                        let _ = writeln!(out, "isolated={}", sp.isolated);
                    }
                }
                let _ = writeln!(out, "edges={}", z.edges);
            }
        }
        let a = &self.audit;
        let _ = writeln!(out, "AUDIT");
        let _ = writeln!(out, "gamma_decodes={}", a.gamma_decodes);
        let _ = writeln!(out, "positive_in_input={}", a.positive_in_input);
        let _ = writeln!(out, "finite_index={}", a.finite_index);
        let _ = writeln!(out, "counts_match={}", a.counts_match);
        let _ = writeln!(out, "VERDICT");
        let _ = writeln!(out, "{}", self.verdict);
        out
    }
}

/// The `n × d` grid of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub ns: Vec<u32>,
    pub ds: Vec<f64>,
    pub k: usize,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grid: ExperimentGrid,
    pub j: usize,
    pub density: DensityChoice,
    pub hypothesis: ThresholdHypothesis,
    pub trials: usize,
    pub master_seed: u64,
    /// Record wall time per trial; makes the table nondeterministic.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub trial: usize,
    pub n: u32,
    pub k: usize,
    pub j: usize,
    pub d: f64,
    pub dprime: Option<f64>,
    pub relators: Option<usize>,
    pub positive_relators: Option<usize>,
    pub target: Option<usize>,
    pub gamma_rank: Option<u32>,
    pub gamma_density_eff: Option<f64>,
    pub lambda1: Option<f64>,
    pub connected: Option<bool>,
    pub verdict: String,
    pub error: String,
    pub seed: u64,
    pub ms: Option<u128>,
}

pub const CSV_HEADER: &str = "trial,n,k,j,d,dprime,relators,positive_relators,target,gamma_rank,gamma_density_eff,lambda1,connected,verdict,error,seed,ms";

fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn blank<T: fmt::Display>(value: Option<T>) -> String {
    value.map_or_else(String::new, |v| v.to_string())
}

impl ExperimentRow {
    pub fn to_csv(&self) -> String {
        [
            self.trial.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.j.to_string(),
            self.d.to_string(),
            blank(self.dprime),
            blank(self.relators),
            blank(self.positive_relators),
            blank(self.target),
            blank(self.gamma_rank),
            blank(self.gamma_density_eff),
            blank(self.lambda1),
            blank(self.connected),
            self.verdict.clone(),
            csv_field(&self.error),
            self.seed.to_string(),
            blank(self.ms),
        ]
        .join(",")
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::PropertyT.to_string()
    }
}

pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

/// Seed of one trial, a function of the master seed and the trial's grid
/// coordinates only.
pub fn trial_seed(master: u64, n: u32, k: usize, d: f64, positive: bool, trial: usize) -> u64 {
    derive_seed(master, &[n as u64, k as u64, d.to_bits(), positive as u64, trial as u64])
}

fn run_trial(config: &ExperimentConfig, n: u32, d: f64, trial: usize) -> ExperimentRow {
    let grid = &config.grid;
    let seed = trial_seed(config.master_seed, n, grid.k, d, grid.positive, trial);
    let start = Instant::now();
    let mut row = ExperimentRow {
        trial,
        n,
        k: grid.k,
        j: config.j,
        d,
        dprime: None,
        relators: None,
        positive_relators: None,
        target: None,
        gamma_rank: None,
        gamma_density_eff: None,
        lambda1: None,
        connected: None,
        verdict: "error".into(),
        error: String::new(),
        seed,
        ms: None,
    };
    let outcome = ModelParams::new(n, grid.k, d, grid.positive, seed)
        .and_then(|params| sample_seeded(&params))
        .map_err(PipelineError::from)
        .and_then(|g| {
            row.relators = Some(g.len());
            row.positive_relators = Some(g.relators().iter().filter(|r| r.is_positive()).count());
            certify(&g, config.j, config.density, config.hypothesis)
        });
    match outcome {
        Ok(cert) => {
            row.dprime = cert.dprime;
            row.target = cert.stages.target;
            row.gamma_rank = Some(cert.stages.gamma_rank);
            row.gamma_density_eff = cert.stages.gamma_density_eff;
            if let Some(sp) = cert.spectral.as_ref().and_then(|z| z.spectrum.as_ref()) {
                row.lambda1 = Some(sp.lambda1);
                row.connected = Some(sp.connected);
            }
            row.verdict = cert.verdict.to_string();
        }
        Err(e) => {
            if let PipelineError::InsufficientPositiveRelators { target, .. } = &e {
                row.verdict = "insufficient".into();
                row.target = Some(*target);
            }
            row.error = e.to_string();
        }
    }
    if config.timing {
        row.ms = Some(start.elapsed().as_millis());
    }
    row
}

/// Runs every `(n, d, trial)` cell. Rows come back in grid order (`n`, then
/// `d`, then trial) whatever the thread count.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Vec<ExperimentRow> {
    let tasks: Vec<(u32, f64, usize)> = config
        .grid
        .ns
        .iter()
        .flat_map(|&n| config.grid.ds.iter().flat_map(move |&d| (0..config.trials).map(move |t| (n, d, t))))
        .collect();
    let run = || tasks.par_iter().map(|&(n, d, t)| run_trial(config, n, d, t)).collect::<Vec<_>>();
    match threads {
        Some(count) => rayon::ThreadPoolBuilder::new()
            .num_threads(count.max(1))
            .build()
            .expect("thread pool")
            .install(run),
        None => run(),
    }
}

/// Certification frequency of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRate {
    pub n: u32,
    pub d: f64,
    pub trials: usize,
    pub certified: usize,
    pub insufficient: usize,
    pub errors: usize,
}

impl CellRate {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.certified as f64 / self.trials as f64
        }
    }
}

pub fn summarize(rows: &[ExperimentRow]) -> Vec<CellRate> {
    let mut cells: Vec<CellRate> = Vec::new();
    for row in rows {
        let cell = match cells.iter_mut().find(|c| c.n == row.n && c.d.to_bits() == row.d.to_bits()) {
            Some(c) => c,
            None => {
                cells.push(CellRate { n: row.n, d: row.d, trials: 0, certified: 0, insufficient: 0, errors: 0 });
                cells.last_mut().unwrap()
            }
        };
        cell.trials += 1;
        match row.verdict.as_str() {
            "property_t" => cell.certified += 1,
            "insufficient" => cell.insufficient += 1,
            "error" => cell.errors += 1,
            _ => {}
        }
    }
    cells
}

/// Replaces one letter of one Γ relator with a different block. Used to
/// exercise the audit.
pub fn perturb_gamma_relator(cert: &mut Certificate, relator: usize, position: usize) {
    let gamma = &cert.regrouped.gamma;
    let m = gamma.rank();
    let mut relators = gamma.relators().to_vec();
    let mut letters = relators[relator].letters().to_vec();
    let old = letters[position].index();
    letters[position] = Letter::generator(old % m + 1);
    relators[relator] = Word::from_letters(m, letters);
    relators.sort();
    relators.dedup();
    cert.regrouped.gamma = Presentation::new(m, relators, None).expect("perturbed relators stay positive");
}
