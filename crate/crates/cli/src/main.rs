mod args;

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{CertifyArgs, Cli, Command, DPrime, ExperimentArgs, FoldArgs, LemmaAuditArgs, SampleArgs, SpectrumArgs};
use rglab_core::models::{
    relator_count, rng_from_seed, sample_presentation_with_count, ModelError, ModelParams, Presentation,
};
use rglab_core::pipeline::{
    certify, rows_to_csv, run_experiment, summarize, DensityChoice, ExperimentConfig, ExperimentGrid, PipelineError,
    ThresholdHypothesis, Verdict,
};
use rglab_core::regroup::{effective_density, BlockAlphabet};
use rglab_core::spectral::{zuk_certify, ZukVerdict};
use rglab_core::subgroup::{block_subgroup, index, stallings_fold};
use rglab_core::Word;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_INSUFFICIENT: u8 = 4;
const EXIT_AUDIT_FAILED: u8 = 5;

/// Message and exit code of a failed command.
struct Failure(u8, String);

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure(EXIT_USAGE, message.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sample(a) => cmd_sample(a, &cli),
        Command::Certify(a) => cmd_certify(a),
        Command::Fold(a) => cmd_fold(a),
        Command::LemmaAudit(a) => cmd_lemma_audit(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(Failure::usage),
    }
}

fn read_presentation(path: &Path) -> Result<Presentation, Failure> {
    Presentation::parse(&read_file(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_sample(a: &SampleArgs, cli: &Cli) -> Outcome {
    let params = ModelParams::new(a.n, a.k, a.d.value, a.positive, a.seed).map_err(Failure::usage)?;
    let infeasible = |e: ModelError| match e {
        ModelError::InvalidParams(_) => Failure::usage(e),
        _ => Failure(EXIT_INFEASIBLE, e.to_string()),
    };
    let count = match a.count_override {
        Some(c) => c,
        None => relator_count(&params).map_err(infeasible)?,
    };
    let p = sample_presentation_with_count(&params, count, &mut rng_from_seed(a.seed)).map_err(infeasible)?;
    let mut text = format!("# rglab {}\n", cli.to_args().join(" "));
    text.push_str(&p.to_text());
    emit(a.out.as_deref(), &text)?;
    let density = if p.is_empty() { f64::NAN } else { effective_density(p.len() as u64, a.k, a.n) };
    eprintln!("relators={} effective_density={}", p.len(), density);
    Ok(EXIT_OK)
}

fn cmd_certify(a: &CertifyArgs) -> Outcome {
    let g = read_presentation(&a.input)?;
    let hypothesis = ThresholdHypothesis::new(a.d0.value, a.base_k).map_err(Failure::usage)?;
    let choice = match a.dprime {
        DPrime::Auto if g.params().is_some() => DensityChoice::Midpoint,
        DPrime::Auto | DPrime::Full => DensityChoice::Full,
        DPrime::Mid => DensityChoice::Midpoint,
        DPrime::Value(d) => DensityChoice::Fixed(d.value),
    };
    match certify(&g, a.j, choice, hypothesis) {
        Ok(cert) => {
            emit(a.out.as_deref(), &cert.to_text())?;
            Ok(match cert.verdict {
                Verdict::PropertyT => EXIT_OK,
                Verdict::Inconclusive => EXIT_INCONCLUSIVE,
            })
        }
        Err(e @ PipelineError::InsufficientPositiveRelators { .. }) => Err(Failure(EXIT_INSUFFICIENT, e.to_string())),
        Err(e) => Err(Failure::usage(e)),
    }
}

fn cmd_fold(a: &FoldArgs) -> Outcome {
    if a.n == 0 {
        return Err(Failure::usage("rank must be at least 1"));
    }
    let graph = if a.wjplus {
        let j = a.j.ok_or_else(|| Failure::usage("--wjplus needs --j"))?;
        let alphabet = BlockAlphabet::new(a.n, j).map_err(Failure::usage)?;
        block_subgroup(&alphabet)
    } else {
        let path = a.generators.as_deref().ok_or_else(|| Failure::usage("need --generators or --wjplus"))?;
        let text = read_file(path)?;
        let generators = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| Word::parse(a.n, l))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        stallings_fold(&generators, a.n)
    };
    let mut text = graph.dump();
    text.push_str(&format!("index={}\n", index(&graph)));
    emit(None, &text)?;
    Ok(EXIT_OK)
}

fn cmd_lemma_audit(a: &LemmaAuditArgs) -> Outcome {
    if a.n == 0 {
        return Err(Failure::usage("rank must be at least 1"));
    }
    let audit = rglab_core::subgroup::lemma_audit(a.n, a.j, a.max_len).map_err(Failure::usage)?;
    emit(None, &audit.to_string())?;
    Ok(if audit.passed() { EXIT_OK } else { EXIT_AUDIT_FAILED })
}

fn cmd_spectrum(a: &SpectrumArgs) -> Outcome {
    let p = read_presentation(&a.input)?;
    let outcome = zuk_certify(&p, a.threshold.value).map_err(Failure::usage)?;
    if let (Some(path), Some(spectrum)) = (&a.csv, &outcome.spectrum) {
        emit(Some(path), &spectrum.to_csv())?;
    }
    emit(None, &format!("{}\n", outcome.verdict_line()))?;
    Ok(match outcome.verdict {
        ZukVerdict::Certified => EXIT_OK,
        ZukVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn threads_from_env() -> Option<usize> {
    std::env::var("RG_LAB_THREADS").ok()?.trim().parse().ok()
}

fn cmd_experiment(a: &ExperimentArgs) -> Outcome {
    let hypothesis = ThresholdHypothesis::new(a.d0.value, a.base_k).map_err(Failure::usage)?;
    let j = match a.j {
        Some(j) => j,
        None if a.model.k.is_multiple_of(a.base_k) => a.model.k / a.base_k,
        None => return Err(Failure::usage(format!("model k={} is not a multiple of {}", a.model.k, a.base_k))),
    };
    let density = match a.dprime {
        DPrime::Auto | DPrime::Mid => DensityChoice::Midpoint,
        DPrime::Full => DensityChoice::Full,
        DPrime::Value(d) => DensityChoice::Fixed(d.value),
    };
    let config = ExperimentConfig {
        grid: ExperimentGrid {
            ns: a.n.clone(),
            ds: a.d.iter().map(|d| d.value).collect(),
            k: a.model.k,
            positive: a.model.positive,
        },
        j,
        density,
        hypothesis,
        trials: a.trials,
        master_seed: a.seed,
        timing: a.timing,
    };
    let rows = run_experiment(&config, threads_from_env());
    emit(a.out.as_deref(), &rows_to_csv(&rows))?;
    for cell in summarize(&rows) {
        eprintln!(
            "n={} d={} trials={} certified={} insufficient={} errors={} rate={:.3}",
            cell.n,
            cell.d,
            cell.trials,
            cell.certified,
            cell.insufficient,
            cell.errors,
            cell.rate()
        );
    }
    Ok(EXIT_OK)
}
