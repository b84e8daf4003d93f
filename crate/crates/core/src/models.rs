//! Samplers for the k-gonal model `M_k(n, d)` and its positive variant
//! `M⁺_k(n, d)`.
//!
//! A presentation in either model has `⌊(2n-1)^(kd)⌋` distinct relators of
//! length `k`, drawn uniformly from the cyclically reduced words (resp. the
//! positive words) of that length. The positive model uses the same count
//! formula.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::freegroup::{
    count_cyclically_reduced, count_positive, enumerate_words, is_cyclically_reduced, Letter, Word, WordError,
    WordFilter,
};

/// Largest relator set any sampler will build unless told otherwise.
pub const DEFAULT_RELATOR_CAP: u64 = 20_000_000;

/// Relative distance to an integer under which `(2n-1)^(kd)` is taken to be
/// exactly that integer.
const INTEGER_GUARD: f64 = 1e-9;

/// Word spaces at most this large are enumerated outright when a sample would
/// cover more than half of them.
const ENUMERATION_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("relator count exceeds the cap of {cap}")]
    Overflow { cap: u64 },
    #[error("requested {requested} distinct relators but only {available} words exist")]
    SpaceExhausted { requested: u64, available: BigUint },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PresentationError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("relator `{0}` is not cyclically reduced")]
    NotCyclicallyReduced(Word),
    #[error("relator `{word}` has length {len}, model requires {k}")]
    WrongLength { word: Word, len: usize, k: usize },
    #[error("relator `{0}` is not positive")]
    NotPositive(Word),
    #[error("relator `{0}` appears twice")]
    Duplicate(Word),
    #[error("relator rank {found} does not match presentation rank {expected}")]
    RankMismatch { expected: u32, found: u32 },
    #[error("model rank {model} does not match `gens {gens}`")]
    ParamsRank { gens: u32, model: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: u32,
    pub k: usize,
    pub d: f64,
    pub positive: bool,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: u32, k: usize, d: f64, positive: bool, seed: u64) -> Result<Self, ModelError> {
        let params = ModelParams { n, k, d, positive, seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n < 1 {
            return Err(ModelError::InvalidParams("n must be at least 1".into()));
        }
        if self.k < 1 {
            return Err(ModelError::InvalidParams("k must be at least 1".into()));
        }
        if !(self.d > 0.0 && self.d < 1.0) {
            return Err(ModelError::InvalidParams(format!("density {} not in (0, 1)", self.d)));
        }
        Ok(())
    }

    /// Number of words the relators are drawn from.
    pub fn space_size(&self) -> BigUint {
        if self.positive {
            count_positive(self.n, self.k)
        } else {
            count_cyclically_reduced(self.n, self.k)
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        ModelParams { seed, ..self }
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} k={} d={} positive={} seed={}",
            self.n, self.k, self.d, self.positive, self.seed
        )
    }
}

/// `⌊base^exponent⌋` with the integer guard, or `None` above `cap`.
pub(crate) fn floor_power(base: u64, exponent: f64, cap: u64) -> Option<u64> {
    if base <= 1 || exponent == 0.0 {
        return Some(1);
    }
    let log = exponent * (base as f64).ln();
    if log > (cap as f64).ln() + 1.0 {
        return None;
    }
    let value = log.exp();
    let nearest = value.round();
    let floor = if (value - nearest).abs() <= INTEGER_GUARD * nearest.max(1.0) {
        nearest
    } else {
        value.floor()
    };
    let count = floor as u64;
    (count <= cap).then_some(count)
}

/// `⌊(2n-1)^(kd)⌋`, capped at [`DEFAULT_RELATOR_CAP`].
pub fn relator_count(params: &ModelParams) -> Result<u64, ModelError> {
    relator_count_capped(params, DEFAULT_RELATOR_CAP)
}

pub fn relator_count_capped(params: &ModelParams, cap: u64) -> Result<u64, ModelError> {
    params.validate()?;
    let base = 2 * params.n as u64 - 1;
    floor_power(base, params.k as f64 * params.d, cap).ok_or(ModelError::Overflow { cap })
}

/// ChaCha8 stream for a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of an independent sub-stream, mixed from a master seed and a path of
/// identifiers (trial index, grid coordinates) with SplitMix64.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Uniform cyclically reduced word of length `k` in rank `n`.
pub fn sample_relator<R: Rng + ?Sized>(n: u32, k: usize, rng: &mut R) -> Word {
    assert!(n >= 1 && k >= 1);
    if n == 1 {
        let g = if rng.random_bool(0.5) { 1 } else { -1 };
        return Word::generator_power(1, 1, g * k as i64);
    }
    let alphabet = 2 * n as usize;
    loop {
        let mut letters = Vec::with_capacity(k);
        letters.push(Letter::from_ordinal(rng.random_range(0..alphabet)));
        while letters.len() < k {
            let forbidden = letters.last().unwrap().inverse().ordinal();
            // uniform over the 2n-1 letters other than the forbidden one
            let mut pick = rng.random_range(0..alphabet - 1);
            if pick >= forbidden {
                pick += 1;
            }
            letters.push(Letter::from_ordinal(pick));
        }
        let word = Word::from_letters(n, letters);
        if is_cyclically_reduced(&word) {
            return word;
        }
    }
}

/// Uniform positive word of length `k` in rank `n`.
pub fn sample_positive_relator<R: Rng + ?Sized>(n: u32, k: usize, rng: &mut R) -> Word {
    assert!(n >= 1);
    let letters = (0..k).map(|_| Letter::generator(rng.random_range(1..=n))).collect();
    Word::from_letters(n, letters)
}

/// A presentation `⟨S | R⟩` with `|S| = n` and a set of distinct relators.
///
/// Relators are stored sorted; two presentations with the same relator set
/// compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    n: u32,
    relators: Vec<Word>,
    params: Option<ModelParams>,
}

impl Presentation {
    pub fn new(n: u32, relators: Vec<Word>, params: Option<ModelParams>) -> Result<Self, PresentationError> {
        if n == 0 {
            return Err(WordError::ZeroRank.into());
        }
        if let Some(p) = &params {
            p.validate()?;
            if p.n != n {
                return Err(PresentationError::ParamsRank { gens: n, model: p.n });
            }
        }
        let mut relators = relators;
        relators.sort();
        for pair in relators.windows(2) {
            if pair[0] == pair[1] {
                return Err(PresentationError::Duplicate(pair[0].clone()));
            }
        }
        for r in &relators {
            if r.rank() != n {
                return Err(PresentationError::RankMismatch { expected: n, found: r.rank() });
            }
            if !is_cyclically_reduced(r) {
                return Err(PresentationError::NotCyclicallyReduced(r.clone()));
            }
            if let Some(p) = &params {
                if r.len() != p.k {
                    return Err(PresentationError::WrongLength { word: r.clone(), len: r.len(), k: p.k });
                }
                if p.positive && !r.is_positive() {
                    return Err(PresentationError::NotPositive(r.clone()));
                }
            }
        }
        Ok(Presentation { n, relators, params })
    }

    pub fn rank(&self) -> u32 {
        self.n
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn len(&self) -> usize {
        self.relators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relators.is_empty()
    }

    pub fn params(&self) -> Option<&ModelParams> {
        self.params.as_ref()
    }

    /// Common relator length, if all relators share one (or from the params).
    pub fn relator_length(&self) -> Option<usize> {
        if let Some(p) = &self.params {
            return Some(p.k);
        }
        let first = self.relators.first()?.len();
        self.relators.iter().all(|r| r.len() == first).then_some(first)
    }

    pub fn contains(&self, relator: &Word) -> bool {
        self.relators.binary_search(relator).is_ok()
    }

    pub fn without_params(&self) -> Presentation {
        Presentation { params: None, ..self.clone() }
    }

    /// Text form: `gens <n>`, an optional `model ...` line, then one
    /// `rel <word>` line per relator.
    pub fn to_text(&self) -> String {
        let mut out = format!("gens {}\n", self.n);
        if let Some(p) = &self.params {
            out.push_str(&format!(
                "model k={} d={} positive={} seed={}\n",
                p.k, p.d, p.positive, p.seed
            ));
        }
        for r in &self.relators {
            out.push_str(&format!("rel {r}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        parse_presentation_lines(text.lines().enumerate().map(|(i, l)| (i + 1, l)))
    }
}

impl FromStr for Presentation {
    type Err = PresentationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Presentation::parse(s)
    }
}

pub(crate) fn parse_presentation_lines<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<Presentation, PresentationError> {
    let perr = |line: usize, message: String| PresentationError::Parse { line, message };
    let mut n: Option<u32> = None;
    let mut model: Option<(usize, bool, f64, u64)> = None;
    let mut relators = Vec::new();
    for (line_no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match key {
            "gens" => {
                if n.is_some() {
                    return Err(perr(line_no, "duplicate `gens` line".into()));
                }
                let value = rest
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| perr(line_no, format!("bad generator count `{}`", rest.trim())))?;
                n = Some(value);
            }
            "model" => {
                if n.is_none() {
                    return Err(perr(line_no, "`model` before `gens`".into()));
                }
                let mut k = None;
                let mut d = None;
                let mut positive = None;
                let mut seed = None;
                for field in rest.split_whitespace() {
                    let (name, value) = field
                        .split_once('=')
                        .ok_or_else(|| perr(line_no, format!("bad model field `{field}`")))?;
                    let bad = || perr(line_no, format!("bad value in `{field}`"));
                    match name {
                        "k" => k = Some(value.parse::<usize>().map_err(|_| bad())?),
                        "d" => d = Some(value.parse::<f64>().map_err(|_| bad())?),
                        "positive" => positive = Some(value.parse::<bool>().map_err(|_| bad())?),
                        "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
                        _ => return Err(perr(line_no, format!("unknown model field `{name}`"))),
                    }
                }
                match (k, positive, d, seed) {
                    (Some(k), Some(p), Some(d), Some(s)) => model = Some((k, p, d, s)),
                    _ => return Err(perr(line_no, "model line needs k, d, positive and seed".into())),
                }
            }
            "rel" => {
                let rank = n.ok_or_else(|| perr(line_no, "`rel` before `gens`".into()))?;
                let word = Word::parse(rank, rest).map_err(|e| perr(line_no, e.to_string()))?;
                relators.push(word);
            }
            _ => return Err(perr(line_no, format!("unknown directive `{key}`"))),
        }
    }
    let n = n.ok_or_else(|| perr(0, "missing `gens` line".into()))?;
    let params = model.map(|(k, positive, d, seed)| ModelParams { n, k, d, positive, seed });
    Presentation::new(n, relators, params)
}

/// Samples a presentation of `params` using `rng`.
pub fn sample_presentation<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<Presentation, ModelError> {
    let count = relator_count(params)?;
    sample_presentation_with_count(params, count, rng)
}

/// Samples from the stream seeded by `params.seed`.
pub fn sample_seeded(params: &ModelParams) -> Result<Presentation, ModelError> {
    sample_presentation(params, &mut rng_from_seed(params.seed))
}

/// Uniform `count`-subset of the model's word space.
pub fn sample_presentation_with_count<R: Rng + ?Sized>(
    params: &ModelParams,
    count: u64,
    rng: &mut R,
) -> Result<Presentation, ModelError> {
    params.validate()?;
    let space = params.space_size();
    if BigUint::from(count) > space {
        return Err(ModelError::SpaceExhausted { requested: count, available: space });
    }
    let space_small = space.to_u64().filter(|&s| s <= ENUMERATION_LIMIT);
    let relators: Vec<Word> = match space_small {
        Some(size) if 2 * count > size => {
            let filter = if params.positive { WordFilter::Positive } else { WordFilter::CyclicallyReduced };
            let all: Vec<Word> = enumerate_words(params.n, params.k, filter).collect();
            debug_assert_eq!(all.len() as u64, size);
            rand::seq::index::sample(rng, all.len(), count as usize)
                .into_iter()
                .map(|i| all[i].clone())
                .collect()
        }
        _ => {
            let mut seen = HashSet::with_capacity(count as usize);
            let mut out = Vec::with_capacity(count as usize);
            while (out.len() as u64) < count {
                let word = if params.positive {
                    sample_positive_relator(params.n, params.k, rng)
                } else {
                    sample_relator(params.n, params.k, rng)
                };
                if seen.insert(word.clone()) {
                    out.push(word);
                }
            }
            out
        }
    };
    Ok(Presentation::new(params.n, relators, Some(*params)).expect("sampled relators satisfy the model"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32, k: usize, d: f64, positive: bool) -> ModelParams {
        ModelParams::new(n, k, d, positive, 7).unwrap()
    }

    #[test]
    fn relator_count_examples() {
        assert_eq!(relator_count(&params(2, 3, 1.0 / 3.0, false)).unwrap(), 3);
        assert_eq!(relator_count(&params(2, 6, 0.5, false)).unwrap(), 27);
        assert_eq!(relator_count(&params(13, 3, 1.0 / 3.0, false)).unwrap(), 25);
        assert_eq!(relator_count(&params(1, 2, 0.9, false)).unwrap(), 1);
        // 9^0.5 is exactly 3
        assert_eq!(relator_count(&params(5, 1, 0.5, false)).unwrap(), 3);
        // a truncated decimal density stays below the boundary
        assert_eq!(relator_count(&params(2, 3, 0.3333, false)).unwrap(), 2);
    }

    #[test]
    fn relator_count_overflow() {
        let p = params(1000, 30, 0.9, false);
        assert_eq!(relator_count(&p), Err(ModelError::Overflow { cap: DEFAULT_RELATOR_CAP }));
        assert!(relator_count_capped(&params(2, 6, 0.5, false), 26).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(ModelParams::new(0, 3, 0.5, false, 0).is_err());
        assert!(ModelParams::new(2, 0, 0.5, false, 0).is_err());
        assert!(ModelParams::new(2, 3, 1.0, false, 0).is_err());
        assert!(ModelParams::new(2, 3, 0.0, false, 0).is_err());
    }

    #[test]
    fn rank_one_relators() {
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let v = sample_relator(1, 4, &mut rng).values();
            assert!(v == vec![1; 4] || v == vec![-1; 4]);
        }
        assert_eq!(sample_positive_relator(1, 3, &mut rng).values(), vec![1, 1, 1]);
    }

    #[test]
    fn presentation_examples() {
        let p = sample_presentation(&params(2, 3, 1.0 / 3.0, false), &mut rng_from_seed(1)).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.relators().iter().all(|r| r.len() == 3 && r.is_cyclically_reduced()));

        let p = sample_presentation(&params(1, 2, 0.9, false), &mut rng_from_seed(1)).unwrap();
        assert_eq!(p.len(), 1);
        let v = p.relators()[0].values();
        assert!(v == vec![1, 1] || v == vec![-1, -1]);

        let err = sample_presentation_with_count(&params(1, 2, 0.9, false), 3, &mut rng_from_seed(1));
        assert!(matches!(err, Err(ModelError::SpaceExhausted { requested: 3, .. })));
    }

    #[test]
    fn full_space_by_enumeration() {
        let p = sample_presentation_with_count(&params(2, 2, 0.5, true), 4, &mut rng_from_seed(9)).unwrap();
        assert_eq!(p.len(), 4);
        let p = sample_presentation_with_count(&params(2, 3, 0.5, false), 28, &mut rng_from_seed(9)).unwrap();
        assert_eq!(p.len(), 28);
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let p = params(5, 4, 0.4, false);
        assert_eq!(sample_seeded(&p).unwrap(), sample_seeded(&p).unwrap());
        assert_ne!(sample_seeded(&p).unwrap(), sample_seeded(&p.with_seed(8)).unwrap());
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, &[0]);
        let b = derive_seed(1, &[1]);
        let c = derive_seed(2, &[0]);
        assert!(a != b && a != c && b != c);
        assert_eq!(a, derive_seed(1, &[0]));
    }

    #[test]
    fn text_round_trip() {
        let p = sample_presentation(&params(3, 4, 0.45, false), &mut rng_from_seed(5)).unwrap();
        let text = p.to_text();
        let q = Presentation::parse(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.to_text(), text);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Presentation::parse("rel 1 2"), Err(PresentationError::Parse { .. })));
        assert!(matches!(Presentation::parse("gens 2\nrel 1 -1 2"), Err(PresentationError::NotCyclicallyReduced(_))));
        assert!(matches!(Presentation::parse("gens 2\nrel 1 2\nrel 1 2"), Err(PresentationError::Duplicate(_))));
        assert!(matches!(
            Presentation::parse("gens 2\nmodel k=3 d=0.5 positive=true seed=1\nrel 1 -2 2"),
            Err(PresentationError::NotCyclicallyReduced(_))
        ));
        assert!(matches!(
            Presentation::parse("gens 2\nmodel k=3 d=0.5 positive=true seed=1\nrel 1 -2 1"),
            Err(PresentationError::NotPositive(_))
        ));
        assert!(matches!(
            Presentation::parse("gens 2\nmodel k=3 d=0.5 positive=false seed=1\nrel 1 2"),
            Err(PresentationError::WrongLength { .. })
        ));
        assert!(matches!(Presentation::parse("gens 2\nfoo"), Err(PresentationError::Parse { line: 2, .. })));
        let p = Presentation::parse("# empty\ngens 3\n").unwrap();
        assert!(p.is_empty());
    }
}
