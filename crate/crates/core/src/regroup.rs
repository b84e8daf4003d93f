//! Regrouping a positive presentation into blocks of `j` letters.
//!
//! A positive relator of length `jk` over `n` generators is read as a word of
//! length `k` over the alphabet `W⁺_j` of the `n^j` positive words of length
//! `j`. Positivity matters: every word over `W⁺_j` decodes to a reduced word,
//! which fails once inverse blocks are allowed.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::freegroup::{count_cyclically_reduced, count_positive, Letter, Word};
use crate::models::{parse_presentation_lines, Presentation, PresentationError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegroupError {
    #[error("word `{0}` is not positive")]
    NotPositive(Word),
    #[error("word `{word}` has length {len}, not a multiple of {j}")]
    NotDivisible { word: Word, len: usize, j: usize },
    #[error("relators have different lengths ({first} and {other})")]
    MixedLengths { first: usize, other: usize },
    #[error("block length must be at least 1")]
    ZeroBlockLength,
    #[error("block alphabet of size {n}^{j} is too large")]
    AlphabetTooLarge { n: u32, j: usize },
    #[error("only {available} positive relators, {target} required")]
    InsufficientPositiveRelators { available: usize, target: usize },
    #[error("word `{word}` is not over the block alphabet of rank {rank}")]
    WrongRank { word: Word, rank: u32 },
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// The positive words of length `j` over `n` generators, indexed `1..=n^j`
/// in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockAlphabet {
    n: u32,
    j: usize,
    m: u32,
}

impl BlockAlphabet {
    pub fn new(n: u32, j: usize) -> Result<Self, RegroupError> {
        if j == 0 {
            return Err(RegroupError::ZeroBlockLength);
        }
        let m = count_positive(n, j)
            .to_u32()
            .filter(|&m| m <= i32::MAX as u32 && m >= 1)
            .ok_or(RegroupError::AlphabetTooLarge { n, j })?;
        Ok(BlockAlphabet { n, j, m })
    }

    pub fn base_rank(&self) -> u32 {
        self.n
    }

    pub fn block_len(&self) -> usize {
        self.j
    }

    /// `m = n^j`, the rank of the regrouped free group.
    pub fn size(&self) -> u32 {
        self.m
    }

    /// Index of a positive block of exactly `j` letters.
    fn index_of(&self, block: &[Letter]) -> u32 {
        debug_assert_eq!(block.len(), self.j);
        block.iter().fold(0u32, |acc, l| acc * self.n + (l.index() - 1)) + 1
    }

    /// The positive word of length `j` with the given index.
    pub fn decode_index(&self, index: u32) -> Word {
        assert!(index >= 1 && index <= self.m, "block index {index} out of range");
        let mut rest = index - 1;
        let mut letters = vec![Letter::generator(1); self.j];
        for slot in letters.iter_mut().rev() {
            *slot = Letter::generator(rest % self.n + 1);
            rest /= self.n;
        }
        Word::from_letters(self.n, letters)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (u32, Word)> + '_ {
        (1..=self.m).map(move |i| (i, self.decode_index(i)))
    }

    /// All of `W⁺_j` as words over the base alphabet.
    pub fn block_words(&self) -> Vec<Word> {
        self.blocks().map(|(_, w)| w).collect()
    }
}

/// `φ⁻¹(w)`: the word over the block alphabet whose image is the positive
/// word `w`.
pub fn block_encode(w: &Word, alphabet: &BlockAlphabet) -> Result<Word, RegroupError> {
    if !w.is_positive() {
        return Err(RegroupError::NotPositive(w.clone()));
    }
    if w.rank() != alphabet.n {
        return Err(RegroupError::WrongRank { word: w.clone(), rank: alphabet.n });
    }
    if !w.len().is_multiple_of(alphabet.j) {
        return Err(RegroupError::NotDivisible { word: w.clone(), len: w.len(), j: alphabet.j });
    }
    let letters = w
        .letters()
        .chunks(alphabet.j)
        .map(|chunk| Letter::generator(alphabet.index_of(chunk)))
        .collect();
    Ok(Word::from_letters(alphabet.m, letters))
}

/// `φ` on signed block words: each block is replaced by its positive word,
/// inverse blocks by the inverse word. No reduction is applied.
pub fn block_decode(w: &Word, alphabet: &BlockAlphabet) -> Result<Word, RegroupError> {
    if w.rank() != alphabet.m {
        return Err(RegroupError::WrongRank { word: w.clone(), rank: alphabet.m });
    }
    let mut letters = Vec::with_capacity(w.len() * alphabet.j);
    for l in w.letters() {
        let block = alphabet.decode_index(l.index());
        if l.is_positive() {
            letters.extend_from_slice(block.letters());
        } else {
            letters.extend(block.letters().iter().rev().map(|b| b.inverse()));
        }
    }
    Ok(Word::from_letters(alphabet.n, letters))
}

/// `R⁺ = R ∩ W⁺`.
pub fn positive_part(p: &Presentation) -> Presentation {
    let relators = p.relators().iter().filter(|r| r.is_positive()).cloned().collect();
    let params = p.params().filter(|params| params.positive).copied();
    Presentation::new(p.rank(), relators, params).expect("subset of a valid presentation")
}

/// `|w| mod j`.
pub fn length_mod(w: &Word, j: usize) -> usize {
    assert!(j >= 1);
    w.len() % j
}

/// The regrouped presentation `Γ = ⟨W⁺_j | R⁺_k⟩` together with the positive
/// presentation it was read off from.
#[derive(Debug, Clone, PartialEq)]
pub struct RegroupedPresentation {
    pub gamma: Presentation,
    pub alphabet: BlockAlphabet,
    pub source: Presentation,
}

/// Header line number, header text, and numbered body lines of one section.
type Section<'a> = (usize, &'a str, Vec<(usize, &'a str)>);

impl RegroupedPresentation {
    /// Relator length of Γ, when the source has relators.
    pub fn k(&self) -> Option<usize> {
        self.source.relator_length().map(|len| len / self.alphabet.j)
    }

    /// True when the Γ relators decode one-to-one onto the source relators.
    pub fn is_faithful(&self) -> bool {
        if self.gamma.len() != self.source.len() || self.gamma.rank() != self.alphabet.m {
            return false;
        }
        let mut decoded = Vec::with_capacity(self.gamma.len());
        for r in self.gamma.relators() {
            match block_decode(r, &self.alphabet) {
                Ok(w) if w.is_positive() => decoded.push(w),
                _ => return false,
            }
        }
        decoded.sort();
        decoded.as_slice() == self.source.relators()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("section source\n");
        out.push_str(&self.source.to_text());
        out.push_str("section gamma\n");
        out.push_str(&self.gamma.to_text());
        out.push_str(&format!("section blockmap n={} j={}\n", self.alphabet.n, self.alphabet.j));
        for (i, w) in self.alphabet.blocks() {
            out.push_str(&format!("block {i} {w}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, RegroupError> {
        let perr = |line: usize, message: String| RegroupError::Parse { line, message };
        let mut sections: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(header) = raw.trim().strip_prefix("section ") {
                sections.push((line_no, header, Vec::new()));
            } else if let Some((_, _, body)) = sections.last_mut() {
                body.push((line_no, raw));
            } else if !(raw.trim().is_empty() || raw.trim().starts_with('#')) {
                return Err(perr(line_no, "content before first section".into()));
            }
        }
        let [(_, source_h, source_body), (_, gamma_h, gamma_body), (map_line, map_h, map_body)] = sections.as_slice()
        else {
            return Err(perr(0, "expected sections source, gamma, blockmap".into()));
        };
        if *source_h != "source" || *gamma_h != "gamma" {
            return Err(perr(0, "expected sections source, gamma, blockmap".into()));
        }
        let source = parse_presentation_lines(source_body.iter().copied())?;
        let gamma = parse_presentation_lines(gamma_body.iter().copied())?;

        let mut n = None;
        let mut j = None;
        let mut fields = map_h.split_whitespace();
        if fields.next() != Some("blockmap") {
            return Err(perr(*map_line, "expected `section blockmap`".into()));
        }
        for field in fields {
            match field.split_once('=') {
                Some(("n", v)) => n = v.parse::<u32>().ok(),
                Some(("j", v)) => j = v.parse::<usize>().ok(),
                _ => return Err(perr(*map_line, format!("bad blockmap field `{field}`"))),
            }
        }
        let (Some(n), Some(j)) = (n, j) else {
            return Err(perr(*map_line, "blockmap needs n and j".into()));
        };
        let alphabet = BlockAlphabet::new(n, j)?;
        let mut expected = alphabet.blocks();
        for &(line_no, raw) in map_body {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rest = line
                .strip_prefix("block ")
                .ok_or_else(|| perr(line_no, "expected `block <index> <word>`".into()))?;
            let (index, word) = rest
                .trim()
                .split_once(char::is_whitespace)
                .ok_or_else(|| perr(line_no, "expected `block <index> <word>`".into()))?;
            let index: u32 = index.parse().map_err(|_| perr(line_no, format!("bad block index `{index}`")))?;
            let word = Word::parse(n, word).map_err(|e| perr(line_no, e.to_string()))?;
            if expected.next() != Some((index, word)) {
                return Err(perr(line_no, "block map is not the lexicographic bijection".into()));
            }
        }
        if expected.next().is_some() {
            return Err(perr(*map_line, "block map is incomplete".into()));
        }
        Ok(RegroupedPresentation { gamma, alphabet, source })
    }
}

/// Builds `Γ` from a positive presentation whose relators all have length
/// `jk`.
pub fn build_gamma(positive: &Presentation, j: usize) -> Result<RegroupedPresentation, RegroupError> {
    let alphabet = BlockAlphabet::new(positive.rank(), j)?;
    let mut lengths = positive.relators().iter().map(Word::len);
    if let Some(first) = lengths.next() {
        if let Some(other) = lengths.find(|&l| l != first) {
            return Err(RegroupError::MixedLengths { first, other });
        }
    }
    let relators = positive
        .relators()
        .iter()
        .map(|r| block_encode(r, &alphabet))
        .collect::<Result<Vec<_>, _>>()?;
    let gamma = Presentation::new(alphabet.m, relators, None)?;
    Ok(RegroupedPresentation { gamma, alphabet, source: positive.clone() })
}

/// The lexicographically first `target` relators.
pub fn downsample(positive: &Presentation, target: usize) -> Result<Presentation, RegroupError> {
    if positive.len() < target {
        return Err(RegroupError::InsufficientPositiveRelators { available: positive.len(), target });
    }
    let relators = positive.relators()[..target].to_vec();
    Ok(Presentation::new(positive.rank(), relators, None)?)
}

/// `ln(count) / (k ln(2 rank - 1))`: the density at which a native sample
/// over `rank` generators with relators of length `k` would have `count`
/// relators.
pub fn effective_density(relator_count: u64, k: usize, rank: u32) -> f64 {
    assert!(relator_count >= 1);
    let count = relator_count as f64;
    if relator_count == 1 {
        return 0.0;
    }
    if rank <= 1 {
        return f64::INFINITY;
    }
    count.ln() / (k as f64 * (2.0 * rank as f64 - 1.0).ln())
}

/// Probability that a uniform cyclically reduced word of length `len` in rank
/// `n` is positive: `n^len / #cyclically reduced words`.
pub fn positive_fraction(n: u32, len: usize) -> f64 {
    ratio(&count_positive(n, len), &count_cyclically_reduced(n, len))
}

fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    // scale both down together so the conversion stays finite
    let shift = den.bits().saturating_sub(1000);
    let num = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let den = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(rank: u32, v: &[i32]) -> Word {
        Word::new(rank, v.iter().copied()).unwrap()
    }

    #[test]
    fn positive_part_examples() {
        let p = Presentation::new(2, vec![w(2, &[1, 2]), w(2, &[-1, 2])], None).unwrap();
        assert_eq!(positive_part(&p).relators(), &[w(2, &[1, 2])]);
        let p = Presentation::new(2, vec![w(2, &[-1, -2]), w(2, &[-2, -2])], None).unwrap();
        assert!(positive_part(&p).is_empty());
    }

    #[test]
    fn length_mod_examples() {
        assert_eq!(length_mod(&w(2, &[1, 2, 1]), 2), 1);
        assert_eq!(length_mod(&Word::empty(2), 3), 0);
        assert_eq!(length_mod(&w(1, &[1, 1, 1, 1]), 4), 0);
    }

    #[test]
    fn block_indexing() {
        let a = BlockAlphabet::new(2, 2).unwrap();
        assert_eq!(a.size(), 4);
        let blocks: Vec<_> = a.blocks().map(|(i, w)| (i, w.values())).collect();
        assert_eq!(
            blocks,
            vec![(1, vec![1, 1]), (2, vec![1, 2]), (3, vec![2, 1]), (4, vec![2, 2])]
        );
        assert_eq!(block_encode(&w(2, &[1, 2, 1, 2]), &a).unwrap(), w(4, &[2, 2]));
        assert!(matches!(block_encode(&w(2, &[1, -2, 1, 2]), &a), Err(RegroupError::NotPositive(_))));
        assert!(matches!(block_encode(&w(2, &[1, 2, 1]), &a), Err(RegroupError::NotDivisible { .. })));
        assert_eq!(block_decode(&w(4, &[-2, 1]), &a).unwrap(), w(2, &[-2, -1, 1, 1]));
    }

    #[test]
    fn gamma_example() {
        let p = Presentation::new(2, vec![w(2, &[1, 2, 1, 2, 1, 2])], None).unwrap();
        let g = build_gamma(&p, 2).unwrap();
        assert_eq!(g.gamma.rank(), 4);
        assert_eq!(g.gamma.relators(), &[w(4, &[2, 2, 2])]);
        assert_eq!(g.k(), Some(3));
        assert!(g.is_faithful());
    }

    #[test]
    fn gamma_rejects_bad_input() {
        let p = Presentation::new(2, vec![w(2, &[1, 2, 1])], None).unwrap();
        assert!(matches!(build_gamma(&p, 2), Err(RegroupError::NotDivisible { .. })));
        let p = Presentation::new(2, vec![w(2, &[1, 2]), w(2, &[1, 1, 2, 2])], None).unwrap();
        assert!(matches!(build_gamma(&p, 2), Err(RegroupError::MixedLengths { .. })));
        assert!(matches!(build_gamma(&p, 0), Err(RegroupError::ZeroBlockLength)));
    }

    #[test]
    fn downsample_examples() {
        let words: Vec<_> = (1..=5).map(|i| w(5, &[i, i])).collect();
        let p = Presentation::new(5, words, None).unwrap();
        assert_eq!(downsample(&p, 5).unwrap().relators(), p.relators());
        let p3 = Presentation::new(2, vec![w(2, &[1, 1]), w(2, &[2, 1]), w(2, &[1, 2])], None).unwrap();
        assert_eq!(
            downsample(&p3, 4),
            Err(RegroupError::InsufficientPositiveRelators { available: 3, target: 4 })
        );
        assert_eq!(downsample(&p3, 2).unwrap().relators(), &[w(2, &[1, 1]), w(2, &[1, 2])]);
    }

    #[test]
    fn effective_density_examples() {
        assert!((effective_density(3, 3, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(effective_density(1, 7, 5), 0.0);
        assert!((effective_density(27, 6, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn positive_fraction_small() {
        // 4 positive words among 12 cyclically reduced ones
        assert!((positive_fraction(2, 2) - 4.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let p = Presentation::new(2, vec![w(2, &[1, 2, 1, 1]), w(2, &[2, 2, 1, 2])], None).unwrap();
        let g = build_gamma(&p, 2).unwrap();
        let text = g.to_text();
        let back = RegroupedPresentation::parse(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_text(), text);
        let broken = text.replace("block 2 1 2", "block 2 2 1");
        assert!(RegroupedPresentation::parse(&broken).is_err());
    }
}
