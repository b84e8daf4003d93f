//! Words in a free group of finite rank.
//!
//! A letter is a nonzero signed integer: `i` is the `i`-th basis element and
//! `-i` its inverse. Words carry their ambient rank so that a word over the
//! block alphabet of a regrouped presentation cannot be confused with a word
//! over the original generators.

use std::cmp::Ordering;
use std::fmt;
use std::num::NonZeroI32;

use num_bigint::BigUint;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("letter 0 is not a generator")]
    ZeroLetter,
    #[error("letter {letter} exceeds rank {rank}")]
    OutOfRank { letter: i64, rank: u32 },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("cannot parse word token `{0}`")]
    BadToken(String),
}

/// A generator or the inverse of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter(NonZeroI32);

impl Letter {
    pub fn new(value: i32) -> Option<Self> {
        NonZeroI32::new(value).map(Letter)
    }

    /// The `g`-th generator (1-based), positive.
    pub fn generator(g: u32) -> Self {
        Letter::new(g as i32).expect("generator index must be nonzero")
    }

    pub fn value(self) -> i32 {
        self.0.get()
    }

    /// Index of the underlying generator, 1-based.
    pub fn index(self) -> u32 {
        self.0.get().unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0.get() > 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Position of the letter in the alphabet order `1, -1, 2, -2, ...`.
    pub fn ordinal(self) -> usize {
        2 * (self.index() as usize - 1) + usize::from(!self.is_positive())
    }

    pub fn from_ordinal(ordinal: usize) -> Self {
        let g = (ordinal / 2 + 1) as i32;
        Letter::new(if ordinal.is_multiple_of(2) { g } else { -g }).unwrap()
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ordinal().cmp(&other.ordinal())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// A finite word over `S ∪ S⁻¹` for a basis `S` of size `rank`.
///
/// Words compare lexicographically using the letter order `1, -1, 2, -2, ...`
/// (a proper prefix sorts first). This order is used everywhere a canonical
/// enumeration of words is needed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: u32,
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(rank: u32, letters: impl IntoIterator<Item = i32>) -> Result<Self, WordError> {
        if rank == 0 {
            return Err(WordError::ZeroRank);
        }
        let letters = letters
            .into_iter()
            .map(|v| {
                let letter = Letter::new(v).ok_or(WordError::ZeroLetter)?;
                if letter.index() > rank {
                    return Err(WordError::OutOfRank { letter: v as i64, rank });
                }
                Ok(letter)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Word { rank, letters })
    }

    /// Builds a word from letters already known to lie within `rank`.
    pub fn from_letters(rank: u32, letters: Vec<Letter>) -> Self {
        debug_assert!(rank >= 1);
        debug_assert!(letters.iter().all(|l| l.index() <= rank));
        Word { rank, letters }
    }

    pub fn empty(rank: u32) -> Self {
        Word::from_letters(rank, Vec::new())
    }

    /// `g^power` for the `g`-th generator; negative powers use the inverse.
    pub fn generator_power(rank: u32, g: u32, power: i64) -> Self {
        let letter = Letter::generator(g);
        let letter = if power < 0 { letter.inverse() } else { letter };
        Word::from_letters(rank, vec![letter; power.unsigned_abs() as usize])
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn values(&self) -> Vec<i32> {
        self.letters.iter().map(|l| l.value()).collect()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// True when every letter is a generator (the empty word counts).
    pub fn is_positive(&self) -> bool {
        self.letters.iter().all(|l| l.is_positive())
    }

    pub fn is_negative(&self) -> bool {
        self.letters.iter().all(|l| !l.is_positive())
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|p| p[0] != p[1].inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        is_cyclically_reduced(self)
    }

    /// Sum of the exponents of all letters.
    pub fn exponent_sum(&self) -> i64 {
        self.letters
            .iter()
            .map(|l| if l.is_positive() { 1 } else { -1 })
            .sum()
    }

    pub fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Plain concatenation, no reduction.
    pub fn concat(&self, other: &Word) -> Word {
        assert_eq!(self.rank, other.rank, "concatenating words of different rank");
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Word { rank: self.rank, letters }
    }

    /// Reduced product `self · other`.
    pub fn mul(&self, other: &Word) -> Word {
        free_reduce(&self.concat(other))
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Word {
        Word::from_letters(self.rank, self.letters[range].to_vec())
    }

    /// Same letters, reinterpreted in a larger ambient rank.
    pub fn with_rank(&self, rank: u32) -> Result<Word, WordError> {
        Word::new(rank, self.values())
    }

    /// Parses the text form: space separated signed integers, or `e`.
    pub fn parse(rank: u32, text: &str) -> Result<Word, WordError> {
        let text = text.trim();
        if text == "e" {
            return if rank == 0 { Err(WordError::ZeroRank) } else { Ok(Word::empty(rank)) };
        }
        let values = text
            .split_whitespace()
            .map(|tok| tok.parse::<i32>().map_err(|_| WordError::BadToken(tok.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Word::new(rank, values)
    }

    /// Text rendering with letters `a, b, ...` and capitals for inverses.
    /// Returns `None` for ranks above 26.
    pub fn to_alpha(&self) -> Option<String> {
        if self.rank > 26 {
            return None;
        }
        if self.is_empty() {
            return Some("e".to_string());
        }
        Some(
            self.letters
                .iter()
                .map(|l| {
                    let c = (b'a' + (l.index() - 1) as u8) as char;
                    if l.is_positive() { c } else { c.to_ascii_uppercase() }
                })
                .collect(),
        )
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters.cmp(&other.letters).then(self.rank.cmp(&other.rank))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("e");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// The unique reduced word equal to `w` in the free group.
pub fn free_reduce(w: &Word) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in &w.letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word { rank: w.rank, letters: out }
}

/// Result of cyclic reduction: `original = conjugator · word · conjugator⁻¹`
/// in the free group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicReduction {
    pub word: Word,
    pub conjugator: Word,
}

pub fn cyclic_reduce(w: &Word) -> CyclicReduction {
    let reduced = free_reduce(w);
    let letters = &reduced.letters;
    let mut lo = 0;
    let mut hi = letters.len();
    while hi - lo >= 2 && letters[lo] == letters[hi - 1].inverse() {
        lo += 1;
        hi -= 1;
    }
    CyclicReduction {
        word: reduced.slice(lo..hi),
        conjugator: reduced.slice(0..lo),
    }
}

pub fn is_cyclically_reduced(w: &Word) -> bool {
    if !w.is_reduced() {
        return false;
    }
    match (w.first(), w.last()) {
        (Some(first), Some(last)) if w.len() >= 2 => first != last.inverse(),
        _ => true,
    }
}

/// Number of reduced words of length `len` in rank `n`: `2n(2n-1)^(len-1)`.
pub fn count_reduced(n: u32, len: usize) -> BigUint {
    if len == 0 {
        return BigUint::one();
    }
    BigUint::from(2 * n as u64) * BigUint::from(2 * n as u64 - 1).pow(len as u32 - 1)
}

pub fn count_positive(n: u32, len: usize) -> BigUint {
    BigUint::from(n).pow(len as u32)
}

/// Exact number of cyclically reduced words of length `len` in rank `n`.
///
/// Fix the first letter `f`. A reduced word is extended one letter at a time
/// while tracking whether the current last letter is `f`, `f⁻¹`, or one of
/// the `2n-2` other letters. The word is cyclically reduced when it does not
/// end in `f⁻¹`. All `2n` choices of `f` contribute equally.
pub fn count_cyclically_reduced(n: u32, len: usize) -> BigUint {
    if len == 0 {
        return BigUint::one();
    }
    if n == 0 {
        return BigUint::zero();
    }
    let others = BigUint::from(2 * n as u64 - 2);
    let others_minus_one = if n >= 2 { BigUint::from(2 * n as u64 - 3) } else { BigUint::zero() };

    let mut same = BigUint::one();
    let mut inverse = BigUint::zero();
    let mut other = BigUint::zero();
    for _ in 1..len {
        let next_same = &same + &other;
        let next_inverse = &inverse + &other;
        let next_other = (&same + &inverse) * &others + &other * &others_minus_one;
        same = next_same;
        inverse = next_inverse;
        other = next_other;
    }
    (same + other) * BigUint::from(2 * n as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordFilter {
    All,
    Reduced,
    CyclicallyReduced,
    Positive,
}

/// Every word of length `len` over rank `n` passing `filter`, each exactly
/// once, in lexicographic order.
pub fn enumerate_words(n: u32, len: usize, filter: WordFilter) -> WordEnumerator {
    WordEnumerator {
        rank: n,
        len,
        filter,
        choices: Vec::with_capacity(len),
        started: false,
        done: n == 0,
    }
}

pub struct WordEnumerator {
    rank: u32,
    len: usize,
    filter: WordFilter,
    choices: Vec<usize>,
    started: bool,
    done: bool,
}

impl WordEnumerator {
    fn alphabet_len(&self) -> usize {
        2 * self.rank as usize
    }

    fn next_choice(&self, depth: usize, from: usize) -> Option<usize> {
        (from..self.alphabet_len()).find(|&c| {
            if self.filter == WordFilter::Positive && c % 2 == 1 {
                return false;
            }
            if depth > 0 && matches!(self.filter, WordFilter::Reduced | WordFilter::CyclicallyReduced) {
                let prev = Letter::from_ordinal(self.choices[depth - 1]);
                if Letter::from_ordinal(c) == prev.inverse() {
                    return false;
                }
            }
            true
        })
    }

    fn fill_from(&mut self, depth: usize) -> bool {
        self.choices.truncate(depth);
        while self.choices.len() < self.len {
            match self.next_choice(self.choices.len(), 0) {
                Some(c) => self.choices.push(c),
                None => return false,
            }
        }
        true
    }

    fn advance(&mut self) -> bool {
        let mut depth = self.len;
        while depth > 0 {
            depth -= 1;
            let mut from = self.choices[depth] + 1;
            while let Some(c) = self.next_choice(depth, from) {
                self.choices[depth] = c;
                if self.fill_from(depth + 1) {
                    return true;
                }
                from = c + 1;
            }
        }
        false
    }

    fn current(&self) -> Word {
        Word::from_letters(self.rank, self.choices.iter().map(|&c| Letter::from_ordinal(c)).collect())
    }
}

impl Iterator for WordEnumerator {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        loop {
            if self.done {
                return None;
            }
            let ok = if self.started {
                self.len > 0 && self.advance()
            } else {
                self.started = true;
                self.fill_from(0)
            };
            if !ok {
                self.done = true;
                return None;
            }
            let word = self.current();
            if self.filter != WordFilter::CyclicallyReduced || is_cyclically_reduced(&word) {
                return Some(word);
            }
        }
    }
}
