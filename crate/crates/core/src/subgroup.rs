//! Finitely generated subgroups of free groups via Stallings foldings, and the
//! coset rewriting that exhibits words of length `< j` as a transversal of
//! `⟨W⁺_j⟩`.

use std::collections::VecDeque;
use std::fmt;

use crate::freegroup::{enumerate_words, free_reduce, Letter, Word, WordFilter};
use crate::regroup::{block_decode, block_encode, BlockAlphabet};

/// Folded, base-pointed graph labelled by the letters of a free group.
///
/// Vertices are numbered by breadth-first search from the base (vertex 0),
/// visiting out-edges in letter order `1, -1, 2, -2, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupGraph {
    rank: u32,
    /// `out[v][letter.ordinal()]`
    out: Vec<Vec<Option<u32>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Index {
    Finite(u64),
    Infinite,
}

impl Index {
    pub fn is_finite(self) -> bool {
        matches!(self, Index::Finite(_))
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(i) => write!(f, "{i}"),
            Index::Infinite => f.write_str("inf"),
        }
    }
}

impl SubgroupGraph {
    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn base(&self) -> u32 {
        0
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    /// Number of (undirected) labelled edges.
    pub fn edge_count(&self) -> usize {
        self.out
            .iter()
            .map(|row| row.iter().step_by(2).filter(|t| t.is_some()).count())
            .sum()
    }

    pub fn target(&self, vertex: u32, letter: Letter) -> Option<u32> {
        self.out.get(vertex as usize)?.get(letter.ordinal()).copied().flatten()
    }

    /// End vertex of the path reading `w` from `start`, if it exists.
    pub fn trace(&self, start: u32, w: &Word) -> Option<u32> {
        w.letters().iter().try_fold(start, |v, &l| self.target(v, l))
    }

    /// Whether the subgroup contains `w`.
    pub fn contains(&self, w: &Word) -> bool {
        membership(self, w)
    }

    /// Text dump: `base 0`, then `from letter to` for every edge with a
    /// positive label.
    pub fn dump(&self) -> String {
        let mut out = format!("base {}\n", self.base());
        for (v, row) in self.out.iter().enumerate() {
            for (ordinal, target) in row.iter().enumerate().step_by(2) {
                if let Some(t) = target {
                    out.push_str(&format!("{v} {} {t}\n", Letter::from_ordinal(ordinal)));
                }
            }
        }
        out
    }
}

struct Folder {
    rank: u32,
    parent: Vec<usize>,
    out: Vec<Vec<Option<usize>>>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    fn new(rank: u32) -> Self {
        let mut folder = Folder { rank, parent: Vec::new(), out: Vec::new(), pending: Vec::new() };
        folder.add_vertex();
        folder
    }

    fn add_vertex(&mut self) -> usize {
        let v = self.parent.len();
        self.parent.push(v);
        self.out.push(vec![None; 2 * self.rank as usize]);
        v
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn set(&mut self, from: usize, ordinal: usize, to: usize) {
        let from = self.find(from);
        match self.out[from][ordinal] {
            None => self.out[from][ordinal] = Some(to),
            Some(existing) => {
                if self.find(existing) != self.find(to) {
                    self.pending.push((existing, to));
                }
            }
        }
    }

    fn add_edge(&mut self, from: usize, letter: Letter, to: usize) {
        self.set(from, letter.ordinal(), to);
        self.set(to, letter.inverse().ordinal(), from);
    }

    fn add_loop(&mut self, w: &Word) {
        let len = w.len();
        let mut current = 0;
        for (i, &l) in w.letters().iter().enumerate() {
            let next = if i + 1 == len { 0 } else { self.add_vertex() };
            self.add_edge(current, l, next);
            current = next;
        }
    }

    fn fold(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            let (keep, drop) = if a < b { (a, b) } else { (b, a) };
            self.parent[drop] = keep;
            let edges = std::mem::take(&mut self.out[drop]);
            for (ordinal, target) in edges.into_iter().enumerate() {
                if let Some(t) = target {
                    self.set(keep, ordinal, t);
                }
            }
        }
    }

    fn finish(mut self) -> SubgroupGraph {
        let alphabet = 2 * self.rank as usize;
        let base = self.find(0);
        let mut ids = vec![u32::MAX; self.parent.len()];
        let mut order = vec![base];
        ids[base] = 0;
        let mut queue = VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            for ordinal in 0..alphabet {
                if let Some(t) = self.out[v][ordinal] {
                    let t = self.find(t);
                    if ids[t] == u32::MAX {
                        ids[t] = order.len() as u32;
                        order.push(t);
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(order.len());
        for &v in &order {
            let row = (0..alphabet)
                .map(|ordinal| self.out[v][ordinal].map(|t| ids[self.find(t)]))
                .collect();
            out.push(row);
        }
        SubgroupGraph { rank: self.rank, out }
    }
}

/// Folds the wedge of the (reduced) generator loops into the Stallings graph
/// of the subgroup they generate.
pub fn stallings_fold(generators: &[Word], n: u32) -> SubgroupGraph {
    let mut folder = Folder::new(n);
    for g in generators {
        assert_eq!(g.rank(), n, "generator rank does not match");
        let g = free_reduce(g);
        if !g.is_empty() {
            folder.add_loop(&g);
            folder.fold();
        }
    }
    folder.finish()
}

/// `w` lies in the subgroup iff its reduced form labels a loop at the base.
pub fn membership(g: &SubgroupGraph, w: &Word) -> bool {
    g.trace(g.base(), &free_reduce(w)) == Some(g.base())
}

/// Index of the subgroup: the vertex count when the graph covers the rose,
/// infinite when some vertex is missing an out-edge.
pub fn index(g: &SubgroupGraph) -> Index {
    if g.out.iter().all(|row| row.iter().all(Option::is_some)) {
        Index::Finite(g.vertex_count() as u64)
    } else {
        Index::Infinite
    }
}

/// Stallings graph of `⟨W⁺_j⟩ ≤ F_n`.
pub fn block_subgroup(alphabet: &BlockAlphabet) -> SubgroupGraph {
    stallings_fold(&alphabet.block_words(), alphabet.base_rank())
}

/// `source = rep · φ(blocks)` with `rep` positive and shorter than `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub rep: Word,
    /// Signed word over the block alphabet.
    pub blocks: Word,
    pub source: Word,
}

impl Decomposition {
    pub fn reconstruct(&self, alphabet: &BlockAlphabet) -> Word {
        let body = block_decode(&self.blocks, alphabet).expect("blocks over the alphabet");
        free_reduce(&self.rep.concat(&body))
    }

    /// Checks every invariant of the decomposition.
    pub fn verify(&self, alphabet: &BlockAlphabet) -> bool {
        self.rep.len() < alphabet.block_len()
            && self.rep.is_positive()
            && self.reconstruct(alphabet) == free_reduce(&self.source)
    }
}

/// Rewrites `w` as a transversal element times a product of blocks and
/// inverse blocks.
///
/// The reduced word is split into maximal runs of positive and negative
/// letters and processed right to left. A positive run `a` (with any padding
/// carried in from its right) gets a prefix `x` of generator-1 letters so that
/// `x a` has length divisible by `j`; `x⁻¹` is carried into the negative run
/// to the left. A negative run `A` gets `y⁻¹` in front so that `y⁻¹ A x⁻¹`
/// is divisible by `j`, and `y` is carried left. Padding is empty when the
/// length is already divisible. What remains after the leftmost run is a
/// positive word; its first `len mod j` letters are the representative.
pub fn transversal_decompose(w: &Word, alphabet: &BlockAlphabet) -> Decomposition {
    let n = alphabet.base_rank();
    let j = alphabet.block_len();
    assert_eq!(w.rank(), n, "word rank does not match the block alphabet");
    let reduced = free_reduce(w);
    let one = Letter::generator(1);
    let runs: Vec<&[Letter]> = reduced.letters().chunk_by(|a, b| a.is_positive() == b.is_positive()).collect();

    // block-letter segments, collected right to left
    let mut segments: Vec<Vec<Letter>> = Vec::with_capacity(runs.len());
    let mut carry: Vec<Letter> = Vec::new();
    let mut rep = Word::empty(n);

    for (position, run) in runs.iter().enumerate().rev() {
        let mut chunk: Vec<Letter> = run.to_vec();
        chunk.append(&mut carry);
        let pad = (j - chunk.len() % j) % j;
        if run[0].is_positive() {
            if position == 0 {
                let split = chunk.len() % j;
                rep = Word::from_letters(n, chunk[..split].to_vec());
                segments.push(encode_letters(n, &chunk[split..], alphabet));
            } else {
                let mut padded = vec![one; pad];
                padded.extend_from_slice(&chunk);
                segments.push(encode_letters(n, &padded, alphabet));
                carry = vec![one.inverse(); pad];
            }
        } else {
            let mut padded = vec![one.inverse(); pad];
            padded.extend_from_slice(&chunk);
            let positive = Word::from_letters(n, padded).inverse();
            let encoded = encode_letters(n, positive.letters(), alphabet);
            segments.push(encoded.iter().rev().map(|b| b.inverse()).collect());
            carry = vec![one; pad];
            if position == 0 {
                rep = Word::from_letters(n, std::mem::take(&mut carry));
            }
        }
    }

    let blocks = segments.into_iter().rev().flatten().collect();
    Decomposition { rep, blocks: Word::from_letters(alphabet.size(), blocks), source: w.clone() }
}

fn encode_letters(n: u32, letters: &[Letter], alphabet: &BlockAlphabet) -> Vec<Letter> {
    let word = Word::from_letters(n, letters.to_vec());
    block_encode(&word, alphabet).expect("padded runs are positive with length divisible by j").letters().to_vec()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditFailure {
    pub word: Word,
    pub reason: String,
}

/// Outcome of the exhaustive transversal check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaAudit {
    pub n: u32,
    pub j: usize,
    pub max_len: usize,
    pub words_checked: u64,
    pub index: Index,
    pub failures: Vec<AuditFailure>,
}

impl LemmaAudit {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.index.is_finite()
    }
}

impl fmt::Display for LemmaAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n={} j={} max_len={} words={} index={} failures={}",
            self.n,
            self.j,
            self.max_len,
            self.words_checked,
            self.index,
            self.failures.len()
        )?;
        for failure in &self.failures {
            writeln!(f, "counterexample {} : {}", failure.word, failure.reason)?;
        }
        Ok(())
    }
}

/// Decomposes every reduced word of length `1..=max_len` and confirms each
/// piece independently against the Stallings graph of `⟨W⁺_j⟩`.
pub fn lemma_audit(n: u32, j: usize, max_len: usize) -> Result<LemmaAudit, crate::regroup::RegroupError> {
    let alphabet = BlockAlphabet::new(n, j)?;
    let graph = block_subgroup(&alphabet);
    let mut failures = Vec::new();
    let mut words_checked = 0;
    for len in 1..=max_len {
        for w in enumerate_words(n, len, WordFilter::Reduced) {
            words_checked += 1;
            let dec = transversal_decompose(&w, &alphabet);
            let mut fail = |reason: &str| failures.push(AuditFailure { word: w.clone(), reason: reason.into() });
            if dec.rep.len() >= j {
                fail("representative not shorter than j");
            }
            if !dec.rep.is_positive() {
                fail("representative not positive");
            }
            if dec.reconstruct(&alphabet) != w {
                fail("reconstruction differs from the word");
            }
            let body = block_decode(&dec.blocks, &alphabet).expect("blocks over the alphabet");
            if !membership(&graph, &body) {
                fail("block part not in the subgroup");
            }
            if membership(&graph, &w) != dec.rep.is_empty() {
                fail("membership disagrees with empty representative");
            }
        }
    }
    Ok(LemmaAudit { n, j, max_len, words_checked, index: index(&graph), failures })
}
