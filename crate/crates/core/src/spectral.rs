//! Link graphs of triangular presentations and the spectral-gap criterion.
//!
//! The link graph has one vertex per letter `±1..±n`. A relator `t₁t₂t₃`
//! contributes the three edges `{t₁⁻¹, t₂}`, `{t₂⁻¹, t₃}`, `{t₃⁻¹, t₁}`;
//! multiplicities are kept. If the link graph is connected, touches every
//! letter, and the second-smallest eigenvalue `λ₁` of its normalized
//! Laplacian `I - D^{-1/2} A D^{-1/2}` exceeds `1/2`, the group has
//! Property (T). Nothing is concluded otherwise.

use std::fmt;

use nalgebra::DMatrix;

use crate::freegroup::Letter;
use crate::models::Presentation;

/// Default spectral threshold on `λ₁`.
pub const ZUK_THRESHOLD: f64 = 0.5;

/// Slack above the threshold required before certifying.
pub const CERTIFICATION_MARGIN: f64 = 1e-6;

/// Eigenvalues below this count as zero.
const ZERO_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpectralError {
    #[error("link graphs need relators of length 3, found length {0}")]
    WrongRelatorLength(usize),
    #[error("graph has no edges")]
    EmptyGraph,
}

/// Undirected multigraph on `0..vertex_count`. Loops add 2 to the degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Multigraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Multigraph {
    pub fn new(vertex_count: usize) -> Self {
        Multigraph { vertex_count, edges: Vec::new() }
    }

    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Multigraph::new(vertex_count);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u < self.vertex_count && v < self.vertex_count, "edge endpoint out of range");
        self.edges.push((u, v));
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.vertex_count];
        for &(u, v) in &self.edges {
            deg[u] += 1.0;
            deg[v] += 1.0;
        }
        deg
    }

    /// Vertices with at least one incident edge, ascending.
    pub fn covered_vertices(&self) -> Vec<usize> {
        self.degrees().iter().enumerate().filter(|(_, &d)| d > 0.0).map(|(v, _)| v).collect()
    }

    /// Number of connected components among covered vertices.
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for &(u, v) in &self.edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a] = b;
            }
        }
        let covered = self.covered_vertices();
        let mut roots: Vec<usize> = covered.iter().map(|&v| find(&mut parent, v)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Dense normalized Laplacian restricted to the covered vertices (in
    /// ascending order), row-major.
    pub fn normalized_laplacian(&self) -> Vec<Vec<f64>> {
        let covered = self.covered_vertices();
        let mut position = vec![usize::MAX; self.vertex_count];
        for (i, &v) in covered.iter().enumerate() {
            position[v] = i;
        }
        let size = covered.len();
        let mut adjacency = vec![vec![0.0; size]; size];
        for &(u, v) in &self.edges {
            let (a, b) = (position[u], position[v]);
            if a == b {
                adjacency[a][a] += 2.0;
            } else {
                adjacency[a][b] += 1.0;
                adjacency[b][a] += 1.0;
            }
        }
        let scale: Vec<f64> = adjacency.iter().map(|row| 1.0 / row.iter().sum::<f64>().sqrt()).collect();
        (0..size)
            .map(|a| {
                (0..size)
                    .map(|b| {
                        let identity = if a == b { 1.0 } else { 0.0 };
                        identity - adjacency[a][b] * scale[a] * scale[b]
                    })
                    .collect()
            })
            .collect()
    }

    pub fn spectrum(&self) -> Result<Spectrum, SpectralError> {
        normalized_laplacian_spectrum(self)
    }
}

/// Normalized-Laplacian spectrum of the covered part of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Second-smallest eigenvalue (0 with fewer than two covered vertices).
    pub lambda1: f64,
    pub connected: bool,
    pub multiplicity_of_zero: usize,
    /// Covered vertices, i.e. the matrix size.
    pub vertices: usize,
    /// Vertices without edges, left out of the matrix.
    pub isolated: usize,
    pub edges: usize,
}

impl Spectrum {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }
}

pub fn normalized_laplacian_spectrum(g: &Multigraph) -> Result<Spectrum, SpectralError> {
    if g.edge_count() == 0 {
        return Err(SpectralError::EmptyGraph);
    }
    let rows = g.normalized_laplacian();
    let size = rows.len();
    let matrix = DMatrix::from_fn(size, size, |r, c| rows[r][c]);
    let mut eigenvalues: Vec<f64> = matrix.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    let multiplicity_of_zero = eigenvalues.iter().filter(|v| v.abs() < ZERO_TOLERANCE).count();
    Ok(Spectrum {
        lambda1: eigenvalues.get(1).copied().unwrap_or(0.0),
        connected: g.components() == 1,
        multiplicity_of_zero,
        vertices: size,
        isolated: g.vertex_count() - size,
        edges: g.edge_count(),
        eigenvalues,
    })
}

/// Link graph of a presentation with relators of length 3.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGraph {
    rank: u32,
    /// Unordered letter pairs, one per relator corner.
    edges: Vec<(Letter, Letter)>,
}

impl LinkGraph {
    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn edges(&self) -> &[(Letter, Letter)] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.rank as usize
    }

    /// Vertex `v` of the multigraph is the letter with ordinal `v`.
    pub fn to_multigraph(&self) -> Multigraph {
        Multigraph::from_edges(
            self.vertex_count(),
            self.edges.iter().map(|(a, b)| (a.ordinal(), b.ordinal())),
        )
    }

    /// Number of edges joining `a` and `b`.
    pub fn multiplicity(&self, a: Letter, b: Letter) -> usize {
        self.edges.iter().filter(|&&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)).count()
    }
}

pub fn link_graph(p: &Presentation) -> Result<LinkGraph, SpectralError> {
    if let Some(params) = p.params() {
        if params.k != 3 {
            return Err(SpectralError::WrongRelatorLength(params.k));
        }
    }
    let mut edges = Vec::with_capacity(3 * p.len());
    for r in p.relators() {
        let t = r.letters();
        if t.len() != 3 {
            return Err(SpectralError::WrongRelatorLength(t.len()));
        }
        for i in 0..3 {
            edges.push((t[i].inverse(), t[(i + 1) % 3]));
        }
    }
    Ok(LinkGraph { rank: p.rank(), edges })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZukVerdict {
    Certified,
    Inconclusive,
}

impl fmt::Display for ZukVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ZukVerdict::Certified => "certified",
            ZukVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZukOutcome {
    pub verdict: ZukVerdict,
    /// Absent when the link graph has no edges.
    pub spectrum: Option<Spectrum>,
    pub threshold: f64,
    pub vertices: usize,
    pub edges: usize,
}

impl ZukOutcome {
    pub fn lambda1(&self) -> f64 {
        self.spectrum.as_ref().map_or(0.0, |s| s.lambda1)
    }

    /// `certified|inconclusive lambda1=<v> vertices=<c> edges=<e>`, where
    /// `vertices` counts letters touched by the link graph.
    pub fn verdict_line(&self) -> String {
        let covered = self.spectrum.as_ref().map_or(0, |s| s.vertices);
        format!("{} lambda1={} vertices={} edges={}", self.verdict, self.lambda1(), covered, self.edges)
    }
}

/// Applies the spectral criterion to a triangular presentation.
pub fn zuk_certify(p: &Presentation, threshold: f64) -> Result<ZukOutcome, SpectralError> {
    let link = link_graph(p)?;
    let graph = link.to_multigraph();
    let spectrum = match normalized_laplacian_spectrum(&graph) {
        Ok(s) => Some(s),
        Err(SpectralError::EmptyGraph) => None,
        Err(e) => return Err(e),
    };
    let certified = spectrum
        .as_ref()
        .is_some_and(|s| s.isolated == 0 && s.connected && s.lambda1 > threshold + CERTIFICATION_MARGIN);
    Ok(ZukOutcome {
        verdict: if certified { ZukVerdict::Certified } else { ZukVerdict::Inconclusive },
        spectrum,
        threshold,
        vertices: link.vertex_count(),
        edges: graph.edge_count(),
    })
}
