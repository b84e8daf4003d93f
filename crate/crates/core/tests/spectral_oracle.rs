mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rglab_core::freegroup::{enumerate_words, WordFilter};
use rglab_core::models::{rng_from_seed, sample_presentation, ModelParams};
use rglab_core::spectral::{link_graph, normalized_laplacian_spectrum, zuk_certify, Multigraph, ZukVerdict, ZUK_THRESHOLD};
use rglab_core::{Letter, Presentation, Word};

fn random_multigraph(rng: &mut ChaCha8Rng, vertices: usize, edges: usize) -> Multigraph {
    let mut g = Multigraph::new(vertices);
    for _ in 0..edges {
        g.add_edge(rng.random_range(0..vertices), rng.random_range(0..vertices));
    }
    g
}

fn assert_close(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
    }
}

#[test]
fn eigenvalues_match_sturm_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..40 {
        let edges = rng.random_range(20..120);
        let g = random_multigraph(&mut rng, 30, edges);
        let spectrum = normalized_laplacian_spectrum(&g).unwrap();
        let oracle = common::sturm_eigenvalues(&g.normalized_laplacian(), 1e-12);
        assert_close(&spectrum.eigenvalues, &oracle, 1e-6);
    }
}

#[test]
fn complete_bipartite_spectrum() {
    for n in 2..=6usize {
        let g = Multigraph::from_edges(2 * n, (0..n).flat_map(|a| (n..2 * n).map(move |b| (a, b))));
        let s = normalized_laplacian_spectrum(&g).unwrap();
        let mut want = vec![0.0];
        want.extend(std::iter::repeat_n(1.0, 2 * n - 2));
        want.push(2.0);
        assert_close(&s.eigenvalues, &want, 1e-9);
    }
}

#[test]
fn small_closed_forms() {
    let path = Multigraph::from_edges(3, [(0, 1), (1, 2)]);
    assert_close(&normalized_laplacian_spectrum(&path).unwrap().eigenvalues, &[0.0, 1.0, 2.0], 1e-9);

    for m in 3..=9usize {
        let complete = Multigraph::from_edges(m, (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))));
        let mut want = vec![0.0];
        want.extend(std::iter::repeat_n(m as f64 / (m as f64 - 1.0), m - 1));
        assert_close(&normalized_laplacian_spectrum(&complete).unwrap().eigenvalues, &want, 1e-9);

        let cycle = Multigraph::from_edges(m, (0..m).map(|a| (a, (a + 1) % m)));
        let mut want: Vec<f64> =
            (0..m).map(|i| 1.0 - (2.0 * std::f64::consts::PI * i as f64 / m as f64).cos()).collect();
        want.sort_by(f64::total_cmp);
        assert_close(&normalized_laplacian_spectrum(&cycle).unwrap().eigenvalues, &want, 1e-9);
    }

    // a doubled edge has the same normalized spectrum as a single one
    let doubled = Multigraph::from_edges(2, [(0, 1), (0, 1)]);
    assert_close(&normalized_laplacian_spectrum(&doubled).unwrap().eigenvalues, &[0.0, 2.0], 1e-9);
}

#[test]
fn spectrum_invariants_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..200 {
        let vertices = rng.random_range(2..25);
        let edges = rng.random_range(1..60);
        let g = random_multigraph(&mut rng, vertices, edges);
        let s = normalized_laplacian_spectrum(&g).unwrap();
        // trace is the vertex count, less 2 loops(v) / deg(v) per looped vertex
        let degrees = g.degrees();
        let mut trace = s.vertices as f64;
        for &(a, b) in g.edges() {
            if a == b {
                trace -= 2.0 / degrees[a];
            }
        }
        let sum: f64 = s.eigenvalues.iter().sum();
        assert!((sum - trace).abs() < 1e-8, "trace {sum} vs {trace}");
        assert!(s.eigenvalues[0].abs() < 1e-8);
        assert!(s.eigenvalues.iter().all(|&v| (-1e-9..=2.0 + 1e-9).contains(&v)));
        assert!(s.eigenvalues.windows(2).all(|p| p[0] <= p[1]));
        assert_eq!(s.multiplicity_of_zero, g.components(), "zero multiplicity counts components");
        assert_eq!(s.connected, s.multiplicity_of_zero == 1);
        assert_eq!(s.vertices + s.isolated, vertices);
    }
}

#[test]
fn bipartite_graphs_reach_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..50 {
        let (left, right) = (rng.random_range(1..8), rng.random_range(1..8));
        let mut g = Multigraph::new(left + right);
        for _ in 0..rng.random_range(1..30) {
            g.add_edge(rng.random_range(0..left), left + rng.random_range(0..right));
        }
        let s = normalized_laplacian_spectrum(&g).unwrap();
        assert!((s.max_eigenvalue() - 2.0).abs() < 1e-9);
    }
}

#[test]
fn link_graph_of_full_triangle() {
    for n in 2..=4u32 {
        let relators: Vec<Word> = enumerate_words(n, 3, WordFilter::Positive).collect();
        let p = Presentation::new(n, relators, None).unwrap();
        let link = link_graph(&p).unwrap();
        assert_eq!(link.edges().len(), 3 * (n as usize).pow(3));
        // each pair {s_a^-1, s_b} occurs 3n times: n choices of the free letter, 3 corners
        for a in 1..=n {
            for b in 1..=n {
                let pair = (Letter::generator(a).inverse(), Letter::generator(b));
                assert_eq!(link.multiplicity(pair.0, pair.1), 3 * n as usize);
            }
        }
        let outcome = zuk_certify(&p, ZUK_THRESHOLD).unwrap();
        assert_eq!(outcome.verdict, ZukVerdict::Certified);
        assert!((outcome.lambda1() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn link_graph_uses_inverse_then_next() {
    let p = Presentation::new(2, vec![Word::new(2, [1, -2, 1]).unwrap()], None).unwrap();
    let link = link_graph(&p).unwrap();
    let l = |v| Letter::new(v).unwrap();
    // corners: (1^-1, -2), (-2^-1, 1), (1^-1, 1)
    assert_eq!(link.multiplicity(l(-1), l(-2)), 1);
    assert_eq!(link.multiplicity(l(2), l(1)), 1);
    assert_eq!(link.multiplicity(l(-1), l(1)), 1);
    assert_eq!(link.edges().len(), 3);
}

#[test]
fn degenerate_presentations_are_inconclusive() {
    let empty = Presentation::new(2, vec![], None).unwrap();
    assert_eq!(zuk_certify(&empty, ZUK_THRESHOLD).unwrap().verdict, ZukVerdict::Inconclusive);
    // only s1 and its inverse are covered
    let partial = Presentation::new(2, vec![Word::new(2, [1, 1, 1]).unwrap()], None).unwrap();
    let outcome = zuk_certify(&partial, ZUK_THRESHOLD).unwrap();
    assert_eq!(outcome.verdict, ZukVerdict::Inconclusive);
    let wrong = Presentation::new(2, vec![Word::new(2, [1, 2]).unwrap()], None).unwrap();
    assert!(zuk_certify(&wrong, ZUK_THRESHOLD).is_err());
}

#[test]
fn gap_grows_with_density() {
    // mean λ₁ over seeds is nondecreasing along a density ladder for M⁺₃(30, d)
    let mut previous = f64::NEG_INFINITY;
    for d in [0.3, 0.4, 0.5, 0.6] {
        let mut total = 0.0;
        for seed in 0..8 {
            let params = ModelParams::new(30, 3, d, true, seed).unwrap();
            let p = sample_presentation(&params, &mut rng_from_seed(seed)).unwrap();
            total += zuk_certify(&p, ZUK_THRESHOLD).unwrap().lambda1();
        }
        let mean = total / 8.0;
        assert!(mean >= previous, "d={d}: {mean} < {previous}");
        previous = mean;
    }
}

proptest! {
    #[test]
    fn relabeling_preserves_spectrum(edges in prop::collection::vec((0usize..12, 0usize..12), 1..40), shift in 0usize..12) {
        let g = Multigraph::from_edges(12, edges.iter().copied());
        let h = Multigraph::from_edges(12, edges.iter().map(|&(a, b)| ((a + shift) % 12, (b + shift) % 12)));
        let (sg, sh) = (normalized_laplacian_spectrum(&g).unwrap(), normalized_laplacian_spectrum(&h).unwrap());
        for (a, b) in sg.eigenvalues.iter().zip(&sh.eigenvalues) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
