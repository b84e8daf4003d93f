mod common;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rglab_core::freegroup::{
    count_cyclically_reduced, count_positive, count_reduced, cyclic_reduce, enumerate_words, free_reduce,
    is_cyclically_reduced, WordFilter,
};
use rglab_core::Word;

fn arb_word(max_rank: u32, max_len: usize) -> impl Strategy<Value = Word> {
    (1..=max_rank).prop_flat_map(move |n| {
        prop::collection::vec((1..=n as i32, any::<bool>()), 0..=max_len).prop_map(move |v| {
            Word::new(n, v.into_iter().map(|(g, neg)| if neg { -g } else { g })).unwrap()
        })
    })
}

#[test]
fn reduction_matches_repeated_deletion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=3);
        let len = rng.random_range(0..=24);
        let values: Vec<i32> = (0..len)
            .map(|_| {
                let g = rng.random_range(1..=n as i32);
                if rng.random_bool(0.5) { g } else { -g }
            })
            .collect();
        let w = Word::new(n, values.clone()).unwrap();
        assert_eq!(free_reduce(&w).values(), common::naive_reduce(&values), "{w}");
    }
}

proptest! {
    #[test]
    fn reduction_is_idempotent(w in arb_word(4, 30)) {
        let once = free_reduce(&w);
        prop_assert!(once.is_reduced());
        prop_assert_eq!(free_reduce(&once), once);
    }

    #[test]
    fn inverse_cancels(w in arb_word(4, 30)) {
        prop_assert!(free_reduce(&w.concat(&w.inverse())).is_empty());
    }

    #[test]
    fn cyclic_reduction_is_a_conjugate(w in arb_word(3, 20)) {
        let c = cyclic_reduce(&w);
        prop_assert!(is_cyclically_reduced(&c.word));
        let rebuilt = c.conjugator.concat(&c.word).concat(&c.conjugator.inverse());
        prop_assert_eq!(free_reduce(&rebuilt), free_reduce(&w));
    }

    #[test]
    fn cyclic_reduction_is_shortest_cyclic_form(w in arb_word(3, 16)) {
        // the shortest reduced cyclic permutation of the reduced word, iterated
        let mut current = free_reduce(&w).values();
        loop {
            let shortest = (0..current.len().max(1))
                .map(|s| {
                    let rotated: Vec<i32> = current[s..].iter().chain(&current[..s]).copied().collect();
                    common::naive_reduce(&rotated)
                })
                .min_by_key(|v| v.len())
                .unwrap_or_default();
            if shortest.len() == current.len() {
                break;
            }
            current = shortest;
        }
        prop_assert_eq!(cyclic_reduce(&w).word.len(), current.len());
    }

    #[test]
    fn parse_display_round_trip(w in arb_word(5, 12)) {
        prop_assert_eq!(Word::parse(w.rank(), &w.to_string()).unwrap(), w);
    }
}

#[test]
fn counts_match_brute_force() {
    for n in 1..=3u32 {
        for len in 1..=8usize {
            let tuples = common::all_tuples(n, len);
            let reduced = tuples.iter().filter(|t| t.windows(2).all(|p| p[0] != -p[1])).count();
            let cyclic = tuples.iter().filter(|t| common::naive_is_cyclically_reduced(t)).count();
            assert_eq!(count_reduced(n, len), BigUint::from(reduced), "reduced n={n} L={len}");
            assert_eq!(count_cyclically_reduced(n, len), BigUint::from(cyclic), "cyclic n={n} L={len}");
            assert_eq!(count_positive(n, len), BigUint::from(n).pow(len as u32));
            let listed = enumerate_words(n, len, WordFilter::CyclicallyReduced).count();
            assert_eq!(listed, cyclic, "enumeration n={n} L={len}");
        }
    }
}

#[test]
fn cyclic_count_matches_closed_form() {
    for n in 1..=12u32 {
        for len in 1..=40usize {
            // (2n-1)^L + 1 + (n-1)(1 + (-1)^L)
            let mut expected = BigUint::from(2 * n - 1).pow(len as u32) + 1u32;
            if len % 2 == 0 {
                expected += 2 * (n - 1);
            }
            assert_eq!(count_cyclically_reduced(n, len), expected, "n={n} L={len}");
        }
    }
}

#[test]
fn enumeration_is_sorted_and_filtered() {
    for filter in [WordFilter::All, WordFilter::Reduced, WordFilter::CyclicallyReduced, WordFilter::Positive] {
        let words: Vec<Word> = enumerate_words(2, 4, filter).collect();
        assert!(words.windows(2).all(|p| p[0] < p[1]), "{filter:?}");
        for w in &words {
            match filter {
                WordFilter::All => {}
                WordFilter::Reduced => assert!(w.is_reduced()),
                WordFilter::CyclicallyReduced => assert!(w.is_cyclically_reduced()),
                WordFilter::Positive => assert!(w.is_positive()),
            }
        }
    }
}
