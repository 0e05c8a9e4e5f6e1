#![allow(dead_code)]

use std::path::PathBuf;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use wordshard::RawDocument;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn two_docs() -> Vec<RawDocument> {
    vec![
        RawDocument::new("doc1", "I want to test MapReduce"),
        RawDocument::new("doc2", "MapReduce is a cool algorithm to test."),
    ]
}

/// `size` distinct lowercase words of 1..=8 letters.
pub fn vocabulary(rng: &mut impl Rng, size: usize) -> Vec<String> {
    let mut seen = std::collections::BTreeSet::new();
    while seen.len() < size {
        let len = rng.gen_range(1..=8);
        let w: String = (0..len)
            .map(|_| rng.gen_range(b'a'..=b'z') as char)
            .collect();
        seen.insert(w);
    }
    let mut v: Vec<String> = seen.into_iter().collect();
    v.shuffle(rng);
    v
}

/// Random corpus. Even seeds draw words uniformly, odd seeds from a Zipf-like
/// law so a few words dominate. Some tokens get capitals or punctuation.
pub fn random_corpus(
    seed: u64,
    max_docs: usize,
    max_words: usize,
    vocab: usize,
) -> Vec<RawDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = vocabulary(&mut rng, vocab);
    let weights: Vec<f64> = if seed.is_multiple_of(2) {
        vec![1.0; vocab]
    } else {
        (1..=vocab).map(|r| 1.0 / r as f64).collect()
    };
    let pick = WeightedIndex::new(&weights).unwrap();
    let n_docs = rng.gen_range(1..=max_docs);
    (0..n_docs)
        .map(|d| {
            let n_words = rng.gen_range(0..=max_words);
            let mut text = String::new();
            for _ in 0..n_words {
                let w = &words[pick.sample(&mut rng)];
                match rng.gen_range(0..20) {
                    0 => text.push_str(&w.to_uppercase()),
                    1 => {
                        text.push_str(w);
                        text.push(',');
                    }
                    2 => {
                        text.push('"');
                        text.push_str(w);
                        text.push_str(".\"");
                    }
                    _ => text.push_str(w),
                }
                text.push(if rng.gen_range(0..12) == 0 { '\n' } else { ' ' });
            }
            RawDocument::new(format!("doc{d:04}"), text)
        })
        .collect()
}
