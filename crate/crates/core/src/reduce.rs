//! Run-length reduction of sorted shards and repair of words split across
//! shard boundaries.

use std::collections::btree_map::{self, BTreeMap};

use itertools::Itertools;
use serde::Serialize;

use crate::text::{WordList, WordToken};

/// Word → occurrence count. Every stored count is at least 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CountMap {
    entries: BTreeMap<WordToken, u64>,
}

impl CountMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `n` occurrences of `word`. Adding zero is a no-op.
    pub fn add(&mut self, word: WordToken, n: u64) {
        if n > 0 {
            *self.entries.entry(word).or_insert(0) += n;
        }
    }

    pub fn get(&self, word: &str) -> u64 {
        self.entries.get(word).copied().unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn remove(&mut self, word: &str) -> Option<u64> {
        self.entries.remove(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn first_word(&self) -> Option<&WordToken> {
        self.entries.keys().next()
    }

    pub fn last_word(&self) -> Option<&WordToken> {
        self.entries.keys().next_back()
    }

    /// Entries in canonical word order.
    pub fn iter(&self) -> btree_map::Iter<'_, WordToken, u64> {
        self.entries.iter()
    }

    pub fn words(&self) -> impl Iterator<Item = &WordToken> {
        self.entries.keys()
    }

    /// Builds a map from `(word, count)` pairs. Words that do not normalize
    /// to themselves are skipped.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, u64)]) -> Self {
        let mut m = Self::new();
        for (w, c) in pairs {
            if let Some(tok) = WordToken::new(w.as_ref()) {
                m.add(tok, *c);
            }
        }
        m
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&WordToken, u64) -> bool) {
        self.entries.retain(|w, c| keep(w, *c));
    }
}

impl<'a> IntoIterator for &'a CountMap {
    type Item = (&'a WordToken, &'a u64);
    type IntoIter = btree_map::Iter<'a, WordToken, u64>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

impl IntoIterator for CountMap {
    type Item = (WordToken, u64);
    type IntoIter = btree_map::IntoIter<WordToken, u64>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.into_iter()
    }
}

/// One count map per worker, in worker order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ShardedCounts {
    pub per_worker: Vec<CountMap>,
}

impl ShardedCounts {
    pub fn new(per_worker: Vec<CountMap>) -> Self {
        Self { per_worker }
    }

    pub fn total(&self) -> u64 {
        self.per_worker.iter().map(CountMap::total).sum()
    }

    pub fn n_workers(&self) -> usize {
        self.per_worker.len()
    }

    /// True when, skipping empty shards, each shard's last word is no later
    /// than the next shard's first word.
    pub fn is_contiguous(&self) -> bool {
        self.per_worker
            .iter()
            .filter_map(|m| Some((m.first_word()?, m.last_word()?)))
            .tuple_windows()
            .all(|((_, prev_last), (next_first, _))| prev_last <= next_first)
    }

    /// Distinct words held by two or more shards.
    pub fn straddling_words(&self) -> Vec<WordToken> {
        let mut holders: BTreeMap<&WordToken, usize> = BTreeMap::new();
        for m in &self.per_worker {
            for w in m.words() {
                *holders.entry(w).or_insert(0) += 1;
            }
        }
        holders
            .into_iter()
            .filter(|&(_, h)| h >= 2)
            .map(|(w, _)| w.clone())
            .collect()
    }
}

/// Counts each run of equal words. Input that is not sorted still counts
/// correctly, runs are just shorter.
pub fn reduce_sorted(sorted: &WordList) -> CountMap {
    let mut counts = CountMap::new();
    for (n, w) in sorted.iter().dedup_with_count() {
        counts.add(w.clone(), n as u64);
    }
    counts
}

/// Moves every word held by more than one shard into its lowest-indexed
/// holder.
///
/// For contiguous shards only the last word of a shard can reappear at the
/// front of later shards, so just those keys are inspected. Non-contiguous
/// input falls back to a full scan.
pub fn boundary_repair(mut sharded: ShardedCounts) -> ShardedCounts {
    if sharded.per_worker.len() <= 1 {
        return sharded;
    }
    if !sharded.is_contiguous() {
        return full_repair(sharded);
    }
    let shards = &mut sharded.per_worker;
    for owner in 0..shards.len() {
        let Some(word) = shards[owner].last_word().cloned() else {
            continue;
        };
        let mut moved = 0;
        for later in shards.iter_mut().skip(owner + 1) {
            if later.is_empty() {
                continue;
            }
            match later.remove(word.as_str()) {
                Some(c) => moved += c,
                None => break,
            }
            if !later.is_empty() {
                break;
            }
        }
        shards[owner].add(word, moved);
    }
    sharded
}

fn full_repair(mut sharded: ShardedCounts) -> ShardedCounts {
    let straddling = sharded.straddling_words();
    for word in straddling {
        let mut owner = None;
        let mut moved = 0;
        for (i, m) in sharded.per_worker.iter_mut().enumerate() {
            if !m.contains(word.as_str()) {
                continue;
            }
            if owner.is_none() {
                owner = Some(i);
            } else {
                moved += m.remove(word.as_str()).unwrap_or(0);
            }
        }
        if let Some(i) = owner {
            sharded.per_worker[i].add(word, moved);
        }
    }
    sharded
}

/// Pointwise sum.
pub fn merge_counts<'a, I>(maps: I) -> CountMap
where
    I: IntoIterator<Item = &'a CountMap>,
{
    let mut out = CountMap::new();
    for m in maps {
        for (w, c) in m {
            out.add(w.clone(), *c);
        }
    }
    out
}
