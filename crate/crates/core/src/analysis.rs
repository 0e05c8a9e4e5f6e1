//! Labeled corpora, frequency tables and distinctive-word ranking.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::reduce::CountMap;
use crate::text::{normalize_word, RawDocument, WordToken};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: not a readable directory: {source}", path.display())]
    Directory { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub label: String,
    pub documents: Vec<RawDocument>,
}

const TEXT_EXTENSIONS: [&str; 2] = ["txt", "text"];

fn is_text_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| TEXT_EXTENSIONS.iter().any(|t| e.eq_ignore_ascii_case(t)))
}

/// Reads every `.txt`/`.text` regular file in `path` (not recursive) as one
/// document, ordered by file name. Invalid UTF-8 is replaced, not rejected.
pub fn ingest_directory(path: &Path, label: &str) -> Result<Corpus, IngestError> {
    let dir_err = |source| IngestError::Directory {
        path: path.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(dir_err)? {
        let entry = entry.map_err(dir_err)?;
        let p = entry.path();
        let is_file = entry
            .file_type()
            .map_err(|source| IngestError::File {
                path: p.clone(),
                source,
            })?
            .is_file();
        if is_file && is_text_file(&p) {
            files.push(p);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    let documents = files
        .into_iter()
        .map(|p| {
            let bytes = fs::read(&p).map_err(|source| IngestError::File {
                path: p.clone(),
                source,
            })?;
            let id = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(RawDocument::from_bytes(id, &bytes))
        })
        .collect::<Result<Vec<_>, IngestError>>()?;
    Ok(Corpus {
        label: label.to_owned(),
        documents,
    })
}

/// Reads a whitespace-separated stop-word list, normalizing each entry.
pub fn load_stopwords(path: &Path) -> io::Result<HashSet<WordToken>> {
    let text = String::from_utf8_lossy(&fs::read(path)?).into_owned();
    Ok(text.split_whitespace().filter_map(normalize_word).collect())
}

pub fn remove_stopwords(counts: &mut CountMap, stop: &HashSet<WordToken>) {
    if !stop.is_empty() {
        counts.retain(|w, _| !stop.contains(w));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyRow {
    pub word: WordToken,
    pub count: u64,
    pub relfreq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub label: String,
    pub total_words: u64,
    pub rows: Vec<FrequencyRow>,
}

impl FrequencyTable {
    /// All words, count descending then word ascending.
    pub fn from_counts(label: &str, counts: &CountMap) -> Self {
        let total = counts.total();
        let mut rows: Vec<FrequencyRow> = counts
            .iter()
            .map(|(w, &c)| FrequencyRow {
                word: w.clone(),
                count: c,
                relfreq: c as f64 / total as f64,
            })
            .collect();
        // The map iterates in word order, so a stable sort on count suffices.
        rows.sort_by_key(|r| std::cmp::Reverse(r.count));
        Self {
            label: label.to_owned(),
            total_words: total,
            rows,
        }
    }

    /// `word<TAB>count<TAB>relfreq` per row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!("{}\t{}\t{}\n", r.word, r.count, r.relfreq));
        }
        out
    }
}

/// The `k` most frequent words. Relative frequencies stay relative to the
/// full corpus total.
pub fn top_k(counts: &CountMap, label: &str, k: usize) -> FrequencyTable {
    let mut table = FrequencyTable::from_counts(label, counts);
    table.rows.truncate(k);
    table
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinctRow {
    pub word: WordToken,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinctivenessReport {
    pub label: String,
    pub rows: Vec<DistinctRow>,
}

impl DistinctivenessReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!("{}\t{}\n", r.word, r.score));
        }
        out
    }
}

/// Scores every word in the union vocabulary `V` by
/// `ln((c_t + 1) / (T_t + V)) - ln((c_o + 1) / (T_o + V))`
/// and keeps the `k` highest, ties by word.
pub fn distinctive_words(
    label: &str,
    target: &CountMap,
    others: &CountMap,
    k: usize,
) -> DistinctivenessReport {
    let mut vocab: Vec<&WordToken> = target.words().chain(others.words()).collect();
    vocab.sort();
    vocab.dedup();
    let v = vocab.len() as f64;
    let t_target = target.total() as f64 + v;
    let t_others = others.total() as f64 + v;

    let mut rows: Vec<DistinctRow> = vocab
        .into_iter()
        .map(|w| {
            let a = (target.get(w.as_str()) as f64 + 1.0) / t_target;
            let b = (others.get(w.as_str()) as f64 + 1.0) / t_others;
            DistinctRow {
                word: w.clone(),
                score: a.ln() - b.ln(),
            }
        })
        .collect();
    rows.sort_by(|x, y| {
        y.score
            .total_cmp(&x.score)
            .then_with(|| x.word.cmp(&y.word))
    });
    rows.truncate(k);
    DistinctivenessReport {
        label: label.to_owned(),
        rows,
    }
}
