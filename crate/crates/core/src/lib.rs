//! Word counting by sorted range shuffle, plus a deterministic blocked
//! numeric map-reduce and corpus comparison tools.
//!
//! The word-count path runs in stages over `n` workers:
//!
//! 1. [`text::tokenize`] each document (documents are dealt round-robin),
//! 2. [`text::sort_words`] per worker,
//! 3. cut each sorted list into `n` alphabetical chunks ([`shuffle`]) and
//!    encode the outgoing ones as [`wire`] frames,
//! 4. exchange frames so worker `j` holds the `j`-th alphabetical slice,
//! 5. [`reduce::reduce_sorted`] per worker,
//! 6. [`reduce::boundary_repair`] the few words split across workers.
//!
//! [`pipeline::run_wordcount`] wires these together with per-stage timing.

pub mod analysis;
pub mod bench;
pub mod engine;
pub mod pipeline;
pub mod reduce;
pub mod shuffle;
pub mod text;
pub mod wire;

mod workers;

pub use analysis::{
    distinctive_words, ingest_directory, top_k, Corpus, DistinctivenessReport, FrequencyTable,
};
pub use engine::{
    alternating_harmonic, map_reduce_blocked, map_reduce_serial, BlockConfig, MapSpec,
};
pub use pipeline::{run_wordcount, serial_wordcount, RunResult, StageTimings};
pub use reduce::{boundary_repair, merge_counts, reduce_sorted, CountMap, ShardedCounts};
pub use shuffle::{exchange, plan_partition, plan_partitions_global, ShardPlan};
pub use text::{normalize_word, sort_words, tokenize, RawDocument, WordList, WordToken};
pub use wire::{decode_message, encode_message, WireError, WireMessage};
