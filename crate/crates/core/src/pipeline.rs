//! End-to-end word count: map, sort, plan and encode, exchange, reduce,
//! repair. Each stage runs on every worker concurrently and ends at a
//! barrier; stage durations are taken from the coordinator's clock.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::reduce::{boundary_repair, merge_counts, reduce_sorted, CountMap, ShardedCounts};
use crate::shuffle::{
    exchange_prepared, plan_partition, plan_partitions_global, prepare_shard, ChannelTransport,
    ExchangeError, PlanError, ShardPlan, Transport,
};
use crate::text::{sort_words, tokenize, RawDocument, WordList};
use crate::workers;

/// Nanosecond wall-clock per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StageTimings {
    pub map_ns: u64,
    pub sort_ns: u64,
    pub encode_ns: u64,
    pub exchange_ns: u64,
    pub reduce_ns: u64,
    pub repair_ns: u64,
    pub total_ns: u64,
}

impl StageTimings {
    pub fn stages(&self) -> [(&'static str, u64); 6] {
        [
            ("map", self.map_ns),
            ("sort", self.sort_ns),
            ("encode", self.encode_ns),
            ("exchange", self.exchange_ns),
            ("reduce", self.reduce_ns),
            ("repair", self.repair_ns),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub counts: CountMap,
    /// Shards after boundary repair.
    pub shards: ShardedCounts,
    /// Shards as reduced, before repair.
    pub unrepaired: ShardedCounts,
    pub timings: StageTimings,
    pub n_workers: usize,
}

/// How each worker's sorted list is cut before the exchange.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PartitionStrategy {
    /// Equal rank ranges of the pooled order; at most `n-1` split words.
    #[default]
    GlobalRank,
    /// Each worker cuts its own list independently.
    LocalQuantile,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("partition stage: {0}")]
    Plan(#[from] PlanError),
    #[error("encode stage: {0}")]
    Encode(ExchangeError),
    #[error("exchange stage: {0}")]
    Exchange(ExchangeError),
}

struct Stopwatch {
    last: Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Self {
            last: Instant::now(),
        }
    }

    fn lap(&mut self) -> u64 {
        let now = Instant::now();
        let ns = (now - self.last).as_nanos() as u64;
        self.last = now;
        ns
    }
}

/// Runs the sharded pipeline with `n_workers` workers over an in-process
/// transport, using the global-rank partition.
pub fn run_wordcount(corpus: &[RawDocument], n_workers: usize) -> Result<RunResult, PipelineError> {
    if n_workers == 0 {
        return Err(PipelineError::NoWorkers);
    }
    let transport = ChannelTransport::new(n_workers);
    run_wordcount_with(corpus, n_workers, PartitionStrategy::default(), &transport)
}

/// Documents go to workers round-robin by index.
pub fn run_wordcount_with(
    corpus: &[RawDocument],
    n_workers: usize,
    strategy: PartitionStrategy,
    transport: &dyn Transport,
) -> Result<RunResult, PipelineError> {
    if n_workers == 0 {
        return Err(PipelineError::NoWorkers);
    }
    let started = Instant::now();
    if corpus.is_empty() {
        let empty = ShardedCounts::new(vec![CountMap::new(); n_workers]);
        return Ok(RunResult {
            counts: CountMap::new(),
            shards: empty.clone(),
            unrepaired: empty,
            timings: StageTimings {
                total_ns: started.elapsed().as_nanos() as u64,
                ..StageTimings::default()
            },
            n_workers,
        });
    }

    let mut t = StageTimings::default();
    let mut clock = Stopwatch::start();

    let mapped: Vec<WordList> = workers::run_indexed(n_workers, |w| {
        let mut list = WordList::default();
        for doc in corpus.iter().skip(w).step_by(n_workers) {
            list.extend(tokenize(doc));
        }
        list
    });
    t.map_ns = clock.lap();

    let sorted: Vec<WordList> = workers::run_owned(mapped, |_, list| sort_words(list));
    t.sort_ns = clock.lap();

    let plans: Vec<ShardPlan> = match strategy {
        PartitionStrategy::GlobalRank => plan_partitions_global(&sorted)?,
        PartitionStrategy::LocalQuantile => sorted
            .iter()
            .enumerate()
            .map(|(w, list)| plan_partition(list, w, n_workers))
            .collect::<Result<_, _>>()?,
    };
    let prepared = workers::run_owned(plans.into_iter().zip(sorted).collect(), |_, (p, l)| {
        prepare_shard(p, l)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(PipelineError::Encode)?;
    t.encode_ns = clock.lap();

    let held = exchange_prepared(prepared, transport).map_err(PipelineError::Exchange)?;
    t.exchange_ns = clock.lap();

    let reduced: Vec<CountMap> = workers::run_indexed(n_workers, |w| reduce_sorted(&held[w]));
    t.reduce_ns = clock.lap();

    let unrepaired = ShardedCounts::new(reduced);
    let shards = boundary_repair(unrepaired.clone());
    let counts = merge_counts(&shards.per_worker);
    t.repair_ns = clock.lap();
    t.total_ns = started.elapsed().as_nanos() as u64;

    Ok(RunResult {
        counts,
        shards,
        unrepaired,
        timings: t,
        n_workers,
    })
}

/// Single-threaded tokenize-and-count over the whole corpus.
pub fn serial_wordcount(corpus: &[RawDocument]) -> CountMap {
    let mut counts = CountMap::new();
    for doc in corpus {
        for w in tokenize(doc).into_words() {
            counts.add(w, 1);
        }
    }
    counts
}
