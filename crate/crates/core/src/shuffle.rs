//! Alphabetical range partitioning and the worker-to-worker exchange.
//!
//! Every worker holds a sorted word list. A [`ShardPlan`] cuts that list
//! into `n` contiguous chunks; chunk `c` is destined for worker `c`, and the
//! worker keeps its own chunk. After the exchange worker `j` holds the
//! `j`-th alphabetical slice of the pooled words, except that copies of a
//! word sitting exactly on a cut may land on both sides of it.
//!
//! Two planners are provided:
//!
//! * [`plan_partition`] splits each worker's list on its own, keeping
//!   `floor(k/n)` words. Workers never look at each other's data, but their
//!   cuts need not line up, so many words can straddle workers.
//! * [`plan_partitions_global`] cuts the pooled order into `n` equal rank
//!   ranges (ties on equal words broken by worker index). Cuts line up, so
//!   at most one word straddles each of the `n - 1` boundaries. This is the
//!   pipeline default.

use std::time::Duration;

use crossbeam_channel::{Receiver, RecvTimeoutError, Sender};
use itertools::Itertools;
use thiserror::Error;

use crate::text::{WordList, WordToken};
use crate::wire::{decode_message, encode_tokens, WireError, WireMessage};
use crate::workers;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("worker id {worker_id} out of range for {n_workers} workers")]
    WorkerOutOfRange { worker_id: usize, n_workers: usize },
    #[error("word list for worker {0} is not sorted")]
    Unsorted(usize),
}

/// Cut points over one worker's sorted words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardPlan {
    worker_id: usize,
    n_workers: usize,
    local_count: usize,
    boundaries: Vec<usize>,
}

impl ShardPlan {
    fn from_sizes(worker_id: usize, sizes: &[usize]) -> Self {
        let mut boundaries = Vec::with_capacity(sizes.len() + 1);
        boundaries.push(0);
        let mut acc = 0;
        for s in sizes {
            acc += s;
            boundaries.push(acc);
        }
        Self {
            worker_id,
            n_workers: sizes.len(),
            local_count: acc,
            boundaries,
        }
    }

    pub fn worker_id(&self) -> usize {
        self.worker_id
    }

    pub fn n_workers(&self) -> usize {
        self.n_workers
    }

    pub fn local_count(&self) -> usize {
        self.local_count
    }

    /// `n + 1` monotone cut indices from `0` to `local_count`.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn chunk(&self, dest: usize) -> std::ops::Range<usize> {
        self.boundaries[dest]..self.boundaries[dest + 1]
    }

    pub fn kept_range(&self) -> std::ops::Range<usize> {
        self.chunk(self.worker_id)
    }

    pub fn chunk_sizes(&self) -> Vec<usize> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn check_ids(worker_id: usize, n_workers: usize) -> Result<(), PlanError> {
    if n_workers == 0 {
        return Err(PlanError::NoWorkers);
    }
    if worker_id >= n_workers {
        return Err(PlanError::WorkerOutOfRange {
            worker_id,
            n_workers,
        });
    }
    Ok(())
}

/// Per-worker split: keep `floor(k/n)` words as chunk `worker_id`, spread
/// the rest over the other chunks as evenly as possible, with the excess
/// going one apiece to the lowest-numbered sent chunks.
pub fn plan_partition(
    sorted: &WordList,
    worker_id: usize,
    n_workers: usize,
) -> Result<ShardPlan, PlanError> {
    check_ids(worker_id, n_workers)?;
    if !sorted.is_sorted() {
        return Err(PlanError::Unsorted(worker_id));
    }
    let k = sorted.len();
    let keep = k / n_workers;
    let sent = k - keep;
    let (base, mut excess) = if n_workers > 1 {
        (sent / (n_workers - 1), sent % (n_workers - 1))
    } else {
        (0, 0)
    };
    let sizes: Vec<usize> = (0..n_workers)
        .map(|c| {
            if c == worker_id {
                keep
            } else if excess > 0 {
                excess -= 1;
                base + 1
            } else {
                base
            }
        })
        .collect();
    Ok(ShardPlan::from_sizes(worker_id, &sizes))
}

// Number of elements of `list` (owned by worker `owner`) ordered before the
// element `(word, at_worker, ..)` under (word, worker, index) ordering.
fn count_before(list: &[WordToken], owner: usize, word: &WordToken, at_worker: usize) -> usize {
    if owner < at_worker {
        list.partition_point(|w| w <= word)
    } else {
        list.partition_point(|w| w < word)
    }
}

// Per-worker cut so that exactly `rank` elements of the pooled order fall
// before it.
fn cuts_at_rank(lists: &[&[WordToken]], rank: usize) -> Vec<usize> {
    let total: usize = lists.iter().map(|l| l.len()).sum();
    if rank == 0 {
        return vec![0; lists.len()];
    }
    if rank >= total {
        return lists.iter().map(|l| l.len()).collect();
    }
    let global_rank = |i: usize, p: usize| -> usize {
        let word = &lists[i][p];
        lists
            .iter()
            .enumerate()
            .map(|(m, l)| {
                if m == i {
                    p
                } else {
                    count_before(l, m, word, i)
                }
            })
            .sum()
    };
    // Exactly one element has the requested rank; find which worker owns it.
    for (i, list) in lists.iter().enumerate() {
        let (mut lo, mut hi) = (0, list.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match global_rank(i, mid).cmp(&rank) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => {
                    let word = &list[mid];
                    return lists
                        .iter()
                        .enumerate()
                        .map(|(m, l)| {
                            if m == i {
                                mid
                            } else {
                                count_before(l, m, word, i)
                            }
                        })
                        .collect();
                }
            }
        }
    }
    unreachable!("every rank below the total is held by some worker")
}

/// Coordinated split over all workers' sorted lists. Worker `c` receives
/// pooled ranks `[floor(c*K/n), floor((c+1)*K/n))`, where `K` is the total
/// word count.
pub fn plan_partitions_global(sorted: &[WordList]) -> Result<Vec<ShardPlan>, PlanError> {
    let n = sorted.len();
    if n == 0 {
        return Err(PlanError::NoWorkers);
    }
    if let Some(bad) = sorted.iter().position(|l| !l.is_sorted()) {
        return Err(PlanError::Unsorted(bad));
    }
    let lists: Vec<&[WordToken]> = sorted.iter().map(|l| l.words()).collect();
    let total: usize = lists.iter().map(|l| l.len()).sum();
    let cuts: Vec<Vec<usize>> = (0..=n)
        .map(|c| cuts_at_rank(&lists, c * total / n))
        .collect();
    Ok((0..n)
        .map(|w| ShardPlan {
            worker_id: w,
            n_workers: n,
            local_count: lists[w].len(),
            boundaries: cuts.iter().map(|cut| cut[w]).collect(),
        })
        .collect())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("channel closed")]
    Disconnected,
    #[error("timed out after {0:?}")]
    Timeout(Duration),
    #[error("no channel between these endpoints")]
    NoRoute,
    #[error("{0}")]
    Other(String),
}

/// Ordered, reliable point-to-point byte messages between worker pairs.
/// Sends must not block on the receiver.
pub trait Transport: Sync {
    fn send(&self, from: usize, to: usize, bytes: Vec<u8>) -> Result<(), TransportError>;
    fn recv(&self, at: usize, from: usize) -> Result<Vec<u8>, TransportError>;
}

/// In-process transport: one unbounded queue per ordered worker pair.
pub struct ChannelTransport {
    n: usize,
    senders: Vec<Sender<Vec<u8>>>,
    receivers: Vec<Receiver<Vec<u8>>>,
    timeout: Duration,
}

impl ChannelTransport {
    pub fn new(n_workers: usize) -> Self {
        Self::with_timeout(n_workers, Duration::from_secs(60))
    }

    pub fn with_timeout(n_workers: usize, timeout: Duration) -> Self {
        let (senders, receivers) = (0..n_workers * n_workers)
            .map(|_| crossbeam_channel::unbounded())
            .unzip();
        Self {
            n: n_workers,
            senders,
            receivers,
            timeout,
        }
    }

    fn slot(&self, from: usize, to: usize) -> Result<usize, TransportError> {
        if from < self.n && to < self.n {
            Ok(from * self.n + to)
        } else {
            Err(TransportError::NoRoute)
        }
    }
}

impl Transport for ChannelTransport {
    fn send(&self, from: usize, to: usize, bytes: Vec<u8>) -> Result<(), TransportError> {
        let slot = self.slot(from, to)?;
        self.senders[slot]
            .send(bytes)
            .map_err(|_| TransportError::Disconnected)
    }

    fn recv(&self, at: usize, from: usize) -> Result<Vec<u8>, TransportError> {
        let slot = self.slot(from, at)?;
        self.receivers[slot]
            .recv_timeout(self.timeout)
            .map_err(|e| match e {
                RecvTimeoutError::Timeout => TransportError::Timeout(self.timeout),
                RecvTimeoutError::Disconnected => TransportError::Disconnected,
            })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExchangeError {
    #[error("plan for slot {slot} is inconsistent: {reason}")]
    BadPlan { slot: usize, reason: String },
    #[error("worker {worker}: encoding outgoing chunk failed: {source}")]
    Encode { worker: usize, source: WireError },
    #[error("transport {from} -> {to}: {source}")]
    Transport {
        from: usize,
        to: usize,
        source: TransportError,
    },
    #[error("frame {from} -> {to}: {source}")]
    Decode {
        from: usize,
        to: usize,
        source: WireError,
    },
    #[error("frame {from} -> {to}: chunk is not sorted")]
    UnsortedChunk { from: usize, to: usize },
}

/// A worker's kept chunk plus its encoded outgoing frames, ready to send.
#[derive(Debug, Clone)]
pub struct PreparedShard {
    plan: ShardPlan,
    kept: Vec<WordToken>,
    outgoing: Vec<(usize, WireMessage)>,
}

impl PreparedShard {
    pub fn plan(&self) -> &ShardPlan {
        &self.plan
    }

    pub fn outgoing(&self) -> &[(usize, WireMessage)] {
        &self.outgoing
    }
}

fn validate(slot: usize, plan: &ShardPlan, list: &WordList) -> Result<(), ExchangeError> {
    let bad = |reason: String| Err(ExchangeError::BadPlan { slot, reason });
    if plan.worker_id != slot {
        return bad(format!("worker id {} in slot {slot}", plan.worker_id));
    }
    if !list.is_sorted() {
        return bad("word list is not sorted".into());
    }
    if plan.local_count != list.len() {
        return bad(format!(
            "plan covers {} words, list has {}",
            plan.local_count,
            list.len()
        ));
    }
    let b = &plan.boundaries;
    if b.len() != plan.n_workers + 1
        || b.first() != Some(&0)
        || b.last() != Some(&list.len())
        || b.windows(2).any(|w| w[0] > w[1])
    {
        return bad(format!("boundaries {b:?} do not span 0..{}", list.len()));
    }
    Ok(())
}

/// Splits `list` by `plan` and encodes every chunk bound for another worker.
/// Empty chunks still produce a frame so each peer expects exactly one.
pub fn prepare_shard(plan: ShardPlan, list: WordList) -> Result<PreparedShard, ExchangeError> {
    validate(plan.worker_id, &plan, &list)?;
    let words = list.into_words();
    let me = plan.worker_id;
    let mut outgoing = Vec::with_capacity(plan.n_workers.saturating_sub(1));
    for dest in (0..plan.n_workers).filter(|&d| d != me) {
        let msg = encode_tokens(&words[plan.chunk(dest)])
            .map_err(|source| ExchangeError::Encode { worker: me, source })?;
        outgoing.push((dest, msg));
    }
    let kept = words[plan.kept_range()].to_vec();
    Ok(PreparedShard {
        plan,
        kept,
        outgoing,
    })
}

fn run_worker(
    me: usize,
    n: usize,
    shard: PreparedShard,
    transport: &dyn Transport,
) -> Result<WordList, ExchangeError> {
    for (to, msg) in shard.outgoing {
        transport
            .send(me, to, msg.into_bytes())
            .map_err(|source| ExchangeError::Transport {
                from: me,
                to,
                source,
            })?;
    }
    let mut runs = Vec::with_capacity(n);
    runs.push(shard.kept);
    for from in (0..n).filter(|&f| f != me) {
        let bytes = transport
            .recv(me, from)
            .map_err(|source| ExchangeError::Transport {
                from,
                to: me,
                source,
            })?;
        let words = decode_message(&WireMessage::from_bytes(bytes))
            .map_err(|source| ExchangeError::Decode {
                from,
                to: me,
                source,
            })?
            .into_words();
        if words.windows(2).any(|w| w[0] > w[1]) {
            return Err(ExchangeError::UnsortedChunk { from, to: me });
        }
        runs.push(words);
    }
    Ok(WordList::from_sorted_unchecked(
        runs.into_iter().kmerge().collect(),
    ))
}

/// Sends every prepared frame and merges what each worker receives.
/// Runs the workers concurrently; output slot `j` is worker `j`'s holdings.
pub fn exchange_prepared(
    shards: Vec<PreparedShard>,
    transport: &dyn Transport,
) -> Result<Vec<WordList>, ExchangeError> {
    let n = shards.len();
    for (slot, s) in shards.iter().enumerate() {
        if s.plan.n_workers != n || s.plan.worker_id != slot {
            return Err(ExchangeError::BadPlan {
                slot,
                reason: format!(
                    "plan is worker {} of {}, expected {slot} of {n}",
                    s.plan.worker_id, s.plan.n_workers
                ),
            });
        }
    }
    if n == 1 {
        let only = shards.into_iter().next().expect("one shard");
        return Ok(vec![WordList::from_sorted_unchecked(only.kept)]);
    }
    workers::run_owned(shards, |me, shard| run_worker(me, n, shard, transport))
        .into_iter()
        .collect()
}

/// Plans are given per worker alongside that worker's sorted words.
pub fn exchange(
    inputs: Vec<(ShardPlan, WordList)>,
    transport: &dyn Transport,
) -> Result<Vec<WordList>, ExchangeError> {
    let prepared = workers::run_owned(inputs, |_, (plan, list)| prepare_shard(plan, list))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    exchange_prepared(prepared, transport)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::sort_words;

    fn sorted(words: &[&str]) -> WordList {
        sort_words(WordList::from_strs(words))
    }

    fn doc1() -> WordList {
        sorted(&["i", "want", "to", "test", "mapreduce"])
    }

    fn doc2() -> WordList {
        sorted(&["mapreduce", "is", "a", "cool", "algorithm", "to", "test"])
    }

    fn chunk_words(list: &WordList, plan: &ShardPlan, c: usize) -> Vec<String> {
        list.words()[plan.chunk(c)]
            .iter()
            .map(|w| w.to_string())
            .collect()
    }

    #[test]
    fn local_plan_worker0() {
        let list = doc1();
        let plan = plan_partition(&list, 0, 2).unwrap();
        assert_eq!(chunk_words(&list, &plan, 0), ["i", "mapreduce"]);
        assert_eq!(chunk_words(&list, &plan, 1), ["test", "to", "want"]);
    }

    #[test]
    fn local_plan_worker1() {
        let list = doc2();
        let plan = plan_partition(&list, 1, 2).unwrap();
        assert_eq!(chunk_words(&list, &plan, 1), ["mapreduce", "test", "to"]);
        assert_eq!(
            chunk_words(&list, &plan, 0),
            ["a", "algorithm", "cool", "is"]
        );
    }

    #[test]
    fn local_plan_single_worker_keeps_all() {
        let list = doc2();
        let plan = plan_partition(&list, 0, 1).unwrap();
        assert_eq!(plan.boundaries(), [0, 7]);
    }

    #[test]
    fn local_plan_excess_goes_low_first() {
        // k=10, n=4, worker 2 keeps 2; 8 left over 3 chunks -> 3,3,2.
        let list = sorted(&["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
        let plan = plan_partition(&list, 2, 4).unwrap();
        assert_eq!(plan.chunk_sizes(), [3, 3, 2, 2]);
    }

    #[test]
    fn plan_rejects_bad_ids() {
        let list = doc1();
        assert_eq!(plan_partition(&list, 0, 0), Err(PlanError::NoWorkers));
        assert_eq!(
            plan_partition(&list, 3, 2),
            Err(PlanError::WorkerOutOfRange {
                worker_id: 3,
                n_workers: 2
            })
        );
        assert_eq!(
            plan_partition(&WordList::from_strs(&["b", "a"]), 0, 2),
            Err(PlanError::Unsorted(0))
        );
        assert_eq!(plan_partitions_global(&[]), Err(PlanError::NoWorkers));
    }

    #[test]
    fn global_plan_matches_local_on_worked_example() {
        let lists = [doc1(), doc2()];
        let global = plan_partitions_global(&lists).unwrap();
        assert_eq!(global[0], plan_partition(&lists[0], 0, 2).unwrap());
        assert_eq!(global[1], plan_partition(&lists[1], 1, 2).unwrap());
    }

    #[test]
    fn global_plan_heavy_word_spans_workers() {
        // "the" fills the middle of the pooled order and spills across cuts.
        let lists = [
            sorted(&["a", "the", "the", "the"]),
            sorted(&["the", "the", "the", "z"]),
        ];
        let plans = plan_partitions_global(&lists).unwrap();
        assert_eq!(plans[0].boundaries(), [0, 4, 4]);
        assert_eq!(plans[1].boundaries(), [0, 0, 4]);
    }

    #[test]
    fn worked_example_exchange() {
        let lists = vec![doc1(), doc2()];
        let plans = plan_partitions_global(&lists).unwrap();
        let transport = ChannelTransport::new(2);
        let out = exchange(plans.into_iter().zip(lists).collect(), &transport).unwrap();
        assert_eq!(
            out[0].to_strings(),
            ["a", "algorithm", "cool", "i", "is", "mapreduce"]
        );
        assert_eq!(
            out[1].to_strings(),
            ["mapreduce", "test", "test", "to", "to", "want"]
        );
        assert!(out.iter().all(WordList::is_sorted));
    }

    #[test]
    fn single_worker_identity() {
        let list = doc2();
        let plan = plan_partition(&list, 0, 1).unwrap();
        let out = exchange(vec![(plan, list.clone())], &ChannelTransport::new(1)).unwrap();
        assert_eq!(out, vec![list]);
    }

    #[test]
    fn mismatched_plan_rejected() {
        let list = doc1();
        let plan = plan_partition(&list, 0, 2).unwrap();
        let err = exchange(vec![(plan, doc2())], &ChannelTransport::new(2)).unwrap_err();
        assert!(matches!(err, ExchangeError::BadPlan { slot: 0, .. }));
    }

    struct CorruptingTransport {
        inner: ChannelTransport,
        from: usize,
        to: usize,
    }

    impl Transport for CorruptingTransport {
        fn send(&self, from: usize, to: usize, mut bytes: Vec<u8>) -> Result<(), TransportError> {
            if (from, to) == (self.from, self.to) {
                bytes[0] = b'X';
            }
            self.inner.send(from, to, bytes)
        }
        fn recv(&self, at: usize, from: usize) -> Result<Vec<u8>, TransportError> {
            self.inner.recv(at, from)
        }
    }

    struct BrokenLink {
        inner: ChannelTransport,
    }

    impl Transport for BrokenLink {
        fn send(&self, from: usize, to: usize, bytes: Vec<u8>) -> Result<(), TransportError> {
            if (from, to) == (1, 0) {
                return Err(TransportError::Other("link down".into()));
            }
            self.inner.send(from, to, bytes)
        }
        fn recv(&self, at: usize, from: usize) -> Result<Vec<u8>, TransportError> {
            if (from, at) == (1, 0) {
                return Err(TransportError::Other("link down".into()));
            }
            self.inner.recv(at, from)
        }
    }

    #[test]
    fn decode_error_names_the_pair() {
        let lists = vec![doc1(), doc2()];
        let plans = plan_partitions_global(&lists).unwrap();
        let t = CorruptingTransport {
            inner: ChannelTransport::new(2),
            from: 1,
            to: 0,
        };
        let err = exchange(plans.into_iter().zip(lists).collect(), &t).unwrap_err();
        assert!(matches!(
            err,
            ExchangeError::Decode {
                from: 1,
                to: 0,
                source: WireError::BadMagic { .. }
            }
        ));
    }

    #[test]
    fn transport_error_names_the_pair() {
        let lists = vec![doc1(), doc2()];
        let plans = plan_partitions_global(&lists).unwrap();
        let t = BrokenLink {
            inner: ChannelTransport::new(2),
        };
        let err = exchange(plans.into_iter().zip(lists).collect(), &t).unwrap_err();
        match err {
            ExchangeError::Transport { from, to, .. } => assert_eq!((from, to), (1, 0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn recv_times_out() {
        let t = ChannelTransport::with_timeout(2, Duration::from_millis(10));
        assert_eq!(
            t.recv(0, 1),
            Err(TransportError::Timeout(Duration::from_millis(10)))
        );
        assert_eq!(t.send(0, 5, vec![]), Err(TransportError::NoRoute));
    }
}
