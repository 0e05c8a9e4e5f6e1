//! Numeric map-then-sum with a deterministic blocked tree reduction.
//!
//! The blocked path cuts the input into fixed-size blocks, folds each block
//! left to right, then combines the block partials pairwise in block-index
//! order. The shape of that tree depends only on the length and block size,
//! so the result is bit-for-bit the same for any number of workers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::workers;

/// Per-element map applied before summation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapSpec {
    Identity,
    /// `sqrt(x)`. Negative inputs give NaN, which propagates.
    Sqrt,
    /// `(-1)^(i+1) / i` for the 1-based position `i`; the value is ignored.
    AltHarm,
}

impl MapSpec {
    #[inline]
    pub fn apply(self, value: f64, index: usize) -> f64 {
        match self {
            MapSpec::Identity => value,
            MapSpec::Sqrt => value.sqrt(),
            MapSpec::AltHarm => alternating_term(index + 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MapSpec::Identity => "identity",
            MapSpec::Sqrt => "sqrt",
            MapSpec::AltHarm => "altharm",
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(MapSpec::Identity),
            "sqrt" => Ok(MapSpec::Sqrt),
            "altharm" => Ok(MapSpec::AltHarm),
            other => Err(format!("unknown map kind {other:?}")),
        }
    }
}

#[inline]
fn alternating_term(i: usize) -> f64 {
    let t = 1.0 / i as f64;
    if i % 2 == 1 {
        t
    } else {
        -t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockConfig {
    block_size: usize,
    workers: usize,
}

impl BlockConfig {
    /// Zero values are rejected.
    pub fn new(block_size: usize, workers: usize) -> Option<Self> {
        (block_size >= 1 && workers >= 1).then_some(Self {
            block_size,
            workers,
        })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl Default for BlockConfig {
    fn default() -> Self {
        let workers = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1);
        Self {
            block_size: 256,
            workers,
        }
    }
}

/// Wall-clock split of one blocked run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BlockedTimings {
    /// Mapping and folding every block.
    pub fold_ns: u64,
    /// Combining block partials.
    pub combine_ns: u64,
    pub total_ns: u64,
}

/// Left-to-right fold of `map(values)` starting from `0.0`.
pub fn map_reduce_serial(values: &[f64], map: MapSpec) -> f64 {
    let mut acc = 0.0;
    for (i, &v) in values.iter().enumerate() {
        acc += map.apply(v, i);
    }
    acc
}

pub fn map_reduce_blocked(values: &[f64], map: MapSpec, cfg: BlockConfig) -> f64 {
    map_reduce_blocked_timed(values, map, cfg).0
}

pub fn map_reduce_blocked_timed(
    values: &[f64],
    map: MapSpec,
    cfg: BlockConfig,
) -> (f64, BlockedTimings) {
    blocked_over(values.len(), cfg, |i| map.apply(values[i], i))
}

/// Sum of the first `n` terms of `1 - 1/2 + 1/3 - ...` through the blocked
/// engine with the default configuration.
pub fn alternating_harmonic(n: usize) -> f64 {
    alternating_harmonic_with(n, BlockConfig::default())
}

pub fn alternating_harmonic_with(n: usize, cfg: BlockConfig) -> f64 {
    blocked_over(n, cfg, |i| alternating_term(i + 1)).0
}

fn blocked_over<F>(len: usize, cfg: BlockConfig, term: F) -> (f64, BlockedTimings)
where
    F: Fn(usize) -> f64 + Sync,
{
    let start = Instant::now();
    let bs = cfg.block_size;
    let n_blocks = len.div_ceil(bs);
    let fold_block = |b: usize| -> f64 {
        let mut acc = 0.0;
        for i in b * bs..((b + 1) * bs).min(len) {
            acc += term(i);
        }
        acc
    };

    // Contiguous runs of blocks per worker; partials come back in block order.
    let workers = cfg.workers.min(n_blocks).max(1);
    let per = n_blocks.div_ceil(workers);
    let partials: Vec<f64> = workers::run_indexed(workers, |w| {
        (w * per..((w + 1) * per).min(n_blocks))
            .map(fold_block)
            .collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let folded = Instant::now();

    let sum = tree_combine(partials);
    let end = Instant::now();
    let ns = |d: std::time::Duration| d.as_nanos() as u64;
    (
        sum,
        BlockedTimings {
            fold_ns: ns(folded - start),
            combine_ns: ns(end - folded),
            total_ns: ns(end - start),
        },
    )
}

/// Pairwise combine, `(p0+p1), (p2+p3), ...` level by level; an odd tail is
/// carried up unchanged.
fn tree_combine(mut level: Vec<f64>) -> f64 {
    if level.is_empty() {
        return 0.0;
    }
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| {
                if pair.len() == 2 {
                    pair[0] + pair[1]
                } else {
                    pair[0]
                }
            })
            .collect();
    }
    level[0]
}
