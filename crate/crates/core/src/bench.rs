//! Serial vs. blocked timing runs for the numeric engine.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{
    map_reduce_blocked_timed, map_reduce_serial, BlockConfig, BlockedTimings, MapSpec,
};

/// Blocked and serial results must agree to this relative tolerance.
pub const AGREEMENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchConfig {
    pub map: MapSpec,
    pub n: usize,
    pub block: BlockConfig,
    pub repeat: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRun {
    pub run: usize,
    pub serial_ns: u64,
    pub blocked: BlockedTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub runs: Vec<BenchRun>,
    pub serial_value: f64,
    pub blocked_value: f64,
    /// `|blocked - serial| / max(1, |serial|)`.
    pub relative_diff: f64,
    pub agrees: bool,
    /// Every repeat produced the same bits.
    pub repeat_stable: bool,
    pub serial_median_ns: u64,
    pub blocked_median_ns: u64,
    pub speedup: f64,
    /// Distance from ln 2; only for the alternating harmonic map.
    pub ln2_error: Option<f64>,
}

/// `n` uniform draws from `[0, 1)`.
pub fn uniform_values(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

pub fn relative_diff(a: f64, reference: f64) -> f64 {
    (a - reference).abs() / reference.abs().max(1.0)
}

fn median(mut xs: Vec<u64>) -> u64 {
    if xs.is_empty() {
        return 0;
    }
    xs.sort_unstable();
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2
    }
}

pub fn run_bench(cfg: BenchConfig) -> BenchReport {
    let values = uniform_values(cfg.n, cfg.seed);
    let repeat = cfg.repeat.max(1);
    let mut runs = Vec::with_capacity(repeat);
    let mut serial_bits = Vec::with_capacity(repeat);
    let mut blocked_bits = Vec::with_capacity(repeat);
    for run in 0..repeat {
        let t0 = Instant::now();
        let s = map_reduce_serial(&values, cfg.map);
        let serial_ns = t0.elapsed().as_nanos() as u64;
        let (b, blocked) = map_reduce_blocked_timed(&values, cfg.map, cfg.block);
        serial_bits.push(s.to_bits());
        blocked_bits.push(b.to_bits());
        runs.push(BenchRun {
            run,
            serial_ns,
            blocked,
        });
    }
    let serial_value = f64::from_bits(serial_bits[0]);
    let blocked_value = f64::from_bits(blocked_bits[0]);
    let repeat_stable = serial_bits.iter().all(|&b| b == serial_bits[0])
        && blocked_bits.iter().all(|&b| b == blocked_bits[0]);
    let rel = relative_diff(blocked_value, serial_value);
    let serial_median_ns = median(runs.iter().map(|r| r.serial_ns).collect());
    let blocked_median_ns = median(runs.iter().map(|r| r.blocked.total_ns).collect());
    BenchReport {
        config: cfg,
        serial_value,
        blocked_value,
        relative_diff: rel,
        agrees: rel <= AGREEMENT_TOLERANCE,
        repeat_stable,
        serial_median_ns,
        blocked_median_ns,
        speedup: serial_median_ns as f64 / blocked_median_ns.max(1) as f64,
        ln2_error: (cfg.map == MapSpec::AltHarm)
            .then(|| (blocked_value - std::f64::consts::LN_2).abs()),
        runs,
    }
}
