//! Timing of sequence products on uniform tile sequences.
//!
//! Tile matrices are built (or loaded) once up front; each timed run covers
//! the product of the whole sequence plus both count extractions.

use std::time::{Duration, Instant};

use thc_core::counting::{cycle_complete_formula, paper_formula};
use thc_core::{Error, MatrixProvider, ProductMode, Result, Tile, TileSequence, TransferPlan};

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub length: usize,
    pub samples: Vec<Duration>,
    pub median: Duration,
    /// Median over the previous row's median.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BenchTable {
    pub tile: String,
    pub k: usize,
    pub mode: ProductMode,
    pub repeats: usize,
    pub rows: Vec<BenchRow>,
}

pub fn median(samples: &[Duration]) -> Duration {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2
    }
}

/// One timed evaluation of `plan`.
pub fn time_once(plan: &TransferPlan, mode: ProductMode) -> Result<Duration> {
    let start = Instant::now();
    let product = plan.product(mode)?;
    let paper = paper_formula(&product)?;
    let count = cycle_complete_formula(&product)?;
    let elapsed = start.elapsed();
    std::hint::black_box((paper, count));
    Ok(elapsed)
}

pub fn run_bench(
    tile: &Tile,
    k: usize,
    lengths: &[usize],
    mode: ProductMode,
    repeats: usize,
    provider: &dyn MatrixProvider,
) -> Result<BenchTable> {
    if repeats == 0 {
        return Err(Error::InvalidQuery("at least one repeat is needed".into()));
    }
    if let Some(&n) = lengths.iter().find(|&&n| n < 3) {
        return Err(Error::TooFewTiles(n));
    }
    let mut rows: Vec<BenchRow> = Vec::with_capacity(lengths.len());
    for &length in lengths {
        let plan = TransferPlan::new(&TileSequence::uniform(tile, length)?, k, provider)?;
        // one untimed run to warm allocator and caches
        time_once(&plan, mode)?;
        let samples = (0..repeats).map(|_| time_once(&plan, mode)).collect::<Result<Vec<_>>>()?;
        let median = median(&samples);
        let ratio =
            rows.last().map(|prev| median.as_secs_f64() / prev.median.as_secs_f64().max(f64::MIN_POSITIVE));
        rows.push(BenchRow { length, samples, median, ratio });
    }
    Ok(BenchTable { tile: tile.name.clone(), k, mode, repeats, rows })
}
