//! Counting k-traversing Hamiltonian cycles from a transfer product.
//!
//! Two closed forms are evaluated on the same product matrix:
//!
//! * the shift formula, which sums the anti-diagonals of the blocks
//!   `(b, b shifted by z)` for `z = 1..k-1` over every endpoint string `b` and
//!   divides by `k!`;
//! * the cycle-complete formula, which sums the anti-diagonals of the blocks
//!   `(b, σ·b)` over increasing `b` and every single-cycle permutation `σ`
//!   of the `k` paths, with no division.
//!
//! Every Hamiltonian cycle closes its `k` strands into a single cycle on the
//! shared wall, so the cycle-complete sum counts each one exactly once. The
//! shift formula agrees with it for `k <= 3` and can differ above that.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::TiledGraph;
use crate::indexing::EndpointString;
use crate::oracle::{oracle_count, OracleCounts, DEFAULT_VERTEX_CAP};
use crate::transfer::{BlockTransferMatrix, MatrixMemo, MatrixProvider, ProductMode, TransferPlan};

/// The shift formula's value, kept exact even when `k!` does not divide the sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaperFormulaValue {
    /// The sum before division.
    pub sum: BigUint,
    /// `k!` (1 when k = 1).
    pub divisor: BigUint,
    pub divisible: bool,
}

impl PaperFormulaValue {
    pub fn quotient(&self) -> Option<BigUint> {
        self.divisible.then(|| &self.sum / &self.divisor)
    }

    /// The value as a reduced fraction `(numerator, denominator)`.
    pub fn reduced(&self) -> (BigUint, BigUint) {
        let g = self.sum.gcd(&self.divisor);
        if g.is_zero() {
            return (BigUint::zero(), BigUint::one());
        }
        (&self.sum / &g, &self.divisor / &g)
    }
}

impl fmt::Display for PaperFormulaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.quotient() {
            Some(q) => write!(f, "{q}"),
            None => {
                let (n, d) = self.reduced();
                write!(f, "{n}/{d}")
            }
        }
    }
}

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

fn check_closed(product: &BlockTransferMatrix) -> Result<()> {
    if product.is_square() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "counting needs a closed product, got walls ({}, {})",
            product.left_wall(),
            product.right_wall()
        )))
    }
}

/// The shift formula evaluated on a closed product matrix.
pub fn paper_formula(product: &BlockTransferMatrix) -> Result<PaperFormulaValue> {
    check_closed(product)?;
    let k = product.k();
    let mut sum = BigUint::zero();
    for b in product.left_endpoints().enumerate() {
        if k == 1 {
            sum += product.anti_diagonal_sum(&b, &b)?;
        } else {
            for z in 1..k {
                sum += product.anti_diagonal_sum(&b, &b.shift(z))?;
            }
        }
    }
    let divisor = factorial(k);
    let divisible = (&sum % &divisor).is_zero();
    Ok(PaperFormulaValue { sum, divisor, divisible })
}

/// Every permutation of `0..k` that is a single `k`-cycle (the identity when
/// `k = 1`), in lexicographic order.
pub fn single_cycle_permutations(k: usize) -> Vec<Vec<usize>> {
    fn is_single_cycle(p: &[usize]) -> bool {
        let mut len = 1;
        let mut at = p[0];
        while at != 0 {
            at = p[at];
            len += 1;
        }
        len == p.len()
    }
    fn extend(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            if is_single_cycle(cur) {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                extend(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        extend(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    }
    out
}

/// The cycle-complete formula evaluated on a closed product matrix.
pub fn cycle_complete_formula(product: &BlockTransferMatrix) -> Result<BigUint> {
    check_closed(product)?;
    let k = product.k();
    let perms = single_cycle_permutations(k);
    let mut sum = BigUint::zero();
    for b in product.left_endpoints().enumerate().into_iter().filter(EndpointString::is_sorted) {
        let pos = b.positions();
        for sigma in &perms {
            let c = EndpointString::new(sigma.iter().map(|&j| pos[j]).collect());
            sum += product.anti_diagonal_sum(&b, &c)?;
        }
    }
    Ok(sum)
}

fn check_k(graph: &TiledGraph, k: usize) -> Result<()> {
    let max = graph.min_ws();
    if k == 0 || k > max {
        Err(Error::InvalidK { k, max })
    } else {
        Ok(())
    }
}

pub fn thc_paper(graph: &TiledGraph, k: usize) -> Result<PaperFormulaValue> {
    check_k(graph, k)?;
    let plan = TransferPlan::new(graph.sequence(), k, &MatrixMemo::new())?;
    paper_formula(&plan.product(ProductMode::Linear)?)
}

pub fn thc_cycle_complete(graph: &TiledGraph, k: usize) -> Result<BigUint> {
    check_k(graph, k)?;
    let plan = TransferPlan::new(graph.sequence(), k, &MatrixMemo::new())?;
    cycle_complete_formula(&plan.product(ProductMode::Linear)?)
}

/// Which values of k to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KSelection {
    #[default]
    All,
    One(usize),
}

#[derive(Clone, Debug)]
pub struct CountOptions {
    pub ks: KSelection,
    pub paper: bool,
    pub cycle_complete: bool,
    pub oracle: bool,
    pub mode: ProductMode,
    pub oracle_cap: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            ks: KSelection::All,
            paper: true,
            cycle_complete: true,
            oracle: false,
            mode: ProductMode::Linear,
            oracle_cap: DEFAULT_VERTEX_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KRecord {
    pub k: usize,
    pub paper: Option<PaperFormulaValue>,
    pub cycle_complete: Option<BigUint>,
    pub oracle: Option<BigUint>,
}

impl KRecord {
    /// `Some(equal)` when both sides were computed; a non-divisible shift
    /// value never equals an integer count.
    pub fn paper_matches_cycle_complete(&self) -> Option<bool> {
        Some(self.paper.as_ref()?.quotient().as_ref() == Some(self.cycle_complete.as_ref()?))
    }

    pub fn cycle_complete_matches_oracle(&self) -> Option<bool> {
        Some(self.cycle_complete.as_ref()? == self.oracle.as_ref()?)
    }

    pub fn paper_matches_oracle(&self) -> Option<bool> {
        Some(self.paper.as_ref()?.quotient().as_ref() == Some(self.oracle.as_ref()?))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Timings {
    pub matrices: Duration,
    pub products: Duration,
    pub formulas: Duration,
    pub oracle: Duration,
}

#[derive(Clone, Debug)]
pub struct CountReport {
    pub graph: String,
    pub tiles: usize,
    pub vertices: usize,
    pub edges: usize,
    pub min_ws: usize,
    pub mode: ProductMode,
    pub records: Vec<KRecord>,
    pub oracle: Option<OracleCounts>,
    pub timings: Timings,
}

impl CountReport {
    pub fn record(&self, k: usize) -> Option<&KRecord> {
        self.records.iter().find(|r| r.k == k)
    }

    /// Some record carries a shift value that `k!` does not divide.
    pub fn has_indivisible_paper_value(&self) -> bool {
        self.records.iter().any(|r| r.paper.as_ref().is_some_and(|p| !p.divisible))
    }

    pub fn has_oracle_mismatch(&self) -> bool {
        self.records.iter().any(|r| r.cycle_complete_matches_oracle() == Some(false))
    }
}

/// Run the requested methods for every selected k, sharing one transfer
/// product per k between both formulas.
pub fn count_all(
    graph: &TiledGraph,
    id: &str,
    options: &CountOptions,
    provider: &dyn MatrixProvider,
) -> Result<CountReport> {
    let min_ws = graph.min_ws();
    let ks: Vec<usize> = match options.ks {
        KSelection::All => (1..=min_ws).collect(),
        KSelection::One(k) => {
            check_k(graph, k)?;
            vec![k]
        }
    };

    let mut timings = Timings::default();
    let oracle = if options.oracle {
        let start = Instant::now();
        let counts = oracle_count(graph, options.oracle_cap)?;
        timings.oracle = start.elapsed();
        Some(counts)
    } else {
        None
    };

    let mut records = Vec::with_capacity(ks.len());
    for k in ks {
        let mut record =
            KRecord { k, paper: None, cycle_complete: None, oracle: oracle.as_ref().map(|o| o.count(k)) };
        if options.paper || options.cycle_complete {
            let start = Instant::now();
            let plan = TransferPlan::new(graph.sequence(), k, provider)?;
            timings.matrices += start.elapsed();

            let start = Instant::now();
            let product = plan.product(options.mode)?;
            timings.products += start.elapsed();

            let start = Instant::now();
            if options.paper {
                record.paper = Some(paper_formula(&product)?);
            }
            if options.cycle_complete {
                record.cycle_complete = Some(cycle_complete_formula(&product)?);
            }
            timings.formulas += start.elapsed();
        }
        records.push(record);
    }

    Ok(CountReport {
        graph: id.to_string(),
        tiles: graph.tile_count(),
        vertices: graph.vertex_count(),
        edges: graph.edges().len(),
        min_ws,
        mode: options.mode,
        records,
        oracle,
        timings,
    })
}

/// Per-k counts as a map, for quick comparisons.
pub fn cycle_complete_counts(graph: &TiledGraph) -> Result<BTreeMap<usize, BigUint>> {
    let memo = MatrixMemo::new();
    (1..=graph.min_ws())
        .map(|k| {
            let plan = TransferPlan::new(graph.sequence(), k, &memo)?;
            Ok((k, cycle_complete_formula(&plan.product(ProductMode::Linear)?)?))
        })
        .collect()
}
