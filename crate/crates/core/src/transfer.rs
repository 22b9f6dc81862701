//! Block transfer matrices and their products.
//!
//! A matrix is stored flat and row-major. Row `rank(b)·|L^r| + rank(d)` and
//! column `rank(c)·|R^r| + rank(e)` hold the entry for endpoint strings `b, c`
//! and remainder masks `d, e`. Under this layout the block product is ordinary
//! matrix multiplication.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Tile, TileSequence};
use crate::indexing::{EndpointFamily, EndpointString, MaskFamily, RemainderMask};
use crate::paths::build_transfer_matrix;

/// Below this many multiply-adds a product runs on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockTransferMatrix {
    k: usize,
    left_wall: usize,
    right_wall: usize,
    rows: usize,
    cols: usize,
    entries: Vec<BigUint>,
}

/// `(endpoint strings, masks)` on one side of a matrix.
fn side(wall: usize, k: usize) -> Result<(EndpointFamily, MaskFamily)> {
    Ok((EndpointFamily::new(wall, k)?, MaskFamily::new(wall, k)?))
}

impl BlockTransferMatrix {
    /// `(rows, cols)` of the matrix for the given walls and `k`.
    pub fn shape(left_wall: usize, right_wall: usize, k: usize) -> Result<(usize, usize)> {
        let (le, lm) = side(left_wall, k)?;
        let (re, rm) = side(right_wall, k)?;
        Ok((le.len() * lm.len(), re.len() * rm.len()))
    }

    pub fn zeros(k: usize, left_wall: usize, right_wall: usize) -> Result<Self> {
        let (rows, cols) = Self::shape(left_wall, right_wall, k)?;
        Ok(BlockTransferMatrix {
            k,
            left_wall,
            right_wall,
            rows,
            cols,
            entries: vec![BigUint::zero(); rows * cols],
        })
    }

    /// Ones on the diagonal; the neutral element for [`multiply`].
    pub fn identity(k: usize, wall: usize) -> Result<Self> {
        let mut m = Self::zeros(k, wall, wall)?;
        for i in 0..m.rows {
            m.set(i, i, BigUint::one());
        }
        Ok(m)
    }

    pub fn from_rows(k: usize, left_wall: usize, right_wall: usize, rows: Vec<Vec<BigUint>>) -> Result<Self> {
        let mut m = Self::zeros(k, left_wall, right_wall)?;
        if rows.len() != m.rows || rows.iter().any(|r| r.len() != m.cols) {
            return Err(Error::ShapeMismatch(format!(
                "expected {}x{} entries for walls ({left_wall}, {right_wall}) and k = {k}",
                m.rows, m.cols
            )));
        }
        m.entries = rows.into_iter().flatten().collect();
        Ok(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<BigUint>> {
        self.entries.chunks(self.cols.max(1)).map(<[_]>::to_vec).collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn left_wall(&self) -> usize {
        self.left_wall
    }

    pub fn right_wall(&self) -> usize {
        self.right_wall
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &BigUint {
        &self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: BigUint) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn left_masks(&self) -> MaskFamily {
        MaskFamily::new(self.left_wall, self.k).expect("shape checked at construction")
    }

    pub fn right_masks(&self) -> MaskFamily {
        MaskFamily::new(self.right_wall, self.k).expect("shape checked at construction")
    }

    pub fn left_endpoints(&self) -> EndpointFamily {
        EndpointFamily::new(self.left_wall, self.k).expect("shape checked at construction")
    }

    pub fn right_endpoints(&self) -> EndpointFamily {
        EndpointFamily::new(self.right_wall, self.k).expect("shape checked at construction")
    }

    /// The entry `a_{b,c}^{d,e}`.
    pub fn entry(
        &self,
        b: &EndpointString,
        c: &EndpointString,
        d: &RemainderMask,
        e: &RemainderMask,
    ) -> Result<&BigUint> {
        let (lm, rm) = (self.left_masks(), self.right_masks());
        let row = self.left_endpoints().rank(b)? * lm.len() + lm.rank(d)?;
        let col = self.right_endpoints().rank(c)? * rm.len() + rm.rank(e)?;
        Ok(self.get(row, col))
    }

    /// Within every block, the row for mask `d` takes the row for `flip(d)`.
    /// With descending mask order that reverses the rows of each block.
    pub fn bar(&self) -> Self {
        let per_block = self.left_masks().len();
        let mut out = self.clone();
        for block in out.entries.chunks_mut(per_block * self.cols) {
            for u in 0..per_block / 2 {
                let (head, tail) = block.split_at_mut((per_block - 1 - u) * self.cols);
                head[u * self.cols..(u + 1) * self.cols].swap_with_slice(&mut tail[..self.cols]);
            }
        }
        out
    }

    /// Sum over the anti-diagonal of block `(b, c)`: all `a_{b,c}^{d, flip(d)}`.
    pub fn anti_diagonal_sum(&self, b: &EndpointString, c: &EndpointString) -> Result<BigUint> {
        if self.left_wall != self.right_wall {
            return Err(Error::ShapeMismatch(format!(
                "anti-diagonal needs equal walls, got ({}, {})",
                self.left_wall, self.right_wall
            )));
        }
        let masks = self.left_masks().len();
        let row0 = self.left_endpoints().rank(b)? * masks;
        let col0 = self.right_endpoints().rank(c)? * masks;
        Ok((0..masks).fold(BigUint::zero(), |acc, s| acc + self.get(row0 + s, col0 + masks - 1 - s)))
    }

    pub fn is_square(&self) -> bool {
        self.left_wall == self.right_wall
    }

    /// `self^exp` by repeated squaring.
    pub fn pow(&self, mut exp: u64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "power of a non-square matrix (walls {}, {})",
                self.left_wall, self.right_wall
            )));
        }
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => multiply(&r, &base)?,
                });
            }
            exp >>= 1;
            if exp > 0 {
                base = multiply(&base, &base)?;
            }
        }
        match result {
            Some(r) => Ok(r),
            None => Self::identity(self.k, self.left_wall),
        }
    }
}

/// Flat matrix product `a · b_bar`; `b_bar` is normally a barred tile matrix.
pub fn multiply(a: &BlockTransferMatrix, b_bar: &BlockTransferMatrix) -> Result<BlockTransferMatrix> {
    if a.k != b_bar.k || a.right_wall != b_bar.left_wall || a.cols != b_bar.rows {
        return Err(Error::ShapeMismatch(format!(
            "cannot multiply (k {}, walls {}->{}) by (k {}, walls {}->{})",
            a.k, a.left_wall, a.right_wall, b_bar.k, b_bar.left_wall, b_bar.right_wall
        )));
    }
    let (inner, cols) = (a.cols, b_bar.cols);
    let mut entries = vec![BigUint::zero(); a.rows * cols];

    let row_kernel = |(i, out): (usize, &mut [BigUint])| {
        let arow = &a.entries[i * inner..(i + 1) * inner];
        for (l, x) in arow.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let brow = &b_bar.entries[l * cols..(l + 1) * cols];
            for (acc, y) in out.iter_mut().zip(brow) {
                if y.is_zero() {
                    continue;
                }
                if y.is_one() {
                    *acc += x;
                } else {
                    *acc += x * y;
                }
            }
        }
    };

    if a.rows * inner * cols >= PARALLEL_THRESHOLD {
        entries.par_chunks_mut(cols.max(1)).enumerate().for_each(row_kernel);
    } else {
        entries.chunks_mut(cols.max(1)).enumerate().for_each(row_kernel);
    }

    Ok(BlockTransferMatrix {
        k: a.k,
        left_wall: a.left_wall,
        right_wall: b_bar.right_wall,
        rows: a.rows,
        cols,
        entries,
    })
}

pub fn bar(m: &BlockTransferMatrix) -> BlockTransferMatrix {
    m.bar()
}

pub fn anti_diagonal_sum(m: &BlockTransferMatrix, b: &EndpointString, c: &EndpointString) -> Result<BigUint> {
    m.anti_diagonal_sum(b, c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ProductMode {
    /// One multiplication per tile, left to right.
    #[default]
    Linear,
    /// Runs of identical tiles become matrix powers.
    Pow,
}

impl std::str::FromStr for ProductMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ProductMode::Linear),
            "pow" => Ok(ProductMode::Pow),
            other => Err(Error::format("product mode", format!("unknown mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for ProductMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProductMode::Linear => "linear",
            ProductMode::Pow => "pow",
        })
    }
}

/// Source of per-tile transfer matrices.
pub trait MatrixProvider: Sync {
    fn matrix(&self, tile: &Tile, k: usize) -> Result<Arc<BlockTransferMatrix>>;
}

/// Builds matrices on demand and keeps them in memory, keyed by
/// `(canonical tile hash, k)`.
#[derive(Default)]
pub struct MatrixMemo {
    built: Mutex<HashMap<(String, usize), Arc<BlockTransferMatrix>>>,
}

impl MatrixMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.built.lock().expect("memo lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl MatrixProvider for MatrixMemo {
    fn matrix(&self, tile: &Tile, k: usize) -> Result<Arc<BlockTransferMatrix>> {
        let key = (tile.canonical_hash(), k);
        if let Some(m) = self.built.lock().expect("memo lock").get(&key) {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(build_transfer_matrix(tile, k)?);
        self.built.lock().expect("memo lock").insert(key, Arc::clone(&m));
        Ok(m)
    }
}

/// A tile sequence resolved to its distinct matrices, ready to multiply.
///
/// Resolving hashes each tile once and fetches (or builds) each distinct
/// matrix and its bar once; [`TransferPlan::product`] then only multiplies.
#[derive(Clone, Debug)]
pub struct TransferPlan {
    k: usize,
    plain: Vec<Arc<BlockTransferMatrix>>,
    barred: Vec<BlockTransferMatrix>,
    order: Vec<usize>,
}

impl TransferPlan {
    pub fn new(seq: &TileSequence, k: usize, provider: &dyn MatrixProvider) -> Result<Self> {
        let max = seq.max_k();
        if k == 0 || k > max {
            return Err(Error::InvalidK { k, max });
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut plain = Vec::new();
        let mut order = Vec::with_capacity(seq.len());
        for tile in seq.tiles() {
            let hash = tile.canonical_hash();
            let slot = match index.get(&hash) {
                Some(&i) => i,
                None => {
                    plain.push(provider.matrix(tile, k)?);
                    index.insert(hash, plain.len() - 1);
                    plain.len() - 1
                }
            };
            order.push(slot);
        }
        let barred = plain.iter().map(|m| m.bar()).collect();
        Ok(TransferPlan { k, plain, barred, order })
    }

    /// A plan over explicit matrices: `order[i]` picks the matrix of tile `i`.
    pub fn from_matrices(matrices: Vec<BlockTransferMatrix>, order: Vec<usize>) -> Result<Self> {
        let k = matrices
            .first()
            .map(|m| m.k)
            .ok_or_else(|| Error::ShapeMismatch("a transfer plan needs at least one matrix".into()))?;
        if order.is_empty() || order.iter().any(|&i| i >= matrices.len()) {
            return Err(Error::ShapeMismatch("tile order refers to a missing matrix".into()));
        }
        let barred = matrices.iter().map(|m| m.bar()).collect();
        let plain = matrices.into_iter().map(Arc::new).collect();
        Ok(TransferPlan { k, plain, barred, order })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `A_0 · Ā_1 ⋯ Ā_m`.
    pub fn product(&self, mode: ProductMode) -> Result<BlockTransferMatrix> {
        let mut acc = (*self.plain[self.order[0]]).clone();
        let rest = &self.order[1..];
        match mode {
            ProductMode::Linear => {
                for &i in rest {
                    acc = multiply(&acc, &self.barred[i])?;
                }
            }
            ProductMode::Pow => {
                let mut start = 0;
                while start < rest.len() {
                    let i = rest[start];
                    let run = rest[start..].iter().take_while(|&&j| j == i).count();
                    acc = if run == 1 {
                        multiply(&acc, &self.barred[i])?
                    } else {
                        multiply(&acc, &self.barred[i].pow(run as u64)?)?
                    };
                    start += run;
                }
            }
        }
        Ok(acc)
    }
}

/// The product matrix `A_0 · Ā_1 ⋯ Ā_m` of a tile sequence, building tile
/// matrices as needed.
pub fn transfer_product(seq: &TileSequence, k: usize, mode: ProductMode) -> Result<BlockTransferMatrix> {
    transfer_product_with(seq, k, mode, &MatrixMemo::new())
}

pub fn transfer_product_with(
    seq: &TileSequence,
    k: usize,
    mode: ProductMode,
    provider: &dyn MatrixProvider,
) -> Result<BlockTransferMatrix> {
    TransferPlan::new(seq, k, provider)?.product(mode)
}
