//! Counting k-traversing Hamiltonian cycles in cyclically tiled graphs with
//! block transfer matrices, plus a brute-force oracle to check them against.

pub mod corpus;
pub mod counting;
pub mod error;
pub mod graph;
pub mod indexing;
pub mod io;
pub mod oracle;
pub mod paths;
pub mod transfer;

pub use counting::{
    count_all, cycle_complete_formula, paper_formula, thc_cycle_complete, thc_paper, CountOptions,
    CountReport, KRecord, KSelection, PaperFormulaValue,
};
pub use error::{Error, Result};
pub use graph::{compatible, cyclize, join, min_ws, Tile, TileSequence, TiledGraph, Violation};
pub use indexing::{EndpointFamily, EndpointString, MaskFamily, RemainderMask};
pub use oracle::{classify, oracle_count, CycleClassification, OracleCounts, Verdict};
pub use paths::{build_transfer_matrix, count_path_systems, EntryQuery};
pub use transfer::{
    multiply, transfer_product, BlockTransferMatrix, MatrixMemo, MatrixProvider, ProductMode, TransferPlan,
};
