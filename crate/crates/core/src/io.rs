//! File formats: tile and graph files, matrix files (`thc-matrix/1`) and
//! count reports (`thc-report/1`).

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::counting::{CountReport, KRecord, PaperFormulaValue};
use crate::error::{Error, Result};
use crate::graph::{Tile, TileSequence};
use crate::oracle::OracleCounts;
use crate::transfer::BlockTransferMatrix;

pub const MATRIX_SCHEMA: &str = "thc-matrix/1";
pub const REPORT_SCHEMA: &str = "thc-report/1";

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

/// Parse a tile file without validating it.
pub fn parse_tile(text: &str) -> Result<Tile> {
    serde_json::from_str(text).map_err(|e| Error::format("tile file", e.to_string()))
}

/// Read a tile file and validate the tile.
pub fn load_tile(path: &Path) -> Result<Tile> {
    let tile = load_tile_unchecked(path)?;
    tile.check()?;
    Ok(tile)
}

/// Read a tile file, leaving validation to the caller.
pub fn load_tile_unchecked(path: &Path) -> Result<Tile> {
    parse_json(path, &read(path)?)
}

fn compact<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// One field per line, arrays kept on a single line.
pub fn tile_to_string(tile: &Tile) -> String {
    format!(
        "{{\n  \"name\": {},\n  \"vertices\": {},\n  \"edges\": {},\n  \"left_wall\": {},\n  \"right_wall\": {}\n}}\n",
        compact(&tile.name),
        tile.vertex_count,
        compact(&tile.edges),
        compact(&tile.left_wall),
        compact(&tile.right_wall),
    )
}

pub fn save_tile(tile: &Tile, path: &Path) -> Result<()> {
    write(path, &tile_to_string(tile))
}

/// A graph file: tile files to load, then either an explicit sequence of
/// tile names or one tile repeated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub tile_files: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiles: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<usize>,
}

impl GraphFile {
    pub fn sequence_of(names: &[&str], tile_files: Vec<PathBuf>) -> Self {
        GraphFile {
            tile_files,
            tiles: Some(names.iter().map(|s| s.to_string()).collect()),
            tile: None,
            repeat: None,
        }
    }

    pub fn repeated(name: &str, repeat: usize, tile_files: Vec<PathBuf>) -> Self {
        GraphFile { tile_files, tiles: None, tile: Some(name.to_string()), repeat: Some(repeat) }
    }

    /// Tile names in sequence order.
    pub fn names(&self) -> Result<Vec<String>> {
        match (&self.tiles, &self.tile, self.repeat) {
            (Some(names), None, None) => Ok(names.clone()),
            (None, Some(name), Some(n)) => Ok(vec![name.clone(); n]),
            _ => {
                Err(Error::format("graph file", "expected either \"tiles\" or both \"tile\" and \"repeat\""))
            }
        }
    }
}

/// A graph file with its tiles loaded and validated.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub path: PathBuf,
    pub tiles: Vec<Tile>,
    pub names: Vec<String>,
}

impl LoadedGraph {
    /// Checks compatibility of consecutive tiles.
    pub fn sequence(&self) -> Result<TileSequence> {
        let lookup: HashMap<&str, &Tile> = self.tiles.iter().map(|t| (t.name.as_str(), t)).collect();
        let tiles = self
            .names
            .iter()
            .map(|n| {
                lookup.get(n.as_str()).map(|t| (*t).clone()).ok_or_else(|| Error::UnknownTile(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        TileSequence::new(tiles)
    }

    /// Identifier used in reports: the file stem.
    pub fn id(&self) -> String {
        self.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    }
}

/// Load a graph file and the tile files it names (relative to the graph
/// file's directory). Every tile is validated; unknown names are rejected.
pub fn load_graph(path: &Path) -> Result<LoadedGraph> {
    let file: GraphFile = parse_json(path, &read(path)?)?;
    let names = file.names()?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut tiles: Vec<Tile> = Vec::new();
    for rel in &file.tile_files {
        let tile = load_tile(&base.join(rel))?;
        if tiles.iter().any(|t| t.name == tile.name) {
            return Err(Error::format("graph file", format!("tile name `{}` defined twice", tile.name)));
        }
        tiles.push(tile);
    }
    for n in &names {
        if !tiles.iter().any(|t| &t.name == n) {
            return Err(Error::UnknownTile(n.clone()));
        }
    }
    Ok(LoadedGraph { path: path.to_path_buf(), tiles, names })
}

pub fn graph_file_to_string(file: &GraphFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("graph files always serialize");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    schema: String,
    tile_hash: String,
    k: usize,
    left_wall: usize,
    right_wall: usize,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<String>>,
}

/// Serialize a matrix as a single-line `thc-matrix/1` document plus a
/// trailing newline.
pub fn matrix_to_string(m: &BlockTransferMatrix, tile_hash: &str) -> String {
    let file = MatrixFile {
        schema: MATRIX_SCHEMA.to_string(),
        tile_hash: tile_hash.to_string(),
        k: m.k(),
        left_wall: m.left_wall(),
        right_wall: m.right_wall(),
        rows: m.rows(),
        cols: m.cols(),
        entries: m.to_rows().iter().map(|row| row.iter().map(|x| x.to_str_radix(10)).collect()).collect(),
    };
    let mut s = serde_json::to_string(&file).expect("matrices always serialize");
    s.push('\n');
    s
}

/// Parse a `thc-matrix/1` document, checking the schema tag and that the
/// stated and actual shapes match the wall sizes and k.
pub fn parse_matrix(text: &str) -> Result<(String, BlockTransferMatrix)> {
    let bad = |reason: String| Error::format("matrix file", reason);
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if file.schema != MATRIX_SCHEMA {
        return Err(bad(format!("schema `{}`, expected `{MATRIX_SCHEMA}`", file.schema)));
    }
    let (rows, cols) = BlockTransferMatrix::shape(file.left_wall, file.right_wall, file.k)
        .map_err(|e| bad(e.to_string()))?;
    if (file.rows, file.cols) != (rows, cols) {
        return Err(bad(format!(
            "declared shape {}x{} but walls ({}, {}) with k = {} need {rows}x{cols}",
            file.rows, file.cols, file.left_wall, file.right_wall, file.k
        )));
    }
    if file.entries.len() != rows || file.entries.iter().any(|r| r.len() != cols) {
        return Err(bad(format!("entries do not form a {rows}x{cols} grid")));
    }
    let entries = file
        .entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| {
                    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(bad(format!("entry `{s}` is not a decimal integer")));
                    }
                    Ok(s.parse::<BigUint>().expect("digits parse"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let m = BlockTransferMatrix::from_rows(file.k, file.left_wall, file.right_wall, entries)?;
    Ok((file.tile_hash, m))
}

pub fn load_matrix(path: &Path) -> Result<(String, BlockTransferMatrix)> {
    parse_matrix(&read(path)?).map_err(|e| match e {
        Error::Format { what, reason } => {
            Error::Format { what: format!("{what} {}", path.display()), reason }
        }
        other => other,
    })
}

pub fn save_matrix(m: &BlockTransferMatrix, tile_hash: &str, path: &Path) -> Result<()> {
    write(path, &matrix_to_string(m, tile_hash))
}

fn big(x: &BigUint) -> Value {
    Value::String(x.to_str_radix(10))
}

fn paper_json(p: &PaperFormulaValue) -> Value {
    let (num, den) = p.reduced();
    json!({
        "sum": big(&p.sum),
        "divisor": big(&p.divisor),
        "divisible": p.divisible,
        "value": if p.divisible { big(&num) } else { Value::String(format!("{num}/{den}")) },
    })
}

fn record_json(r: &KRecord) -> Value {
    json!({
        "k": r.k,
        "paper": r.paper.as_ref().map(paper_json),
        "cycle_complete": r.cycle_complete.as_ref().map(big),
        "oracle": r.oracle.as_ref().map(big),
        "paper_matches_cycle_complete": r.paper_matches_cycle_complete(),
        "cycle_complete_matches_oracle": r.cycle_complete_matches_oracle(),
    })
}

fn oracle_json(o: &OracleCounts) -> Value {
    let by_k: serde_json::Map<String, Value> =
        o.by_k.iter().map(|(k, n)| (k.to_string(), Value::String(n.to_string()))).collect();
    json!({
        "total": o.total.to_string(),
        "other": o.other.to_string(),
        "traversing": by_k,
        "lemma_violations": o.lemma_violations.to_string(),
        "inconsistent_k": o.inconsistent_k.to_string(),
    })
}

/// The part of a report that depends only on the inputs and flags.
pub fn report_stable(report: &CountReport) -> Value {
    json!({
        "graph": report.graph,
        "tiles": report.tiles,
        "vertices": report.vertices,
        "edges": report.edges,
        "min_ws": report.min_ws,
        "mode": report.mode.to_string(),
        "records": report.records.iter().map(record_json).collect::<Vec<_>>(),
        "oracle": report.oracle.as_ref().map(oracle_json),
    })
}

/// Full `thc-report/1` document: schema tag, stable section, timings.
pub fn report_json(report: &CountReport) -> Value {
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    json!({
        "schema": REPORT_SCHEMA,
        "stable": report_stable(report),
        "timings_ms": {
            "matrices": ms(report.timings.matrices),
            "products": ms(report.timings.products),
            "formulas": ms(report.timings.formulas),
            "oracle": ms(report.timings.oracle),
        },
    })
}
