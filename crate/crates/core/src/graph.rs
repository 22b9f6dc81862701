//! Tiles, compatible tile sequences, joins and cyclizations.
//!
//! A tile is a connected graph with two disjoint, ordered walls. Tiles are glued
//! by identifying the right wall of one with the left wall of the next, position
//! by position; a cyclically compatible sequence of at least three tiles closes
//! up into a tiled graph. Wall *positions* (not raw vertex ids) are the currency
//! of every downstream index.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WallSide {
    Left,
    Right,
}

impl fmt::Display for WallSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WallSide::Left => f.write_str("left"),
            WallSide::Right => f.write_str("right"),
        }
    }
}

/// A single broken tile invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyWall(WallSide),
    WallVertexOutOfRange { wall: WallSide, vertex: usize },
    RepeatedWallVertex { wall: WallSide, vertex: usize },
    WallsShareVertex(usize),
    SelfLoop(usize),
    EdgeOutOfRange(usize, usize),
    DuplicateEdge(usize, usize),
    NotConnected,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyWall(side) => write!(f, "{side} wall is empty"),
            Violation::WallVertexOutOfRange { wall, vertex } => {
                write!(f, "{wall} wall names vertex {vertex}, which does not exist")
            }
            Violation::RepeatedWallVertex { wall, vertex } => {
                write!(f, "{wall} wall repeats vertex {vertex}")
            }
            Violation::WallsShareVertex(v) => {
                write!(f, "walls share vertex {v} (left and right walls must be disjoint)")
            }
            Violation::SelfLoop(v) => write!(f, "self-loop at vertex {v}"),
            Violation::EdgeOutOfRange(u, v) => write!(f, "edge ({u}, {v}) names a missing vertex"),
            Violation::DuplicateEdge(u, v) => write!(f, "duplicate edge ({u}, {v})"),
            Violation::NotConnected => f.write_str("graph not connected"),
        }
    }
}

/// A connected graph with an ordered left wall and an ordered right wall.
///
/// Serializes to the tile file format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub name: String,
    #[serde(rename = "vertices")]
    pub vertex_count: usize,
    pub edges: Vec<[usize; 2]>,
    pub left_wall: Vec<usize>,
    pub right_wall: Vec<usize>,
}

#[inline]
fn norm(u: usize, v: usize) -> (usize, usize) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Tile {
    pub fn new(
        name: impl Into<String>,
        vertex_count: usize,
        edges: &[(usize, usize)],
        left_wall: &[usize],
        right_wall: &[usize],
    ) -> Self {
        Tile {
            name: name.into(),
            vertex_count,
            edges: edges.iter().map(|&(u, v)| [u, v]).collect(),
            left_wall: left_wall.to_vec(),
            right_wall: right_wall.to_vec(),
        }
    }

    /// Every broken invariant, in a fixed order. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.vertex_count;

        for (side, wall) in [(WallSide::Left, &self.left_wall), (WallSide::Right, &self.right_wall)] {
            if wall.is_empty() {
                out.push(Violation::EmptyWall(side));
            }
            let mut seen = HashSet::new();
            for &v in wall {
                if v >= n {
                    out.push(Violation::WallVertexOutOfRange { wall: side, vertex: v });
                }
                if !seen.insert(v) {
                    out.push(Violation::RepeatedWallVertex { wall: side, vertex: v });
                }
            }
        }
        let left: HashSet<usize> = self.left_wall.iter().copied().collect();
        let mut shared: Vec<usize> = self.right_wall.iter().copied().filter(|v| left.contains(v)).collect();
        shared.sort_unstable();
        shared.dedup();
        out.extend(shared.into_iter().map(Violation::WallsShareVertex));

        let mut seen = HashSet::new();
        for &[u, v] in &self.edges {
            if u == v {
                out.push(Violation::SelfLoop(u));
                continue;
            }
            if u >= n || v >= n {
                out.push(Violation::EdgeOutOfRange(u, v));
                continue;
            }
            let e = norm(u, v);
            if !seen.insert(e) {
                out.push(Violation::DuplicateEdge(e.0, e.1));
            }
        }

        if n == 0 || !self.is_connected() {
            out.push(Violation::NotConnected);
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Fails with [`Error::InvalidTile`] listing every violation.
    pub fn check(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidTile { name: self.name.clone(), violations })
        }
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count;
        if n == 0 {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Adjacency lists, ignoring malformed edges.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count;
        let mut adj = vec![Vec::new(); n];
        for &[u, v] in &self.edges {
            if u != v && u < n && v < n && !adj[u].contains(&v) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn left_size(&self) -> usize {
        self.left_wall.len()
    }

    pub fn right_size(&self) -> usize {
        self.right_wall.len()
    }

    /// Vertices on neither wall.
    pub fn internal_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count)
            .filter(|v| !self.left_wall.contains(v) && !self.right_wall.contains(v))
            .collect()
    }

    /// Sorted, normalized edge list.
    pub fn canonical_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<_> = self.edges.iter().map(|&[u, v]| norm(u, v)).collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Hex SHA-256 over the tile's structure; the name does not participate.
    pub fn canonical_hash(&self) -> String {
        let mut text = format!("v{};e", self.vertex_count);
        for (u, v) in self.canonical_edges() {
            text.push_str(&format!("{u}-{v},"));
        }
        text.push_str(";l");
        for v in &self.left_wall {
            text.push_str(&format!("{v},"));
        }
        text.push_str(";r");
        for v in &self.right_wall {
            text.push_str(&format!("{v},"));
        }
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// The same graph with its walls swapped.
    pub fn mirrored(&self) -> Tile {
        Tile {
            name: format!("{}~", self.name),
            vertex_count: self.vertex_count,
            edges: self.edges.clone(),
            left_wall: self.right_wall.clone(),
            right_wall: self.left_wall.clone(),
        }
    }

    /// Structural equality: same vertex count, edge set and walls.
    pub fn same_structure(&self, other: &Tile) -> bool {
        self.vertex_count == other.vertex_count
            && self.left_wall == other.left_wall
            && self.right_wall == other.right_wall
            && self.canonical_edges() == other.canonical_edges()
    }
}

/// Whether `a`'s right wall can be glued onto `b`'s left wall.
pub fn compatible(a: &Tile, b: &Tile) -> bool {
    a.right_size() == b.left_size()
}

fn incompatible(a: &Tile, b: &Tile) -> Error {
    Error::IncompatibleTiles {
        left: a.name.clone(),
        right: b.name.clone(),
        right_wall: a.right_size(),
        left_wall: b.left_size(),
    }
}

/// Glue `b` onto the right of `a`.
///
/// Vertices are renumbered canonically: all of `a`'s vertices keep their ids,
/// then `b`'s vertices that are not on its left wall follow in their original
/// order.
pub fn join(a: &Tile, b: &Tile) -> Result<Tile> {
    a.check()?;
    b.check()?;
    if !compatible(a, b) {
        return Err(incompatible(a, b));
    }
    let mut map = vec![usize::MAX; b.vertex_count];
    for (j, &v) in b.left_wall.iter().enumerate() {
        map[v] = a.right_wall[j];
    }
    let mut next = a.vertex_count;
    for slot in map.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }

    let mut seen: HashSet<(usize, usize)> = a.canonical_edges().into_iter().collect();
    let mut edges = a.edges.clone();
    for (u, v) in b.canonical_edges() {
        let (gu, gv) = (map[u], map[v]);
        if gu == gv {
            return Err(Error::SelfLoop(gu));
        }
        let e = norm(gu, gv);
        if !seen.insert(e) {
            return Err(Error::ParallelEdge(e.0, e.1));
        }
        edges.push([e.0, e.1]);
    }

    Ok(Tile {
        name: format!("{}+{}", a.name, b.name),
        vertex_count: next,
        edges,
        left_wall: a.left_wall.clone(),
        right_wall: b.right_wall.iter().map(|&v| map[v]).collect(),
    })
}

/// A compatible sequence of valid tiles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileSequence {
    tiles: Vec<Tile>,
}

impl TileSequence {
    pub fn new(tiles: Vec<Tile>) -> Result<Self> {
        for t in &tiles {
            t.check()?;
        }
        for pair in tiles.windows(2) {
            if !compatible(&pair[0], &pair[1]) {
                return Err(incompatible(&pair[0], &pair[1]));
            }
        }
        Ok(TileSequence { tiles })
    }

    /// `count` copies of one tile.
    pub fn uniform(tile: &Tile, count: usize) -> Result<Self> {
        Self::new(vec![tile.clone(); count])
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn is_cyclically_compatible(&self) -> bool {
        match (self.tiles.first(), self.tiles.last()) {
            (Some(first), Some(last)) => compatible(last, first),
            _ => false,
        }
    }

    /// Rotate left by `by` tiles.
    pub fn rotated(&self, by: usize) -> Self {
        let mut tiles = self.tiles.clone();
        if !tiles.is_empty() {
            let by = by % tiles.len();
            tiles.rotate_left(by);
        }
        TileSequence { tiles }
    }

    /// The join of the whole sequence as a single tile.
    pub fn joined(&self) -> Result<Tile> {
        let mut iter = self.tiles.iter();
        let first = iter.next().ok_or(Error::TooFewTiles(0))?.clone();
        iter.try_fold(first, |acc, t| join(&acc, t))
    }

    /// Largest k for which every tile admits k traversing paths.
    pub fn max_k(&self) -> usize {
        self.tiles.iter().map(|t| t.left_size().min(t.right_size())).min().unwrap_or(0)
    }
}

/// The cyclization of a tile sequence, with the bookkeeping needed to map
/// every global vertex and edge back to the tile it came from.
#[derive(Clone, Debug)]
pub struct TiledGraph {
    sequence: TileSequence,
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    edge_tile: HashMap<(usize, usize), usize>,
    provenance: Vec<Vec<usize>>,
    walls: Vec<Vec<usize>>,
}

/// Close a tile sequence into a tiled graph.
///
/// Global ids follow the canonical join numbering with the final right wall
/// folded onto the initial left wall. Wall `i` is the left wall of tile `i`.
pub fn cyclize(seq: &TileSequence) -> Result<TiledGraph> {
    let tiles = seq.tiles();
    if tiles.len() < 3 {
        return Err(Error::TooFewTiles(tiles.len()));
    }
    if !seq.is_cyclically_compatible() {
        return Err(Error::NotCyclicallyCompatible {
            last_right: tiles[tiles.len() - 1].right_size(),
            first_left: tiles[0].left_size(),
        });
    }

    let last = tiles.len() - 1;
    let mut next = 0usize;
    let mut provenance: Vec<Vec<usize>> = Vec::with_capacity(tiles.len());
    let mut walls: Vec<Vec<usize>> = Vec::with_capacity(tiles.len());

    for (i, tile) in tiles.iter().enumerate() {
        let mut map = vec![usize::MAX; tile.vertex_count];
        if i > 0 {
            let prev = &tiles[i - 1];
            for (j, &v) in tile.left_wall.iter().enumerate() {
                map[v] = provenance[i - 1][prev.right_wall[j]];
            }
        }
        if i == last {
            for (j, &v) in tile.right_wall.iter().enumerate() {
                map[v] = provenance[0][tiles[0].left_wall[j]];
            }
        }
        for slot in map.iter_mut() {
            if *slot == usize::MAX {
                *slot = next;
                next += 1;
            }
        }
        walls.push(tile.left_wall.iter().map(|&v| map[v]).collect());
        provenance.push(map);
    }

    let mut edge_tile = HashMap::new();
    let mut edges = Vec::new();
    for (i, tile) in tiles.iter().enumerate() {
        for (u, v) in tile.canonical_edges() {
            let (gu, gv) = (provenance[i][u], provenance[i][v]);
            if gu == gv {
                return Err(Error::SelfLoop(gu));
            }
            let e = norm(gu, gv);
            if edge_tile.insert(e, i).is_some() {
                return Err(Error::ParallelEdge(e.0, e.1));
            }
            edges.push(e);
        }
    }
    edges.sort_unstable();

    Ok(TiledGraph { sequence: seq.clone(), vertex_count: next, edges, edge_tile, provenance, walls })
}

impl TiledGraph {
    pub fn sequence(&self) -> &TileSequence {
        &self.sequence
    }

    pub fn tiles(&self) -> &[Tile] {
        self.sequence.tiles()
    }

    pub fn tile_count(&self) -> usize {
        self.sequence.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Sorted, normalized edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Index of the tile an edge came from.
    pub fn edge_owner(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_tile.get(&norm(u, v)).copied()
    }

    /// Global id of `local` vertex in tile `tile`.
    pub fn global(&self, tile: usize, local: usize) -> usize {
        self.provenance[tile][local]
    }

    pub fn provenance(&self) -> &[Vec<usize>] {
        &self.provenance
    }

    /// Global ids of wall `i` (the left wall of tile `i`), in wall order.
    pub fn wall(&self, i: usize) -> &[usize] {
        &self.walls[i]
    }

    pub fn walls(&self) -> &[Vec<usize>] {
        &self.walls
    }

    /// Smallest left-wall size over the tiles.
    pub fn min_ws(&self) -> usize {
        self.tiles().iter().map(Tile::left_size).min().unwrap_or(0)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Smallest left-wall size over the tiles of a tiled graph.
pub fn min_ws(graph: &TiledGraph) -> usize {
    graph.min_ws()
}
