//! The reference tiles and tiled graphs used throughout the tests and shipped
//! as fixture files.

use crate::graph::{Tile, TileSequence};

/// A single edge between a one-vertex left wall and a one-vertex right wall.
pub fn edge() -> Tile {
    Tile::new("EDGE", 2, &[(0, 1)], &[0], &[1])
}

/// A triangle with one internal vertex.
pub fn tri() -> Tile {
    Tile::new("TRI", 3, &[(0, 1), (1, 2), (0, 2)], &[0], &[2])
}

/// Two rails with a rung on the right wall.
pub fn ladder() -> Tile {
    Tile::new("LADDER", 4, &[(0, 2), (1, 3), (2, 3)], &[0, 1], &[2, 3])
}

/// [`ladder`] plus both diagonals.
pub fn xladder() -> Tile {
    Tile::new("XLADDER", 4, &[(0, 2), (1, 3), (2, 3), (0, 3), (1, 2)], &[0, 1], &[2, 3])
}

/// Complete bipartite (2,2)-tile.
pub fn k22() -> Tile {
    complete_bipartite("K22", 2)
}

/// A 2x3 grid block: the middle column is internal, rungs on the middle and
/// right columns.
pub fn grid3() -> Tile {
    Tile::new("GRID3", 6, &[(0, 2), (1, 3), (2, 3), (2, 4), (3, 5), (4, 5)], &[0, 1], &[4, 5])
}

/// Complete bipartite (3,3)-tile.
pub fn triple() -> Tile {
    complete_bipartite("TRIPLE", 3)
}

/// Complete bipartite (4,4)-tile.
pub fn quad() -> Tile {
    complete_bipartite("QUAD", 4)
}

/// A (2,3)-tile with one internal vertex.
pub fn widen() -> Tile {
    Tile::new("WIDEN", 6, &[(0, 2), (0, 5), (1, 5), (1, 4), (5, 3), (2, 3), (3, 4)], &[0, 1], &[2, 3, 4])
}

/// A (3,2)-tile with one internal vertex.
pub fn narrow() -> Tile {
    Tile::new("NARROW", 6, &[(0, 3), (0, 5), (1, 5), (2, 5), (2, 4), (5, 4), (3, 4)], &[0, 1, 2], &[3, 4])
}

/// A (4,4)-tile whose three-fold cyclization has one 4-traversing cycle
/// while the shift sum is 8, which 4! does not divide.
pub fn skew() -> Tile {
    Tile::new(
        "SKEW",
        8,
        &[(0, 4), (0, 5), (0, 6), (0, 7), (1, 6), (2, 7), (3, 4), (4, 7), (5, 6), (5, 7)],
        &[0, 1, 2, 3],
        &[4, 5, 6, 7],
    )
}

/// Left wall `0..n`, right wall `n..2n`, every left-right edge.
pub fn complete_bipartite(name: &str, n: usize) -> Tile {
    let edges: Vec<_> = (0..n).flat_map(|u| (n..2 * n).map(move |v| (u, v))).collect();
    let left: Vec<_> = (0..n).collect();
    let right: Vec<_> = (n..2 * n).collect();
    Tile::new(name, 2 * n, &edges, &left, &right)
}

pub fn tiles() -> Vec<Tile> {
    vec![edge(), tri(), ladder(), xladder(), k22(), grid3(), triple(), quad(), widen(), narrow(), skew()]
}

pub fn tile(name: &str) -> Option<Tile> {
    tiles().into_iter().find(|t| t.name == name)
}

fn repeat(tile: Tile, n: usize) -> TileSequence {
    TileSequence::uniform(&tile, n).expect("corpus tiles are valid")
}

/// A compatible sequence of four tiles with wall sizes 2, 3, 2, 2.
pub fn mixed() -> TileSequence {
    TileSequence::new(vec![widen(), narrow(), ladder(), xladder()]).expect("compatible")
}

/// The oracle-comparison corpus, keyed by fixture name.
pub fn graph_sequences() -> Vec<(&'static str, TileSequence)> {
    vec![
        ("edge3", repeat(edge(), 3)),
        ("tri3", repeat(tri(), 3)),
        ("ladder3", repeat(ladder(), 3)),
        ("ladder5", repeat(ladder(), 5)),
        ("xladder3", repeat(xladder(), 3)),
        ("xladder5", repeat(xladder(), 5)),
        ("triple3", repeat(triple(), 3)),
        ("mixed4", mixed()),
    ]
}

/// Wall size 4; the graph is the complete tripartite K(4,4,4).
pub fn quad3() -> TileSequence {
    repeat(quad(), 3)
}

pub fn skew3() -> TileSequence {
    repeat(skew(), 3)
}
