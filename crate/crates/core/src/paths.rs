//! Exhaustive enumeration of tile-local path systems.
//!
//! An entry of a tile's transfer matrix counts the sets of `k` vertex-disjoint
//! paths where path `j` joins left-wall position `b[j]` to right-wall position
//! `c[j]`, every internal vertex lies on some path, and the remaining wall
//! positions are on a path exactly when their mask bit is `1`. Paths may run
//! through wall vertices of either wall.
//!
//! The search grows the paths one after another from their fixed left
//! endpoints and drops a partial system as soon as some uncovered internal
//! vertex can no longer be reached from any open frontier.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Tile;
use crate::indexing::{EndpointFamily, EndpointString, MaskFamily, RemainderMask};
use crate::transfer::BlockTransferMatrix;

/// Largest tile the bitset search accepts.
pub const MAX_TILE_VERTICES: usize = 64;

/// One entry of a tile's transfer matrix.
#[derive(Clone, Debug)]
pub struct EntryQuery<'a> {
    pub tile: &'a Tile,
    pub k: usize,
    pub b: EndpointString,
    pub c: EndpointString,
    pub d: RemainderMask,
    pub e: RemainderMask,
}

impl EntryQuery<'_> {
    fn check(&self) -> Result<()> {
        let (lw, rw) = (self.tile.left_size(), self.tile.right_size());
        let bad = |msg: String| Err(Error::InvalidQuery(msg));
        if self.k == 0 || self.k > lw.min(rw) {
            return bad(format!("k = {} outside 1..={}", self.k, lw.min(rw)));
        }
        if self.b.k() != self.k || !self.b.fits(lw) {
            return bad(format!("left endpoints {} do not fit a wall of {lw}", self.b));
        }
        if self.c.k() != self.k || !self.c.fits(rw) {
            return bad(format!("right endpoints {} do not fit a wall of {rw}", self.c));
        }
        if self.d.len() != lw - self.k {
            return bad(format!("left mask {} should have {} bits", self.d, lw - self.k));
        }
        if self.e.len() != rw - self.k {
            return bad(format!("right mask {} should have {} bits", self.e, rw - self.k));
        }
        Ok(())
    }
}

/// Bitset view of a tile, shared by all searches on it.
struct Search<'t> {
    tile: &'t Tile,
    adj: Vec<u64>,
    internal: u64,
}

impl<'t> Search<'t> {
    fn new(tile: &'t Tile) -> Result<Self> {
        tile.check()?;
        if tile.vertex_count > MAX_TILE_VERTICES {
            return Err(Error::InvalidQuery(format!(
                "tile `{}` has {} vertices; at most {MAX_TILE_VERTICES} supported",
                tile.name, tile.vertex_count
            )));
        }
        let mut adj = vec![0u64; tile.vertex_count];
        for &[u, v] in &tile.edges {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        let internal = tile.internal_vertices().into_iter().fold(0u64, |acc, v| acc | (1 << v));
        Ok(Search { tile, adj, internal })
    }

    /// Endpoint vertex pairs for `(b, c)`.
    fn pairs(&self, b: &EndpointString, c: &EndpointString) -> Vec<(usize, usize)> {
        b.positions()
            .iter()
            .zip(c.positions())
            .map(|(&p, &q)| (self.tile.left_wall[p - 1], self.tile.right_wall[q - 1]))
            .collect()
    }

    /// Calls `visit(used, paths)` once per qualifying path system. `forbidden`
    /// vertices are never entered.
    fn run<F>(&self, pairs: &[(usize, usize)], forbidden: u64, visit: &mut F)
    where
        F: FnMut(u64, &[Vec<usize>]),
    {
        let reserved = pairs.iter().fold(0u64, |acc, &(s, t)| acc | (1 << s) | (1 << t));
        let mut state =
            State { pairs, reserved, forbidden, paths: pairs.iter().map(|_| Vec::new()).collect() };
        let (s0, _) = pairs[0];
        state.paths[0].push(s0);
        self.grow(&mut state, 0, s0, 1 << s0, visit);
    }

    fn grow<F>(&self, st: &mut State<'_>, j: usize, at: usize, used: u64, visit: &mut F)
    where
        F: FnMut(u64, &[Vec<usize>]),
    {
        if !self.still_coverable(st, j, at, used) {
            return;
        }
        let target = st.pairs[j].1;
        let mut options = self.adj[at] & !used & !st.forbidden;
        while options != 0 {
            let w = options.trailing_zeros() as usize;
            options &= options - 1;
            let bit = 1u64 << w;
            if w == target {
                st.paths[j].push(w);
                let used = used | bit;
                if j + 1 == st.pairs.len() {
                    if self.internal & !used == 0 {
                        visit(used, &st.paths);
                    }
                } else {
                    let s = st.pairs[j + 1].0;
                    st.paths[j + 1].push(s);
                    self.grow(st, j + 1, s, used | (1 << s), visit);
                    st.paths[j + 1].pop();
                }
                st.paths[j].pop();
            } else if st.reserved & bit == 0 {
                st.paths[j].push(w);
                self.grow(st, j, w, used | bit, visit);
                st.paths[j].pop();
            }
        }
    }

    /// Whether every uncovered internal vertex is reachable from an open
    /// frontier through free vertices.
    fn still_coverable(&self, st: &State<'_>, j: usize, at: usize, used: u64) -> bool {
        let missing = self.internal & !used;
        if missing == 0 {
            return true;
        }
        let free = !used & !st.forbidden & !st.reserved;
        let mut frontier = 1u64 << at;
        for &(s, _) in &st.pairs[j + 1..] {
            frontier |= 1 << s;
        }
        let mut reach = 0u64;
        let mut todo = frontier;
        while todo != 0 {
            let v = todo.trailing_zeros() as usize;
            todo &= todo - 1;
            let next = self.adj[v] & free & !reach;
            reach |= next;
            todo |= next;
        }
        missing & !reach == 0
    }

    fn mask_of(&self, wall: &[usize], remaining: &[usize], used: u64) -> u64 {
        remaining.iter().fold(0u64, |acc, &p| (acc << 1) | ((used >> wall[p - 1]) & 1))
    }
}

struct State<'p> {
    pairs: &'p [(usize, usize)],
    reserved: u64,
    forbidden: u64,
    paths: Vec<Vec<usize>>,
}

/// Visit every path system with endpoints `(b, c)` that covers the tile's
/// internal vertices, regardless of how the remaining wall vertices are used.
/// Each path is reported from its left endpoint to its right endpoint.
pub fn for_each_path_system<F>(
    tile: &Tile,
    b: &EndpointString,
    c: &EndpointString,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&[Vec<usize>]),
{
    let search = Search::new(tile)?;
    let k = b.k();
    if k == 0 || c.k() != k || !b.fits(tile.left_size()) || !c.fits(tile.right_size()) {
        return Err(Error::InvalidQuery(format!("endpoints {b} / {c} do not fit tile `{}`", tile.name)));
    }
    let pairs = search.pairs(b, c);
    search.run(&pairs, 0, &mut |_, paths| visit(paths));
    Ok(())
}

/// Number of path systems described by `q`.
pub fn count_path_systems(q: &EntryQuery<'_>) -> Result<BigUint> {
    q.check()?;
    let search = Search::new(q.tile)?;
    let tile = q.tile;
    let left_rest = q.b.remaining(tile.left_size());
    let right_rest = q.c.remaining(tile.right_size());

    let mut forbidden = 0u64;
    for (i, &p) in left_rest.iter().enumerate() {
        if !q.d.bit(i) {
            forbidden |= 1 << tile.left_wall[p - 1];
        }
    }
    for (i, &p) in right_rest.iter().enumerate() {
        if !q.e.bit(i) {
            forbidden |= 1 << tile.right_wall[p - 1];
        }
    }

    let pairs = search.pairs(&q.b, &q.c);
    let mut count = 0u64;
    search.run(&pairs, forbidden, &mut |used, _| {
        if search.mask_of(&tile.left_wall, &left_rest, used) == q.d.value()
            && search.mask_of(&tile.right_wall, &right_rest, used) == q.e.value()
        {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// The tile's full transfer matrix for `k` paths.
///
/// Blocks are filled independently (in parallel); within a block one search
/// over `(b, c)` tallies every `(d, e)` entry at once.
pub fn build_transfer_matrix(tile: &Tile, k: usize) -> Result<BlockTransferMatrix> {
    let search = Search::new(tile)?;
    let (lw, rw) = (tile.left_size(), tile.right_size());
    if k == 0 || k > lw.min(rw) {
        return Err(Error::InvalidK { k, max: lw.min(rw) });
    }
    let left = EndpointFamily::new(lw, k)?;
    let right = EndpointFamily::new(rw, k)?;
    let (lm, rm) = (MaskFamily::new(lw, k)?, MaskFamily::new(rw, k)?);
    let bs = left.enumerate();
    let cs = right.enumerate();

    let blocks: Vec<Vec<u64>> = (0..bs.len() * cs.len())
        .into_par_iter()
        .map(|idx| {
            let (b, c) = (&bs[idx / cs.len()], &cs[idx % cs.len()]);
            let left_rest = b.remaining(lw);
            let right_rest = c.remaining(rw);
            let mut block = vec![0u64; lm.len() * rm.len()];
            let pairs = search.pairs(b, c);
            search.run(&pairs, 0, &mut |used, _| {
                let d = search.mask_of(&tile.left_wall, &left_rest, used) as usize;
                let e = search.mask_of(&tile.right_wall, &right_rest, used) as usize;
                // descending mask order: rank = len - 1 - value
                block[(lm.len() - 1 - d) * rm.len() + (rm.len() - 1 - e)] += 1;
            });
            block
        })
        .collect();

    let mut m = BlockTransferMatrix::zeros(k, lw, rw)?;
    for (idx, block) in blocks.into_iter().enumerate() {
        let (p, r) = (idx / cs.len(), idx % cs.len());
        for (cell, count) in block.into_iter().enumerate() {
            if count != 0 {
                let (u, v) = (cell / rm.len(), cell % rm.len());
                m.set(p * lm.len() + u, r * rm.len() + v, BigUint::from(count));
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use num_traits::{ToPrimitive, Zero};

    fn es(v: &[usize]) -> EndpointString {
        EndpointString::new(v.to_vec())
    }

    fn mask(s: &str) -> RemainderMask {
        s.parse().unwrap()
    }

    fn entry(tile: &Tile, b: &[usize], c: &[usize], d: &str, e: &str) -> u64 {
        let q = EntryQuery { tile, k: b.len(), b: es(b), c: es(c), d: mask(d), e: mask(e) };
        count_path_systems(&q).unwrap().to_u64().unwrap()
    }

    fn rows(m: &BlockTransferMatrix) -> Vec<Vec<u64>> {
        m.to_rows().into_iter().map(|r| r.into_iter().map(|x| x.to_u64().unwrap()).collect()).collect()
    }

    #[test]
    fn single_edge_entry() {
        assert_eq!(entry(&corpus::edge(), &[1], &[1], "", ""), 1);
    }

    #[test]
    fn ladder_entries() {
        let l = corpus::ladder();
        assert_eq!(entry(&l, &[1, 2], &[1, 2], "", ""), 1);
        assert_eq!(entry(&l, &[1, 2], &[2, 1], "", ""), 0);
    }

    #[test]
    fn xladder_zigzag_entry() {
        // 0-2-1-3: covers left position 2 and right position 1 as interiors
        assert_eq!(entry(&corpus::xladder(), &[1], &[2], "1", "1"), 1);
    }

    #[test]
    fn invalid_queries_are_rejected() {
        let l = corpus::ladder();
        let q = EntryQuery { tile: &l, k: 1, b: es(&[1]), c: es(&[1]), d: mask(""), e: mask("1") };
        assert!(matches!(count_path_systems(&q), Err(Error::InvalidQuery(_))));
        let q = EntryQuery { tile: &l, k: 3, b: es(&[1, 2, 3]), c: es(&[1, 2, 3]), d: mask(""), e: mask("") };
        assert!(matches!(count_path_systems(&q), Err(Error::InvalidQuery(_))));
        let q = EntryQuery { tile: &l, k: 1, b: es(&[3]), c: es(&[1]), d: mask("1"), e: mask("1") };
        assert!(matches!(count_path_systems(&q), Err(Error::InvalidQuery(_))));
    }

    #[test]
    fn small_matrices() {
        assert_eq!(rows(&build_transfer_matrix(&corpus::edge(), 1).unwrap()), vec![vec![1]]);
        assert_eq!(rows(&build_transfer_matrix(&corpus::ladder(), 2).unwrap()), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(
            rows(&build_transfer_matrix(&corpus::xladder(), 2).unwrap()),
            vec![vec![1, 1], vec![1, 1]]
        );
    }

    #[test]
    fn build_rejects_bad_k() {
        assert!(matches!(build_transfer_matrix(&corpus::ladder(), 0), Err(Error::InvalidK { .. })));
        assert!(matches!(build_transfer_matrix(&corpus::ladder(), 3), Err(Error::InvalidK { .. })));
        assert!(matches!(build_transfer_matrix(&corpus::widen(), 3), Err(Error::InvalidK { .. })));
    }

    #[test]
    fn matrix_agrees_with_single_entries() {
        for tile in [corpus::xladder(), corpus::widen(), corpus::narrow(), corpus::grid3(), corpus::triple()]
        {
            for k in 1..=tile.left_size().min(tile.right_size()) {
                let m = build_transfer_matrix(&tile, k).unwrap();
                let (lw, rw) = (tile.left_size(), tile.right_size());
                let (lm, rm) = (MaskFamily::new(lw, k).unwrap(), MaskFamily::new(rw, k).unwrap());
                for (p, b) in EndpointFamily::new(lw, k).unwrap().enumerate().iter().enumerate() {
                    for (r, c) in EndpointFamily::new(rw, k).unwrap().enumerate().iter().enumerate() {
                        for (u, d) in lm.enumerate().into_iter().enumerate() {
                            for (v, e) in rm.enumerate().into_iter().enumerate() {
                                let q = EntryQuery { tile: &tile, k, b: b.clone(), c: c.clone(), d, e };
                                let direct = count_path_systems(&q).unwrap();
                                let cell = m.get(p * lm.len() + u, r * rm.len() + v);
                                assert_eq!(&direct, cell, "{} k={k} {b} {c} {d} {e}", tile.name);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mirrored_tile_gives_reindexed_transpose() {
        for tile in corpus::tiles() {
            let mirror = tile.mirrored();
            for k in 1..=tile.left_size().min(tile.right_size()) {
                let m = build_transfer_matrix(&tile, k).unwrap();
                let w = build_transfer_matrix(&mirror, k).unwrap();
                let (lw, rw) = (tile.left_size(), tile.right_size());
                let (le, re) = (EndpointFamily::new(lw, k).unwrap(), EndpointFamily::new(rw, k).unwrap());
                let (lm, rm) = (MaskFamily::new(lw, k).unwrap(), MaskFamily::new(rw, k).unwrap());
                for b in le.enumerate() {
                    for c in re.enumerate() {
                        for d in lm.enumerate() {
                            for e in rm.enumerate() {
                                let here = m.entry(&b, &c, &d, &e).unwrap();
                                let there = w.entry(&c, &b, &e, &d).unwrap();
                                assert_eq!(here, there, "{} k={k}", tile.name);
                            }
                        }
                    }
                }
            }
        }
    }

    fn connected_avoiding(tile: &Tile, from: usize, to: usize, avoid: &[usize]) -> bool {
        let adj = tile.adjacency();
        let mut seen = vec![false; tile.vertex_count];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            for &w in &adj[u] {
                if !seen[w] && !avoid.contains(&w) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    #[test]
    fn separated_endpoints_give_zero_blocks() {
        // internal 2 hangs between left 0 and right 3; 1 reaches the right wall only through 4
        let gate = Tile::new("gate", 5, &[(0, 2), (2, 3), (1, 4), (0, 3), (3, 4)], &[0, 1], &[3, 4]);
        let mut tiles = corpus::tiles();
        tiles.push(gate.clone());
        let mut zero_blocks = 0;
        for tile in tiles {
            let (lw, rw) = (tile.left_size(), tile.right_size());
            for k in 1..=lw.min(rw) {
                let m = build_transfer_matrix(&tile, k).unwrap();
                let (lm, rm) = (MaskFamily::new(lw, k).unwrap(), MaskFamily::new(rw, k).unwrap());
                for (p, b) in EndpointFamily::new(lw, k).unwrap().enumerate().iter().enumerate() {
                    for (r, c) in EndpointFamily::new(rw, k).unwrap().enumerate().iter().enumerate() {
                        let ends: Vec<(usize, usize)> = b
                            .positions()
                            .iter()
                            .zip(c.positions())
                            .map(|(&x, &y)| (tile.left_wall[x - 1], tile.right_wall[y - 1]))
                            .collect();
                        let separated = ends.iter().any(|&(s, t)| {
                            let others: Vec<usize> =
                                ends.iter().filter(|&&e| e != (s, t)).flat_map(|&(x, y)| [x, y]).collect();
                            !connected_avoiding(&tile, s, t, &others)
                        });
                        if separated {
                            zero_blocks += 1;
                            for u in 0..lm.len() {
                                for v in 0..rm.len() {
                                    assert!(m.get(p * lm.len() + u, r * rm.len() + v).is_zero());
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(zero_blocks > 0);
        let m = build_transfer_matrix(&gate, 2).unwrap();
        assert_eq!(rows(&m), vec![vec![1, 0], vec![0, 1]]);

        let pendant = Tile::new("pendant", 4, &[(0, 1), (1, 2), (1, 3)], &[0], &[2]);
        let m = build_transfer_matrix(&pendant, 1).unwrap();
        assert!(m.to_rows().iter().flatten().all(Zero::is_zero), "internal leaf 3 can never be covered");
    }

    #[test]
    fn path_systems_are_disjoint_and_anchored() {
        let tile = corpus::quad();
        let b = es(&[1, 3]);
        let c = es(&[4, 1]);
        let mut seen = 0;
        for_each_path_system(&tile, &b, &c, |paths| {
            seen += 1;
            assert_eq!(paths.len(), 2);
            let mut all: Vec<usize> = paths.iter().flatten().copied().collect();
            let n = all.len();
            all.sort_unstable();
            all.dedup();
            assert_eq!(all.len(), n, "paths overlap");
            assert_eq!(paths[0][0], 0);
            assert_eq!(*paths[0].last().unwrap(), 7);
            assert_eq!(paths[1][0], 2);
            assert_eq!(*paths[1].last().unwrap(), 4);
        })
        .unwrap();
        assert!(seen > 0);
    }
}
