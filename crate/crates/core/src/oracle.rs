//! Brute-force ground truth: every Hamiltonian cycle of a tiled graph,
//! classified by how it meets each tile.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::graph::TiledGraph;

pub const DEFAULT_VERTEX_CAP: usize = 24;

/// Calls `visit` once per undirected Hamiltonian cycle of the graph given by
/// adjacency lists. Each cycle starts at vertex 0 and runs in the direction
/// whose second vertex is smaller than its last.
pub fn enumerate_hamiltonian_cycles<F>(adj: &[Vec<usize>], cap: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&[usize]),
{
    let n = adj.len();
    if n > cap || n > 64 {
        return Err(Error::GraphTooLarge { vertices: n, cap: cap.min(64) });
    }
    if n < 3 {
        return Ok(());
    }
    let masks: Vec<u64> = adj.iter().map(|list| list.iter().fold(0u64, |acc, &w| acc | (1 << w))).collect();
    let mut search = CycleSearch {
        adj: &masks,
        n,
        all: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
        path: Vec::with_capacity(n),
    };
    search.path.push(0);
    search.extend(1, &mut visit);
    Ok(())
}

struct CycleSearch<'a> {
    adj: &'a [u64],
    n: usize,
    all: u64,
    path: Vec<usize>,
}

impl CycleSearch<'_> {
    fn extend<F: FnMut(&[usize])>(&mut self, visited: u64, visit: &mut F) {
        let at = *self.path.last().expect("path starts at 0");
        if self.path.len() == self.n {
            if self.adj[at] & 1 != 0 && self.path[1] < self.path[self.n - 1] {
                visit(&self.path);
            }
            return;
        }
        if !self.viable(visited, at) {
            return;
        }
        let mut options = self.adj[at] & !visited;
        while options != 0 {
            let w = options.trailing_zeros() as usize;
            options &= options - 1;
            self.path.push(w);
            self.extend(visited | (1 << w), visit);
            self.path.pop();
        }
    }

    /// Every unvisited vertex still has two usable neighbours, the unvisited
    /// part stays connected to the current end, and the start can still be
    /// re-entered through a vertex larger than the second one.
    fn viable(&self, visited: u64, at: usize) -> bool {
        let open = self.all & !visited;
        let ends = 1u64 | (1 << at);
        let mut rest = open;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if (self.adj[v] & (open | ends)).count_ones() < 2 {
                return false;
            }
        }
        if self.path.len() >= 2 {
            let second = self.path[1];
            let higher = !((1u64 << (second + 1)) - 1);
            if self.adj[0] & open & higher == 0 {
                return false;
            }
        }
        // connectivity of the unvisited vertices from the current end
        let mut reach = self.adj[at] & open;
        let mut todo = reach;
        while todo != 0 {
            let v = todo.trailing_zeros() as usize;
            todo &= todo - 1;
            let next = self.adj[v] & open & !reach;
            reach |= next;
            todo |= next;
        }
        reach == open
    }
}

/// Every Hamiltonian cycle of a tiled graph, in canonical vertex order.
pub fn hamiltonian_cycles(graph: &TiledGraph, cap: usize) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    enumerate_hamiltonian_cycles(&graph.adjacency(), cap, |c| out.push(c.to_vec()))?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    /// A path with one end on each wall.
    LeftRightPath,
    /// A path with both ends on the same wall.
    SameWallPath,
    /// A path ending in, or an isolated, non-wall vertex.
    InteriorDegreeAnomaly,
    /// A wall vertex none of whose cycle edges belong to this tile.
    IsolatedWallVertex,
    /// The whole cycle inside one tile.
    WholeCycle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub kind: ComponentKind,
    /// Global vertex ids, in path order for paths.
    pub vertices: Vec<usize>,
}

impl Component {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.vertices[0], *self.vertices.last().expect("non-empty"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileEvidence {
    pub tile: usize,
    pub components: Vec<Component>,
}

impl TileEvidence {
    pub fn count(&self, kind: ComponentKind) -> usize {
        self.components.iter().filter(|c| c.kind == kind).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Traversing(usize),
    Other,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Traversing(k) => write!(f, "traversing({k})"),
            Verdict::Other => f.write_str("other"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CycleClassification {
    /// Vertex order, starting at vertex 0.
    pub cycle: Vec<usize>,
    pub verdict: Verdict,
    pub tiles: Vec<TileEvidence>,
    pub diagnostics: Vec<String>,
}

impl CycleClassification {
    /// Normalized edge set of the cycle.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.cycle.len();
        let mut out: Vec<_> = (0..n)
            .map(|i| {
                let (u, v) = (self.cycle[i], self.cycle[(i + 1) % n]);
                (u.min(v), u.max(v))
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Breaches of the expected intersection shape: every component must be a path or an
    /// isolated wall vertex, and only wall vertices may end a path.
    pub fn lemma_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.tiles {
            for c in &t.components {
                match c.kind {
                    ComponentKind::InteriorDegreeAnomaly => out.push(format!(
                        "tile {}: component {:?} ends in or isolates a non-wall vertex",
                        t.tile, c.vertices
                    )),
                    ComponentKind::WholeCycle => {
                        out.push(format!("tile {}: contains the whole cycle", t.tile))
                    }
                    _ => {}
                }
            }
        }
        out
    }
}

/// Precomputed per-graph lookups for classification.
struct Layout {
    n: usize,
    owner: Vec<u16>,
    // per tile: membership, left wall, right wall as bitsets
    member: Vec<u64>,
    left: Vec<u64>,
    right: Vec<u64>,
}

const NO_OWNER: u16 = u16::MAX;

impl Layout {
    fn new(graph: &TiledGraph) -> Result<Self> {
        let n = graph.vertex_count();
        if n > 64 || graph.tile_count() >= NO_OWNER as usize {
            return Err(Error::GraphTooLarge { vertices: n, cap: 64 });
        }
        let mut owner = vec![NO_OWNER; n * n];
        for &(u, v) in graph.edges() {
            let t = graph.edge_owner(u, v).expect("every edge has an owner") as u16;
            owner[u * n + v] = t;
            owner[v * n + u] = t;
        }
        let bits = |vs: &[usize]| vs.iter().fold(0u64, |acc, &v| acc | (1 << v));
        let tiles = graph.tile_count();
        let member = graph.provenance().iter().map(|m| bits(m)).collect();
        let left = (0..tiles).map(|i| bits(graph.wall(i))).collect();
        let right = (0..tiles).map(|i| bits(graph.wall((i + 1) % tiles))).collect();
        Ok(Layout { n, owner, member, left, right })
    }
}

fn check_cycle(graph: &TiledGraph, cycle: &[usize]) -> Result<()> {
    let n = graph.vertex_count();
    if cycle.len() != n {
        return Err(Error::NotAHamiltonianCycle(format!("{} vertices listed, graph has {n}", cycle.len())));
    }
    let mut seen = vec![false; n];
    for &v in cycle {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::NotAHamiltonianCycle(format!("vertex {v} missing or repeated")));
        }
    }
    for i in 0..n {
        let (u, v) = (cycle[i], cycle[(i + 1) % n]);
        if graph.edge_owner(u, v).is_none() {
            return Err(Error::NotAHamiltonianCycle(format!("({u}, {v}) is not an edge")));
        }
    }
    Ok(())
}

fn classify_with(layout: &Layout, cycle: &[usize]) -> CycleClassification {
    let n = layout.n;
    let tiles = layout.member.len();
    // cycle neighbours of each vertex
    let mut nb = vec![[0usize; 2]; n];
    for i in 0..n {
        let v = cycle[i];
        nb[v] = [cycle[(i + n - 1) % n], cycle[(i + 1) % n]];
    }

    let mut evidence = Vec::with_capacity(tiles);
    let mut path_counts = Vec::with_capacity(tiles);
    let mut shaped = true;
    for t in 0..tiles {
        let tile_of = |u: usize, v: usize| layout.owner[u * n + v] as usize == t;
        let walls = layout.left[t] | layout.right[t];
        let mut done = 0u64;
        let mut components = Vec::new();
        let mut members = layout.member[t];
        while members != 0 {
            let v = members.trailing_zeros() as usize;
            members &= members - 1;
            if done & (1 << v) != 0 {
                continue;
            }
            let inside: Vec<usize> = nb[v].iter().copied().filter(|&w| tile_of(v, w)).collect();
            if inside.is_empty() {
                done |= 1 << v;
                let kind = if walls & (1 << v) != 0 {
                    ComponentKind::IsolatedWallVertex
                } else {
                    ComponentKind::InteriorDegreeAnomaly
                };
                components.push(Component { kind, vertices: vec![v] });
                continue;
            }
            if inside.len() == 2 {
                continue; // an interior point; reached from an end below, or a whole cycle
            }
            // v is a path end: walk to the other end
            let mut path = vec![v];
            done |= 1 << v;
            let (mut prev, mut at) = (v, inside[0]);
            loop {
                path.push(at);
                done |= 1 << at;
                let next = nb[at].iter().copied().find(|&w| w != prev && tile_of(at, w));
                match next {
                    Some(w) => {
                        prev = at;
                        at = w;
                    }
                    None => break,
                }
            }
            let (a, b) = (path[0], at);
            let on = |mask: u64, x: usize| mask & (1 << x) != 0;
            let kind = if !on(walls, a) || !on(walls, b) {
                ComponentKind::InteriorDegreeAnomaly
            } else if (on(layout.left[t], a) && on(layout.right[t], b))
                || (on(layout.right[t], a) && on(layout.left[t], b))
            {
                ComponentKind::LeftRightPath
            } else {
                ComponentKind::SameWallPath
            };
            let vertices = if on(layout.left[t], a) || !on(layout.left[t], b) {
                path
            } else {
                path.into_iter().rev().collect()
            };
            components.push(Component { kind, vertices });
        }
        if layout.member[t] & !done != 0 {
            // vertices of degree two never reached from an end
            let rest = layout.member[t] & !done;
            components.push(Component {
                kind: ComponentKind::WholeCycle,
                vertices: (0..n).filter(|&x| rest & (1 << x) != 0).collect(),
            });
        }
        let ev = TileEvidence { tile: t, components };
        let lr = ev.count(ComponentKind::LeftRightPath);
        if lr == 0 || lr + ev.count(ComponentKind::IsolatedWallVertex) != ev.components.len() {
            shaped = false;
        }
        path_counts.push(lr);
        evidence.push(ev);
    }

    let mut diagnostics = Vec::new();
    let verdict = if shaped {
        let k = path_counts[0];
        if path_counts.iter().all(|&c| c == k) {
            Verdict::Traversing(k)
        } else {
            diagnostics.push(format!("tiles disagree on the number of traversing paths: {path_counts:?}"));
            Verdict::Other
        }
    } else {
        Verdict::Other
    };

    CycleClassification { cycle: cycle.to_vec(), verdict, tiles: evidence, diagnostics }
}

/// Split a Hamiltonian cycle along the tiles and decide whether it is
/// k-traversing.
pub fn classify(graph: &TiledGraph, cycle: &[usize]) -> Result<CycleClassification> {
    check_cycle(graph, cycle)?;
    Ok(classify_with(&Layout::new(graph)?, cycle))
}

/// Tallies over all Hamiltonian cycles of a graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleCounts {
    pub total: u64,
    pub other: u64,
    pub by_k: BTreeMap<usize, u64>,
    /// Cycles whose tile intersections break the expected shape; zero for any simple graph.
    pub lemma_violations: u64,
    /// Cycles whose tiles all looked traversing but disagreed on k.
    pub inconsistent_k: u64,
}

impl OracleCounts {
    pub fn count(&self, k: usize) -> BigUint {
        BigUint::from(self.by_k.get(&k).copied().unwrap_or(0))
    }

    pub fn traversing_total(&self) -> u64 {
        self.by_k.values().sum()
    }
}

/// Classify every Hamiltonian cycle of the graph.
pub fn oracle_count(graph: &TiledGraph, cap: usize) -> Result<OracleCounts> {
    let layout = Layout::new(graph)?;
    let mut counts = OracleCounts::default();
    enumerate_hamiltonian_cycles(&graph.adjacency(), cap, |cycle| {
        let c = classify_with(&layout, cycle);
        counts.total += 1;
        if !c.lemma_violations().is_empty() {
            counts.lemma_violations += 1;
        }
        if !c.diagnostics.is_empty() {
            counts.inconsistent_k += 1;
        }
        match c.verdict {
            Verdict::Traversing(k) => *counts.by_k.entry(k).or_insert(0) += 1,
            Verdict::Other => counts.other += 1,
        }
    })?;
    Ok(counts)
}

/// Visit the classification of every Hamiltonian cycle.
pub fn for_each_classification<F>(graph: &TiledGraph, cap: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&CycleClassification),
{
    let layout = Layout::new(graph)?;
    enumerate_hamiltonian_cycles(&graph.adjacency(), cap, |cycle| {
        visit(&classify_with(&layout, cycle));
    })
}

/// One line per cycle: canonical vertex order, then the verdict.
pub fn dump_cycles(graph: &TiledGraph, cap: usize, out: &mut dyn std::io::Write) -> Result<()> {
    let mut err = None;
    for_each_classification(graph, cap, |c| {
        if err.is_some() {
            return;
        }
        let verts: Vec<String> = c.cycle.iter().map(|v| v.to_string()).collect();
        if let Err(e) = writeln!(out, "{} {}", verts.join(" "), c.verdict) {
            err = Some(e);
        }
    })?;
    match err {
        Some(source) => Err(Error::Io { path: "<cycle dump>".into(), source }),
        None => Ok(()),
    }
}
