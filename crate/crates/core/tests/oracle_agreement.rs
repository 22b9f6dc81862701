//! Transfer-matrix counts against exhaustive enumeration on the corpus.

use num_bigint::BigUint;
use thc_core::corpus;
use thc_core::counting::{cycle_complete_counts, thc_cycle_complete, thc_paper};
use thc_core::oracle::{for_each_classification, oracle_count, ComponentKind, Verdict};
use thc_core::{cyclize, TiledGraph};

fn corpus_graphs() -> Vec<(&'static str, TiledGraph)> {
    corpus::graph_sequences().into_iter().map(|(name, seq)| (name, cyclize(&seq).unwrap())).collect()
}

#[test]
fn cycle_complete_equals_oracle() {
    for (name, g) in corpus_graphs() {
        let oracle = oracle_count(&g, 24).unwrap();
        for k in 1..=g.min_ws() {
            assert_eq!(thc_cycle_complete(&g, k).unwrap(), oracle.count(k), "{name} k={k}");
        }
        assert!(oracle.by_k.keys().all(|&k| k <= g.min_ws()), "{name}");
        assert!(oracle.traversing_total() <= oracle.total, "{name}");
    }
}

#[test]
fn shift_formula_agrees_up_to_three() {
    let mut saw_three = false;
    for (name, g) in corpus_graphs() {
        for k in 1..=g.min_ws().min(3) {
            let paper = thc_paper(&g, k).unwrap();
            assert!(paper.divisible, "{name} k={k}: {paper}");
            assert_eq!(paper.quotient().unwrap(), thc_cycle_complete(&g, k).unwrap(), "{name} k={k}");
            saw_three |= k == 3;
        }
    }
    assert!(saw_three);
}

#[test]
fn anchors() {
    let graphs = corpus_graphs();
    let get = |n: &str| &graphs.iter().find(|(name, _)| *name == n).unwrap().1;

    assert_eq!(thc_cycle_complete(get("xladder3"), 2).unwrap(), BigUint::from(4u32));
    assert_eq!(thc_paper(get("xladder3"), 2).unwrap().quotient().unwrap(), BigUint::from(4u32));
    assert_eq!(thc_cycle_complete(get("edge3"), 1).unwrap(), BigUint::from(1u32));

    let ladder = get("ladder3");
    for k in 1..=2 {
        assert_eq!(thc_cycle_complete(ladder, k).unwrap(), BigUint::from(0u32));
    }
    let o = oracle_count(ladder, 24).unwrap();
    assert_eq!((o.total, o.other, o.traversing_total()), (3, 3, 0));
}

#[test]
fn structure_lemma_holds_on_every_cycle() {
    for (name, g) in corpus_graphs() {
        let mut cycles = 0;
        for_each_classification(&g, 24, |c| {
            cycles += 1;
            assert!(c.lemma_violations().is_empty(), "{name}: {:?}", c.lemma_violations());
            assert!(c.diagnostics.is_empty(), "{name}: {:?}", c.diagnostics);
            for t in &c.tiles {
                // every tile vertex is accounted for exactly once
                let mut seen: Vec<usize> = t.components.iter().flat_map(|p| p.vertices.clone()).collect();
                seen.sort_unstable();
                let mut members = g.provenance()[t.tile].clone();
                members.sort_unstable();
                assert_eq!(seen, members, "{name} tile {}", t.tile);
                for p in &t.components {
                    if p.kind == ComponentKind::IsolatedWallVertex {
                        assert_eq!(p.vertices.len(), 1);
                    }
                }
            }
            if let Verdict::Traversing(k) = c.verdict {
                assert!(k <= g.min_ws(), "{name}: traversing({k}) above min_ws");
            }
        })
        .unwrap();
        assert!(cycles > 0 || name == "ladder3", "{name}");
    }
}

#[test]
fn counts_are_rotation_invariant() {
    for (name, seq) in corpus::graph_sequences() {
        let base = cyclize(&seq).unwrap();
        let counts = cycle_complete_counts(&base).unwrap();
        let totals = oracle_count(&base, 24).unwrap();
        for r in 1..seq.len() {
            let g = cyclize(&seq.rotated(r)).unwrap();
            assert_eq!(cycle_complete_counts(&g).unwrap(), counts, "{name} rotated {r}");
            let o = oracle_count(&g, 24).unwrap();
            assert_eq!((o.total, &o.by_k), (totals.total, &totals.by_k), "{name} rotated {r}");
        }
    }
}

#[test]
fn wall_size_four() {
    let g = cyclize(&corpus::quad3()).unwrap();
    let oracle = oracle_count(&g, 24).unwrap();
    for k in 1..=4 {
        assert_eq!(thc_cycle_complete(&g, k).unwrap(), oracle.count(k), "k={k}");
    }
    for k in 1..=3 {
        assert_eq!(thc_paper(&g, k).unwrap().quotient(), Some(oracle.count(k)), "k={k}");
    }
    // every tile matrix at k = 4 is all ones, so the product is 576 J
    assert_eq!(oracle.count(4), BigUint::from(3456u32));
    let paper = thc_paper(&g, 4).unwrap();
    assert_eq!(paper.sum, BigUint::from(41472u32));
    assert!(paper.divisible);
    assert_eq!(paper.quotient().unwrap(), BigUint::from(1728u32));
}

#[test]
fn shift_sum_need_not_be_divisible() {
    let g = cyclize(&corpus::skew3()).unwrap();
    let oracle = oracle_count(&g, 24).unwrap();
    for k in 1..=4 {
        assert_eq!(thc_cycle_complete(&g, k).unwrap(), oracle.count(k), "k={k}");
    }
    assert_eq!(oracle.count(4), BigUint::from(1u32));
    let paper = thc_paper(&g, 4).unwrap();
    assert_eq!(paper.sum, BigUint::from(8u32));
    assert!(!paper.divisible);
    assert_eq!(paper.to_string(), "1/3");
}
