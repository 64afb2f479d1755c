//! Gadget weights by exhaustive and exact solving.

use std::collections::{BTreeMap, BTreeSet};
use xor1::gadgets::{
    build_composite_row, build_copy, build_crossing, build_xor1_chain, build_xor1_unit, stitch_rows,
    GadgetGraph, Role, RowPattern,
};
use xor1::layout::{assemble_rows, pattern_variables};
use xor1::model::VarId;
use xor1::mwis::{brute_force, degeneracy_probe, solve_exact, SolveOptions, WeightedGraph};
use num_rational::Rational64;

fn int(x: i64) -> Rational64 {
    Rational64::from_integer(x)
}

fn pat(s: &str) -> RowPattern {
    RowPattern::parse(s).unwrap()
}

fn opt_vertices(g: &GadgetGraph) -> Vec<usize> {
    g.vertices.iter().filter(|v| v.role == Role::Optimization).map(|v| v.id).collect()
}

fn best(g: &WeightedGraph, forced: Vec<(usize, bool)>) -> Rational64 {
    solve_exact(g, &SolveOptions::forcing(forced)).unwrap().total_weight
}

/// Every independent set of `g` with non-zero weight, keyed by weight.
fn nonzero_independent_sets(g: &WeightedGraph) -> BTreeMap<Rational64, BTreeSet<Vec<bool>>> {
    let n = g.len();
    let mut out: BTreeMap<Rational64, BTreeSet<Vec<bool>>> = BTreeMap::new();
    for mask in 1u32..(1 << n) {
        let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        if g.is_independent(&bits) {
            out.entry(g.total(&bits)).or_default().insert(bits);
        }
    }
    out
}

#[test]
fn unit_cell_configuration_table() {
    let unit = build_xor1_unit(2).unwrap();
    let g = unit.weighted_graph();
    let tags = ["x1", "x2", "a1", "a2", "a3", "a4"];
    let ids: Vec<usize> = tags.iter().map(|t| unit.find_tag(t)[0]).collect();
    let config = |x: [u8; 2], a: [u8; 4]| -> Vec<bool> {
        let mut bits = vec![false; g.len()];
        for (k, &b) in x.iter().chain(a.iter()).enumerate() {
            bits[ids[k]] = b == 1;
        }
        bits
    };
    let one_hot = [[1, 0], [0, 1]];
    let mut want: BTreeMap<Rational64, BTreeSet<Vec<bool>>> = BTreeMap::new();
    for a in [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]] {
        want.entry(int(2)).or_default().insert(config([0, 0], a));
    }
    for a in [[1, 0, 0, 1], [0, 1, 0, 1], [1, 0, 1, 0]] {
        want.entry(int(4)).or_default().insert(config([0, 0], a));
    }
    for x in one_hot {
        want.entry(int(1)).or_default().insert(config(x, [0, 0, 0, 0]));
        for a in [[1, 0, 0, 0], [0, 0, 0, 1]] {
            want.entry(int(3)).or_default().insert(config(x, a));
        }
        want.entry(int(5)).or_default().insert(config(x, [1, 0, 0, 1]));
    }
    assert_eq!(nonzero_independent_sets(&g), want);
    let sol = brute_force(&g).unwrap();
    assert_eq!(sol.total_weight, int(5));
}

#[test]
fn chain_lemma() {
    for n in 2..=8usize {
        let chain = build_xor1_chain(n);
        let g = chain.weighted_graph();
        let opt = opt_vertices(&chain);
        assert_eq!(opt.len(), n);
        let w = int(4 * n.div_ceil(2) as i64 + 1);
        let sol = solve_exact(&g, &SolveOptions::default()).unwrap();
        assert_eq!(sol.total_weight, w, "n = {n}");
        assert_eq!(brute_force(&g).unwrap().total_weight, w);
        assert_eq!(opt.iter().filter(|&&v| sol.contains(v)).count(), 1);
        for (i, &a) in opt.iter().enumerate() {
            assert_eq!(best(&g, vec![(a, true)]), w, "n = {n}, single {i}");
            for &b in &opt[i + 1..] {
                let two = solve_exact(&g, &SolveOptions::forcing(vec![(a, true), (b, true)]));
                if let Ok(s) = two {
                    assert!(s.total_weight < w, "n = {n}");
                }
            }
        }
        let patterns = degeneracy_probe(&g, &opt, 64, &SolveOptions::default()).unwrap();
        assert_eq!(patterns.len(), n);
        assert!(patterns.iter().all(|p| p.iter().filter(|&&b| b).count() == 1));
    }
}

#[test]
fn template_edges_are_king_adjacency() {
    let mut graphs = vec![build_xor1_unit(1).unwrap(), build_xor1_unit(2).unwrap(), build_copy(), build_crossing()];
    for s in ["11", "10 P", "01 p", "11 01 10 P", "00 11 p"] {
        let p = pat(s);
        let bindings: Vec<Option<VarId>> = (0..p.slots()).map(|i| Some(VarId(i))).collect();
        graphs.push(build_composite_row(&p, &bindings).unwrap());
    }
    let rows = [("Y1".to_string(), pat("11 10 P")), ("Y2".to_string(), pat("01 11 p")), ("Y3".to_string(), pat("10 P"))];
    graphs.push(assemble_rows(&rows, &pattern_variables(&rows)).unwrap().graph);
    for g in &graphs {
        assert_eq!(g.edge_set(), g.king_edges());
        assert!(g.max_degree() <= 5);
        assert!(g.max_weight() <= 6);
        let ids: BTreeSet<(i32, i32)> = g.vertices.iter().map(|v| v.pos).collect();
        assert_eq!(ids.len(), g.len(), "no two atoms share a site");
    }
}

fn bare(s: &str) -> GadgetGraph {
    let p = pat(s);
    let b: Vec<Option<VarId>> = (0..p.slots()).map(|i| Some(VarId(i))).collect();
    build_composite_row(&p, &b).unwrap()
}

#[test]
fn single_composite() {
    let row = bare("11");
    assert_eq!(row.len(), 36);
    let g = row.weighted_graph();
    let opt = opt_vertices(&row);
    assert_eq!(best(&g, vec![]), int(54));
    assert_eq!(best(&g, vec![(opt[0], true)]), int(54));
    assert_eq!(best(&g, vec![(opt[1], true)]), int(54));
    assert!(best(&g, vec![(opt[0], false), (opt[1], false)]) < int(54));
}

#[test]
fn two_composites() {
    let two = bare("11 11");
    let g = two.weighted_graph();
    let opt = opt_vertices(&two);
    assert_eq!(opt.len(), 4);
    assert_eq!(best(&g, vec![]), int(54 + 53));
    for &active in &opt[..2] {
        let mut forced = vec![(active, true)];
        forced.extend(opt[2..].iter().map(|&v| (v, false)));
        assert_eq!(best(&g, forced), int(54 + 53));
    }
    for &a in &opt[..2] {
        for &b in &opt[2..] {
            assert_eq!(best(&g, vec![(a, true), (b, true)]), int(54 + 52));
        }
    }
}

#[test]
fn stitched_example_degenerate_optima() {
    let rows = [
        ("Y1".to_string(), pat("11 00")),
        ("Y2".to_string(), pat("11 10")),
        ("Y3".to_string(), pat("00 11")),
    ];
    let layout = assemble_rows(&rows, &pattern_variables(&rows)).unwrap();
    let g = layout.weighted_graph();
    let read: Vec<usize> = (0..4).map(|v| layout.readout(VarId(v)).unwrap()).collect();
    let top = best(&g, vec![]);
    let patterns = degeneracy_probe(&g, &read, 16, &SolveOptions::default()).unwrap();
    assert_eq!(
        patterns,
        vec![vec![false, true, false, true], vec![true, false, false, true]]
    );
    let all = |v: usize| layout.bindings[&VarId(v)].iter().map(|&id| (id, true)).collect::<Vec<_>>();
    for x in [0, 1] {
        let mut forced = all(2);
        forced.extend(all(x));
        assert_eq!(best(&g, forced), top - int(2));
    }
}

#[test]
fn stitching_keeps_the_leg_weight() {
    let a = bare("11");
    let b = bare("11");
    let s = stitch_rows(&[a.clone(), b.clone()]).unwrap();
    assert_eq!(s.len(), a.len() + b.len() - 2);
    assert!(s.vertices.iter().filter(|v| v.band == 0 && v.pos.0 == 8).all(|v| v.weight == 2));
}
