//! Deterministic DOT serialisation of functional graphs and pretail trees.
//!
//! Node ids are coordinates joined by '_' (e.g. `4_0`), labels the coordinate
//! tuple `(4,0)`; every point contributes the single directed edge x -> Mx.
//! Nodes and edges are emitted in lexicographic coordinate order.

use std::fmt::Write;

use crate::census::FunctionalGraph;
use crate::pretail::PretailTree;

fn node_id(coords: &[u64]) -> String {
    coords
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join("_")
}

fn node_label(coords: &[u64]) -> String {
    format!(
        "({})",
        coords
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )
}

/// Walks the lattice points in lexicographic coordinate order without
/// materialising them all: an odometer over the coordinates, most
/// significant first.
fn for_each_point_lex(d: usize, n: u64, mut visit: impl FnMut(&[u64])) {
    let mut coords = vec![0u64; d];
    loop {
        visit(&coords);
        // increment the last coordinate, carrying leftwards
        let mut pos = d;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            coords[pos] += 1;
            if coords[pos] < n {
                break;
            }
            coords[pos] = 0;
        }
    }
}

/// DOT text of the full graph x -> Mx on (Z/nZ)^d.
pub fn functional_graph_dot(graph: &FunctionalGraph) -> String {
    let (d, n) = (graph.spec().d(), graph.spec().n());
    let mut out = String::from("digraph functional_graph {\n");
    for_each_point_lex(d, n, |p| {
        writeln!(out, "  \"{}\" [label=\"{}\"];", node_id(p), node_label(p)).unwrap();
    });
    for_each_point_lex(d, n, |p| {
        let succ = graph.point(graph.successor(graph.index_of(p)));
        writeln!(out, "  \"{}\" -> \"{}\";", node_id(p), node_id(&succ)).unwrap();
    });
    out.push_str("}\n");
    out
}

/// DOT text of the pretail tree at 0, edges toward the root; the root keeps
/// its loop 0 -> 0, which marks it as the periodic point of the tree.
pub fn pretail_tree_dot(tree: &PretailTree) -> String {
    let mut order: Vec<usize> = (0..tree.len()).collect();
    order.sort_by(|&a, &b| tree.points()[a].cmp(&tree.points()[b]));
    let mut out = String::from("digraph pretail_tree {\n");
    for &i in &order {
        let p = &tree.points()[i];
        writeln!(out, "  \"{}\" [label=\"{}\"];", node_id(p), node_label(p)).unwrap();
    }
    for &i in &order {
        let p = &tree.points()[i];
        let target = match tree.parent(i) {
            Some(j) => &tree.points()[j],
            None => p, // root loop
        };
        writeln!(out, "  \"{}\" -> \"{}\";", node_id(p), node_id(target)).unwrap();
    }
    out.push_str("}\n");
    out
}
